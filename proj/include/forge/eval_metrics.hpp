#pragma once
// Metrics over model outputs recorded elsewhere: per-token log-probabilities
// and top-k candidates, and (reference, generated) token sequences. Nothing
// here runs a model.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace forge::eval {

using TokenId = std::int64_t;

struct TokenRecord {
  std::string sample_id;
  std::uint64_t position = 0;
  TokenId ref_token_id = 0;
  double logprob_of_ref = 0.0;  // <= 0
  std::vector<TokenId> topk_ids;
  std::string category = "general";
};

struct GenPair {
  std::string sample_id;
  std::string category = "general";
  std::vector<TokenId> reference_tokens;
  std::vector<TokenId> generated_tokens;
  std::string model;
};

// Throws Error{InvalidArgument} for a positive or non-finite logprob, or
// duplicate top-k ids.
void validate(const TokenRecord& r);

// exp(-mean logprob). Throws Error{EmptyEval} on empty input.
double perplexity(std::span<const TokenRecord> records);
double perplexity_from_logprobs(std::span<const double> logprobs);
double mean_nll(std::span<const TokenRecord> records);

enum class PplPooling {
  WeightedArithmetic,  // sum w_i * ppl_i / sum w_i
  PooledNll,           // exp(sum w_i * ln ppl_i / sum w_i)
};

// (ppl, token_count) per category. Throws Error{EmptyEval} on empty input and
// Error{InvalidArgument} for non-positive counts or ppl.
double weighted_ppl(std::span<const std::pair<double, std::uint64_t>> per_category,
                    PplPooling mode = PplPooling::WeightedArithmetic);

// (base - adapted) / base * 100
double delta_ppl(double base, double adapted);

// Prefix length floor(frac * n), clamped to [1, n - 1]. Throws Error{TooShort}
// for n < 2 and Error{InvalidArgument} for frac outside (0, 1).
std::size_t split_point(std::size_t n, double frac = 0.75);

template <class T>
std::pair<std::vector<T>, std::vector<T>> split_teacher_forced(const std::vector<T>& tokens,
                                                               double frac = 0.75) {
  const std::size_t cut = split_point(tokens.size(), frac);
  return {std::vector<T>(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(cut)),
          std::vector<T>(tokens.begin() + static_cast<std::ptrdiff_t>(cut), tokens.end())};
}

// Fraction of records whose reference id is among the first k candidates.
// Throws Error{EmptyEval} on empty input, Error{InvalidArgument} when a record
// carries fewer than k candidates or k == 0.
double topk_accuracy(std::span<const TokenRecord> records, std::size_t k);

enum class BleuSmoothing {
  None,    // BP * exp(sum 1/N log p_n); any zero p_n gives 0
  AddOne,  // orders 2..4 use (matches + 1) / (total + 1)
};

// BLEU-4 against a single reference. Orders with no candidate n-grams
// (candidate shorter than n) are left out of the geometric mean, so
// bleu4(x, x) == 1 for any non-empty x. Throws Error{InvalidArgument} when
// either side is empty.
double bleu4(std::span<const TokenId> candidate, std::span<const TokenId> reference,
             BleuSmoothing smoothing = BleuSmoothing::None);

double brevity_penalty(std::size_t candidate_len, std::size_t reference_len);

// Position-aligned exact matches over the reference length.
double gen_token_accuracy(const GenPair& pair);

struct CategoryReport {
  std::string category;
  std::uint64_t token_count = 0;
  double ppl = 0.0;
  double top1 = 0.0;
  double top5 = 0.0;
  double mean_loss = 0.0;
};

// One report per category, sorted by category name.
std::vector<CategoryReport> category_reports(std::span<const TokenRecord> records);

using ScoreMatrix = std::map<std::string, std::map<std::string, double>>;  // model -> category -> score

struct WinnerRow {
  std::string category;
  std::vector<std::string> winners;  // several on an exact tie, sorted
  double best = 0.0;
};

// Throws Error{InvalidArgument} when models cover different categories.
std::vector<WinnerRow> winner_table(const ScoreMatrix& scores);

// Categories won by `model`, joint wins included.
std::size_t wins_for(const std::vector<WinnerRow>& table, const std::string& model);

}  // namespace forge::eval
