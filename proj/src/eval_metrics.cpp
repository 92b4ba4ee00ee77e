#include "forge/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "forge/error.hpp"
#include "forge/simd/kernels.hpp"

namespace forge::eval {

void validate(const TokenRecord& r) {
  if (!std::isfinite(r.logprob_of_ref) || r.logprob_of_ref > 0.0) {
    throw Error(ErrorKind::InvalidArgument,
                "sample " + r.sample_id + " position " + std::to_string(r.position) +
                    ": logprob_of_ref must be finite and <= 0");
  }
  std::vector<TokenId> ids = r.topk_ids;
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(ErrorKind::InvalidArgument,
                "sample " + r.sample_id + " position " + std::to_string(r.position) + ": duplicate topk_ids");
  }
}

double perplexity_from_logprobs(std::span<const double> logprobs) {
  if (logprobs.empty()) throw Error(ErrorKind::EmptyEval, "perplexity over no tokens");
  const double mean = simd::sum_f64(logprobs) / static_cast<double>(logprobs.size());
  return std::exp(-mean);
}

namespace {

std::vector<double> logprobs_of(std::span<const TokenRecord> records) {
  std::vector<double> lp;
  lp.reserve(records.size());
  for (const TokenRecord& r : records) lp.push_back(r.logprob_of_ref);
  return lp;
}

}  // namespace

double perplexity(std::span<const TokenRecord> records) {
  return perplexity_from_logprobs(logprobs_of(records));
}

double mean_nll(std::span<const TokenRecord> records) {
  if (records.empty()) throw Error(ErrorKind::EmptyEval, "mean loss over no tokens");
  const std::vector<double> lp = logprobs_of(records);
  return -simd::sum_f64(lp) / static_cast<double>(lp.size());
}

double weighted_ppl(std::span<const std::pair<double, std::uint64_t>> per_category, PplPooling mode) {
  if (per_category.empty()) throw Error(ErrorKind::EmptyEval, "weighted perplexity over no categories");
  double num = 0.0;
  double den = 0.0;
  for (const auto& [ppl, count] : per_category) {
    if (count == 0 || !(ppl > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "category ppl and token count must be positive");
    }
    const auto w = static_cast<double>(count);
    num += w * (mode == PplPooling::WeightedArithmetic ? ppl : std::log(ppl));
    den += w;
  }
  return mode == PplPooling::WeightedArithmetic ? num / den : std::exp(num / den);
}

double delta_ppl(double base, double adapted) {
  if (!(base > 0.0)) throw Error(ErrorKind::InvalidArgument, "base perplexity must be positive");
  return (base - adapted) / base * 100.0;
}

std::size_t split_point(std::size_t n, double frac) {
  if (n < 2) throw Error(ErrorKind::TooShort, "teacher-forced split needs at least 2 tokens");
  if (!(frac > 0.0 && frac < 1.0)) throw Error(ErrorKind::InvalidArgument, "split fraction must be in (0, 1)");
  const auto cut = static_cast<std::size_t>(std::floor(frac * static_cast<double>(n)));
  return std::clamp<std::size_t>(cut, 1, n - 1);
}

double topk_accuracy(std::span<const TokenRecord> records, std::size_t k) {
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (records.empty()) throw Error(ErrorKind::EmptyEval, "top-k accuracy over no tokens");
  std::size_t hits = 0;
  for (const TokenRecord& r : records) {
    if (r.topk_ids.size() < k) {
      throw Error(ErrorKind::InvalidArgument, "sample " + r.sample_id + " position " +
                                                  std::to_string(r.position) + ": fewer than k candidates");
    }
    hits += std::find(r.topk_ids.begin(), r.topk_ids.begin() + static_cast<std::ptrdiff_t>(k),
                      r.ref_token_id) != r.topk_ids.begin() + static_cast<std::ptrdiff_t>(k);
  }
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double brevity_penalty(std::size_t candidate_len, std::size_t reference_len) {
  if (candidate_len == 0) return 0.0;
  if (candidate_len >= reference_len) return 1.0;
  return std::exp(1.0 - static_cast<double>(reference_len) / static_cast<double>(candidate_len));
}

namespace {

using NgramCounts = std::map<std::span<const TokenId>, std::size_t,
                             decltype([](std::span<const TokenId> a, std::span<const TokenId> b) {
                               return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
                             })>;

NgramCounts ngrams(std::span<const TokenId> s, std::size_t n) {
  NgramCounts out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++out[s.subspan(i, n)];
  return out;
}

}  // namespace

double bleu4(std::span<const TokenId> candidate, std::span<const TokenId> reference, BleuSmoothing smoothing) {
  if (candidate.empty() || reference.empty()) {
    throw Error(ErrorKind::InvalidArgument, "BLEU needs non-empty candidate and reference");
  }
  double log_sum = 0.0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    if (candidate.size() < n) break;
    const NgramCounts cand = ngrams(candidate, n);
    const NgramCounts ref = ngrams(reference, n);
    std::size_t matches = 0;
    for (const auto& [gram, c] : cand) {
      const auto it = ref.find(gram);
      if (it != ref.end()) matches += std::min(c, it->second);
    }
    const std::size_t total = candidate.size() - n + 1;
    double p;
    if (smoothing == BleuSmoothing::AddOne && n > 1) {
      p = (static_cast<double>(matches) + 1.0) / (static_cast<double>(total) + 1.0);
    } else {
      p = static_cast<double>(matches) / static_cast<double>(total);
    }
    if (p == 0.0) return 0.0;
    log_sum += std::log(p);
    ++orders;
  }
  return brevity_penalty(candidate.size(), reference.size()) * std::exp(log_sum / static_cast<double>(orders));
}

double gen_token_accuracy(const GenPair& pair) {
  if (pair.reference_tokens.empty()) {
    throw Error(ErrorKind::InvalidArgument, "sample " + pair.sample_id + ": empty reference");
  }
  const std::size_t n = std::min(pair.reference_tokens.size(), pair.generated_tokens.size());
  std::size_t same = 0;
  for (std::size_t i = 0; i < n; ++i) same += pair.reference_tokens[i] == pair.generated_tokens[i];
  return static_cast<double>(same) / static_cast<double>(pair.reference_tokens.size());
}

std::vector<CategoryReport> category_reports(std::span<const TokenRecord> records) {
  std::map<std::string, std::vector<TokenRecord>> by_cat;
  for (const TokenRecord& r : records) by_cat[r.category].push_back(r);
  std::vector<CategoryReport> out;
  for (const auto& [cat, recs] : by_cat) {
    CategoryReport rep;
    rep.category = cat;
    rep.token_count = recs.size();
    rep.mean_loss = mean_nll(recs);
    rep.ppl = std::exp(rep.mean_loss);
    rep.top1 = topk_accuracy(recs, 1);
    rep.top5 = topk_accuracy(recs, 5);
    out.push_back(std::move(rep));
  }
  return out;
}

std::vector<WinnerRow> winner_table(const ScoreMatrix& scores) {
  std::vector<WinnerRow> out;
  if (scores.empty()) return out;
  std::set<std::string> categories;
  for (const auto& [cat, _] : scores.begin()->second) categories.insert(cat);
  for (const auto& [model, row] : scores) {
    std::set<std::string> mine;
    for (const auto& [cat, _] : row) mine.insert(cat);
    if (mine != categories) {
      throw Error(ErrorKind::InvalidArgument, "model '" + model + "' covers a different category set");
    }
  }
  for (const std::string& cat : categories) {
    WinnerRow w;
    w.category = cat;
    bool first = true;
    for (const auto& [model, row] : scores) {
      const double v = row.at(cat);
      if (first || v > w.best) {
        w.best = v;
        w.winners = {model};
        first = false;
      } else if (v == w.best) {
        w.winners.push_back(model);
      }
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::size_t wins_for(const std::vector<WinnerRow>& table, const std::string& model) {
  return static_cast<std::size_t>(std::count_if(table.begin(), table.end(), [&](const WinnerRow& w) {
    return std::find(w.winners.begin(), w.winners.end(), model) != w.winners.end();
  }));
}

}  // namespace forge::eval
