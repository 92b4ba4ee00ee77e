#include <doctest.h>

#include <cmath>
#include <fstream>

#include "forge/error.hpp"
#include "forge/eval_metrics.hpp"
#include "forge/records.hpp"
#include "helpers.hpp"
#include "oracles/oracles.hpp"

using namespace forge;
using namespace forge::eval;
using testing::error_kind_of;

namespace {

TokenRecord rec(double lp, std::vector<TokenId> topk = {}, TokenId ref = 7, std::string cat = "general") {
  return TokenRecord{.sample_id = "s", .position = 0, .ref_token_id = ref, .logprob_of_ref = lp,
                     .topk_ids = std::move(topk), .category = std::move(cat)};
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

}  // namespace

TEST_CASE("perplexity closed forms") {
  const std::vector<TokenRecord> half(5, rec(-std::log(2.0)));
  CHECK(perplexity(half) == doctest::Approx(2.0));
  const std::vector<TokenRecord> perfect(3, rec(0.0));
  CHECK(perplexity(perfect) == 1.0);
  const std::vector<TokenRecord> mixed{rec(-std::log(2.0)), rec(-std::log(8.0))};
  CHECK(perplexity(mixed) == doctest::Approx(4.0));
  CHECK(std::log(perplexity(mixed)) == doctest::Approx(mean_nll(mixed)));
  CHECK(error_kind_of([] { (void)perplexity(std::span<const TokenRecord>{}); }) == ErrorKind::EmptyEval);
}

TEST_CASE("record validation") {
  CHECK_NOTHROW(validate(rec(-0.5, {1, 2, 3})));
  CHECK(error_kind_of([] { validate(rec(0.1)); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind_of([] { validate(rec(std::nan(""))); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind_of([] { validate(rec(-1, {1, 1})); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("weighted_ppl") {
  const std::vector<std::pair<double, std::uint64_t>> one{{3.5, 10}};
  CHECK(weighted_ppl(one) == 3.5);
  CHECK(weighted_ppl(one, PplPooling::PooledNll) == doctest::Approx(3.5));
  const std::vector<std::pair<double, std::uint64_t>> two{{2.0, 100}, {4.0, 100}};
  CHECK(weighted_ppl(two) == 3.0);
  CHECK(weighted_ppl(two, PplPooling::PooledNll) == doctest::Approx(std::sqrt(8.0)));
  CHECK(error_kind_of([] { (void)weighted_ppl({}); }) == ErrorKind::EmptyEval);
  const std::vector<std::pair<double, std::uint64_t>> zero{{2.0, 0}};
  CHECK(error_kind_of([&] { (void)weighted_ppl(zero); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("delta_ppl") {
  CHECK(round1(delta_ppl(4.06, 1.20)) == 70.4);
  CHECK(round1(delta_ppl(3.92, 1.33)) == 66.1);
  CHECK(delta_ppl(2.5, 2.5) == 0.0);
  CHECK(error_kind_of([] { (void)delta_ppl(0, 1); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("teacher-forced split") {
  std::vector<int> hundred(100);
  auto [p, s] = split_teacher_forced(hundred);
  CHECK(p.size() == 75);
  CHECK(s.size() == 25);
  CHECK(split_point(5) == 3);
  CHECK(split_point(2) == 1);
  CHECK(split_point(2, 0.01) == 1);
  CHECK(split_point(10, 0.99) == 9);
  CHECK(error_kind_of([] { (void)split_point(1); }) == ErrorKind::TooShort);
  CHECK(error_kind_of([] { (void)split_point(10, 1.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("topk_accuracy") {
  std::vector<TokenRecord> first(4, rec(-1, {7, 1, 2, 3, 4}));
  CHECK(topk_accuracy(first, 1) == 1.0);
  std::vector<TokenRecord> third(4, rec(-1, {1, 2, 7, 3, 4}));
  CHECK(topk_accuracy(third, 1) == 0.0);
  CHECK(topk_accuracy(third, 5) == 1.0);
  std::vector<TokenRecord> mixed;
  for (int i = 0; i < 10; ++i) mixed.push_back(rec(-1, i < 7 ? std::vector<TokenId>{7, 1} : std::vector<TokenId>{1, 2}));
  CHECK(topk_accuracy(mixed, 1) == doctest::Approx(0.7));
  CHECK(error_kind_of([&] { (void)topk_accuracy(mixed, 3); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind_of([&] { (void)topk_accuracy(mixed, 0); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind_of([] { (void)topk_accuracy(std::span<const TokenRecord>{}, 1); }) == ErrorKind::EmptyEval);
}

TEST_CASE("bleu4") {
  const std::vector<TokenId> ten{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(bleu4(ten, ten) == doctest::Approx(1.0));
  const std::vector<TokenId> ref{1, 2, 3, 4, 5};
  const std::vector<TokenId> cand{1, 2, 3, 4};
  CHECK(bleu4(cand, ref) == doctest::Approx(std::exp(-0.25)).epsilon(1e-12));
  CHECK(bleu4(cand, ref) == doctest::Approx(0.7788).epsilon(1e-4));
  const std::vector<TokenId> other{11, 12, 13, 14};
  CHECK(bleu4(other, ref) == 0.0);
  CHECK(bleu4(other, ref, BleuSmoothing::AddOne) == 0.0);  // unigram precision still zero

  const std::vector<TokenId> partial{1, 2, 9, 4, 5, 6};
  CHECK(bleu4(partial, ten) == 0.0);  // no matching 4-gram
  CHECK(bleu4(partial, ten, BleuSmoothing::AddOne) > 0.0);
  CHECK(bleu4(partial, ten) == doctest::Approx(oracle::bleu4(partial, ten)));

  CHECK(brevity_penalty(4, 5) == doctest::Approx(std::exp(-0.25)));
  CHECK(brevity_penalty(6, 5) == 1.0);
  CHECK(error_kind_of([&] { (void)bleu4(std::span<const TokenId>{}, ref); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("gen_token_accuracy") {
  GenPair p{.reference_tokens = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}};
  p.generated_tokens = p.reference_tokens;
  CHECK(gen_token_accuracy(p) == 1.0);
  p.generated_tokens.back() = 99;
  CHECK(gen_token_accuracy(p) == doctest::Approx(0.9));
  p.generated_tokens.clear();
  CHECK(gen_token_accuracy(p) == 0.0);
  p.generated_tokens = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};  // extra tokens do not help
  CHECK(gen_token_accuracy(p) == 1.0);
  p.reference_tokens.clear();
  CHECK(error_kind_of([&] { (void)gen_token_accuracy(p); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("category reports") {
  std::vector<TokenRecord> r{rec(-std::log(2.0), {7, 1, 2, 3, 4}, 7, "crypto"),
                             rec(-std::log(2.0), {1, 2, 3, 4, 5}, 7, "crypto"), rec(0.0, {7, 1, 2, 3, 4}, 7, "alpha")};
  const auto reps = category_reports(r);
  REQUIRE(reps.size() == 2);
  CHECK(reps[0].category == "alpha");
  CHECK(reps[1].category == "crypto");
  CHECK(reps[1].token_count == 2);
  CHECK(reps[1].ppl == doctest::Approx(2.0));
  CHECK(reps[1].top1 == 0.5);
}

TEST_CASE("winner table") {
  SUBCASE("single model wins everything") {
    const ScoreMatrix m{{"only", {{"a", 0.1}, {"b", 0.2}}}};
    const auto t = winner_table(m);
    CHECK(wins_for(t, "only") == 2);
  }
  SUBCASE("exact tie is joint") {
    const ScoreMatrix m{{"x", {{"a", 0.313}}}, {"y", {{"a", 0.313}}}, {"z", {{"a", 0.2}}}};
    const auto t = winner_table(m);
    REQUIRE(t.size() == 1);
    CHECK(t[0].winners == std::vector<std::string>{"x", "y"});
    CHECK(wins_for(t, "x") == 1);
    CHECK(wins_for(t, "z") == 0);
  }
  SUBCASE("mismatched categories") {
    const ScoreMatrix m{{"x", {{"a", 0.1}}}, {"y", {{"b", 0.1}}}};
    CHECK(error_kind_of([&] { (void)winner_table(m); }) == ErrorKind::InvalidArgument);
  }
  SUBCASE("fixture") {
    std::ifstream in(std::string(FORGE_FIXTURES_DIR) + "/category_accuracy.json");
    const auto m = records::score_matrix_from_json(records::Json::parse(in));
    const auto t = winner_table(m);
    CHECK(t.size() == 13);
    CHECK(wins_for(t, "spark") == 8);
    for (const auto& row : t) {
      if (row.category == "amd_gpu_registers") CHECK(row.winners.size() == 2);
    }
  }
}
