#include <doctest.h>

#include <string>

#include "forge/error.hpp"
#include "forge/mixture_assemble.hpp"
#include "forge/quality_filter.hpp"
#include "helpers.hpp"

using namespace forge;
using testing::error_kind_of;

TEST_CASE("clean examples") {
  CHECK(clean("a\t b").text == "a     b");
  CHECK(clean("xxxxxxxxxxxx").text == "xxx");
  CHECK(clean("xxxxxxxxx").text == "xxxxxxxxx");  // 9 is below the run threshold
  CHECK(clean("code\n----------\nmore").text == "code\nmore");
  CHECK(clean("a = b ========= c").text == "a = b ========= c");  // 9 is below the separator threshold
  CHECK(clean("code\n=========\nmore").text == "code\nmore");    // but a pure rule line is art
  CHECK(clean("a\r\nb").text == "a\nb");
}

TEST_CASE("clean keeps indentation and drops art and empty comments") {
  CHECK(clean("            int x;").text == "            int x;");
  CHECK(clean("int a;\n/* */\nint b;\n").text == "int a;\nint b;\n");
  CHECK(clean("int a; /* ---- */ int b;\n").text == "int a;  int b;\n");
  CHECK(clean("int a;\n//\nint b;\n").text == "int a;\nint b;\n");
  CHECK(clean("int a; // keep me\n").text == "int a; // keep me\n");
  CHECK(clean("x\n\xE2\x94\x8C\xE2\x94\x80\xE2\x94\x80\xE2\x94\x90\ny").text == "x\ny");
  CHECK(clean("/*\n * note\n */\n").text == "/*\n * note\n */\n");
}

TEST_CASE("clean report") {
  const CleanResult r = clean("ab\tc");
  CHECK(r.report.original_chars == 7);
  CHECK(r.report.removed_chars == 0);
  const CleanResult s = clean("xxxxxxxxxxxx");
  CHECK(s.report.original_chars == 12);
  CHECK(s.report.removed_chars == 9);
  CHECK(s.report.garbage_ratio == doctest::Approx(0.75));
}

TEST_CASE("accept") {
  SUBCASE("garbage ratio above 70%") {
    const auto d = accept(std::string(29, 'a'), 71, 100);
    CHECK_FALSE(d.accepted);
    CHECK(d.reject_reason == RejectReason::GarbageRatio);
    CHECK(accept("int x;", 70, 100).accepted);  // exactly at the threshold
  }
  SUBCASE("code indicator") {
    CHECK(accept("#include <x.h>", 0, 14).accepted);
    CHECK(contains_code_indicator("x = y; return x;", CleanPolicy{}.code_indicators));
    CHECK_FALSE(contains_code_indicator("printf interest format", CleanPolicy{}.code_indicators));
  }
  SUBCASE("prose") {
    std::string words;
    for (int i = 0; i < 25; ++i) words += "word ";
    CHECK(accept(words, 0, words.size()).accepted);
    std::string few;
    for (int i = 0; i < 19; ++i) few += "word ";
    const auto d = accept(few, 0, few.size());
    CHECK_FALSE(d.accepted);
    CHECK(d.reject_reason == RejectReason::NoCodeNoProse);
    CHECK(count_prose_words("12 34 abc --- d3") == 2);
  }
  SUBCASE("empty after cleaning") {
    const auto d = accept("   \n", 0, 4);
    CHECK(d.reject_reason == RejectReason::TooShort);
  }
  SUBCASE("inconsistent lengths") {
    CHECK(error_kind_of([] { (void)accept("abcdef", 0, 3); }) == ErrorKind::InvalidArgument);
  }
  SUBCASE("clean_and_judge") {
    const auto r = clean_and_judge("----------\n==========\n**********\nx");
    CHECK_FALSE(r.report.accepted);
    CHECK(r.report.reject_reason == RejectReason::GarbageRatio);
  }
}

TEST_CASE("clean policy validation") {
  CleanPolicy p;
  p.repeat_reduce_to = 10;
  CHECK(error_kind_of([&] { (void)clean("x", p); }) == ErrorKind::InvalidArgument);
  p = {};
  p.garbage_reject_threshold = 0;
  CHECK(error_kind_of([&] { (void)clean("x", p); }) == ErrorKind::InvalidArgument);
}

// ---- mixture_assemble -------------------------------------------------------

TEST_CASE("truncate_sample") {
  const AssemblyPolicy policy;  // 2048 tokens, 4 chars per token
  SUBCASE("under budget") {
    const std::string t(4000, 'a');  // 1000 tokens
    const auto r = truncate_sample(t, policy);
    CHECK(r.kept == t + std::string(kEndOfText));
    CHECK_FALSE(r.overflow.has_value());
    CHECK_FALSE(r.hard_cut);
  }
  SUBCASE("cut at the last newline inside the budget") {
    std::string t(12000, 'a');  // 3000 tokens
    t[2040 * 4] = '\n';
    const auto r = truncate_sample(t, policy);
    CHECK(r.kept == t.substr(0, 2040 * 4 + 1) + std::string(kEndOfText));
    REQUIRE(r.overflow.has_value());
    CHECK(*r.overflow == t.substr(2040 * 4 + 1));
    CHECK_FALSE(r.hard_cut);
  }
  SUBCASE("newline preferred over a later period") {
    std::string t(12000, 'a');
    t[100] = '\n';
    t[5000] = '.';
    const auto r = truncate_sample(t, policy);
    CHECK(r.kept.size() == 101 + kEndOfText.size());
  }
  SUBCASE("unbroken blob is hard cut with EOS in the last slot") {
    const std::string t(12000, 'a');
    const auto r = truncate_sample(t, policy);
    CHECK(r.hard_cut);
    const std::string content = r.kept.substr(0, r.kept.size() - kEndOfText.size());
    CHECK(policy.counter.count(content) == 2047);
    CHECK(content.size() + r.overflow->size() == t.size());
  }
  SUBCASE("exactly max_tokens - 1 fits") {
    const std::string t(2047 * 4, 'a');
    CHECK_FALSE(truncate_sample(t, policy).overflow.has_value());
    CHECK(truncate_sample(t + "a", policy).overflow.has_value());
  }
  SUBCASE("zero window") {
    AssemblyPolicy p;
    p.max_tokens = 0;
    CHECK(error_kind_of([&] { (void)truncate_sample("x", p); }) == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("pack examples") {
  SUBCASE("one full-window sample, greedy") {
    const auto r = pack(std::vector<PackItem>{{0, 2048}}, 2048, PackMode::Greedy);
    REQUIRE(r.windows.size() == 1);
    CHECK(r.windows[0].fill_fraction() == 1.0);
    CHECK(r.windows[0].elided_eos == 1);
  }
  SUBCASE("one full-window sample, stream: its EOS spills over") {
    const auto r = pack(std::vector<PackItem>{{0, 2048}}, 2048, PackMode::Stream);
    REQUIRE(r.windows.size() == 2);
    CHECK(r.windows[0].fill_fraction() == 1.0);
    CHECK(r.windows[1].continued_sample_idx == 0u);
    CHECK(r.windows[1].continued_tokens == 1);
  }
  SUBCASE("two 1000-token samples share a window") {
    for (PackMode m : {PackMode::Stream, PackMode::Greedy}) {
      const auto r = pack(std::vector<PackItem>{{0, 1000}, {1, 1000}}, 2048, m);
      REQUIRE(r.windows.size() == 1);
      CHECK(r.windows[0].used_tokens == 2002);
      CHECK(r.windows[0].fill_fraction() == doctest::Approx(0.9775).epsilon(1e-4));
      CHECK(r.windows[0].member_sample_idxs == std::vector<std::uint64_t>{0, 1});
    }
  }
  SUBCASE("greedy opens a new window when a sample does not fit") {
    const auto r = pack(std::vector<PackItem>{{0, 1500}, {1, 1000}}, 2048, PackMode::Greedy);
    REQUIRE(r.windows.size() == 2);
    CHECK(r.windows[1].member_sample_idxs == std::vector<std::uint64_t>{1});
  }
  SUBCASE("stream continues a sample into the next window") {
    const auto r = pack(std::vector<PackItem>{{0, 1500}, {1, 1000}}, 2048, PackMode::Stream);
    REQUIRE(r.windows.size() == 2);
    CHECK(r.windows[0].used_tokens == 2048);
    CHECK(r.windows[1].continued_sample_idx == 1u);
    CHECK(r.windows[1].continued_tokens == 1501 + 1001 - 2048);
    CHECK(r.windows[1].member_sample_idxs.empty());
  }
  SUBCASE("oversize sample") {
    CHECK(error_kind_of([] { (void)pack(std::vector<PackItem>{{7, 2049}}, 2048); }) == ErrorKind::OversizeSample);
  }
  SUBCASE("empty input") {
    const auto r = pack(std::vector<PackItem>{}, 2048);
    CHECK(r.windows.empty());
    CHECK(r.fill_rate() == 0.0);
  }
}

TEST_CASE("corpus_stats") {
  const auto s = corpus_stats(std::vector<std::uint64_t>{100, 200, 300});
  CHECK(s.total_tokens == 600);
  CHECK(s.mean_sample_tokens == 200.0);
  CHECK(s.sample_count == 3);
  const auto one = corpus_stats(std::vector<std::uint64_t>{777});
  CHECK(one.mean_sample_tokens == 777.0);
  CHECK(error_kind_of([] { (void)corpus_stats(std::vector<std::uint64_t>{}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("pack samples through a counter and render text") {
  std::vector<Sample> samples{{.sample_idx = 0, .text = "aaaa"}, {.sample_idx = 1, .text = "bbbbbbbb<|endoftext|>"}};
  const auto r = pack(samples, 16, TokenCounter::char_heuristic(4.0));
  REQUIRE(r.windows.size() == 1);
  CHECK(r.total_sample_tokens == 3);  // the trailing literal is not content
  CHECK(render_window_text(r.windows[0], samples) == "aaaa<|endoftext|>bbbbbbbb<|endoftext|>");
}
