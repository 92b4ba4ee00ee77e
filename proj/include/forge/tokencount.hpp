#pragma once
// Pluggable token counting. Every stage that reasons about "tokens" goes
// through a TokenCounter, so the pipeline never depends on a real tokenizer.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>

namespace forge {

// Chunk budgeting and sequence assembly use different ratios.
inline constexpr double kChunkCharsPerToken = 3.5;
inline constexpr double kAssemblyCharsPerToken = 4.0;

struct CharHeuristic {
  double chars_per_token = kAssemblyCharsPerToken;
};

struct Whitespace {};

// Offline counts produced by a real tokenizer, keyed by sample_idx.
struct ExternalCounts {
  std::shared_ptr<const std::unordered_map<std::uint64_t, std::uint64_t>> counts;
};

class TokenCounter {
 public:
  using Strategy = std::variant<CharHeuristic, Whitespace, ExternalCounts>;

  TokenCounter() : strategy_(CharHeuristic{}) {}
  explicit TokenCounter(Strategy strategy);

  static TokenCounter char_heuristic(double chars_per_token);
  static TokenCounter whitespace();
  static TokenCounter external(std::unordered_map<std::uint64_t, std::uint64_t> counts);
  // Lines of `sample_idx<TAB>count`.
  static TokenCounter external_from_stream(std::istream& in);
  static TokenCounter external_from_file(const std::filesystem::path& path);
  // "char:3.5", "whitespace", "external:<path>"
  static TokenCounter parse(std::string_view spec);

  // `sample_idx` is only consulted by the external strategy; a missing entry
  // throws Error{MissingCount}.
  std::uint64_t count(std::string_view text, std::optional<std::uint64_t> sample_idx = {}) const;

  // Largest number of leading code points whose count is within `budget`.
  // For the external strategy the cut is proportional to the recorded count.
  std::size_t prefix_chars_within(std::string_view text, std::uint64_t budget,
                                  std::optional<std::uint64_t> sample_idx = {}) const;

  const Strategy& strategy() const { return strategy_; }
  std::string describe() const;

 private:
  Strategy strategy_;
};

std::uint64_t count_tokens(std::string_view text, const TokenCounter& counter);

}  // namespace forge
