#include "forge/tokencount.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge {
namespace {

// ceil(chars / cpt), snapping quotients that are integral up to rounding noise
// (7000 / 3.5 must be 2000, not 2001).
std::uint64_t ceil_div(std::size_t chars, double cpt) {
  const double q = static_cast<double>(chars) / cpt;
  const double r = std::round(q);
  if (std::abs(q - r) <= 1e-9 * std::max(1.0, q)) return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::ceil(q));
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint64_t lookup(const ExternalCounts& ext, std::optional<std::uint64_t> sample_idx) {
  if (!sample_idx) {
    throw Error(ErrorKind::MissingCount, "external token counts require a sample_idx");
  }
  const auto it = ext.counts->find(*sample_idx);
  if (it == ext.counts->end()) {
    throw Error(ErrorKind::MissingCount,
                "no external token count for sample_idx " + std::to_string(*sample_idx));
  }
  return it->second;
}

}  // namespace

TokenCounter::TokenCounter(Strategy strategy) : strategy_(std::move(strategy)) {
  if (const auto* ch = std::get_if<CharHeuristic>(&strategy_)) {
    if (!(ch->chars_per_token > 0.0) || !std::isfinite(ch->chars_per_token)) {
      throw Error(ErrorKind::InvalidArgument, "chars_per_token must be positive");
    }
  }
  if (const auto* ext = std::get_if<ExternalCounts>(&strategy_)) {
    if (!ext->counts) throw Error(ErrorKind::InvalidArgument, "external counts not loaded");
  }
}

TokenCounter TokenCounter::char_heuristic(double chars_per_token) {
  return TokenCounter(CharHeuristic{chars_per_token});
}

TokenCounter TokenCounter::whitespace() { return TokenCounter(Whitespace{}); }

TokenCounter TokenCounter::external(std::unordered_map<std::uint64_t, std::uint64_t> counts) {
  return TokenCounter(ExternalCounts{
      std::make_shared<const std::unordered_map<std::uint64_t, std::uint64_t>>(std::move(counts))});
}

TokenCounter TokenCounter::external_from_stream(std::istream& in) {
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view body = text::trim(line);
    if (body.empty()) continue;
    const auto tab = body.find('\t');
    std::uint64_t idx = 0;
    std::uint64_t n = 0;
    bool ok = tab != std::string_view::npos;
    if (ok) {
      const auto key = text::trim(body.substr(0, tab));
      const auto val = text::trim(body.substr(tab + 1));
      ok = std::from_chars(key.data(), key.data() + key.size(), idx).ec == std::errc{} &&
           std::from_chars(val.data(), val.data() + val.size(), n).ec == std::errc{};
    }
    if (!ok) {
      throw Error(ErrorKind::MalformedRecord,
                  "count file line " + std::to_string(lineno) + ": expected sample_idx<TAB>count");
    }
    counts[idx] = n;
  }
  return external(std::move(counts));
}

TokenCounter TokenCounter::external_from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open count file " + path.string());
  return external_from_stream(in);
}

TokenCounter TokenCounter::parse(std::string_view spec) {
  if (spec == "whitespace") return whitespace();
  if (spec.starts_with("char:")) {
    const std::string num(spec.substr(5));
    try {
      std::size_t used = 0;
      const double v = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(num);
      return char_heuristic(v);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::InvalidArgument, "bad chars-per-token in '" + std::string(spec) + "'");
    }
  }
  if (spec.starts_with("external:")) return external_from_file(std::string(spec.substr(9)));
  throw Error(ErrorKind::InvalidArgument,
              "unknown token counter '" + std::string(spec) +
                  "' (expected char:<ratio>, whitespace, or external:<path>)");
}

std::uint64_t TokenCounter::count(std::string_view text,
                                  std::optional<std::uint64_t> sample_idx) const {
  return std::visit(
      overloaded{
          [&](const CharHeuristic& c) { return ceil_div(text::char_length(text), c.chars_per_token); },
          [&](const Whitespace&) { return static_cast<std::uint64_t>(simd::count_word_runs(text)); },
          [&](const ExternalCounts& e) { return lookup(e, sample_idx); },
      },
      strategy_);
}

std::size_t TokenCounter::prefix_chars_within(std::string_view text, std::uint64_t budget,
                                              std::optional<std::uint64_t> sample_idx) const {
  const std::size_t total = text::char_length(text);
  return std::visit(
      overloaded{
          [&](const CharHeuristic& c) -> std::size_t {
            const double limit = std::floor(static_cast<double>(budget) * c.chars_per_token + 1e-9);
            return std::min(total, static_cast<std::size_t>(limit));
          },
          [&](const Whitespace&) -> std::size_t {
            // Cut just before the (budget+1)-th word starts.
            std::uint64_t words = 0;
            bool prev_space = true;
            for (std::size_t i = 0; i < text.size(); ++i) {
              const bool space = text::is_ascii_space(text[i]);
              if (prev_space && !space) {
                if (words == budget) return text::char_length(text.substr(0, i));
                ++words;
              }
              prev_space = space;
            }
            return total;
          },
          [&](const ExternalCounts& e) -> std::size_t {
            const std::uint64_t n = lookup(e, sample_idx);
            if (n <= budget) return total;
            return static_cast<std::size_t>(static_cast<long double>(total) * budget / n);
          },
      },
      strategy_);
}

std::string TokenCounter::describe() const {
  return std::visit(overloaded{
                        [](const CharHeuristic& c) {
                          std::ostringstream os;
                          os << "char:" << c.chars_per_token;
                          return os.str();
                        },
                        [](const Whitespace&) { return std::string("whitespace"); },
                        [](const ExternalCounts&) { return std::string("external"); },
                    },
                    strategy_);
}

std::uint64_t count_tokens(std::string_view text, const TokenCounter& counter) {
  return counter.count(text);
}

}  // namespace forge
