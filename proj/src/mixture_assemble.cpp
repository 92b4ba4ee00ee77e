#include "forge/mixture_assemble.hpp"

#include <algorithm>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge {

Truncation truncate_sample(std::string_view text, const AssemblyPolicy& policy,
                           std::optional<std::uint64_t> sample_idx) {
  if (policy.max_tokens == 0) throw Error(ErrorKind::InvalidArgument, "max_tokens must be >= 1");
  const std::uint64_t budget = policy.max_tokens - 1;
  Truncation out;
  if (policy.counter.count(text, sample_idx) <= budget) {
    out.kept.reserve(text.size() + policy.eot_token.size());
    out.kept.append(text);
    out.kept.append(policy.eot_token);
    return out;
  }
  const std::size_t budget_chars = policy.counter.prefix_chars_within(text, budget, sample_idx);
  const std::size_t limit = text::byte_offset_of_char(text, budget_chars);
  const std::string_view window = text.substr(0, limit);
  std::size_t cut = std::string_view::npos;
  for (char b : policy.boundary_chars) {
    const std::size_t at = window.rfind(b);
    if (at != std::string_view::npos) {
      cut = at + 1;
      break;
    }
  }
  if (cut == std::string_view::npos) {
    cut = limit;
    out.hard_cut = true;
  }
  out.kept.reserve(cut + policy.eot_token.size());
  out.kept.append(text.substr(0, cut));
  out.kept.append(policy.eot_token);
  if (cut < text.size()) out.overflow = std::string(text.substr(cut));
  return out;
}

std::string_view to_string(PackMode mode) {
  return mode == PackMode::Stream ? "stream" : "greedy";
}

double PackResult::fill_rate() const {
  if (windows.empty()) return 0.0;
  return static_cast<double>(total_used_tokens) /
         (static_cast<double>(windows.size()) * static_cast<double>(windows.front().window_tokens));
}

namespace {

PackedSequence empty_window(std::uint64_t window) {
  PackedSequence w;
  w.window_tokens = window;
  return w;
}

PackResult pack_stream(const std::vector<PackItem>& items, std::uint64_t window) {
  PackResult result;
  PackedSequence current = empty_window(window);
  for (const PackItem& item : items) {
    std::uint64_t remaining = item.tokens + 1;
    bool placed = false;
    while (remaining > 0) {
      if (current.used_tokens == window) {
        result.windows.push_back(std::move(current));
        current = empty_window(window);
      }
      const std::uint64_t take = std::min(remaining, window - current.used_tokens);
      if (!placed) {
        current.member_sample_idxs.push_back(item.sample_idx);
        placed = true;
      } else {
        current.continued_sample_idx = item.sample_idx;
        current.continued_tokens = take;
      }
      current.used_tokens += take;
      remaining -= take;
    }
  }
  if (current.used_tokens > 0) result.windows.push_back(std::move(current));
  return result;
}

PackResult pack_greedy(const std::vector<PackItem>& items, std::uint64_t window) {
  PackResult result;
  PackedSequence current = empty_window(window);
  for (const PackItem& item : items) {
    if (current.used_tokens + item.tokens > window) {
      result.windows.push_back(std::move(current));
      current = empty_window(window);
    }
    current.member_sample_idxs.push_back(item.sample_idx);
    current.used_tokens += item.tokens;
    if (current.used_tokens < window) {
      current.used_tokens += 1;
    } else {
      ++current.elided_eos;
    }
  }
  if (current.used_tokens > 0 || !current.member_sample_idxs.empty()) {
    result.windows.push_back(std::move(current));
  }
  return result;
}

}  // namespace

PackResult pack(const std::vector<PackItem>& items, std::uint64_t window_tokens, PackMode mode) {
  if (window_tokens == 0) throw Error(ErrorKind::InvalidArgument, "window_tokens must be >= 1");
  std::uint64_t total = 0;
  for (const PackItem& item : items) {
    if (item.tokens > window_tokens) {
      throw Error(ErrorKind::OversizeSample,
                  "sample_idx " + std::to_string(item.sample_idx) + " has " +
                      std::to_string(item.tokens) + " tokens, window holds " +
                      std::to_string(window_tokens));
    }
    total += item.tokens;
  }
  PackResult result = mode == PackMode::Stream ? pack_stream(items, window_tokens)
                                               : pack_greedy(items, window_tokens);
  result.total_sample_tokens = total;
  for (const PackedSequence& w : result.windows) result.total_used_tokens += w.used_tokens;
  return result;
}

namespace {

std::uint64_t content_tokens(const Sample& s, const TokenCounter& counter) {
  std::string_view body = s.text;
  if (body.ends_with(kEndOfText)) body.remove_suffix(kEndOfText.size());
  return counter.count(body, s.sample_idx);
}

}  // namespace

PackResult pack(const std::vector<Sample>& samples, std::uint64_t window_tokens,
                const TokenCounter& counter, PackMode mode) {
  std::vector<PackItem> items;
  items.reserve(samples.size());
  for (const Sample& s : samples) items.push_back({s.sample_idx, content_tokens(s, counter)});
  return pack(items, window_tokens, mode);
}

CorpusStats corpus_stats(const std::vector<std::uint64_t>& sample_tokens,
                         std::uint64_t window_tokens, PackMode mode) {
  if (sample_tokens.empty()) throw Error(ErrorKind::InvalidArgument, "corpus_stats on an empty corpus");
  CorpusStats stats;
  stats.sample_count = sample_tokens.size();
  std::vector<PackItem> items;
  items.reserve(sample_tokens.size());
  for (std::size_t i = 0; i < sample_tokens.size(); ++i) {
    stats.total_tokens += sample_tokens[i];
    items.push_back({i, std::min(sample_tokens[i], window_tokens)});
  }
  stats.mean_sample_tokens =
      static_cast<double>(stats.total_tokens) / static_cast<double>(stats.sample_count);
  stats.packing_fill_rate = pack(items, window_tokens, mode).fill_rate();
  return stats;
}

CorpusStats corpus_stats(const std::vector<Sample>& samples, const TokenCounter& counter,
                         std::uint64_t window_tokens, PackMode mode) {
  std::vector<std::uint64_t> tokens;
  tokens.reserve(samples.size());
  for (const Sample& s : samples) tokens.push_back(content_tokens(s, counter));
  return corpus_stats(tokens, window_tokens, mode);
}

std::string render_window_text(const PackedSequence& window, const std::vector<Sample>& samples,
                               std::string_view eot) {
  std::string out;
  for (std::size_t m = 0; m < window.member_sample_idxs.size(); ++m) {
    const std::uint64_t idx = window.member_sample_idxs[m];
    const auto it = std::lower_bound(
        samples.begin(), samples.end(), idx,
        [](const Sample& s, std::uint64_t v) { return s.sample_idx < v; });
    if (it == samples.end() || it->sample_idx != idx) {
      throw Error(ErrorKind::InvalidArgument, "window references unknown sample_idx " + std::to_string(idx));
    }
    std::string_view body = it->text;
    if (body.ends_with(eot)) body.remove_suffix(eot.size());
    out.append(body);
    out.append(eot);
  }
  return out;
}

}  // namespace forge
