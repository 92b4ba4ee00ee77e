#pragma once
// Brute-force reference implementations written without looking at the
// library code paths. They trade speed for obviousness.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

// ---- BLEU-4 --------------------------------------------------------------
// Counts every n-gram occurrence by direct pairwise comparison (O(n^2) per
// order), clips against the reference, and combines with the brevity
// penalty. Orders the candidate is too short for are skipped; a zero
// precision at any remaining order gives 0.

inline bool same_gram(const std::vector<std::int64_t>& a, std::size_t i, const std::vector<std::int64_t>& b,
                      std::size_t j, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    if (a[i + k] != b[j + k]) return false;
  }
  return true;
}

inline double bleu4(const std::vector<std::int64_t>& cand, const std::vector<std::int64_t>& ref) {
  long double log_p = 0;
  int orders = 0;
  for (std::size_t n = 1; n <= 4 && n <= cand.size(); ++n) {
    const std::size_t total = cand.size() - n + 1;
    std::size_t clipped = 0;
    for (std::size_t i = 0; i < total; ++i) {
      // count each distinct gram once, at its first occurrence
      bool seen = false;
      for (std::size_t p = 0; p < i && !seen; ++p) seen = same_gram(cand, p, cand, i, n);
      if (seen) continue;
      std::size_t in_cand = 0;
      for (std::size_t p = 0; p < total; ++p) in_cand += same_gram(cand, p, cand, i, n);
      std::size_t in_ref = 0;
      for (std::size_t q = 0; q + n <= ref.size(); ++q) in_ref += same_gram(ref, q, cand, i, n);
      clipped += in_cand < in_ref ? in_cand : in_ref;
    }
    if (clipped == 0) return 0.0;
    log_p += std::log(static_cast<long double>(clipped) / static_cast<long double>(total));
    ++orders;
  }
  const long double c = static_cast<long double>(cand.size());
  const long double r = static_cast<long double>(ref.size());
  const long double bp = c >= r ? 1.0L : std::exp(1.0L - r / c);
  return static_cast<double>(bp * std::exp(log_p / orders));
}

// ---- perplexity ----------------------------------------------------------

inline double perplexity(const std::vector<double>& logprobs) {
  long double s = 0;
  for (double lp : logprobs) s += lp;
  return static_cast<double>(std::exp(-s / static_cast<long double>(logprobs.size())));
}

// ---- stream packing --------------------------------------------------------
// Lays the token stream out one token at a time: each sample contributes its
// content tokens and one EOS; a window closes when it holds W tokens.

struct PackedWindow {
  std::vector<std::uint64_t> starts;  // samples whose first token is here
  std::uint64_t used = 0;
};

inline std::vector<PackedWindow> stream_pack(const std::vector<std::uint64_t>& tokens, std::uint64_t window) {
  std::vector<PackedWindow> out;
  PackedWindow cur;
  for (std::size_t s = 0; s < tokens.size(); ++s) {
    for (std::uint64_t t = 0; t < tokens[s] + 1; ++t) {
      if (cur.used == window) {
        out.push_back(cur);
        cur = {};
      }
      if (t == 0) cur.starts.push_back(s);
      ++cur.used;
    }
  }
  if (cur.used) out.push_back(cur);
  return out;
}

// ---- trainable parameters -------------------------------------------------
// Straight from the published model config values, not the descriptor file.

struct DecoderConfig {
  std::uint64_t hidden = 4096;
  std::uint64_t intermediate = 11008;
  std::uint64_t layers = 32;
  std::uint64_t heads = 32;
  std::uint64_t kv_heads = 32;
  std::uint64_t vocab = 100278;
};

inline std::uint64_t lora_params_all_modules(const DecoderConfig& c, std::uint64_t r) {
  const std::uint64_t head_dim = c.hidden / c.heads;
  const std::uint64_t kv = c.kv_heads * head_dim;
  const std::uint64_t per_layer = (c.hidden + c.hidden)        // q
                                  + (c.hidden + kv)            // k
                                  + (c.hidden + kv)            // v
                                  + (c.hidden + c.hidden)      // o
                                  + 2 * (c.hidden + c.intermediate)  // gate, up
                                  + (c.intermediate + c.hidden);     // down
  const std::uint64_t embed = 2 * (c.vocab + c.hidden);        // embed_tokens, lm_head
  return r * (c.layers * per_layer + embed);
}

// ---- character heuristic ----------------------------------------------------

inline std::uint64_t char_tokens(std::size_t code_points, std::uint64_t num, std::uint64_t den) {
  // chars / (num/den) rounded up, in exact integer arithmetic
  return (code_points * den + num - 1) / num;
}

}  // namespace oracle
