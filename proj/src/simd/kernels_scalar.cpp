#include "forge/simd/kernels.hpp"

#include <cstdint>

namespace forge::simd {
namespace {

inline bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

std::size_t utf8_length_scalar(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char c : text) n += (c & 0xC0u) != 0x80u;
  return n;
}

std::size_t count_word_runs_scalar(std::string_view text) {
  std::size_t runs = 0;
  bool prev_space = true;
  for (unsigned char c : text) {
    const bool space = is_space(c);
    runs += prev_space && !space;
    prev_space = space;
  }
  return runs;
}

void find_byte_scalar(std::string_view text, char needle, std::vector<std::size_t>& out) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == needle) out.push_back(i);
  }
}

double sum_f64_scalar(std::span<const double> values) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t blocks = values.size() / 4;
  for (std::size_t b = 0; b < blocks; ++b) {
    lane[0] += values[4 * b + 0];
    lane[1] += values[4 * b + 1];
    lane[2] += values[4 * b + 2];
    lane[3] += values[4 * b + 3];
  }
  double total = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (std::size_t i = blocks * 4; i < values.size(); ++i) total += values[i];
  return total;
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{Isa::Scalar, utf8_length_scalar, count_word_runs_scalar,
                               find_byte_scalar, sum_f64_scalar};
}  // namespace detail

}  // namespace forge::simd
