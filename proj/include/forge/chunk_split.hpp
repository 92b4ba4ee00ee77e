#pragma once
// Code-aware splitting of oversized units.
//
// Split points are tried by kind in priority order (file marker, function
// boundary, statement boundary); within a kind the offset closest to the
// window end wins. Only split points leaving a chunk of at least min_chars
// are eligible, so a would-be short chunk is absorbed into the next one.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "forge/corpus_ingest.hpp"

namespace forge {

enum class BoundaryKind { FileMarker, FunctionBoundary, StatementBoundary };

std::string_view to_string(BoundaryKind kind);

struct SplitPolicy {
  std::size_t max_chars = 7500;
  std::size_t min_chars = 50;
  std::vector<BoundaryKind> hierarchy{BoundaryKind::FileMarker, BoundaryKind::FunctionBoundary,
                                      BoundaryKind::StatementBoundary};
  std::string marker_prefix{kFileMarkerPrefix};

  // Throws Error{InvalidArgument} when min_chars >= max_chars or the
  // hierarchy repeats a kind.
  void validate() const;
};

// Byte offsets, ascending and de-duplicated, in (0, text.size()].
//  FileMarker:        start of each line beginning with the marker prefix
//  FunctionBoundary:  just after a column-0 line that is `}` (trailing blanks
//                     allowed), and the start of each line shaped like a
//                     function definition
//  StatementBoundary: just after `;\n` and just after each "\n\n"
std::vector<std::size_t> detect_boundaries(std::string_view text, BoundaryKind kind,
                                           std::string_view marker_prefix = kFileMarkerPrefix);

// Heuristic definition-line shape: starts at column 0 with an identifier,
// is not a control statement, contains `name(`, has no `;`, and ends in `)`
// or `{` (trailing blanks allowed).
bool looks_like_function_definition(std::string_view line);

struct SplitResult {
  std::vector<std::string> chunks;
  std::size_t hard_splits = 0;    // forced character cuts with no boundary
  std::size_t dropped_chars = 0;  // final tail shorter than min_chars
  std::size_t dropped_chunks = 0;

  bool hard_split() const { return hard_splits > 0; }
};

// Concatenating `chunks` and the dropped tail restores `text` exactly; every
// chunk has at most max_chars code points.
SplitResult split_large(std::string_view text, const SplitPolicy& policy = {});

}  // namespace forge
