#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace forge {

enum class ErrorKind {
  MissingCount,
  DuplicateIndex,
  IoError,
  OversizeSample,
  MissingModuleDims,
  InvalidArgument,
  StreamOrder,
  InvalidEvent,
  EmptyEval,
  TooShort,
  MissingAxis,
  MalformedRecord,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the toolkit; `kind()` carries the failure class
// so callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace forge
