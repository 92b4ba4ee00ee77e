#include "forge/error.hpp"

namespace forge {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingCount: return "MissingCount";
    case ErrorKind::DuplicateIndex: return "DuplicateIndex";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::OversizeSample: return "OversizeSample";
    case ErrorKind::MissingModuleDims: return "MissingModuleDims";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::StreamOrder: return "StreamOrder";
    case ErrorKind::InvalidEvent: return "InvalidEvent";
    case ErrorKind::EmptyEval: return "EmptyEval";
    case ErrorKind::TooShort: return "TooShort";
    case ErrorKind::MissingAxis: return "MissingAxis";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
  }
  return "Unknown";
}

}  // namespace forge
