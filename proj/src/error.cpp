#include "charflow/error.hpp"

namespace charflow {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OutOfInterval: return "OutOfInterval";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::WindowEmpty: return "WindowEmpty";
    case ErrorKind::Truncated: return "Truncated";
    case ErrorKind::TraceFailure: return "TraceFailure";
    case ErrorKind::SupportOutOfDomain: return "SupportOutOfDomain";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

}  // namespace charflow
