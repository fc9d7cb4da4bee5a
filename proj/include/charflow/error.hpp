#pragma once

#include <stdexcept>
#include <string>

namespace charflow {

enum class ErrorKind {
  OutOfInterval,
  OutOfDomain,
  WindowEmpty,
  Truncated,
  TraceFailure,
  SupportOutOfDomain,
  InvalidInput,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace charflow
