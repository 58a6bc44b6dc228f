#pragma once

#include <stdexcept>
#include <string>

namespace entropica {

enum class ErrorCode {
  InvalidArgument,
  UnknownName,
  ConsistencyViolation,
  PrecisionUnreachable,
  Boundary,
  ZeroMass,
  ZeroCylinder,
  ZeroCell,
  EmptyCell,
  SearchExhausted,
  Unsupported,
  Config,
  Io,
  Parse,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the library; the C API maps `code()` to a status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace entropica
