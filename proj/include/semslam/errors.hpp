#pragma once

#include <stdexcept>
#include <string>

namespace semslam {

enum class ErrorCode {
    CoincidentPoint,
    NotPositiveDefinite,
    DomainError,
    MissingVariable,
    SingularSystem,
    ParseError,
    LengthMismatch,
    IoError,
};

/// All library errors are thrown as Error; `code()` distinguishes them at
/// the C boundary and in tests.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace semslam
