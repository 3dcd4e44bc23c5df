#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace facegraph {

enum class ErrorCode {
  InvalidInput,
  InvalidConfig,
  FormatMismatch,
  AlignmentError,
  DegenerateTemplate,
  OutOfBounds,
  DegenerateJet,
  SingularSystem,
  BankMismatch,
  EmptyDataset,
  IoError,
  InternalError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code tells callers what failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace facegraph
