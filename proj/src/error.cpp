#include "facegraph/error.hpp"

namespace facegraph {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::FormatMismatch: return "FormatMismatch";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::DegenerateTemplate: return "DegenerateTemplate";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::DegenerateJet: return "DegenerateJet";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::BankMismatch: return "BankMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InternalError: return "InternalError";
  }
  return "Unknown";
}

}  // namespace facegraph
