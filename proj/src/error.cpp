#include "entrolab/error.hpp"

namespace entrolab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadWord: return "BadWord";
    case ErrorCode::BadCellCount: return "BadCellCount";
    case ErrorCode::BadPartition: return "BadPartition";
    case ErrorCode::BadDensity: return "BadDensity";
    case ErrorCode::BadFamily: return "BadFamily";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DeltaTooLarge: return "DeltaTooLarge";
    case ErrorCode::NotSignValued: return "NotSignValued";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptySubshift: return "EmptySubshift";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::Intractable: return "Intractable";
    case ErrorCode::NetTooLarge: return "NetTooLarge";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::NonConvergence: return "NonConvergence";
  }
  return "Unknown";
}

bool is_infeasibility(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptySubshift:
    case ErrorCode::AllZero:
    case ErrorCode::Intractable:
    case ErrorCode::NetTooLarge:
    case ErrorCode::CapExceeded:
    case ErrorCode::Degenerate:
    case ErrorCode::NonConvergence:
      return true;
    default:
      return false;
  }
}

}  // namespace entrolab
