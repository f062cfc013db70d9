#include "sepcov/error.hpp"

namespace sepcov {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ZeroEigenvalue: return "ZeroEigenvalue";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::NonRectangularSet: return "NonRectangularSet";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

bool is_statistical(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NegativeEigenvalue:
    case ErrorKind::SingularMatrix:
    case ErrorKind::DegenerateSample:
    case ErrorKind::ZeroEigenvalue:
    case ErrorKind::DegenerateVariance:
      return true;
    default:
      return false;
  }
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace sepcov
