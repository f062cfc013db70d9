#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sepcov {

enum class ErrorKind {
  NotSymmetric,
  NegativeEigenvalue,
  SingularMatrix,
  DimensionTooLarge,
  EmptySample,
  DegenerateSample,
  ShapeMismatch,
  ZeroEigenvalue,
  DegenerateVariance,
  NonRectangularSet,
  InvalidArgument,
  Io,
  Parse,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// True for failures caused by the data itself (degenerate or rank-deficient
/// estimates) rather than by bad input or the environment. The CLI maps these
/// to exit status 2.
bool is_statistical(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace sepcov
