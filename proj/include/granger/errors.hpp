#ifndef GRANGER_ERRORS_HPP
#define GRANGER_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace granger {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad files, out-of-range arguments, inconsistent shapes.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The numbers themselves make the requested computation impossible.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Design matrix whose singular-value ratio falls below the rank tolerance.
class RankDeficientError : public NumericalError {
 public:
  RankDeficientError(const std::string& what, std::vector<std::size_t> columns)
      : NumericalError(what), columns_(std::move(columns)) {}

  /// Column indices participating in the (near) linear dependency.
  const std::vector<std::size_t>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::size_t> columns_;
};

/// A regression with zero residual sum of squares; the Gaussian code length
/// is undefined there.
class DegenerateFitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Simulated trajectory left the representable range.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, std::size_t node, std::size_t step)
      : NumericalError(what), node_(node), step_(step) {}

  std::size_t node() const noexcept { return node_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t node_;
  std::size_t step_;
};

}  // namespace granger

#endif  // GRANGER_ERRORS_HPP
