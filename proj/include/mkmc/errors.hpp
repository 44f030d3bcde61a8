#pragma once

#include <stdexcept>
#include <string>

namespace mkmc {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A matrix expected to be positive definite failed factorization even
/// after the diagonal jitter ladder was exhausted.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& what, int pivot)
      : Error(what), pivot_(pivot) {}
  /// Index of the first non-positive Cholesky pivot.
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

/// A kernel matrix argument of the KL divergence is singular beyond the
/// jitter budget, so its log-determinant is undefined.
class QSingular : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Mean imputation requires at least one observed object.
class NoObservedData : public Error {
 public:
  using Error::Error;
};

/// Correlation distance is undefined for a zero-Frobenius-norm matrix.
class ZeroNorm : public Error {
 public:
  using Error::Error;
};

/// ROC is undefined when only one class is present.
class OneClassOnly : public Error {
 public:
  using Error::Error;
};

/// NaN sentinels in a kernel file do not form whole hidden rows/columns.
class InvalidMaskPattern : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace mkmc
