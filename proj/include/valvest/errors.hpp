#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace valvest {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problems with the input data: bad files, bad units, infeasible plants.
/// The CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Estimation failures. The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public DataError {
 public:
  OutOfRange(const std::string& what, double value)
      : DataError(what), value_(value) {}
  double value() const noexcept { return value_; }

 private:
  double value_;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class TimebaseError : public DataError {
 public:
  using DataError::DataError;
};

class UnitError : public DataError {
 public:
  using DataError::DataError;
};

class TooShort : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateColumn : public DataError {
 public:
  DegenerateColumn(std::string column)
      : DataError("regressor column '" + column + "' is identically zero (valve never opened)"),
        column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class InsufficientRows : public DataError {
 public:
  using DataError::DataError;
};

class InfeasibleSpec : public DataError {
 public:
  using DataError::DataError;
};

class ZeroVariance : public NumericalError {
 public:
  ZeroVariance(std::string column)
      : NumericalError("column '" + column + "' has zero variance"), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

/// Design matrix has numerical rank below its column count. `columns()` holds the
/// 1-based indices of the columns involved in the linear dependency.
class RankDeficient : public NumericalError {
 public:
  RankDeficient(std::string what, std::vector<std::size_t> columns)
      : NumericalError(std::move(what)), columns_(std::move(columns)) {}
  /// 1-based numbers of the columns spanning the null space.
  const std::vector<std::size_t>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::size_t> columns_;
};

class SegmentTooShort : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonFiniteLikelihood : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UnstableParameters : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class KTooLarge : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonPositiveBeta : public NumericalError {
 public:
  NonPositiveBeta(std::string what, std::size_t index)
      : NumericalError(std::move(what)), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace valvest
