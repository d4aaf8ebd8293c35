#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace netsem {

// Missing values are quiet NaNs. IEEE arithmetic then propagates them.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool IsMissing(double x) { return std::isnan(x); }

// Logistic CDF without overflow for large |x|.
inline double Logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Result of evaluating a formula: a rows x cols row-major block where rows is
// either 1 (same for every unit) or n, and cols is 1 for ordinary columns or
// the width of a friend reference / c(...) combination.
class Value {
 public:
  Value() = default;
  Value(std::int32_t rows, std::int32_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}
  Value(std::int32_t rows, std::int32_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {}

  static Value Scalar(double x) { return Value(1, 1, x); }
  static Value Column(std::vector<double> values) {
    const auto n = static_cast<std::int32_t>(values.size());
    return Value(n, 1, std::move(values));
  }

  std::int32_t rows() const { return rows_; }
  std::int32_t cols() const { return cols_; }
  bool is_scalar() const { return rows_ == 1 && cols_ == 1; }

  double operator()(std::int32_t r, std::int32_t c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double& operator()(std::int32_t r, std::int32_t c) {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  // Row-broadcasting accessor: a one-row value answers for every unit.
  double At(std::int32_t r, std::int32_t c) const {
    return (*this)(rows_ == 1 ? 0 : r, cols_ == 1 ? 0 : c);
  }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  // Column c expanded to n entries.
  std::vector<double> ColumnValues(std::int32_t c, std::int32_t n) const;

 private:
  std::int32_t rows_ = 0;
  std::int32_t cols_ = 0;
  std::vector<double> data_;
};

inline std::vector<double> Value::ColumnValues(std::int32_t c, std::int32_t n) const {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (std::int32_t i = 0; i < n; ++i) out[i] = At(i, c);
  return out;
}

}  // namespace netsem
