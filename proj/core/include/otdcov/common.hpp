#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace otdcov {

using Vector = std::vector<double>;

/// A sample is an ordered list of points, all of the same dimension.
using Sample = std::vector<Vector>;

/// Hard cap on sample size; keeps the O(n^2) distance matrices bounded.
inline constexpr int kMaxSampleSize = 20000;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative shape");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

double dot(const Vector& a, const Vector& b);
double norm(const Vector& v);
double squared_distance(const Vector& a, const Vector& b);

/// Sums `values` by recursive pairwise halving. The result depends only on
/// the order of `values`, never on thread count or chunking upstream.
double pairwise_sum(const std::vector<double>& values);

}  // namespace otdcov
