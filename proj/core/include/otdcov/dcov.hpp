#pragma once

#include "otdcov/common.hpp"

namespace otdcov {

enum class Metric { kEuclidean, kGeodesic };

/// Symmetric zero-diagonal matrix of pairwise distances. The geodesic
/// metric requires unit vectors (norm within 1e-6 of 1).
Matrix pairwise_distances(const Sample& sample, Metric metric);

/// Distance matrix after double centering:
///   A_ij = D_ij - rowmean_i - colmean_j + grandmean,
/// so every row and column sums to zero.
class DoubleCenteredMatrix {
 public:
  /// Requires D square, symmetric, zero diagonal (1e-12 relative slack).
  explicit DoubleCenteredMatrix(const Matrix& distances);

  int size() const { return entries_.rows(); }
  double operator()(int i, int j) const { return entries_(i, j); }
  const Matrix& entries() const { return entries_; }

 private:
  Matrix entries_;
};

inline DoubleCenteredMatrix double_center(const Matrix& distances) {
  return DoubleCenteredMatrix(distances);
}

/// V-statistic squared distance covariance (1/n^2) sum_ij A_ij B_ij,
/// clamped to >= 0. Row-ordered accumulation with a pairwise tree
/// reduction keeps the result independent of any internal parallelism.
double dcov_sq(const DoubleCenteredMatrix& a, const DoubleCenteredMatrix& b);

/// dcov_sq(A,B) / sqrt(dcov_sq(A,A) dcov_sq(B,B)), in [0, 1];
/// 0 when either factor is degenerate (constant sample).
double dcor_sq(const DoubleCenteredMatrix& a, const DoubleCenteredMatrix& b);

}  // namespace otdcov
