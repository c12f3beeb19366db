#include "otdcov/dcov.hpp"

#include <algorithm>
#include <cmath>

namespace otdcov {

Matrix pairwise_distances(const Sample& sample, Metric metric) {
  const int n = static_cast<int>(sample.size());
  if (n < 1) throw std::invalid_argument("pairwise_distances: empty sample");
  const std::size_t d = sample[0].size();
  for (const Vector& p : sample) {
    if (p.size() != d) throw std::invalid_argument("pairwise_distances: mixed dimensions");
    if (metric == Metric::kGeodesic && std::abs(norm(p) - 1.0) > 1e-6) {
      throw std::invalid_argument("pairwise_distances: geodesic metric requires unit vectors");
    }
  }
  Matrix out(n, n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double dist;
      if (metric == Metric::kEuclidean) {
        dist = std::sqrt(squared_distance(sample[i], sample[j]));
      } else {
        dist = std::acos(std::clamp(dot(sample[i], sample[j]), -1.0, 1.0));
      }
      out(i, j) = dist;
      out(j, i) = dist;
    }
  }
  return out;
}

DoubleCenteredMatrix::DoubleCenteredMatrix(const Matrix& distances) {
  const int n = distances.rows();
  if (distances.cols() != n) throw std::invalid_argument("double_center: matrix must be square");
  double maxabs = 0.0;
  for (double v : distances.data()) maxabs = std::max(maxabs, std::abs(v));
  const double slack = 1e-12 * std::max(1.0, maxabs);
  for (int i = 0; i < n; ++i) {
    if (std::abs(distances(i, i)) > slack) {
      throw std::invalid_argument("double_center: diagonal must be zero");
    }
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(distances(i, j) - distances(j, i)) > slack) {
        throw std::invalid_argument("double_center: matrix must be symmetric");
      }
    }
  }

  Vector rowmean(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += distances(i, j);
    rowmean[i] = s / n;
  }
  const double grand = pairwise_sum(rowmean) / n;

  entries_ = Matrix(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      entries_(i, j) = distances(i, j) - rowmean[i] - rowmean[j] + grand;
    }
  }
}

double dcov_sq(const DoubleCenteredMatrix& a, const DoubleCenteredMatrix& b) {
  const int n = a.size();
  if (b.size() != n) throw std::invalid_argument("dcov_sq: size mismatch");
  Vector rowsum(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += a(i, j) * b(i, j);
    rowsum[i] = s;
  }
  const double total = pairwise_sum(rowsum);
  return std::max(0.0, total / (static_cast<double>(n) * n));
}

double dcor_sq(const DoubleCenteredMatrix& a, const DoubleCenteredMatrix& b) {
  const double vxx = dcov_sq(a, a);
  const double vyy = dcov_sq(b, b);
  if (vxx == 0.0 || vyy == 0.0) return 0.0;
  return std::min(1.0, dcov_sq(a, b) / std::sqrt(vxx * vyy));
}

}  // namespace otdcov
