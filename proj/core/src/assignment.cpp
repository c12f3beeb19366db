#include "otdcov/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace otdcov {

TransportMap solve_assignment(const Matrix& cost) {
  const int n = cost.rows();
  if (n == 0 || cost.cols() != n) {
    throw std::invalid_argument("solve_assignment: cost matrix must be square and nonempty");
  }
  for (double v : cost.data()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("solve_assignment: entries must be finite and nonnegative");
    }
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n, 0.0), v(n, 0.0), shortest(n);
  std::vector<int> row4col(n, -1), col4row(n, -1), path(n);
  std::vector<char> scanned_row(n), scanned_col(n);

  for (int cur = 0; cur < n; ++cur) {
    std::fill(shortest.begin(), shortest.end(), kInf);
    std::fill(scanned_row.begin(), scanned_row.end(), 0);
    std::fill(scanned_col.begin(), scanned_col.end(), 0);
    std::fill(path.begin(), path.end(), -1);

    int sink = -1;
    int i = cur;
    double min_val = 0.0;
    while (sink < 0) {
      scanned_row[i] = 1;
      int jmin = -1;
      double lowest = kInf;
      for (int j = 0; j < n; ++j) {
        if (scanned_col[j]) continue;
        const double r = min_val + cost(i, j) - u[i] - v[j];
        if (r < shortest[j]) {
          shortest[j] = r;
          path[j] = i;
        }
        if (shortest[j] < lowest) {
          lowest = shortest[j];
          jmin = j;
        }
      }
      min_val = lowest;
      scanned_col[jmin] = 1;
      if (row4col[jmin] < 0) {
        sink = jmin;
      } else {
        i = row4col[jmin];
      }
    }

    u[cur] += min_val;
    for (int k = 0; k < n; ++k) {
      if (scanned_row[k] && k != cur) u[k] += min_val - shortest[col4row[k]];
    }
    for (int j = 0; j < n; ++j) {
      if (scanned_col[j]) v[j] -= min_val - shortest[j];
    }

    int j = sink;
    while (true) {
      const int ii = path[j];
      row4col[j] = ii;
      std::swap(col4row[ii], j);
      if (ii == cur) break;
    }
  }

  Vector terms(n);
  for (int r = 0; r < n; ++r) terms[r] = cost(r, col4row[r]);
  return {std::move(col4row), pairwise_sum(terms)};
}

Matrix cost_matrix(const Sample& sample, const Sample& grid, TransportCostKind kind) {
  const int n = static_cast<int>(sample.size());
  if (grid.size() != sample.size()) {
    throw std::invalid_argument("cost_matrix: sample and grid cardinality mismatch");
  }
  if (n == 0) throw std::invalid_argument("cost_matrix: empty input");
  const std::size_t d = sample[0].size();
  for (const Vector& p : sample) {
    if (p.size() != d) throw std::invalid_argument("cost_matrix: mixed dimensions in sample");
  }
  for (const Vector& p : grid) {
    if (p.size() != d) throw std::invalid_argument("cost_matrix: mixed dimensions across sample and grid");
  }
  Matrix out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (kind == TransportCostKind::kEuclideanSqHalf) {
        out(i, j) = 0.5 * squared_distance(sample[i], grid[j]);
      } else {
        const double g = std::acos(std::clamp(dot(sample[i], grid[j]), -1.0, 1.0));
        out(i, j) = 0.5 * g * g;
      }
    }
  }
  return out;
}

}  // namespace otdcov
