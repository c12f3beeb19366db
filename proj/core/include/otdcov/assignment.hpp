#pragma once

#include <vector>

#include "otdcov/common.hpp"

namespace otdcov {

/// Optimal pairing of sample indices to grid indices.
struct TransportMap {
  std::vector<int> perm;  // perm[i] = grid index assigned to sample index i
  double total_cost = 0.0;
};

/// Exact solver for the linear assignment problem: returns a permutation
/// minimizing sum_i cost(i, perm(i)). Shortest-augmenting-path scheme with
/// dual potentials, worst case O(n^3). The optimal cost is unique; among
/// tied argmin permutations the solver is deterministic (column scans run
/// in index order and ties keep the lowest index), so reruns always return
/// the same map. Requires finite nonnegative entries.
TransportMap solve_assignment(const Matrix& cost);

enum class TransportCostKind { kEuclideanSqHalf, kGeodesicSqHalf };

/// cost(i, j) = half squared distance between sample[i] and grid[j] under
/// the chosen metric. Sample and grid must have equal cardinality.
Matrix cost_matrix(const Sample& sample, const Sample& grid, TransportCostKind kind);

}  // namespace otdcov
