#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "otdcov/common.hpp"

namespace otdcov {

/// Factorization n = n_r * n_s + n_0 with 0 <= n_0 < min(n_r, n_s).
struct Factorization {
  int n_r = 0;  // number of radii / parallels
  int n_s = 0;  // number of directions / meridians
  int n_0 = 0;  // copies of the center point
};

/// Starts from n_r = n_s = floor(sqrt(n)) and increments n_s until
/// n_0 = n - n_r * n_s satisfies the constraint. Requires n >= 4.
Factorization factorize_n(int n);

/// Grid directions for the unit ball in R^d:
///   d = 1: {+1, -1} alternating as evenly as possible;
///   d = 2: n_s equally spaced angles starting at angle 0;
///   d >= 3: n_s i.i.d. uniform unit vectors from the seeded stream.
Sample direction_set(int n_s, int d, std::uint64_t seed);

/// Structured grid in the open unit ball: the n_r * n_s points
/// (r / (n_r+1)) * s plus n_0 copies of the origin. Points are ordered with
/// the radius index outermost, origin copies last.
struct BallGrid {
  int n_r = 0, n_s = 0, n_0 = 0;
  int dim = 0;
  Sample points;

  int size() const { return static_cast<int>(points.size()); }
  /// Radius index (1..n_r) of a grid point, 0 for origin copies.
  int rank_of(int idx) const { return idx < n_r * n_s ? idx / n_s + 1 : 0; }
};

BallGrid make_ball_grid(int n, int d, std::uint64_t seed);

/// One observation's center-outward rank, sign, and grid image.
struct CenterOutwardRecord {
  int rank = 0;        // 0 reserved for origin copies
  Vector sign;         // unit direction; zero vector at the origin
  Vector image;        // assigned grid point
  int grid_index = 0;  // index of the image in the grid's point order
};

/// Empirical center-outward distribution function: optimal transport of the
/// sample to the grid under half squared Euclidean cost. Ties among origin
/// copies are resolved by the deterministic assignment solver.
std::vector<CenterOutwardRecord> center_outward(const Sample& sample, const BallGrid& grid);

/// Optimal transport of the sample to n i.i.d. spherical-uniform points
/// (radius uniform on [0,1] times a uniform direction); returns the images.
Sample random_ball_transport(const Sample& sample, std::uint64_t seed);

enum class ScoreKind { kWilcoxon, kVanDerWaerden, kSign };

/// Radial score specification. `biloop` composes the bounded redescending
/// planar curve with the base kind's radial part, doubling the embedding
/// dimension. `dim` is the chi-square degrees of freedom for van der Waerden.
struct ScoreSpec {
  ScoreKind kind = ScoreKind::kWilcoxon;
  bool biloop = false;
  double biloop_c = 1.0;
  int dim = 0;

  std::string name() const;
};

/// The bounded redescending curve applied to a nonnegative radial value v:
///   (c (1 + cos(2 pi tanh(v/c) + pi)), sin(2 pi tanh(v/c))).
/// Vanishes at v = 0 and again as v -> infinity.
std::array<double, 2> biloop_radial(double v, double c);

/// Scored embedding of one record: the radial score of u = rank/(n_r+1)
/// times the multivariate sign (dimension d, or 2d for biloop specs).
Vector apply_score(const CenterOutwardRecord& record, const ScoreSpec& spec, int n_r);

}  // namespace otdcov
