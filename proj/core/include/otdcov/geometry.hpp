#pragma once

#include <vector>

#include "otdcov/common.hpp"
#include "otdcov/rng.hpp"

namespace otdcov {

/// Chart-domain guard: maps defined on the sphere minus an antipode reject
/// inputs with geodesic distance above pi minus this constant.
inline constexpr double kAntipodalTolerance = 1e-9;

/// A point on the unit sphere S^{d-1}, d >= 2. Coordinates are renormalized
/// on construction so the unit-norm invariant always holds.
class UnitDirection {
 public:
  explicit UnitDirection(Vector coords);

  /// k-th canonical basis vector of R^d, k in [0, d).
  static UnitDirection axis(int d, int k);

  const Vector& coords() const { return coords_; }
  int dim() const { return static_cast<int>(coords_.size()); }
  double operator[](int i) const { return coords_[i]; }

  UnitDirection antipode() const;

 private:
  Vector coords_;
};

/// Tangent vector at a base point; components are projected onto the
/// tangent hyperplane on construction, so <components, base> = 0 holds.
class TangentVector {
 public:
  TangentVector(UnitDirection base, Vector components);

  const UnitDirection& base() const { return base_; }
  const Vector& components() const { return components_; }
  double norm() const;

 private:
  UnitDirection base_;
  Vector components_;
};

/// |arccos <z1, z2>| with the inner product clamped to [-1, 1]. Range [0, pi].
double geodesic_distance(const UnitDirection& z1, const UnitDirection& z2);

/// Half squared geodesic distance, the transport cost on the sphere.
double transport_cost(const UnitDirection& z1, const UnitDirection& z2);

/// Riemannian logarithm at `base`. Throws std::domain_error when z is
/// antipodal to base (distance > pi - kAntipodalTolerance).
TangentVector log_map(const UnitDirection& base, const UnitDirection& z);

/// Riemannian exponential; inverse of log_map. Requires |v| < pi.
UnitDirection exp_map(const TangentVector& v);

struct FrechetMeanResult {
  UnitDirection mean;
  bool converged = false;
  int iterations = 0;
};

/// Local minimizer of sum_i w_i d(z, x_i)^2 / 2 by Riemannian gradient
/// descent. Initialized at the normalized extrinsic mean (or points[0] when
/// that mean is numerically zero), stepping until the update norm drops
/// below 1e-10 or 1000 iterations pass; non-convergence is reported through
/// the result, not an error.
FrechetMeanResult frechet_mean(const std::vector<UnitDirection>& points,
                               const std::vector<double>* weights = nullptr);

/// CDF of <U, theta> for U uniform on S^{d-1}:
///   F*(u) = int_{-1}^{u} (1-s^2)^{(d-3)/2} ds / int_{-1}^{1} (1-s^2)^{(d-3)/2} ds.
/// Closed forms for d in {2, 3}; adaptive quadrature (abs tol 1e-12) otherwise.
double cap_cdf(double u, int d);

/// Inverse of cap_cdf by bisection on [-1, 1]; endpoints are exact.
double cap_quantile(double p, int d);

/// Orthogonal map with det +1 taking `from` to `to`, acting as the identity
/// on the orthogonal complement of span{from, to}. Throws std::domain_error
/// for antipodal inputs. Stored as a rank-2 update; apply() is O(d).
class Rotation {
 public:
  Rotation(const UnitDirection& from, const UnitDirection& to);

  Vector apply(const Vector& x) const;
  UnitDirection apply(const UnitDirection& x) const;
  Matrix matrix() const;
  int dim() const { return static_cast<int>(u_.size()); }

 private:
  Vector u_, w_;  // orthonormal basis of the rotation plane
  double c_ = 1.0, s_ = 0.0;
  bool identity_ = true;
};

/// n i.i.d. uniform points on S^{d-1} (normalized Gaussian vectors).
std::vector<UnitDirection> uniform_sphere(int n, int d, Rng& rng);

}  // namespace otdcov
