#include "otdcov/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace otdcov {

namespace {
constexpr double kPi = std::numbers::pi;

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

// Adaptive Simpson with absolute tolerance, classic halving recursion.
template <typename F>
double simpson(F&& f, double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson_rec(F&& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = simpson(f, a, b, fa, fm, fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 52);
}
}  // namespace

UnitDirection::UnitDirection(Vector coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) throw std::invalid_argument("UnitDirection: dimension must be >= 2");
  const double n = norm(coords_);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("UnitDirection: coordinates must have positive finite norm");
  }
  for (double& c : coords_) c /= n;
}

UnitDirection UnitDirection::axis(int d, int k) {
  if (d < 2 || k < 0 || k >= d) throw std::invalid_argument("UnitDirection::axis: bad index");
  Vector v(d, 0.0);
  v[k] = 1.0;
  return UnitDirection(std::move(v));
}

UnitDirection UnitDirection::antipode() const {
  Vector v = coords_;
  for (double& c : v) c = -c;
  return UnitDirection(std::move(v));
}

TangentVector::TangentVector(UnitDirection base, Vector components)
    : base_(std::move(base)), components_(std::move(components)) {
  if (components_.size() != base_.coords().size()) {
    throw std::invalid_argument("TangentVector: dimension mismatch with base");
  }
  // Project onto the tangent hyperplane; makes the orthogonality invariant
  // hold by construction.
  const double a = dot(components_, base_.coords());
  for (std::size_t i = 0; i < components_.size(); ++i) components_[i] -= a * base_.coords()[i];
}

double TangentVector::norm() const { return otdcov::norm(components_); }

double geodesic_distance(const UnitDirection& z1, const UnitDirection& z2) {
  if (z1.dim() != z2.dim()) throw std::invalid_argument("geodesic_distance: dimension mismatch");
  return std::abs(std::acos(clamp_unit(dot(z1.coords(), z2.coords()))));
}

double transport_cost(const UnitDirection& z1, const UnitDirection& z2) {
  const double d = geodesic_distance(z1, z2);
  return 0.5 * d * d;
}

TangentVector log_map(const UnitDirection& base, const UnitDirection& z) {
  const double theta = geodesic_distance(base, z);
  if (theta > kPi - kAntipodalTolerance) {
    throw std::domain_error("log_map: undefined at the antipode of the base point");
  }
  const double c = std::cos(theta);
  Vector perp(base.dim());
  for (int i = 0; i < base.dim(); ++i) perp[i] = z[i] - c * base[i];
  const double pn = norm(perp);
  if (pn < 1e-14) return TangentVector(base, Vector(base.dim(), 0.0));
  const double scale = theta / pn;
  for (double& x : perp) x *= scale;
  return TangentVector(base, std::move(perp));
}

UnitDirection exp_map(const TangentVector& v) {
  const double t = v.norm();
  if (t >= kPi) throw std::domain_error("exp_map: |v| must be < pi");
  if (t < 1e-300) return v.base();
  const double c = std::cos(t);
  const double s = std::sin(t) / t;
  Vector out(v.base().dim());
  for (int i = 0; i < v.base().dim(); ++i) out[i] = c * v.base()[i] + s * v.components()[i];
  return UnitDirection(std::move(out));
}

FrechetMeanResult frechet_mean(const std::vector<UnitDirection>& points,
                               const std::vector<double>* weights) {
  if (points.empty()) throw std::invalid_argument("frechet_mean: empty point list");
  const int d = points[0].dim();
  const std::size_t n = points.size();
  Vector w(n, 1.0);
  if (weights) {
    if (weights->size() != n) throw std::invalid_argument("frechet_mean: weights size mismatch");
    w = *weights;
  }
  double wsum = 0.0;
  for (double wi : w) {
    if (wi < 0.0 || !std::isfinite(wi)) {
      throw std::invalid_argument("frechet_mean: weights must be nonnegative");
    }
    wsum += wi;
  }
  if (!(wsum > 0.0)) throw std::invalid_argument("frechet_mean: weights must sum to > 0");

  Vector extrinsic(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i].dim() != d) throw std::invalid_argument("frechet_mean: dimension mismatch");
    for (int k = 0; k < d; ++k) extrinsic[k] += w[i] * points[i][k];
  }
  for (double& x : extrinsic) x /= wsum;

  UnitDirection cur = norm(extrinsic) < 1e-8 ? points[0] : UnitDirection(extrinsic);

  constexpr int kMaxIterations = 1000;
  for (int it = 1; it <= kMaxIterations; ++it) {
    Vector step(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (w[i] == 0.0) continue;
      const TangentVector v = log_map(cur, points[i]);
      for (int k = 0; k < d; ++k) step[k] += w[i] * v.components()[k];
    }
    for (double& x : step) x /= wsum;
    if (norm(step) < 1e-10) return {cur, true, it};
    cur = exp_map(TangentVector(cur, std::move(step)));
  }
  return {cur, false, kMaxIterations};
}

double cap_cdf(double u, int d) {
  if (d < 2) throw std::invalid_argument("cap_cdf: d must be >= 2");
  if (!(u >= -1.0 && u <= 1.0)) throw std::invalid_argument("cap_cdf: u must lie in [-1, 1]");
  if (d == 2) return (std::asin(u) + kPi / 2.0) / kPi;
  if (d == 3) return (u + 1.0) / 2.0;
  if (u == -1.0) return 0.0;
  if (u == 1.0) return 1.0;
  const double e = (d - 3) / 2.0;
  const auto f = [e](double s) { return std::pow(1.0 - s * s, e); };
  const double total = adaptive_simpson(f, -1.0, 1.0, 1e-12);
  const double part = adaptive_simpson(f, -1.0, u, 1e-12);
  return std::clamp(part / total, 0.0, 1.0);
}

double cap_quantile(double p, int d) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("cap_quantile: p must lie in [0, 1]");
  if (p == 0.0) return -1.0;
  if (p == 1.0) return 1.0;
  double lo = -1.0, hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cap_cdf(mid, d) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Rotation::Rotation(const UnitDirection& from, const UnitDirection& to) {
  if (from.dim() != to.dim()) throw std::invalid_argument("Rotation: dimension mismatch");
  if (geodesic_distance(from, to) > kPi - kAntipodalTolerance) {
    throw std::domain_error("Rotation: undefined for antipodal directions");
  }
  u_ = from.coords();
  c_ = clamp_unit(dot(from.coords(), to.coords()));
  Vector w(from.dim());
  for (int i = 0; i < from.dim(); ++i) w[i] = to[i] - c_ * u_[i];
  s_ = norm(w);
  if (s_ < 1e-14) {
    identity_ = true;
    w_.assign(from.dim(), 0.0);
    return;
  }
  identity_ = false;
  for (double& x : w) x /= s_;
  w_ = std::move(w);
}

Vector Rotation::apply(const Vector& x) const {
  if (static_cast<int>(x.size()) != dim()) throw std::invalid_argument("Rotation::apply: dimension mismatch");
  if (identity_) return x;
  const double a = dot(u_, x);
  const double b = dot(w_, x);
  Vector y = x;
  // R = I + (c-1)(uu^T + ww^T) + s(wu^T - uw^T)
  for (int i = 0; i < dim(); ++i) {
    y[i] += (c_ - 1.0) * (a * u_[i] + b * w_[i]) + s_ * (a * w_[i] - b * u_[i]);
  }
  return y;
}

UnitDirection Rotation::apply(const UnitDirection& x) const { return UnitDirection(apply(x.coords())); }

Matrix Rotation::matrix() const {
  const int d = dim();
  Matrix m(d, d, 0.0);
  Vector e(d, 0.0);
  for (int j = 0; j < d; ++j) {
    e[j] = 1.0;
    const Vector col = apply(e);
    for (int i = 0; i < d; ++i) m(i, j) = col[i];
    e[j] = 0.0;
  }
  return m;
}

std::vector<UnitDirection> uniform_sphere(int n, int d, Rng& rng) {
  if (n < 0 || d < 2) throw std::invalid_argument("uniform_sphere: need n >= 0, d >= 2");
  std::vector<UnitDirection> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.emplace_back(rng.normal_vector(d));
  return out;
}

}  // namespace otdcov
