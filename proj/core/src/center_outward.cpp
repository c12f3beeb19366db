#include "otdcov/center_outward.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "otdcov/assignment.hpp"
#include "otdcov/rng.hpp"
#include "otdcov/special_functions.hpp"

namespace otdcov {

Factorization factorize_n(int n) {
  if (n < 4) throw std::invalid_argument("factorize_n: n must be >= 4");
  const int n_r = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
  int n_s = n_r;
  while (n - n_r * n_s >= std::min(n_r, n_s)) ++n_s;
  return {n_r, n_s, n - n_r * n_s};
}

Sample direction_set(int n_s, int d, std::uint64_t seed) {
  if (n_s < 1 || d < 1) throw std::invalid_argument("direction_set: need n_s >= 1, d >= 1");
  Sample dirs;
  dirs.reserve(n_s);
  if (d == 1) {
    for (int k = 0; k < n_s; ++k) dirs.push_back({k % 2 == 0 ? 1.0 : -1.0});
  } else if (d == 2) {
    for (int k = 0; k < n_s; ++k) {
      const double a = 2.0 * std::numbers::pi * k / n_s;
      dirs.push_back({std::cos(a), std::sin(a)});
    }
  } else {
    Rng rng(derive_seed(seed, "directions"));
    for (int k = 0; k < n_s; ++k) {
      Vector v = rng.normal_vector(d);
      const double vn = norm(v);
      for (double& x : v) x /= vn;
      dirs.push_back(std::move(v));
    }
  }
  return dirs;
}

BallGrid make_ball_grid(int n, int d, std::uint64_t seed) {
  const Factorization f = factorize_n(n);
  const Sample dirs = direction_set(f.n_s, d, seed);
  BallGrid grid{f.n_r, f.n_s, f.n_0, d, {}};
  grid.points.reserve(n);
  for (int r = 1; r <= f.n_r; ++r) {
    const double radius = static_cast<double>(r) / (f.n_r + 1);
    for (const Vector& s : dirs) {
      Vector p(d);
      for (int k = 0; k < d; ++k) p[k] = radius * s[k];
      grid.points.push_back(std::move(p));
    }
  }
  for (int k = 0; k < f.n_0; ++k) grid.points.emplace_back(d, 0.0);
  return grid;
}

std::vector<CenterOutwardRecord> center_outward(const Sample& sample, const BallGrid& grid) {
  if (static_cast<int>(sample.size()) != grid.size()) {
    throw std::invalid_argument("center_outward: sample size must equal grid size");
  }
  const TransportMap tm =
      solve_assignment(cost_matrix(sample, grid.points, TransportCostKind::kEuclideanSqHalf));
  std::vector<CenterOutwardRecord> records(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const int idx = tm.perm[i];
    CenterOutwardRecord& rec = records[i];
    rec.grid_index = idx;
    rec.rank = grid.rank_of(idx);
    rec.image = grid.points[idx];
    rec.sign.assign(grid.dim, 0.0);
    if (rec.rank > 0) {
      const double r = norm(rec.image);
      for (int k = 0; k < grid.dim; ++k) rec.sign[k] = rec.image[k] / r;
    }
  }
  return records;
}

Sample random_ball_transport(const Sample& sample, std::uint64_t seed) {
  const int n = static_cast<int>(sample.size());
  if (n < 1) throw std::invalid_argument("random_ball_transport: empty sample");
  const int d = static_cast<int>(sample[0].size());
  Rng rng(derive_seed(seed, "ball-grid"));
  Sample grid;
  grid.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vector v = rng.normal_vector(d);
    const double vn = norm(v);
    const double radius = rng.uniform();
    for (double& x : v) x *= radius / vn;
    grid.push_back(std::move(v));
  }
  const TransportMap tm =
      solve_assignment(cost_matrix(sample, grid, TransportCostKind::kEuclideanSqHalf));
  Sample images(n);
  for (int i = 0; i < n; ++i) images[i] = grid[tm.perm[i]];
  return images;
}

std::string ScoreSpec::name() const {
  std::string base;
  switch (kind) {
    case ScoreKind::kWilcoxon: base = "wilcoxon"; break;
    case ScoreKind::kVanDerWaerden: base = "van_der_waerden"; break;
    case ScoreKind::kSign: base = "sign"; break;
  }
  if (!biloop) return base;
  char c_str[48];
  std::snprintf(c_str, sizeof c_str, "%.17g", biloop_c);
  return "biloop:" + base + ":c=" + c_str;
}

std::array<double, 2> biloop_radial(double v, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("biloop_radial: c must be > 0");
  const double t = 2.0 * std::numbers::pi * std::tanh(v / c);
  return {c * (1.0 + std::cos(t + std::numbers::pi)), std::sin(t)};
}

namespace {
double plain_radial(ScoreKind kind, double u, int dim) {
  switch (kind) {
    case ScoreKind::kWilcoxon:
      return u;
    case ScoreKind::kVanDerWaerden:
      if (dim < 1) throw std::invalid_argument("apply_score: van der Waerden needs dim >= 1");
      return std::sqrt(chi2_quantile(u, dim));
    case ScoreKind::kSign:
      return 1.0;
  }
  throw std::invalid_argument("apply_score: unknown score kind");
}
}  // namespace

Vector apply_score(const CenterOutwardRecord& record, const ScoreSpec& spec, int n_r) {
  if (n_r < 1) throw std::invalid_argument("apply_score: n_r must be >= 1");
  const int d = static_cast<int>(record.sign.size());
  const double u = static_cast<double>(record.rank) / (n_r + 1);
  if (!spec.biloop) {
    const double radial = plain_radial(spec.kind, u, spec.dim);
    Vector out(d);
    for (int k = 0; k < d; ++k) out[k] = radial * record.sign[k];
    return out;
  }
  const auto psi = biloop_radial(plain_radial(spec.kind, u, spec.dim), spec.biloop_c);
  Vector out(2 * d);
  for (int k = 0; k < d; ++k) {
    out[k] = psi[0] * record.sign[k];
    out[d + k] = psi[1] * record.sign[k];
  }
  return out;
}

}  // namespace otdcov
