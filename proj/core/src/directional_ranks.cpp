#include "otdcov/directional_ranks.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "otdcov/assignment.hpp"
#include "otdcov/special_functions.hpp"

namespace otdcov {

namespace {
Sample coords_of(const std::vector<UnitDirection>& points) {
  Sample out;
  out.reserve(points.size());
  for (const UnitDirection& p : points) out.push_back(p.coords());
  return out;
}
}  // namespace

Step1Result step1_transport(const std::vector<UnitDirection>& sample, std::uint64_t seed) {
  const int n = static_cast<int>(sample.size());
  if (n < 2) throw std::invalid_argument("step1_transport: need at least two observations");
  const int d = sample[0].dim();

  Rng rng(derive_seed(seed, "step1-grid"));
  const std::vector<UnitDirection> grid = uniform_sphere(n, d, rng);
  const TransportMap tm = solve_assignment(
      cost_matrix(coords_of(sample), coords_of(grid), TransportCostKind::kGeodesicSqHalf));

  std::vector<UnitDirection> images;
  images.reserve(n);
  for (int i = 0; i < n; ++i) images.push_back(grid[tm.perm[i]]);

  const FrechetMeanResult fm = frechet_mean(sample);
  int nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double dist = geodesic_distance(sample[i], fm.mean);
    if (dist < best) {
      best = dist;
      nearest = i;
    }
  }
  UnitDirection pole = grid[tm.perm[nearest]];
  return {std::move(images), std::move(pole), nearest, fm.converged};
}

LatitudeLongitude latitude_longitude(const UnitDirection& image, const UnitDirection& pole) {
  if (image.dim() != pole.dim()) {
    throw std::invalid_argument("latitude_longitude: dimension mismatch");
  }
  const double c = dot(image.coords(), pole.coords());
  LatitudeLongitude out;
  out.latitude = 1.0 - c;
  Vector perp(image.dim());
  for (int k = 0; k < image.dim(); ++k) perp[k] = image[k] - c * pole[k];
  if (norm(perp) >= 1e-9) out.longitude = UnitDirection(std::move(perp));
  return out;
}

SphereGrid build_sphere_grid(const UnitDirection& pole, int n_r, int n_s, int n_0,
                             std::uint64_t seed) {
  const int d = pole.dim();
  if (n_r < 1 || n_s < 1 || n_0 < 0 || n_0 >= std::min(n_r, n_s)) {
    throw std::invalid_argument("build_sphere_grid: need n_r, n_s >= 1 and n_0 < min(n_r, n_s)");
  }
  if (d == 2 && n_s > 2) {
    throw std::invalid_argument("build_sphere_grid: d = 2 admits at most two meridians");
  }

  const std::vector<UnitDirection> basis = equatorial_basis(pole);

  std::vector<UnitDirection> longitudes;
  longitudes.reserve(n_s);
  if (d == 2) {
    longitudes.push_back(basis[0]);
    if (n_s == 2) longitudes.push_back(basis[0].antipode());
  } else if (d == 3) {
    for (int k = 0; k < n_s; ++k) {
      const double a = 2.0 * std::numbers::pi * k / n_s;
      Vector v(d);
      for (int i = 0; i < d; ++i) v[i] = std::cos(a) * basis[0][i] + std::sin(a) * basis[1][i];
      longitudes.emplace_back(std::move(v));
    }
  } else {
    Rng rng(derive_seed(seed, "meridians"));
    for (int k = 0; k < n_s; ++k) {
      const Vector g = rng.normal_vector(d - 1);
      Vector v(d, 0.0);
      for (int b = 0; b < d - 1; ++b) {
        for (int i = 0; i < d; ++i) v[i] += g[b] * basis[b][i];
      }
      longitudes.emplace_back(std::move(v));
    }
  }

  SphereGrid grid{pole, n_r, n_s, n_0, d, {}, {}, std::move(longitudes)};
  grid.parallel_latitudes.reserve(n_r);
  grid.points.reserve(n_r * n_s + n_0);
  for (int r = 1; r <= n_r; ++r) {
    const double u = cap_quantile(1.0 - static_cast<double>(r) / (n_r + 1), d);
    grid.parallel_latitudes.push_back(u);
    const double sine = std::sqrt(std::max(0.0, 1.0 - u * u));
    for (int s = 0; s < n_s; ++s) {
      Vector p(d);
      for (int i = 0; i < d; ++i) p[i] = u * pole[i] + sine * grid.meridian_longitudes[s][i];
      grid.points.emplace_back(std::move(p));
    }
  }
  for (int k = 0; k < n_0; ++k) grid.points.push_back(pole);
  return grid;
}

std::vector<DirectionalRankSign> step2_transport(const std::vector<UnitDirection>& sample,
                                                 const SphereGrid& grid) {
  if (static_cast<int>(sample.size()) != grid.size()) {
    throw std::invalid_argument("step2_transport: sample size must equal grid size");
  }
  const TransportMap tm = solve_assignment(
      cost_matrix(coords_of(sample), coords_of(grid.points), TransportCostKind::kGeodesicSqHalf));

  std::vector<DirectionalRankSign> records;
  records.reserve(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const int idx = tm.perm[i];
    const int rank = grid.rank_of(idx);
    DirectionalRankSign rec{rank, Vector(grid.dim, 0.0), grid.points[idx], 0.0, grid.pole, idx};
    if (rank > 0) rec.sign = grid.meridian_longitudes[grid.meridian_of(idx)].coords();
    rec.latitude = 1.0 - dot(rec.image.coords(), grid.pole.coords());
    records.push_back(std::move(rec));
  }
  return records;
}

Vector tangent_embed(const DirectionalRankSign& rs, RadialScore radial, const SphereGrid& grid) {
  const double u = static_cast<double>(rs.rank) / (grid.n_r + 1);
  double scale = 0.0;
  switch (radial) {
    case RadialScore::kWilcoxon:
      scale = u;
      break;
    case RadialScore::kVanDerWaerden:
      scale = std::sqrt(chi2_quantile(u, grid.dim - 1));
      break;
    case RadialScore::kSignTest:
      scale = 1.0;  // rank-0 records still embed to zero through the zero sign
      break;
  }
  Vector out(grid.dim);
  for (int k = 0; k < grid.dim; ++k) out[k] = scale * rs.sign[k];
  return out;
}

Vector chart_embed(const UnitDirection& image, const UnitDirection& pole, ChartKind chart) {
  const TangentVector v = log_map(pole, image);  // throws domain_error at the antipode
  const std::vector<UnitDirection> basis = equatorial_basis(pole);
  const double scale = chart == ChartKind::kAzimuthalEquidistantNormalized
                           ? 1.0 / std::numbers::pi
                           : 1.0;
  Vector out(pole.dim() - 1);
  for (int b = 0; b < pole.dim() - 1; ++b) {
    out[b] = scale * dot(v.components(), basis[b].coords());
  }
  return out;
}

std::vector<UnitDirection> equatorial_basis(const UnitDirection& pole) {
  const int d = pole.dim();
  const Rotation to_pole(UnitDirection::axis(d, d - 1), pole);
  std::vector<UnitDirection> basis;
  basis.reserve(d - 1);
  for (int k = 0; k < d - 1; ++k) basis.push_back(to_pole.apply(UnitDirection::axis(d, k)));
  return basis;
}

}  // namespace otdcov
