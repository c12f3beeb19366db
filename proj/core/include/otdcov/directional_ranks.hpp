#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "otdcov/center_outward.hpp"
#include "otdcov/geometry.hpp"

namespace otdcov {

/// Step 1 of the empirical directional distribution function: optimal
/// transport of the sample to a random uniform grid, plus pole estimation.
struct Step1Result {
  std::vector<UnitDirection> images;  // grid point assigned to each observation
  UnitDirection pole;                 // image of the sample point nearest the Frechet mean
  int pole_sample_index = 0;
  bool frechet_converged = true;
};

Step1Result step1_transport(const std::vector<UnitDirection>& sample, std::uint64_t seed);

struct LatitudeLongitude {
  double latitude = 0.0;  // 1 - <image, pole>, in [0, 2]
  std::optional<UnitDirection> longitude;  // unset when image = +/- pole
};

/// Latitude of an image and the intersection of its meridian with the
/// equator of `pole` (a unit vector orthogonal to the pole).
LatitudeLongitude latitude_longitude(const UnitDirection& image, const UnitDirection& pole);

/// Meridian/parallel grid on S^{d-1} around a pole. Parallels sit at cap
/// quantiles so the cap above parallel r carries uniform mass r/(n_r+1).
/// Points are ordered parallel-major (r outermost), pole copies last.
struct SphereGrid {
  UnitDirection pole;
  int n_r = 0, n_s = 0, n_0 = 0;
  int dim = 0;
  std::vector<UnitDirection> points;
  std::vector<double> parallel_latitudes;          // u_r = <point(r,.), pole>, r = 1..n_r
  std::vector<UnitDirection> meridian_longitudes;  // unit vectors orthogonal to the pole

  int size() const { return static_cast<int>(points.size()); }
  int rank_of(int idx) const { return idx < n_r * n_s ? idx / n_s + 1 : 0; }
  int meridian_of(int idx) const { return idx < n_r * n_s ? idx % n_s : -1; }
};

/// Meridians: d = 3 uses n_s equispaced equatorial angles anchored at a
/// deterministic reference axis; d > 3 draws them i.i.d. uniform on the
/// equatorial sphere; d = 2 degenerates to at most two half-circles.
SphereGrid build_sphere_grid(const UnitDirection& pole, int n_r, int n_s, int n_0,
                             std::uint64_t seed);

/// Directional rank, sign, and image of one observation after Step 2.
struct DirectionalRankSign {
  int rank = 0;           // parallel index, 0 for pole copies
  Vector sign;            // equatorial longitude of the image; zero for pole copies
  UnitDirection image;
  double latitude = 0.0;
  UnitDirection pole_used;
  int grid_index = 0;
};

/// Step 2: optimal transport of the sample to the meridian/parallel grid
/// under half squared geodesic cost.
std::vector<DirectionalRankSign> step2_transport(const std::vector<UnitDirection>& sample,
                                                 const SphereGrid& grid);

enum class RadialScore { kWilcoxon, kVanDerWaerden, kSignTest };

/// Tangent-space score embedding at the pole: the sign scaled by the radial
/// score of u = rank/(n_r+1) (wilcoxon u, van der Waerden sqrt of the
/// chi-square_{d-1} quantile, sign-test 1). Returns a d-dimensional vector
/// in the pole's equatorial hyperplane; pole copies map to zero.
Vector tangent_embed(const DirectionalRankSign& rs, RadialScore radial, const SphereGrid& grid);

enum class ChartKind { kAzimuthalEquidistant, kAzimuthalEquidistantNormalized };

/// Coordinates of log_map(pole, image) in the deterministic equatorial
/// basis of the pole: a bijection from S^{d-1} minus the pole's antipode
/// onto the open ball of radius pi (radius 1 for the normalized variant).
Vector chart_embed(const UnitDirection& image, const UnitDirection& pole, ChartKind chart);

/// Deterministic orthonormal basis of the equatorial hyperplane of `pole`:
/// the images of the first d-1 canonical axes under the rotation taking the
/// canonical pole e_d to `pole`.
std::vector<UnitDirection> equatorial_basis(const UnitDirection& pole);

}  // namespace otdcov
