#include "otdcov/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "otdcov/parallel.hpp"
#include "otdcov/rng.hpp"
#include "otdcov/special_functions.hpp"

namespace otdcov {

namespace {

std::uint64_t margin_seed(std::uint64_t base, bool x_side) {
  return derive_seed(base, x_side ? "x-margin" : "y-margin");
}

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fnv_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int checked_pair_size(const Sample& x, const Sample& y) {
  if (x.size() != y.size()) throw std::invalid_argument("paired sample sizes differ");
  if (x.empty()) throw std::invalid_argument("empty paired sample");
  if (static_cast<int>(x.size()) > kMaxSampleSize) {
    throw std::invalid_argument("sample size exceeds the configured cap of 20000");
  }
  return static_cast<int>(x.size());
}

std::vector<UnitDirection> to_unit_sample(const Sample& rows, const char* side) {
  std::vector<UnitDirection> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (std::abs(norm(rows[i]) - 1.0) > 1e-6) {
      throw std::invalid_argument(std::string("sphere sample ") + side + ": row " +
                                  std::to_string(i) + " is not a unit vector");
    }
    out.emplace_back(rows[i]);
  }
  return out;
}

RadialScore to_radial(SphereMargin m) {
  switch (m) {
    case SphereMargin::kWilcoxon: return RadialScore::kWilcoxon;
    case SphereMargin::kVanDerWaerden: return RadialScore::kVanDerWaerden;
    case SphereMargin::kSignTest: return RadialScore::kSignTest;
    case SphereMargin::kChart: break;
  }
  throw std::invalid_argument("chart margin has no radial score");
}

double n_dcov_sq(const Sample& ex, const Sample& ey, std::vector<std::string>* flags) {
  const DoubleCenteredMatrix ax = double_center(pairwise_distances(ex, Metric::kEuclidean));
  const DoubleCenteredMatrix ay = double_center(pairwise_distances(ey, Metric::kEuclidean));
  if (flags) {
    if (dcov_sq(ax, ax) == 0.0) flags->push_back("degenerate_margin_x");
    if (dcov_sq(ay, ay) == 0.0) flags->push_back("degenerate_margin_y");
  }
  return static_cast<double>(ex.size()) * dcov_sq(ax, ay);
}

// Draw from the vMF(mu, kappa) law; Wood's rejection scheme for the cosine.
double gamma_draw(double a, Rng& rng) {
  if (a < 1.0) {
    const double u = rng.uniform_open();
    return gamma_draw(a + 1.0, rng) * std::pow(u, 1.0 / a);
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

double beta_draw(double a, double b, Rng& rng) {
  const double g1 = gamma_draw(a, rng);
  const double g2 = gamma_draw(b, rng);
  return g1 / (g1 + g2);
}

UnitDirection vmf_one(const UnitDirection& mu, double kappa, Rng& rng) {
  const int d = mu.dim();
  if (kappa == 0.0) return UnitDirection(rng.normal_vector(d));
  const double dm1 = d - 1.0;
  const double b = (-2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1)) / dm1;
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);
  double w;
  for (;;) {
    const double z = beta_draw(0.5 * dm1, 0.5 * dm1, rng);
    const double u = rng.uniform_open();
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
  }
  Vector g;
  double gn = 0.0;
  do {
    g = rng.normal_vector(d);
    const double proj = dot(g, mu.coords());
    for (int k = 0; k < d; ++k) g[k] -= proj * mu[k];
    gn = norm(g);
  } while (gn < 1e-12);
  const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
  Vector out(d);
  for (int k = 0; k < d; ++k) out[k] = w * mu[k] + s * g[k] / gn;
  return UnitDirection(std::move(out));
}

}  // namespace

std::string to_string(Space space) {
  return space == Space::kEuclidean ? "euclidean" : "sphere";
}

std::string to_string(Variant variant) {
  return variant == Variant::kTwoStep ? "two_step" : "step1_only";
}

std::string to_string(SphereMargin margin) {
  switch (margin) {
    case SphereMargin::kWilcoxon: return "wilcoxon";
    case SphereMargin::kVanDerWaerden: return "van_der_waerden";
    case SphereMargin::kSignTest: return "sign_test";
    case SphereMargin::kChart: return "chart";
  }
  return "?";
}

std::string to_string(ChartKind chart) {
  return chart == ChartKind::kAzimuthalEquidistant ? "azimuthal_equidistant"
                                                   : "azimuthal_equidistant_normalized";
}

std::string TestConfig::null_key(int n, int d1, int d2) const {
  std::ostringstream out;
  out << "space=" << to_string(space) << ";variant=" << to_string(variant);
  if (space == Space::kEuclidean) {
    out << ";sx=" << scores_x.name() << ";sy=" << scores_y.name();
  } else {
    out << ";sx=" << to_string(sphere_x) << ";sy=" << to_string(sphere_y);
  }
  out << ";chart=" << to_string(chart) << ";n=" << n << ";dx=" << d1 << ";dy=" << d2
      << ";draws=" << n_null_draws << ";seed=" << seed;
  return out.str();
}

std::string TestConfig::fingerprint(int n, int d1, int d2) const {
  return null_key(n, d1, d2) + ";alpha=" + format_double(alpha);
}

EuclideanStat rank_dcov_euclidean(const Sample& x, const Sample& y, const TestConfig& cfg) {
  if (cfg.space != Space::kEuclidean) {
    throw std::invalid_argument("rank_dcov_euclidean: configuration space must be euclidean");
  }
  const int n = checked_pair_size(x, y);
  if (n < 4) throw std::invalid_argument("rank_dcov_euclidean: need n >= 4");
  const int d1 = static_cast<int>(x[0].size());
  const int d2 = static_cast<int>(y[0].size());

  const BallGrid gx = make_ball_grid(n, d1, margin_seed(cfg.seed, true));
  const BallGrid gy = make_ball_grid(n, d2, margin_seed(cfg.seed, false));
  EuclideanStat out;
  out.records_x = center_outward(x, gx);
  out.records_y = center_outward(y, gy);

  ScoreSpec sx = cfg.scores_x;
  if (sx.dim == 0) sx.dim = d1;
  ScoreSpec sy = cfg.scores_y;
  if (sy.dim == 0) sy.dim = d2;

  // Canonical observation order (ascending X grid label): two datasets that
  // realize the same pairing of grid labels produce bit-identical statistics.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return out.records_x[a].grid_index < out.records_x[b].grid_index; });

  out.embed_x.reserve(n);
  out.embed_y.reserve(n);
  for (const int i : order) {
    out.embed_x.push_back(apply_score(out.records_x[i], sx, gx.n_r));
    out.embed_y.push_back(apply_score(out.records_y[i], sy, gy.n_r));
  }
  out.statistic = n_dcov_sq(out.embed_x, out.embed_y, &out.flags);
  return out;
}

DirectionalStat directional_dcov(const std::vector<UnitDirection>& x,
                                 const std::vector<UnitDirection>& y, const TestConfig& cfg) {
  if (cfg.space != Space::kSphere) {
    throw std::invalid_argument("directional_dcov: configuration space must be sphere");
  }
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("directional_dcov: paired samples must be nonempty, equal length");
  }
  const int n = static_cast<int>(x.size());
  if (n > kMaxSampleSize) throw std::invalid_argument("directional_dcov: sample too large");

  const Step1Result s1x = step1_transport(x, margin_seed(cfg.seed, true));
  const Step1Result s1y = step1_transport(y, margin_seed(cfg.seed, false));

  std::vector<std::string> flags;
  if (!s1x.frechet_converged) flags.push_back("frechet_nonconvergence_x");
  if (!s1y.frechet_converged) flags.push_back("frechet_nonconvergence_y");

  const auto check_collision = [](const std::vector<UnitDirection>& sample,
                                  const UnitDirection& pole, const char* side) {
    const UnitDirection anti = pole.antipode();
    for (std::size_t i = 0; i < sample.size(); ++i) {
      if (geodesic_distance(sample[i], anti) < 1e-9) {
        throw std::domain_error(std::string("pole collision on ") + side + " margin: observation " +
                                std::to_string(i) + " is antipodal to the estimated pole");
      }
    }
  };
  check_collision(x, s1x.pole, "x");
  check_collision(y, s1y.pole, "y");

  Sample ex, ey;
  std::vector<DirectionalRankSign> rx, ry;
  if (cfg.variant == Variant::kStep1Only) {
    ex.reserve(n);
    ey.reserve(n);
    for (int i = 0; i < n; ++i) {
      ex.push_back(chart_embed(s1x.images[i], s1x.pole, cfg.chart));
      ey.push_back(chart_embed(s1y.images[i], s1y.pole, cfg.chart));
    }
  } else {
    if (n < 4) throw std::invalid_argument("directional_dcov: two-step variant needs n >= 4");
    const Factorization f = factorize_n(n);
    const SphereGrid gx =
        build_sphere_grid(s1x.pole, f.n_r, f.n_s, f.n_0, margin_seed(cfg.seed, true));
    const SphereGrid gy =
        build_sphere_grid(s1y.pole, f.n_r, f.n_s, f.n_0, margin_seed(cfg.seed, false));
    rx = step2_transport(x, gx);
    ry = step2_transport(y, gy);

    if (f.n_0 > 0 && cfg.sphere_x == SphereMargin::kSignTest) flags.push_back("sign_test_rank0_x");
    if (f.n_0 > 0 && cfg.sphere_y == SphereMargin::kSignTest) flags.push_back("sign_test_rank0_y");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return rx[a].grid_index < rx[b].grid_index; });

    const auto embed = [&](const DirectionalRankSign& rec, SphereMargin m, const SphereGrid& g) {
      if (m == SphereMargin::kChart) return chart_embed(rec.image, g.pole, cfg.chart);
      return tangent_embed(rec, to_radial(m), g);
    };
    ex.reserve(n);
    ey.reserve(n);
    for (const int i : order) {
      ex.push_back(embed(rx[i], cfg.sphere_x, gx));
      ey.push_back(embed(ry[i], cfg.sphere_y, gy));
    }
  }

  const double stat = n_dcov_sq(ex, ey, &flags);
  return {stat, std::move(ex), std::move(ey), std::move(rx), std::move(ry),
          s1x.pole, s1y.pole, std::move(flags)};
}

std::pair<Sample, Sample> null_grid_embeddings(const TestConfig& cfg, int n, int d1, int d2) {
  if (cfg.variant == Variant::kStep1Only) {
    throw std::invalid_argument(
        "null_grid_embeddings: step1-only embeddings depend on the realized sample");
  }
  if (cfg.space == Space::kEuclidean) {
    const auto embed_margin = [&](int d, bool x_side, ScoreSpec spec) {
      const BallGrid g = make_ball_grid(n, d, margin_seed(cfg.seed, x_side));
      if (spec.dim == 0) spec.dim = d;
      Sample e;
      e.reserve(g.size());
      for (int k = 0; k < g.size(); ++k) {
        CenterOutwardRecord rec;
        rec.grid_index = k;
        rec.rank = g.rank_of(k);
        rec.image = g.points[k];
        rec.sign.assign(d, 0.0);
        if (rec.rank > 0) {
          const double r = norm(rec.image);
          for (int c = 0; c < d; ++c) rec.sign[c] = rec.image[c] / r;
        }
        e.push_back(apply_score(rec, spec, g.n_r));
      }
      return e;
    };
    return {embed_margin(d1, true, cfg.scores_x), embed_margin(d2, false, cfg.scores_y)};
  }

  const auto embed_margin = [&](int d, bool x_side, SphereMargin m) {
    const Factorization f = factorize_n(n);
    const SphereGrid g = build_sphere_grid(UnitDirection::axis(d, d - 1), f.n_r, f.n_s, f.n_0,
                                           margin_seed(cfg.seed, x_side));
    Sample e;
    e.reserve(g.size());
    for (int k = 0; k < g.size(); ++k) {
      DirectionalRankSign rec{g.rank_of(k), Vector(d, 0.0), g.points[k], 0.0, g.pole, k};
      if (rec.rank > 0) rec.sign = g.meridian_longitudes[g.meridian_of(k)].coords();
      rec.latitude = 1.0 - dot(rec.image.coords(), g.pole.coords());
      if (m == SphereMargin::kChart) {
        e.push_back(chart_embed(rec.image, g.pole, cfg.chart));
      } else {
        e.push_back(tangent_embed(rec, to_radial(m), g));
      }
    }
    return e;
  };
  return {embed_margin(d1, true, cfg.sphere_x), embed_margin(d2, false, cfg.sphere_y)};
}

std::vector<double> permutation_null(const Sample& ex, const Sample& ey, int draws,
                                     std::uint64_t seed) {
  if (ex.size() != ey.size() || ex.empty()) {
    throw std::invalid_argument("permutation_null: embeddings must be nonempty, equal length");
  }
  if (draws < 1) throw std::invalid_argument("permutation_null: need at least one draw");
  const int n = static_cast<int>(ex.size());
  const DoubleCenteredMatrix ax = double_center(pairwise_distances(ex, Metric::kEuclidean));
  const DoubleCenteredMatrix ay = double_center(pairwise_distances(ey, Metric::kEuclidean));

  std::vector<double> out(draws);
  parallel_for(draws, [&](int k) {
    Rng rng(derive_seed(seed, "draw", static_cast<std::uint64_t>(k)));
    const std::vector<int> sigma = rng.permutation(n);
    Vector rowsum(n);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += ax(i, j) * ay(sigma[i], sigma[j]);
      rowsum[i] = s;
    }
    const double total = pairwise_sum(rowsum);
    out[k] = n * std::max(0.0, total / (static_cast<double>(n) * n));
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> null_distribution(const TestConfig& cfg, int n, int d1, int d2) {
  if (cfg.n_null_draws < 99) {
    throw std::invalid_argument("null_distribution: need at least 99 draws");
  }
  const auto [ex, ey] = null_grid_embeddings(cfg, n, d1, d2);
  return permutation_null(ex, ey, cfg.n_null_draws, derive_seed(cfg.seed, "null"));
}

double p_value(double statistic, const std::vector<double>& sorted_draws) {
  if (sorted_draws.empty()) throw std::invalid_argument("p_value: empty null draws");
  const auto it = std::lower_bound(sorted_draws.begin(), sorted_draws.end(), statistic);
  const auto ge = sorted_draws.end() - it;
  return (1.0 + static_cast<double>(ge)) / (static_cast<double>(sorted_draws.size()) + 1.0);
}

double critical_value(double alpha, const std::vector<double>& sorted_draws) {
  if (sorted_draws.empty()) throw std::invalid_argument("critical_value: empty null draws");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("critical_value: alpha in (0,1)");
  const int m = static_cast<int>(sorted_draws.size());
  int lo = 0, hi = m;  // first index whose draw already satisfies p <= alpha
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (p_value(sorted_draws[mid], sorted_draws) <= alpha) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo < m ? sorted_draws[lo] : std::numeric_limits<double>::infinity();
}

std::vector<UnitDirection> sample_uniform_sphere(int n, int d, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "uniform-sphere"));
  return uniform_sphere(n, d, rng);
}

std::vector<UnitDirection> sample_vmf(int n, const UnitDirection& mu, double kappa,
                                      std::uint64_t seed) {
  if (kappa < 0.0 || !std::isfinite(kappa)) {
    throw std::invalid_argument("sample_vmf: kappa must be finite and >= 0");
  }
  Rng rng(derive_seed(seed, "vmf"));
  std::vector<UnitDirection> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(vmf_one(mu, kappa, rng));
  return out;
}

const std::vector<double>& NullTableCache::get_or_compute(
    const std::string& key, const std::function<std::vector<double>()>& compute) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (const auto it = tables_.find(key); it != tables_.end()) return it->second;
  if (directory_) {
    const std::filesystem::path path =
        std::filesystem::path(*directory_) / (fnv_hex(key) + ".null");
    if (std::filesystem::exists(path)) {
      NullTableFile file = read_null_table(path.string());
      if (file.fingerprint == key) {
        return tables_.emplace(key, std::move(file.draws)).first->second;
      }
    }
  }
  std::vector<double> table = compute();
  if (directory_) {
    std::filesystem::create_directories(*directory_);
    const std::filesystem::path path =
        std::filesystem::path(*directory_) / (fnv_hex(key) + ".null");
    write_null_table(path.string(), key, table);
  }
  return tables_.emplace(key, std::move(table)).first->second;
}

TestReport run_test(const Sample& x, const Sample& y, const TestConfig& cfg,
                    NullTableCache* cache) {
  const int n = checked_pair_size(x, y);
  if (cfg.n_null_draws < 99) throw std::invalid_argument("run_test: need n_null_draws >= 99");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw std::invalid_argument("run_test: alpha must lie in (0, 1)");
  }
  const int d1 = static_cast<int>(x[0].size());
  const int d2 = static_cast<int>(y[0].size());

  double stat = 0.0;
  std::vector<std::string> flags;
  Sample realized_x, realized_y;  // step1-only: embeddings that seed the per-dataset null
  if (cfg.space == Space::kEuclidean) {
    EuclideanStat s = rank_dcov_euclidean(x, y, cfg);
    stat = s.statistic;
    flags = std::move(s.flags);
  } else {
    DirectionalStat s =
        directional_dcov(to_unit_sample(x, "x"), to_unit_sample(y, "y"), cfg);
    stat = s.statistic;
    flags = std::move(s.flags);
    if (cfg.variant == Variant::kStep1Only) {
      realized_x = std::move(s.embed_x);
      realized_y = std::move(s.embed_y);
    }
  }

  std::vector<double> local_table;
  const std::vector<double>* draws = nullptr;
  if (cfg.space == Space::kSphere && cfg.variant == Variant::kStep1Only) {
    // The data-driven pole makes these embeddings sample-dependent; the null
    // is re-simulated per dataset and never cached.
    local_table =
        permutation_null(realized_x, realized_y, cfg.n_null_draws, derive_seed(cfg.seed, "null"));
    draws = &local_table;
  } else if (cache) {
    draws = &cache->get_or_compute(cfg.null_key(n, d1, d2),
                                   [&] { return null_distribution(cfg, n, d1, d2); });
  } else {
    local_table = null_distribution(cfg, n, d1, d2);
    draws = &local_table;
  }

  const double p = p_value(stat, *draws);
  const double crit = critical_value(cfg.alpha, *draws);
  if (!std::isfinite(crit)) flags.push_back("alpha_below_null_lattice");
  return {stat, p, crit, n, cfg.alpha, cfg.fingerprint(n, d1, d2), cfg.seed, std::move(flags)};
}

std::string Scenario::name() const {
  switch (kind) {
    case Kind::kIndependent: return "independent";
    case Kind::kRotationDependence: return "rotation_dependence";
    case Kind::kCopula: return "copula";
  }
  return "?";
}

namespace {
std::pair<Sample, Sample> scenario_data(const Scenario& sc, Space space, int n,
                                        std::uint64_t base_seed) {
  Rng rx(derive_seed(base_seed, "x"));
  Rng ry(derive_seed(base_seed, "y"));
  Sample x(n), y(n);
  switch (sc.kind) {
    case Scenario::Kind::kIndependent: {
      for (int i = 0; i < n; ++i) {
        if (space == Space::kSphere) {
          Vector gx = rx.normal_vector(sc.d1);
          const double nx = norm(gx);
          for (double& v : gx) v /= nx;
          x[i] = std::move(gx);
          Vector gy = ry.normal_vector(sc.d2);
          const double ny = norm(gy);
          for (double& v : gy) v /= ny;
          y[i] = std::move(gy);
        } else {
          x[i] = rx.normal_vector(sc.d1);
          y[i] = ry.normal_vector(sc.d2);
        }
      }
      break;
    }
    case Scenario::Kind::kRotationDependence: {
      if (space != Space::kSphere || sc.d1 != sc.d2) {
        throw std::invalid_argument("rotation_dependence scenario needs sphere data, d1 = d2");
      }
      const Rotation rot(UnitDirection::axis(sc.d1, 0), UnitDirection::axis(sc.d1, 1));
      for (int i = 0; i < n; ++i) {
        Vector gx = rx.normal_vector(sc.d1);
        const double nx = norm(gx);
        for (double& v : gx) v /= nx;
        const UnitDirection xi(gx);
        const UnitDirection target = rot.apply(xi);
        x[i] = xi.coords();
        y[i] = sc.noise_kappa > 0.0 ? vmf_one(target, sc.noise_kappa, ry).coords()
                                    : target.coords();
      }
      break;
    }
    case Scenario::Kind::kCopula: {
      if (space != Space::kEuclidean) {
        throw std::invalid_argument("copula scenario needs euclidean data");
      }
      if (!(sc.copula_r > -1.0 && sc.copula_r < 1.0)) {
        throw std::invalid_argument("copula scenario needs r in (-1, 1)");
      }
      const double r = sc.copula_r;
      const double t = std::sqrt(1.0 - r * r);
      const int shared = std::min(sc.d1, sc.d2);
      for (int i = 0; i < n; ++i) {
        x[i] = rx.normal_vector(sc.d1);
        y[i] = Vector(sc.d2);
        for (int j = 0; j < sc.d2; ++j) {
          y[i][j] = j < shared ? r * x[i][j] + t * ry.normal() : ry.normal();
        }
      }
      break;
    }
  }
  return {std::move(x), std::move(y)};
}
}  // namespace

std::vector<PowerRow> power_study(const Scenario& scenario, const std::vector<int>& sizes,
                                  const TestConfig& cfg, int replications, NullTableCache* cache) {
  if (replications < 100) {
    throw std::invalid_argument("power_study: need at least 100 replications");
  }
  NullTableCache local_cache;
  if (!cache) cache = &local_cache;

  std::vector<PowerRow> rows;
  rows.reserve(sizes.size());
  for (const int n : sizes) {
    // Warm the shared null table once so worker threads all hit the cache.
    if (!(cfg.space == Space::kSphere && cfg.variant == Variant::kStep1Only)) {
      cache->get_or_compute(cfg.null_key(n, scenario.d1, scenario.d2),
                            [&] { return null_distribution(cfg, n, scenario.d1, scenario.d2); });
    }
    std::vector<char> rejected(replications, 0);
    const std::uint64_t size_seed = derive_seed(cfg.seed, "power-n", static_cast<std::uint64_t>(n));
    parallel_for(replications, [&](int r) {
      const std::uint64_t rep_seed = derive_seed(size_seed, "power-rep", static_cast<std::uint64_t>(r));
      const auto [x, y] = scenario_data(scenario, cfg.space, n, rep_seed);
      const TestReport report = run_test(x, y, cfg, cache);
      rejected[r] = report.p_value <= cfg.alpha ? 1 : 0;
    });
    const int hits = static_cast<int>(std::count(rejected.begin(), rejected.end(), 1));
    const double rate = static_cast<double>(hits) / replications;
    rows.push_back({scenario.name(), n, hits, replications, rate,
                    std::sqrt(rate * (1.0 - rate) / replications)});
  }
  return rows;
}

void write_null_table(const std::string& path, const std::string& fingerprint,
                      const std::vector<double>& draws) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_null_table: cannot open " + path);
  out << "otdcov-null v1 " << fingerprint << "\n";
  char buf[48];
  for (const double v : draws) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  }
  out.flush();
  if (!out) throw std::runtime_error("write_null_table: write failed for " + path);
}

NullTableFile read_null_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_null_table: cannot open " + path);
  std::string header;
  std::getline(in, header);
  const std::string prefix = "otdcov-null v1 ";
  if (header.rfind(prefix, 0) != 0) {
    throw std::runtime_error("read_null_table: bad header in " + path);
  }
  NullTableFile file;
  file.fingerprint = header.substr(prefix.size());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    file.draws.push_back(std::stod(line));
  }
  if (!std::is_sorted(file.draws.begin(), file.draws.end())) {
    throw std::runtime_error("read_null_table: draws are not sorted in " + path);
  }
  return file;
}

}  // namespace otdcov
