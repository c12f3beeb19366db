#include "otdcov/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <doctest.h>
#include <filesystem>
#include <fstream>
#include <set>

#include "otdcov/parallel.hpp"
#include "otdcov/rng.hpp"
#include "support/ks.hpp"

using namespace otdcov;

namespace {

Sample gaussian_sample(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Sample s(n);
  for (Vector& p : s) p = rng.normal_vector(d);
  return s;
}

Sample sphere_rows(int n, int d, std::uint64_t seed) {
  Sample s;
  for (const UnitDirection& u : sample_uniform_sphere(n, d, seed)) s.push_back(u.coords());
  return s;
}

TestConfig sphere_config(std::uint64_t seed) {
  TestConfig cfg;
  cfg.space = Space::kSphere;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("euclidean statistic: nonnegative, needs n >= 4") {
  TestConfig cfg;
  cfg.seed = 3;
  for (int rep = 0; rep < 5; ++rep) {
    const Sample x = gaussian_sample(16, 2, 100 + rep);
    const Sample y = gaussian_sample(16, 3, 200 + rep);
    CHECK(rank_dcov_euclidean(x, y, cfg).statistic >= 0.0);
  }
  CHECK_THROWS_AS(rank_dcov_euclidean(gaussian_sample(3, 1, 1), gaussian_sample(3, 1, 2), cfg),
                  std::invalid_argument);
}

TEST_CASE("univariate wilcoxon statistic depends on the data only through ranks") {
  TestConfig cfg;
  cfg.seed = 9;
  const Sample x = gaussian_sample(16, 1, 5);
  const Sample y = gaussian_sample(16, 1, 6);
  const double base = rank_dcov_euclidean(x, y, cfg).statistic;

  // Strictly monotone transform of the Y values: same ranks, same statistic.
  Sample y_warped = y;
  for (Vector& v : y_warped) v[0] = std::exp(v[0]) + 0.5 * v[0];
  CHECK(rank_dcov_euclidean(x, y_warped, cfg).statistic == base);
}

TEST_CASE("perfect dependence exceeds the 0.99 null quantile (euclidean)") {
  TestConfig cfg;
  cfg.seed = 12;
  const Sample x = gaussian_sample(64, 2, 77);
  const double stat = rank_dcov_euclidean(x, x, cfg).statistic;
  const std::vector<double> null = null_distribution(cfg, 64, 2, 2);
  CHECK(stat > null[static_cast<std::size_t>(0.99 * null.size())]);

  // Monotonicity sanity: dependence pushes the statistic past the null median
  for (const std::uint64_t s : {1ULL, 2ULL, 3ULL}) {
    TestConfig c2;
    c2.seed = s;
    const Sample xs = gaussian_sample(32, 2, 1000 + s);
    const double dep = rank_dcov_euclidean(xs, xs, c2).statistic;
    const std::vector<double> nl = null_distribution(c2, 32, 2, 2);
    CHECK(dep >= nl[nl.size() / 2]);
  }
}

TEST_CASE("biloop margins double the embedding dimension and stay finite") {
  TestConfig cfg;
  cfg.seed = 21;
  cfg.scores_x = {ScoreKind::kWilcoxon, true, 1.0, 0};
  cfg.scores_y = {ScoreKind::kVanDerWaerden, true, 2.0, 0};
  const Sample x = gaussian_sample(20, 2, 31);
  const Sample y = gaussian_sample(20, 2, 32);
  const EuclideanStat s = rank_dcov_euclidean(x, y, cfg);
  CHECK(s.statistic >= 0.0);
  CHECK(std::isfinite(s.statistic));
  REQUIRE(!s.embed_x.empty());
  CHECK(s.embed_x[0].size() == 4);
  CHECK(s.embed_y[0].size() == 4);
}

TEST_CASE("statistic is bit-identical across joint relabelings (distribution-freeness)") {
  Rng rng(41);
  const int n = 24;

  TestConfig euclid;
  euclid.seed = 10;
  const Sample x = gaussian_sample(n, 2, 51);
  const Sample y = gaussian_sample(n, 2, 52);
  const double base = rank_dcov_euclidean(x, y, euclid).statistic;
  const std::vector<int> rho = rng.permutation(n);
  Sample xp(n), yp(n);
  for (int i = 0; i < n; ++i) {
    xp[i] = x[rho[i]];
    yp[i] = y[rho[i]];
  }
  CHECK(rank_dcov_euclidean(xp, yp, euclid).statistic == base);

  TestConfig sph = sphere_config(10);
  const Sample sx = sphere_rows(n, 3, 61);
  const Sample sy = sphere_rows(n, 3, 62);
  const double sphere_base = run_test(sx, sy, sph).statistic;
  Sample sxp(n), syp(n);
  const std::vector<int> rho2 = rng.permutation(n);
  for (int i = 0; i < n; ++i) {
    sxp[i] = sx[rho2[i]];
    syp[i] = sy[rho2[i]];
  }
  CHECK(run_test(sxp, syp, sph).statistic == sphere_base);
}

TEST_CASE("directional statistic: nonnegative, rotation dependence is detected") {
  TestConfig cfg = sphere_config(17);
  const auto x = sample_uniform_sphere(60, 3, 71);
  std::vector<UnitDirection> y;
  const Rotation rot(UnitDirection::axis(3, 0), UnitDirection::axis(3, 1));
  for (const auto& p : x) y.push_back(rot.apply(p));

  const DirectionalStat s = directional_dcov(x, y, cfg);
  CHECK(s.statistic >= 0.0);
  const std::vector<double> null = null_distribution(cfg, 60, 3, 3);
  CHECK(s.statistic > null[static_cast<std::size_t>(0.99 * null.size())]);
}

TEST_CASE("directional statistic is invariant under joint rotation of one margin's world") {
  // Assemble the two-step pipeline with explicit grids so the sample, the
  // step-1 grid, and the step-2 grid can all be rotated together.
  const int n = 24;
  const auto x = sample_uniform_sphere(n, 3, 81);
  const auto y = sample_uniform_sphere(n, 3, 82);

  const auto run_margin = [&](const std::vector<UnitDirection>& sample, const SphereGrid& grid2) {
    const auto records = step2_transport(sample, grid2);
    Sample embed;
    for (const auto& rec : records) {
      embed.push_back(tangent_embed(rec, RadialScore::kWilcoxon, grid2));
    }
    return embed;
  };

  const Factorization f = factorize_n(n);
  const UnitDirection pole = frechet_mean(x).mean;
  const SphereGrid gx = build_sphere_grid(pole, f.n_r, f.n_s, f.n_0, 7);
  const Sample ex = run_margin(x, gx);

  Rng rot_rng(97);
  const Rotation rot(UnitDirection(rot_rng.normal_vector(3)),
                     UnitDirection(rot_rng.normal_vector(3)));
  std::vector<UnitDirection> x_rot;
  for (const auto& p : x) x_rot.push_back(rot.apply(p));
  SphereGrid gx_rot{rot.apply(gx.pole), gx.n_r, gx.n_s, gx.n_0, gx.dim,
                    {},                 gx.parallel_latitudes, {}};
  for (const auto& p : gx.points) gx_rot.points.push_back(rot.apply(p));
  for (const auto& m : gx.meridian_longitudes) {
    gx_rot.meridian_longitudes.push_back(rot.apply(m));
  }
  const Sample ex_rot = run_margin(x_rot, gx_rot);

  const UnitDirection pole_y = frechet_mean(y).mean;
  const SphereGrid gy = build_sphere_grid(pole_y, f.n_r, f.n_s, f.n_0, 8);
  const Sample ey = run_margin(y, gy);

  const auto stat = [&](const Sample& a, const Sample& b) {
    const DoubleCenteredMatrix da(pairwise_distances(a, Metric::kEuclidean));
    const DoubleCenteredMatrix db(pairwise_distances(b, Metric::kEuclidean));
    return n * dcov_sq(da, db);
  };
  CHECK(stat(ex_rot, ey) == doctest::Approx(stat(ex, ey)).epsilon(1e-9));
}

TEST_CASE("pole collision raises a domain error naming the margin and index") {
  // Deterministic fixed point: replacing observation 0 with the antipode of
  // the estimated pole leaves the pole estimate unchanged.
  const std::uint64_t cfg_seed = 1;
  const std::uint64_t ms = derive_seed(cfg_seed, "x-margin");
  Rng data_rng(derive_seed(900, "probe", cfg_seed));
  std::vector<UnitDirection> x = uniform_sphere(6, 3, data_rng);
  const Step1Result first = step1_transport(x, ms);
  const int victim = first.pole_sample_index == 0 ? 1 : 0;
  x[victim] = first.pole.antipode();
  const Step1Result second = step1_transport(x, ms);
  REQUIRE(second.pole.coords() == first.pole.coords());

  TestConfig cfg = sphere_config(cfg_seed);
  const auto y = uniform_sphere(6, 3, data_rng);
  CHECK_THROWS_WITH_AS(directional_dcov(x, y, cfg),
                       doctest::Contains("pole collision on x margin: observation"),
                       std::domain_error);
}

TEST_CASE("null distribution: nonnegative, sorted, reproducible, step1 refused") {
  TestConfig cfg;
  cfg.seed = 23;
  cfg.n_null_draws = 500;
  const std::vector<double> a = null_distribution(cfg, 20, 2, 2);
  const std::vector<double> b = null_distribution(cfg, 20, 2, 2);
  CHECK(a == b);
  CHECK(a.size() == 500);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(a.front() >= 0.0);

  TestConfig other = cfg;
  other.seed = 24;
  CHECK(null_distribution(other, 20, 2, 2) != a);

  TestConfig step1 = sphere_config(23);
  step1.variant = Variant::kStep1Only;
  CHECK_THROWS_AS(null_grid_embeddings(step1, 20, 3, 3), std::invalid_argument);
  CHECK_THROWS_AS(null_distribution(step1, 20, 3, 3), std::invalid_argument);
}

TEST_CASE("null draws are identical at any OTDCOV_THREADS setting") {
  TestConfig cfg;
  cfg.seed = 29;
  cfg.n_null_draws = 400;
  setenv("OTDCOV_THREADS", "1", 1);
  const std::vector<double> serial = null_distribution(cfg, 16, 2, 2);
  setenv("OTDCOV_THREADS", "7", 1);
  const std::vector<double> parallel = null_distribution(cfg, 16, 2, 2);
  unsetenv("OTDCOV_THREADS");
  CHECK(serial == parallel);
}

TEST_CASE("p-value: extremes, inclusive ties, achievable lattice") {
  const std::vector<double> draws{1.0, 2.0, 3.0, 4.0};
  CHECK(p_value(5.0, draws) == doctest::Approx(1.0 / 5).epsilon(1e-15));
  CHECK(p_value(0.5, draws) == 1.0);
  // A statistic equal to the k-th largest draw counts that draw
  CHECK(p_value(3.0, draws) == doctest::Approx(3.0 / 5).epsilon(1e-15));
  CHECK_THROWS_AS(p_value(1.0, {}), std::invalid_argument);

  TestConfig cfg;
  cfg.seed = 31;
  const std::vector<double> null = null_distribution(cfg, 12, 1, 1);
  Rng rng(411);
  for (int rep = 0; rep < 25; ++rep) {
    const double p = p_value(10.0 * rng.uniform(), null);
    const double scaled = p * (null.size() + 1.0);
    CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-9));
    CHECK(p > 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("critical value: lattice equivalence with the p-value rule") {
  TestConfig cfg;
  cfg.seed = 37;
  cfg.n_null_draws = 999;
  const std::vector<double> null = null_distribution(cfg, 10, 1, 2);
  for (const double alpha : {0.01, 0.05, 0.10}) {
    const double crit = critical_value(alpha, null);
    for (std::size_t k = 0; k < null.size(); k += 13) {
      const bool by_p = p_value(null[k], null) <= alpha;
      const bool by_crit = null[k] >= crit;
      CHECK(by_p == by_crit);
    }
    CHECK(p_value(crit, null) <= alpha);
  }
  // Unattainably small alpha: no draw qualifies
  CHECK(std::isinf(critical_value(1e-9, null)));
}

TEST_CASE("uniform sphere sampler: unit norms, determinism, mean shrinks") {
  const auto a = sample_uniform_sphere(10000, 3, 5);
  const auto b = sample_uniform_sphere(10000, 3, 5);
  Vector mean(3, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(norm(a[i].coords()) == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 0; k < 3; ++k) mean[k] += a[i][k];
  }
  CHECK(a[0].coords() == b[0].coords());
  CHECK(a[9999].coords() == b[9999].coords());
  for (double& m : mean) m /= 10000;
  CHECK(norm(mean) < 0.05);
}

TEST_CASE("vMF sampler: unit norms, kappa = 0 matches the uniform cap law") {
  const UnitDirection mu(Vector{0.0, 0.6, 0.8});
  const auto pts = sample_vmf(2000, mu, 0.0, 13);
  std::vector<double> cosines;
  for (const auto& p : pts) {
    CHECK(norm(p.coords()) == doctest::Approx(1.0).epsilon(1e-12));
    cosines.push_back(dot(p.coords(), mu.coords()));
  }
  const double p = testing::ks_one_sample_p(cosines, [](double u) { return cap_cdf(u, 3); });
  CHECK(p > 0.01);
}

TEST_CASE("vMF sampler concentrates around mu as kappa grows") {
  const UnitDirection mu(Vector{1.0, 1.0, 1.0, 1.0});
  const auto pts = sample_vmf(1000, mu, 50.0, 17);
  Vector mean(4, 0.0);
  for (const auto& p : pts) {
    for (int k = 0; k < 4; ++k) mean[k] += p[k];
  }
  const double mn = norm(mean);
  for (double& m : mean) m /= mn;
  CHECK(dot(mean, mu.coords()) > 0.9);
  CHECK_THROWS_AS(sample_vmf(10, mu, -1.0, 17), std::invalid_argument);
}

TEST_CASE("run_test report: consistency, fingerprints, validation") {
  TestConfig cfg;
  cfg.seed = 43;
  const Sample x = gaussian_sample(24, 2, 91);
  const Sample y = gaussian_sample(24, 2, 92);
  const TestReport rep = run_test(x, y, cfg);
  CHECK(rep.n == 24);
  CHECK(rep.p_value > 0.0);
  CHECK(rep.p_value <= 1.0);
  if (rep.statistic >= rep.critical_value) CHECK(rep.p_value <= rep.alpha);
  CHECK(rep.config == cfg.fingerprint(24, 2, 2));

  // Any single field change moves the fingerprint
  std::set<std::string> prints;
  prints.insert(cfg.fingerprint(24, 2, 2));
  TestConfig v = cfg;
  v.seed = 44;
  prints.insert(v.fingerprint(24, 2, 2));
  v = cfg;
  v.alpha = 0.01;
  prints.insert(v.fingerprint(24, 2, 2));
  v = cfg;
  v.n_null_draws = 500;
  prints.insert(v.fingerprint(24, 2, 2));
  v = cfg;
  v.scores_x = {ScoreKind::kVanDerWaerden, false, 1.0, 0};
  prints.insert(v.fingerprint(24, 2, 2));
  v = cfg;
  v.scores_x = {ScoreKind::kWilcoxon, true, 1.0, 0};
  prints.insert(v.fingerprint(24, 2, 2));
  v = cfg;
  v.scores_x = {ScoreKind::kWilcoxon, true, 2.0, 0};
  prints.insert(v.fingerprint(24, 2, 2));
  prints.insert(cfg.fingerprint(25, 2, 2));
  prints.insert(cfg.fingerprint(24, 3, 2));
  CHECK(prints.size() == 9);

  TestConfig bad = cfg;
  bad.n_null_draws = 50;
  CHECK_THROWS_AS(run_test(x, y, bad), std::invalid_argument);
  bad = cfg;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(run_test(x, y, bad), std::invalid_argument);
  CHECK_THROWS_AS(run_test(x, gaussian_sample(23, 2, 93), cfg), std::invalid_argument);

  TestConfig sph = sphere_config(43);
  CHECK_THROWS_AS(run_test(Sample{{0.5, 0.0, 0.0}}, Sample{{1.0, 0.0, 0.0}}, sph),
                  std::invalid_argument);
}

TEST_CASE("null-table cache: computed once, persisted, reread") {
  const std::string dir = std::filesystem::temp_directory_path() / "otdcov_cache_test";
  std::filesystem::remove_all(dir);
  NullTableCache cache(dir);
  int computes = 0;
  const auto compute = [&] {
    ++computes;
    return std::vector<double>{0.5, 1.5, 2.5};
  };
  const std::vector<double>& first = cache.get_or_compute("key-a", compute);
  const std::vector<double>& again = cache.get_or_compute("key-a", compute);
  CHECK(computes == 1);
  CHECK(first == again);

  NullTableCache fresh(dir);
  const std::vector<double>& reread = fresh.get_or_compute("key-a", compute);
  CHECK(computes == 1);  // served from disk
  CHECK(reread == first);
  std::filesystem::remove_all(dir);
}

TEST_CASE("null table files: header, 17-digit payload, round trip, idempotence") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "otdcov_table_test.null";
  const std::vector<double> draws{0.0, 1.0 / 3.0, 0.70710678118654746, 2.0};
  write_null_table(path.string(), "some-fingerprint", draws);
  const NullTableFile file = read_null_table(path.string());
  CHECK(file.fingerprint == "some-fingerprint");
  REQUIRE(file.draws.size() == draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) CHECK(file.draws[i] == draws[i]);

  // Idempotent bytes
  std::ifstream in1(path, std::ios::binary);
  const std::string bytes1((std::istreambuf_iterator<char>(in1)), {});
  write_null_table(path.string(), "some-fingerprint", draws);
  std::ifstream in2(path, std::ios::binary);
  const std::string bytes2((std::istreambuf_iterator<char>(in2)), {});
  CHECK(bytes1 == bytes2);
  fs::remove(path);

  CHECK_THROWS_AS(read_null_table((fs::temp_directory_path() / "missing.null").string()),
                  std::runtime_error);
}

TEST_CASE("run_test reuses a cached null across datasets") {
  TestConfig cfg;
  cfg.seed = 47;
  NullTableCache cache;
  const TestReport a = run_test(gaussian_sample(16, 2, 1), gaussian_sample(16, 2, 2), cfg, &cache);
  const TestReport b = run_test(gaussian_sample(16, 2, 3), gaussian_sample(16, 2, 4), cfg, &cache);
  // Same null table twice: identical critical values, fingerprints match
  CHECK(a.critical_value == b.critical_value);
  CHECK(a.config == b.config);
}

TEST_CASE("step1-only variant calibrates against its own dataset") {
  TestConfig cfg = sphere_config(53);
  cfg.variant = Variant::kStep1Only;
  cfg.sphere_x = SphereMargin::kChart;
  cfg.sphere_y = SphereMargin::kChart;
  const Sample x = sphere_rows(20, 3, 55);
  const Sample y = sphere_rows(20, 3, 56);
  const TestReport rep = run_test(x, y, cfg);
  CHECK(rep.p_value > 0.0);
  CHECK(rep.statistic >= 0.0);
  // Re-running is deterministic
  const TestReport rep2 = run_test(x, y, cfg);
  CHECK(rep.statistic == rep2.statistic);
  CHECK(rep.p_value == rep2.p_value);
}

TEST_CASE("power study: shapes, determinism, level and power behavior") {
  TestConfig cfg;
  cfg.seed = 59;
  cfg.n_null_draws = 199;
  Scenario sc;
  sc.kind = Scenario::Kind::kCopula;
  sc.d1 = 1;
  sc.d2 = 1;
  sc.copula_r = 0.9;
  const std::vector<PowerRow> rows = power_study(sc, {16, 32}, cfg, 100);
  REQUIRE(rows.size() == 2);
  for (const PowerRow& r : rows) {
    CHECK(r.reps == 100);
    CHECK(r.rate >= 0.0);
    CHECK(r.rate <= 1.0);
    CHECK(r.rate == doctest::Approx(r.rejections / 100.0).epsilon(1e-15));
    CHECK(r.scenario == "copula");
  }
  // Strong dependence at n = 32 should reject most of the time
  CHECK(rows[1].rate > 0.5);

  const std::vector<PowerRow> rows2 = power_study(sc, {16, 32}, cfg, 100);
  CHECK(rows2[0].rejections == rows[0].rejections);
  CHECK(rows2[1].rejections == rows[1].rejections);

  CHECK_THROWS_AS(power_study(sc, {16}, cfg, 50), std::invalid_argument);
  Scenario bad = sc;
  bad.kind = Scenario::Kind::kRotationDependence;
  CHECK_THROWS_AS(power_study(bad, {16}, cfg, 100), std::invalid_argument);
}
