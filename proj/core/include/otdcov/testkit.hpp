#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "otdcov/center_outward.hpp"
#include "otdcov/dcov.hpp"
#include "otdcov/directional_ranks.hpp"

namespace otdcov {

enum class Space { kEuclidean, kSphere };
enum class Variant { kTwoStep, kStep1Only };

/// Margin embedding for sphere tests: a tangent-space radial score, or the
/// chart coordinates of the transported images.
enum class SphereMargin { kWilcoxon, kVanDerWaerden, kSignTest, kChart };

std::string to_string(Space space);
std::string to_string(Variant variant);
std::string to_string(SphereMargin margin);
std::string to_string(ChartKind chart);

struct TestConfig {
  Space space = Space::kEuclidean;
  // Euclidean margins
  ScoreSpec scores_x;
  ScoreSpec scores_y;
  // Sphere margins
  SphereMargin sphere_x = SphereMargin::kWilcoxon;
  SphereMargin sphere_y = SphereMargin::kWilcoxon;
  ChartKind chart = ChartKind::kAzimuthalEquidistant;
  Variant variant = Variant::kTwoStep;
  int n_null_draws = 999;  // >= 99 so the p-value resolution is <= 0.01
  double alpha = 0.05;
  std::uint64_t seed = 0;

  /// Stable string of every configuration field plus the data shape;
  /// identifies a report and keys reproducibility checks.
  std::string fingerprint(int n, int d1, int d2) const;

  /// Cache key of the null law: the fingerprint minus alpha (the null
  /// distribution does not depend on the test level).
  std::string null_key(int n, int d1, int d2) const;
};

struct TestReport {
  double statistic = 0.0;
  double p_value = 0.0;
  double critical_value = 0.0;
  int n = 0;
  double alpha = 0.0;
  std::string config;
  std::uint64_t seed = 0;
  std::vector<std::string> flags;
};

struct EuclideanStat {
  double statistic = 0.0;
  Sample embed_x, embed_y;  // scored embeddings in canonical (X grid label) order
  std::vector<CenterOutwardRecord> records_x, records_y;
  std::vector<std::string> flags;
};

/// Rank-based distance covariance statistic n * dcov^2 between the scored
/// marginal center-outward embeddings of X and Y. Requires n >= 4.
EuclideanStat rank_dcov_euclidean(const Sample& x, const Sample& y, const TestConfig& cfg);

struct DirectionalStat {
  double statistic = 0.0;
  Sample embed_x, embed_y;
  std::vector<DirectionalRankSign> records_x, records_y;  // two-step variant only
  UnitDirection pole_x, pole_y;
  std::vector<std::string> flags;
};

/// Directional distance covariance statistic for samples on hyperspheres.
/// Two-step variant embeds the Step-2 ranks/signs (or chart coordinates of
/// the Step-2 images); step1-only embeds the chart coordinates of the
/// Step-1 images. Errors out with the colliding index if the antipode of
/// the estimated pole matches a sample point.
DirectionalStat directional_dcov(const std::vector<UnitDirection>& x,
                                 const std::vector<UnitDirection>& y, const TestConfig& cfg);

/// The scored grid embeddings implied by the configuration; these are
/// data-independent, so permuting their pairing simulates the exact null.
/// Throws std::invalid_argument for the step1-only variant, whose
/// embeddings depend on the realized sample.
std::pair<Sample, Sample> null_grid_embeddings(const TestConfig& cfg, int n, int d1, int d2);

/// Exact-null Monte Carlo: pairs embedding i of the X side with sigma(i) of
/// the Y side for `draws` uniform random permutations sigma and returns the
/// sorted n * dcov^2 values. Draw k uses the stream (seed, "draw", k), so
/// results are identical at any parallelism level.
std::vector<double> permutation_null(const Sample& ex, const Sample& ey, int draws,
                                     std::uint64_t seed);

/// Sorted null draws for the configuration (two-step and euclidean only).
std::vector<double> null_distribution(const TestConfig& cfg, int n, int d1, int d2);

/// Monte-Carlo p-value (1 + #{draws >= statistic}) / (M + 1); draws must be
/// sorted ascending and nonempty.
double p_value(double statistic, const std::vector<double>& sorted_draws);

/// Smallest draw c with p_value(c) <= alpha, so that on the lattice of draw
/// values "p <= alpha" and "statistic >= critical value" agree exactly.
/// +infinity when no draw qualifies.
double critical_value(double alpha, const std::vector<double>& sorted_draws);

std::vector<UnitDirection> sample_uniform_sphere(int n, int d, std::uint64_t seed);

/// von Mises-Fisher sample around mu with concentration kappa >= 0
/// (kappa = 0 reduces to the uniform). Wood's rejection scheme for the
/// cosine, uniform equatorial direction for the rest.
std::vector<UnitDirection> sample_vmf(int n, const UnitDirection& mu, double kappa,
                                      std::uint64_t seed);

/// Null-table store: in-memory map plus an optional directory of
/// `otdcov-null v1` files keyed by a hash of the fingerprint.
class NullTableCache {
 public:
  NullTableCache() = default;
  explicit NullTableCache(std::string directory) : directory_(std::move(directory)) {}

  /// Returns the cached table for `key`, computing (and persisting) it via
  /// `compute` on a miss.
  const std::vector<double>& get_or_compute(const std::string& key,
                                            const std::function<std::vector<double>()>& compute);

 private:
  std::optional<std::string> directory_;
  std::map<std::string, std::vector<double>> tables_;
  std::mutex mutex_;
};

/// Full test: statistic, exact-null calibration, Monte-Carlo p-value and
/// critical value. Sphere samples are validated/renormalized rows. The
/// cache (optional) is consulted for two-step and euclidean nulls; the
/// step1-only null is re-simulated per dataset from its realized embeddings.
TestReport run_test(const Sample& x, const Sample& y, const TestConfig& cfg,
                    NullTableCache* cache = nullptr);

struct Scenario {
  enum class Kind { kIndependent, kRotationDependence, kCopula };
  Kind kind = Kind::kIndependent;
  int d1 = 2, d2 = 2;        // margin dimensions of the generated data
  double noise_kappa = 0.0;  // rotation scenario: 0 = exact Y = R X, else vMF(R X, kappa)
  double copula_r = 0.5;     // per-coordinate Gaussian correlation on shared coordinates

  std::string name() const;
};

struct PowerRow {
  std::string scenario;
  int n = 0;
  int rejections = 0;
  int reps = 0;
  double rate = 0.0;
  double std_error = 0.0;
};

/// Rejection rates over seeded replications, one row per sample size.
/// Replicate r of size n draws its data from the stream
/// (seed, "power-data", ...) and shares the configuration's cached null.
std::vector<PowerRow> power_study(const Scenario& scenario, const std::vector<int>& sizes,
                                  const TestConfig& cfg, int replications,
                                  NullTableCache* cache = nullptr);

/// Null-table file format `otdcov-null v1`: one header line carrying the
/// fingerprint, then the sorted draws, one per line, 17 significant digits.
void write_null_table(const std::string& path, const std::string& fingerprint,
                      const std::vector<double>& draws);

struct NullTableFile {
  std::string fingerprint;
  std::vector<double> draws;
};

NullTableFile read_null_table(const std::string& path);

}  // namespace otdcov
