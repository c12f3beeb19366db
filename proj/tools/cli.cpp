#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>

namespace otdcov::cli {

namespace {

std::string fmt17(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  for (std::string& f : fields) {
    const auto a = f.find_first_not_of(" \t");
    const auto b = f.find_last_not_of(" \t");
    f = a == std::string::npos ? std::string() : f.substr(a, b - a + 1);
  }
  return fields;
}

double parse_number(const std::string& token, int lineno, int column) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != token.size() || !std::isfinite(v)) {
    throw std::invalid_argument("line " + std::to_string(lineno) + ": column " +
                                std::to_string(column) + " is not a finite number: '" + token +
                                "'");
  }
  return v;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path, int d1, int d2, Space space) {
  if (d1 < 1 || d2 < 1) throw std::invalid_argument("dataset: dimensions must be >= 1");
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("line 1: file is empty");
  const std::vector<std::string> header = split_csv(line);
  const int total = d1 + d2;
  if (static_cast<int>(header.size()) != total) {
    throw std::invalid_argument("line 1: expected " + std::to_string(total) +
                                " header columns (x1..x" + std::to_string(d1) + ",y1..y" +
                                std::to_string(d2) + "), got " + std::to_string(header.size()));
  }
  for (int k = 0; k < total; ++k) {
    const std::string expected =
        k < d1 ? "x" + std::to_string(k + 1) : "y" + std::to_string(k - d1 + 1);
    if (header[k] != expected) {
      throw std::invalid_argument("line 1: header column " + std::to_string(k + 1) +
                                  " must be '" + expected + "', got '" + header[k] + "'");
    }
  }

  Dataset ds;
  int renormalized_x = 0, renormalized_y = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv(line);
    if (static_cast<int>(fields.size()) != total) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(total) + " fields, got " +
                                  std::to_string(fields.size()));
    }
    Vector xr(d1), yr(d2);
    for (int k = 0; k < d1; ++k) xr[k] = parse_number(fields[k], lineno, k + 1);
    for (int k = 0; k < d2; ++k) yr[k] = parse_number(fields[d1 + k], lineno, d1 + k + 1);

    if (space == Space::kSphere) {
      const auto check = [lineno](Vector& v, int* renormalized, const char* side) {
        const double n = norm(v);
        const double err = std::abs(n - 1.0);
        if (err <= 1e-6) return;
        if (err <= 1e-3) {
          for (double& c : v) c /= n;
          ++*renormalized;
          return;
        }
        throw std::invalid_argument("line " + std::to_string(lineno) + ": " + side +
                                    " margin row has norm " + fmt17(n) +
                                    ", outside the 1e-3 tolerance for sphere data");
      };
      check(xr, &renormalized_x, "x");
      check(yr, &renormalized_y, "y");
    }
    ds.x.push_back(std::move(xr));
    ds.y.push_back(std::move(yr));
  }
  if (ds.x.empty()) throw std::invalid_argument("dataset has no data rows");
  if (renormalized_x > 0) {
    ds.warnings.push_back("renormalized_x_rows:" + std::to_string(renormalized_x));
  }
  if (renormalized_y > 0) {
    ds.warnings.push_back("renormalized_y_rows:" + std::to_string(renormalized_y));
  }
  return ds;
}

ScoreSpec parse_euclidean_score(const std::string& text, double biloop_c) {
  ScoreSpec spec;
  std::string base = text;
  if (text.rfind("biloop:", 0) == 0) {
    spec.biloop = true;
    spec.biloop_c = biloop_c;
    base = text.substr(7);
  }
  if (base == "wilcoxon") {
    spec.kind = ScoreKind::kWilcoxon;
  } else if (base == "van_der_waerden") {
    spec.kind = ScoreKind::kVanDerWaerden;
  } else if (base == "sign") {
    spec.kind = ScoreKind::kSign;
  } else {
    throw std::invalid_argument(
        "unknown euclidean score '" + text +
        "' (use wilcoxon, van_der_waerden, sign, or biloop:<one of those>)");
  }
  return spec;
}

SphereMargin parse_sphere_margin(const std::string& text) {
  if (text == "wilcoxon") return SphereMargin::kWilcoxon;
  if (text == "van_der_waerden") return SphereMargin::kVanDerWaerden;
  if (text == "sign_test") return SphereMargin::kSignTest;
  if (text == "chart") return SphereMargin::kChart;
  throw std::invalid_argument("unknown sphere score '" + text +
                              "' (use wilcoxon, van_der_waerden, sign_test, or chart)");
}

ChartKind parse_chart(const std::string& text) {
  if (text == "azimuthal_equidistant") return ChartKind::kAzimuthalEquidistant;
  if (text == "azimuthal_equidistant_normalized") {
    return ChartKind::kAzimuthalEquidistantNormalized;
  }
  throw std::invalid_argument(
      "unknown chart '" + text +
      "' (use azimuthal_equidistant or azimuthal_equidistant_normalized)");
}

Variant parse_variant(const std::string& text) {
  if (text == "two-step") return Variant::kTwoStep;
  if (text == "step1") return Variant::kStep1Only;
  throw std::invalid_argument("unknown variant '" + text + "' (use two-step or step1)");
}

Space parse_space(const std::string& text) {
  if (text == "euclidean") return Space::kEuclidean;
  if (text == "sphere") return Space::kSphere;
  throw std::invalid_argument("unknown space '" + text + "' (use euclidean or sphere)");
}

namespace {

struct TestFlags {
  std::string space;
  int dx = 0, dy = 0;
  std::string scores_x = "wilcoxon";
  std::string scores_y = "wilcoxon";
  std::string variant = "two-step";
  std::string chart = "azimuthal_equidistant";
  int null_draws = 999;
  std::uint64_t seed = 0;
  std::string null_cache;
  double biloop_c = 1.0;
};

void add_test_flags(CLI::App* cmd, TestFlags* f) {
  cmd->add_option("--space", f->space, "Data space: euclidean or sphere")->required();
  cmd->add_option("--dx", f->dx, "Dimension of the X margin")->required();
  cmd->add_option("--dy", f->dy, "Dimension of the Y margin")->required();
  cmd->add_option("--scores-x", f->scores_x, "Score for the X margin");
  cmd->add_option("--scores-y", f->scores_y, "Score for the Y margin");
  cmd->add_option("--variant", f->variant, "two-step or step1 (sphere only)");
  cmd->add_option("--chart", f->chart, "Chart for sphere embeddings");
  cmd->add_option("--null-draws", f->null_draws, "Monte-Carlo null draws (>= 99)");
  cmd->add_option("--seed", f->seed, "Base RNG seed");
  cmd->add_option("--null-cache", f->null_cache, "Directory for persisted null tables");
  cmd->add_option("--biloop-c", f->biloop_c, "Loop size constant for biloop scores");
}

TestConfig make_config(const TestFlags& f) {
  TestConfig cfg;
  cfg.space = parse_space(f.space);
  cfg.variant = parse_variant(f.variant);
  cfg.chart = parse_chart(f.chart);
  if (cfg.space == Space::kEuclidean) {
    if (f.dx < 1 || f.dy < 1) throw std::invalid_argument("euclidean margins need dx, dy >= 1");
    cfg.scores_x = parse_euclidean_score(f.scores_x, f.biloop_c);
    cfg.scores_y = parse_euclidean_score(f.scores_y, f.biloop_c);
    if (cfg.variant != Variant::kTwoStep) {
      throw std::invalid_argument("the step1 variant applies to sphere data only");
    }
  } else {
    if (f.dx < 2 || f.dy < 2) throw std::invalid_argument("sphere margins need dx, dy >= 2");
    cfg.sphere_x = parse_sphere_margin(f.scores_x);
    cfg.sphere_y = parse_sphere_margin(f.scores_y);
  }
  cfg.n_null_draws = f.null_draws;
  cfg.seed = f.seed;
  return cfg;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

int do_test(const TestFlags& flags, const std::string& input, double alpha, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  TestConfig cfg = make_config(flags);
  cfg.alpha = alpha;
  const Dataset ds = read_dataset_csv(input, flags.dx, flags.dy, cfg.space);

  std::optional<NullTableCache> cache;
  if (!flags.null_cache.empty()) cache.emplace(flags.null_cache);
  const TestReport report = run_test(ds.x, ds.y, cfg, cache ? &*cache : nullptr);
  const double runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::ordered_json j;
  j["statistic"] = report.statistic;
  j["p_value"] = report.p_value;
  if (std::isfinite(report.critical_value)) {
    j["critical_value"] = report.critical_value;
  } else {
    j["critical_value"] = nullptr;
  }
  j["n"] = report.n;
  j["alpha"] = report.alpha;
  j["config"] = report.config;
  j["seed"] = report.seed;
  std::vector<std::string> flags_out = ds.warnings;
  flags_out.insert(flags_out.end(), report.flags.begin(), report.flags.end());
  j["flags"] = flags_out;
  j["runtime_ms"] = runtime_ms;
  out << j.dump(2) << "\n";
  return kExitOk;
}

int do_null_table(const TestFlags& flags, int n, const std::string& out_path) {
  const TestConfig cfg = make_config(flags);
  const std::vector<double> draws = null_distribution(cfg, n, flags.dx, flags.dy);
  write_null_table(out_path, cfg.null_key(n, flags.dx, flags.dy), draws);
  return kExitOk;
}

int do_grid(const std::string& space_text, int d, int n, const std::string& pole_text,
            std::uint64_t seed, const std::string& out_path) {
  const Space space = parse_space(space_text);
  std::ofstream out = open_output(out_path);

  const auto write_rows = [&](const Sample& points, const auto& rank_of) {
    out << "index,rank_level";
    for (int k = 1; k <= d; ++k) out << ",x" << k;
    out << "\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
      out << i << "," << rank_of(static_cast<int>(i));
      for (const double c : points[i]) out << "," << fmt17(c);
      out << "\n";
    }
  };

  if (space == Space::kEuclidean) {
    if (d < 1) throw std::invalid_argument("grid: euclidean --d must be >= 1");
    const BallGrid grid = make_ball_grid(n, d, seed);
    write_rows(grid.points, [&](int i) { return grid.rank_of(i); });
  } else {
    if (d < 2) throw std::invalid_argument("grid: sphere --d must be >= 2");
    UnitDirection pole = UnitDirection::axis(d, d - 1);
    if (!pole_text.empty()) {
      const std::vector<std::string> parts = split_csv(pole_text);
      if (static_cast<int>(parts.size()) != d) {
        throw std::invalid_argument("grid: --pole must have " + std::to_string(d) +
                                    " components");
      }
      Vector coords(d);
      for (int k = 0; k < d; ++k) coords[k] = parse_number(parts[k], 0, k + 1);
      if (std::abs(norm(coords) - 1.0) > 1e-6) {
        throw std::invalid_argument("grid: --pole must be a unit vector (norm " +
                                    fmt17(norm(coords)) + ")");
      }
      pole = UnitDirection(coords);
    }
    const Factorization f = factorize_n(n);
    const SphereGrid grid = build_sphere_grid(pole, f.n_r, f.n_s, f.n_0, seed);
    Sample points;
    points.reserve(grid.points.size());
    for (const UnitDirection& p : grid.points) points.push_back(p.coords());
    write_rows(points, [&](int i) { return grid.rank_of(i); });
  }
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + out_path);
  return kExitOk;
}

int do_power(const TestFlags& flags, const std::string& scenario_text,
             const std::string& n_list, int reps, double alpha, double noise_kappa,
             double copula_r, const std::string& out_path) {
  TestConfig cfg = make_config(flags);
  cfg.alpha = alpha;

  Scenario sc;
  sc.d1 = flags.dx;
  sc.d2 = flags.dy;
  sc.noise_kappa = noise_kappa;
  sc.copula_r = copula_r;
  if (scenario_text == "independent") {
    sc.kind = Scenario::Kind::kIndependent;
  } else if (scenario_text == "rotation-dependence") {
    sc.kind = Scenario::Kind::kRotationDependence;
  } else if (scenario_text == "copula") {
    sc.kind = Scenario::Kind::kCopula;
  } else {
    throw std::invalid_argument("unknown scenario '" + scenario_text +
                                "' (use independent, rotation-dependence, or copula)");
  }

  std::vector<int> sizes;
  std::stringstream ss(n_list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    sizes.push_back(static_cast<int>(parse_number(tok, 0, 1)));
  }
  if (sizes.empty()) throw std::invalid_argument("power: --n-list must name at least one n");

  std::optional<NullTableCache> cache;
  if (!flags.null_cache.empty()) cache.emplace(flags.null_cache);
  const std::vector<PowerRow> rows =
      power_study(sc, sizes, cfg, reps, cache ? &*cache : nullptr);

  std::ofstream out = open_output(out_path);
  out << "scenario,n,rejections,reps,rate,stderr\n";
  for (const PowerRow& r : rows) {
    out << r.scenario << "," << r.n << "," << r.rejections << "," << r.reps << ","
        << fmt17(r.rate) << "," << fmt17(r.std_error) << "\n";
  }
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + out_path);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distribution-free independence tests based on rank distance covariance"};
  app.name("otdcov");
  app.require_subcommand(1);

  // test
  CLI::App* test_cmd = app.add_subcommand("test", "Run an independence test on a dataset CSV");
  TestFlags test_flags;
  std::string test_input;
  double test_alpha = 0.05;
  test_cmd->add_option("--input", test_input, "Dataset CSV path")->required();
  add_test_flags(test_cmd, &test_flags);
  test_cmd->add_option("--alpha", test_alpha, "Test level in (0, 1)");

  // null-table
  CLI::App* null_cmd = app.add_subcommand("null-table", "Simulate and persist a null table");
  TestFlags null_flags;
  int null_n = 0;
  std::string null_out;
  null_cmd->add_option("--n", null_n, "Sample size the table calibrates")->required();
  null_cmd->add_option("--space", null_flags.space, "euclidean or sphere")->required();
  null_cmd->add_option("--dx", null_flags.dx, "Dimension of the X margin")->required();
  null_cmd->add_option("--dy", null_flags.dy, "Dimension of the Y margin")->required();
  null_cmd->add_option("--scores-x", null_flags.scores_x, "Score for the X margin");
  null_cmd->add_option("--scores-y", null_flags.scores_y, "Score for the Y margin");
  null_cmd->add_option("--draws", null_flags.null_draws, "Number of Monte-Carlo draws");
  null_cmd->add_option("--seed", null_flags.seed, "Base RNG seed");
  null_cmd->add_option("--chart", null_flags.chart, "Chart for sphere chart scores");
  null_cmd->add_option("--biloop-c", null_flags.biloop_c, "Loop size constant");
  null_cmd->add_option("--out", null_out, "Output path")->required();

  // grid
  CLI::App* grid_cmd = app.add_subcommand("grid", "Write a transport grid as CSV");
  std::string grid_space, grid_pole, grid_out;
  int grid_d = 0, grid_n = 0;
  std::uint64_t grid_seed = 0;
  grid_cmd->add_option("--space", grid_space, "euclidean or sphere")->required();
  grid_cmd->add_option("--d", grid_d, "Point dimension")->required();
  grid_cmd->add_option("--n", grid_n, "Grid size (factorized internally)")->required();
  grid_cmd->add_option("--pole", grid_pole, "Sphere pole as 'c1,c2,...' (default: last axis)");
  grid_cmd->add_option("--seed", grid_seed, "Grid direction seed");
  grid_cmd->add_option("--out", grid_out, "Output path")->required();

  // power
  CLI::App* power_cmd = app.add_subcommand("power", "Estimate rejection rates by simulation");
  TestFlags power_flags;
  std::string power_scenario, power_nlist, power_out;
  int power_reps = 0;
  double power_alpha = 0.05, power_kappa = 0.0, power_r = 0.5;
  power_cmd->add_option("--scenario", power_scenario,
                        "independent, rotation-dependence, or copula")
      ->required();
  power_cmd->add_option("--n-list", power_nlist, "Comma-separated sample sizes")->required();
  power_cmd->add_option("--reps", power_reps, "Replications per size (>= 100)")->required();
  add_test_flags(power_cmd, &power_flags);
  power_cmd->add_option("--alpha", power_alpha, "Test level in (0, 1)");
  power_cmd->add_option("--noise-kappa", power_kappa,
                        "Rotation scenario: vMF noise concentration (0 = exact)");
  power_cmd->add_option("--copula-r", power_r, "Copula scenario: coordinate correlation");
  power_cmd->add_option("--out", power_out, "Output path")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("otdcov");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  try {
    if (test_cmd->parsed()) return do_test(test_flags, test_input, test_alpha, out);
    if (null_cmd->parsed()) return do_null_table(null_flags, null_n, null_out);
    if (grid_cmd->parsed()) {
      return do_grid(grid_space, grid_d, grid_n, grid_pole, grid_seed, grid_out);
    }
    if (power_cmd->parsed()) {
      return do_power(power_flags, power_scenario, power_nlist, power_reps, power_alpha,
                      power_kappa, power_r, power_out);
    }
  } catch (const std::invalid_argument& e) {
    err << "otdcov: error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::runtime_error& e) {
    err << "otdcov: error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    err << "otdcov: numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  }
  return kExitInvalidInput;
}

}  // namespace otdcov::cli
