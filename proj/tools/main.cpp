// Batch CLI: closed-form kernel evaluation, exact path sampling, variation
// functionals, quadrature oracles, and JSON-spec experiment runs.
//
// Exit codes: 0 success (all statistical tests passed), 1 statistical
// failure, 2 usage or resource errors.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "heatvar/errors.hpp"
#include "heatvar/experiment.hpp"
#include "heatvar/io.hpp"
#include "heatvar/kernel.hpp"
#include "heatvar/oracle.hpp"
#include "heatvar/partition.hpp"
#include "heatvar/rng.hpp"
#include "heatvar/sampler.hpp"
#include "heatvar/stats.hpp"
#include "heatvar/summation.hpp"
#include "heatvar/variations.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr int kExitPass = 0;
constexpr int kExitStatFailure = 1;
constexpr int kExitUsage = 2;

void emit(const ordered_json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open output file " + out_path);
  out << doc.dump(2) << "\n";
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file " + path.string());
  out << contents;
}

std::string series_csv(const heatvar::variations::StepSeries& series) {
  std::string csv = "t,value\n";
  for (std::size_t k = 0; k < series.knots.size(); ++k) {
    csv += heatvar::format_g17(series.knots[k]);
    csv += ',';
    csv += heatvar::format_g17(series.values[k] + series.drift * series.knots[k]);
    csv += '\n';
  }
  return csv;
}

ordered_json series_json(const heatvar::variations::StepSeries& series) {
  ordered_json doc;
  doc["knots"] = series.knots;
  doc["values"] = series.values;
  doc["drift"] = series.drift;
  return doc;
}

struct KernelArgs {
  double s = 0.0, t = 0.0, u = 0.0, v = 0.0, x = 0.0;
  std::int64_t k = 1, i = 1, j = 1;
  double dt = 1.0;
  std::string variant = "centered";
  double tol = 1e-10;
};

struct SampleArgs {
  std::int64_t n = 0;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::int64_t reps = 1;
  std::string out_dir;
  bool write_increments = false;
  std::size_t budget_mb = 2048;
  int threads = 1;
};

struct VariationArgs {
  std::string functional;
  std::int64_t n = 0;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
};

struct ExperimentArgs {
  std::string spec_path;
  std::string out;
  std::string csv;
  int threads = 0;
};

struct OracleArgs {
  std::string h1 = "x2m1", h2 = "x2m1";
  double rho = 0.0;
  std::string family = "centered";
  int order = 200;
};

int run_sample(const SampleArgs& args) {
  using namespace heatvar;
  const auto cov = sampler::build_increment_covariance(args.n, args.horizon,
                                                       args.budget_mb * std::size_t{1} << 20);
  const auto factor = sampler::factorize(cov);
  const SeedSpec seeds{args.seed};
  const auto paths = sampler::sample_batch(factor, seeds, args.reps, args.threads);

  const fs::path dir = args.out_dir.empty() ? fs::path(".") : fs::path(args.out_dir);
  fs::create_directories(dir);
  for (std::size_t r = 0; r < paths.size(); ++r) {
    const auto& path = paths[r];
    char name[64];
    std::snprintf(name, sizeof(name), "path_%05zu.csv", r);
    std::string csv = "t,F\n";
    for (std::size_t j = 0; j < path.cumulative.size(); ++j) {
      csv += format_g17(path.time_at(static_cast<std::int64_t>(j)));
      csv += ',';
      csv += format_g17(path.cumulative[j]);
      csv += '\n';
    }
    write_file(dir / name, csv);
    if (args.write_increments) {
      std::snprintf(name, sizeof(name), "increments_%05zu.csv", r);
      std::string inc_csv = "j,t_j,dF\n";
      for (std::size_t j = 0; j < path.increments.size(); ++j) {
        inc_csv += std::to_string(j + 1);
        inc_csv += ',';
        inc_csv += format_g17(path.time_at(static_cast<std::int64_t>(j) + 1));
        inc_csv += ',';
        inc_csv += format_g17(path.increments[j]);
        inc_csv += '\n';
      }
      write_file(dir / name, inc_csv);
    }
  }

  ordered_json meta;
  meta["n"] = args.n;
  meta["horizon"] = args.horizon;
  meta["seed"] = args.seed;
  meta["replications"] = args.reps;
  meta["grid_points"] = factor.size() + 1;
  meta["factorization"] = {{"size", factor.size()},
                           {"jitter_applied", factor.jitter_applied},
                           {"jitter_delta", factor.jitter_delta}};
  write_file(dir / "metadata.json", meta.dump(2) + "\n");
  return kExitPass;
}

int run_variation(const VariationArgs& args) {
  using namespace heatvar;
  const auto cov = sampler::build_increment_covariance(args.n, args.horizon);
  const auto factor = sampler::factorize(cov);
  const SeedSpec seeds{args.seed};
  auto stream = seeds.stream(StreamKind::Path, 0);
  const auto path = sampler::sample_path(factor, stream);

  variations::StepSeries series;
  ordered_json extra;
  if (args.functional == "quartic") {
    series = variations::quartic_variation(path, Partition::uniform(args.n, args.horizon));
  } else if (args.functional == "cubic") {
    series = variations::signed_cubic(path);
  } else if (args.functional == "sgn2") {
    series = variations::b_n(path, variations::HFamily::signed_squares());
  } else if (args.functional == "centered") {
    series = variations::b_n(path, variations::HFamily::centered_squares());
  } else if (args.functional == "alternating") {
    series = variations::alternating_raw(path);
  } else if (args.functional == "rademacher") {
    series = variations::b_n(path, variations::HFamily::rademacher(
                                       static_cast<std::size_t>(path.segments()), seeds, 0));
  } else if (args.functional == "centered-sum") {
    series = variations::centered_sum_series(path);
  } else if (args.functional == "midpoint") {
    series = variations::midpoint_riemann(path);
    // at even grid times the squared-path identity must close to ~1e-10
    double max_residual = 0.0;
    for (std::int64_t j = 2; j <= path.segments(); j += 2) {
      const double t = path.time_at(j);
      const double f = path.cumulative[static_cast<std::size_t>(j)];
      max_residual = std::max(max_residual,
                              std::abs(variations::midpoint_identity_residual(path, t)) /
                                  std::max(1.0, f * f));
    }
    extra["max_identity_residual"] = max_residual;
    // even/odd squared-increment pair sum, raw and in its kappa-scaled
    // normalized form
    heatvar::CompensatedSum pairs;
    for (std::int64_t j = 2; j <= path.segments(); j += 2) {
      const double de = path.increments[static_cast<std::size_t>(j - 1)];
      const double do_ = path.increments[static_cast<std::size_t>(j - 2)];
      pairs.add(de * de - do_ * do_);
    }
    const double kappa =
        heatvar::kernel::kappa_sq(heatvar::Variant::AlternatingCentered, 1e-12).kappa();
    extra["alternating_pair_sum"] = pairs.value();
    extra["kappa_scaled_pair_sum"] = pairs.value() / kappa;
  } else {
    throw experiment::SpecError("--functional", "unknown functional '" + args.functional + "'");
  }

  if (args.format == "csv") {
    if (args.out.empty())
      std::cout << series_csv(series);
    else
      write_file(args.out, series_csv(series));
  } else if (args.format == "json") {
    ordered_json doc;
    doc["functional"] = args.functional;
    doc["n"] = args.n;
    doc["horizon"] = args.horizon;
    doc["seed"] = args.seed;
    doc["series"] = series_json(series);
    if (!extra.empty()) doc["diagnostics"] = extra;
    emit(doc, args.out);
  } else {
    throw experiment::SpecError("--format", "expected json or csv");
  }
  return kExitPass;
}

int run_experiment_cmd(const ExperimentArgs& args) {
  using namespace heatvar;
  std::ifstream in(args.spec_path);
  if (!in) throw experiment::SpecError("--spec", "cannot open spec file " + args.spec_path);
  nlohmann::json spec;
  try {
    in >> spec;
  } catch (const nlohmann::json::parse_error& e) {
    throw experiment::SpecError("--spec", std::string("malformed JSON: ") + e.what());
  }
  const auto result = experiment::run_experiment(spec, args.threads);
  if (args.out.empty())
    std::cout << result.report.dump(2) << "\n";
  else
    write_file(args.out, result.report.dump(2) + "\n");
  if (!args.csv.empty()) write_file(args.csv, experiment::report_to_csv(result.report));
  for (const auto& study : result.report.at("studies"))
    std::cerr << (study.at("pass").get<bool>() ? "[pass] " : "[FAIL] ")
              << study.at("name").get<std::string>() << "\n";
  return result.all_pass ? kExitPass : kExitStatFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Exact sampling and variation functionals of the stochastic heat equation's temporal "
      "slice.\nNote: signed squares x^{2+-} mean |x|^2 sgn(x), with sgn(0) = 0."};
  app.require_subcommand(1);

  KernelArgs kargs;
  auto* kernel_cmd = app.add_subcommand("kernel", "closed-form kernel and constant evaluation");
  kernel_cmd->require_subcommand(1);
  auto* cov_cmd = kernel_cmd->add_subcommand("cov", "covariance E[F(s)F(t)]");
  cov_cmd->add_option("--s", kargs.s)->required();
  cov_cmd->add_option("--t", kargs.t)->required();
  auto* inc_cmd = kernel_cmd->add_subcommand("inc", "increment variance E|F(t)-F(s)|^2");
  inc_cmd->add_option("--s", kargs.s)->required();
  inc_cmd->add_option("--t", kargs.t)->required();
  auto* cross_cmd = kernel_cmd->add_subcommand("cross", "cross increment covariance");
  cross_cmd->add_option("--s", kargs.s)->required();
  cross_cmd->add_option("--t", kargs.t)->required();
  cross_cmd->add_option("--u", kargs.u)->required();
  cross_cmd->add_option("--v", kargs.v)->required();
  auto* gamma_cmd = kernel_cmd->add_subcommand("gamma", "gamma_k sequence value");
  gamma_cmd->add_option("--k", kargs.k)->required();
  auto* ucov_cmd = kernel_cmd->add_subcommand("ucov", "uniform-grid increment covariance");
  ucov_cmd->add_option("--i", kargs.i)->required();
  ucov_cmd->add_option("--j", kargs.j)->required();
  ucov_cmd->add_option("--dt", kargs.dt)->required();
  auto* k_cmd = kernel_cmd->add_subcommand("K", "K(x) = E[X^{2+-}Y^{2+-}] closed form");
  k_cmd->add_option("--x", kargs.x)->required();
  auto* kappa_cmd = kernel_cmd->add_subcommand("kappa", "limit variance constant kappa^2");
  kappa_cmd->add_option("--variant", kargs.variant);
  kappa_cmd->add_option("--tol", kargs.tol);

  SampleArgs sargs;
  auto* sample_cmd = app.add_subcommand("sample", "exact path sampling to CSV");
  sample_cmd->add_option("--n", sargs.n, "grid rate")->required();
  sample_cmd->add_option("--horizon", sargs.horizon);
  sample_cmd->add_option("--seed", sargs.seed, "master seed (required; no silent entropy)")
      ->required();
  sample_cmd->add_option("--reps", sargs.reps);
  sample_cmd->add_option("--out", sargs.out_dir, "output directory");
  sample_cmd->add_flag("--increments", sargs.write_increments, "also write increment CSVs");
  sample_cmd->add_option("--budget-mb", sargs.budget_mb, "covariance memory budget");
  sample_cmd->add_option("--threads", sargs.threads);

  VariationArgs vargs;
  auto* var_cmd = app.add_subcommand("variation", "variation functionals of one sampled path");
  var_cmd
      ->add_option("--functional", vargs.functional,
                   "quartic|cubic|sgn2|centered|alternating|midpoint|rademacher|centered-sum")
      ->required();
  var_cmd->add_option("--n", vargs.n)->required();
  var_cmd->add_option("--horizon", vargs.horizon);
  var_cmd->add_option("--seed", vargs.seed, "master seed (required; no silent entropy)")
      ->required();
  var_cmd->add_option("--out", vargs.out);
  var_cmd->add_option("--format", vargs.format, "json|csv");

  ExperimentArgs eargs;
  auto* exp_cmd = app.add_subcommand("experiment", "run a JSON experiment spec");
  exp_cmd->add_option("--spec", eargs.spec_path)->required();
  exp_cmd->add_option("--out", eargs.out, "report JSON path (stdout if omitted)");
  exp_cmd->add_option("--csv", eargs.csv, "summary CSV path");
  exp_cmd->add_option("--threads", eargs.threads, "worker pool size (overrides spec)");

  OracleArgs oargs;
  auto* oracle_cmd = app.add_subcommand("oracle", "quadrature expectations and moment identities");
  oracle_cmd->require_subcommand(1);
  auto* biv_cmd = oracle_cmd->add_subcommand("biv", "E[h1(X)h2(Y)] by nested quadrature");
  biv_cmd->add_option("--h1", oargs.h1, "x|x2|x2m1|x3|x4|sgn2");
  biv_cmd->add_option("--h2", oargs.h2);
  biv_cmd->add_option("--rho", oargs.rho)->required();
  biv_cmd->add_option("--order", oargs.order);
  auto* m44_cmd = oracle_cmd->add_subcommand("moment44", "E[X^4 Y^4] closed form");
  m44_cmd->add_option("--rho", oargs.rho)->required();
  auto* m33_cmd = oracle_cmd->add_subcommand("moment33", "E[X^3 Y^3] closed form");
  m33_cmd->add_option("--rho", oargs.rho)->required();
  auto* a31_cmd = oracle_cmd->add_subcommand("admissibility", "admissibility checks for a family");
  a31_cmd->add_option("--family", oargs.family, "rademacher|signed|centered|alternating");

  std::string out_path;
  app.add_option("--out", out_path, "output file (subcommand-specific)");

  try {
    app.parse(argc, argv);

    if (kernel_cmd->parsed()) {
      ordered_json doc;
      if (cov_cmd->parsed()) {
        doc["value"] = heatvar::kernel::cov_f(kargs.s, kargs.t);
      } else if (inc_cmd->parsed()) {
        doc["value"] = heatvar::kernel::increment_variance(kargs.s, kargs.t);
      } else if (cross_cmd->parsed()) {
        doc["value"] = heatvar::kernel::cross_increment_cov(kargs.s, kargs.t, kargs.u, kargs.v);
      } else if (gamma_cmd->parsed()) {
        doc["value"] = heatvar::kernel::gamma(kargs.k);
      } else if (ucov_cmd->parsed()) {
        doc["value"] = heatvar::kernel::uniform_increment_cov(kargs.i, kargs.j, kargs.dt);
      } else if (k_cmd->parsed()) {
        doc["value"] = heatvar::kernel::k_function(kargs.x);
      } else if (kappa_cmd->parsed()) {
        const auto kc = heatvar::kernel::kappa_sq(heatvar::variant_from_string(kargs.variant),
                                                  kargs.tol);
        doc["kappa_sq"] = kc.kappa_sq;
        doc["kappa"] = kc.kappa();
        doc["truncation_error"] = kc.truncation_error;
        doc["terms"] = kc.terms;
      }
      emit(doc, out_path);
      return kExitPass;
    }
    if (sample_cmd->parsed()) return run_sample(sargs);
    if (var_cmd->parsed()) return run_variation(vargs);
    if (exp_cmd->parsed()) return run_experiment_cmd(eargs);
    if (oracle_cmd->parsed()) {
      ordered_json doc;
      if (biv_cmd->parsed()) {
        heatvar::oracle::QuadSpec spec;
        spec.order_1d = oargs.order;
        doc["value"] = heatvar::oracle::bivariate_expectation(
            heatvar::oracle::scalar_fn_from_string(oargs.h1),
            heatvar::oracle::scalar_fn_from_string(oargs.h2), oargs.rho, spec);
      } else if (m44_cmd->parsed()) {
        doc["value"] = heatvar::oracle::moment44(oargs.rho);
      } else if (m33_cmd->parsed()) {
        doc["value"] = heatvar::oracle::moment33(oargs.rho);
      } else if (a31_cmd->parsed()) {
        const std::vector<double> grid = {-0.99, -0.9, -0.5, -0.1, 0.1, 0.5, 0.9, 0.99};
        const auto report = heatvar::oracle::check_admissibility(
            heatvar::variant_from_string(oargs.family), grid);
        doc["max_abs_mean"] = report.max_abs_mean;
        doc["fitted_L"] = report.fitted_l;
        doc["deriv_lipschitz"] = report.deriv_lipschitz;
        doc["smooth"] = report.smooth;
        doc["rho_grid"] = report.rho_grid;
        doc["cross_expectations"] = report.cross_expectations;
      }
      emit(doc, out_path);
      return kExitPass;
    }
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  } catch (const heatvar::experiment::SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const heatvar::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
