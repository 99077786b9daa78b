#include "vmtorus/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "vmtorus/estimator.hpp"
#include "vmtorus/experiments.hpp"
#include "vmtorus/io.hpp"
#include "vmtorus/parallel.hpp"
#include "vmtorus/sampling.hpp"

namespace vmtorus {
namespace {

struct WleFlags {
  double kstar = 10.0;
  std::string raf = "schi";
  double raf_parameter = std::numeric_limits<double>::quiet_NaN();
  int starts = 100;
  int subsample = 10;
  int max_iter = 200;
  double tol = 1e-6;
  double root_threshold = -0.9;
  std::string init_rule = "correlation";

  void attach(CLI::App* cmd) {
    cmd->add_option("--kstar", kstar, "Kernel concentration bandwidth k*")->capture_default_str();
    cmd->add_option("--raf", raf, "Residual adjustment function")
        ->check(CLI::IsMember({"schi", "gkl", "pwd"}))
        ->capture_default_str();
    cmd->add_option("--raf-param", raf_parameter, "GKL tau (default 1) or PWD exponent (default 0.5)");
    cmd->add_option("--starts", starts, "Number of subsample starts")->capture_default_str();
    cmd->add_option("--subsample", subsample, "Subsample size")->capture_default_str();
    cmd->add_option("--max-iter", max_iter, "Maximum reweighting iterations per start")->capture_default_str();
    cmd->add_option("--tol", tol, "Convergence tolerance")->capture_default_str();
    cmd->add_option("--root-threshold", root_threshold, "Small-residual threshold for root selection")
        ->capture_default_str();
    cmd->add_option("--init-rule", init_rule, "Starting off-diagonal rule")
        ->check(CLI::IsMember({"correlation", "literal"}))
        ->capture_default_str();
  }

  WleConfig config(std::uint64_t seed) const {
    WleConfig c;
    c.kstar = kstar;
    const double param = std::isnan(raf_parameter) ? (raf == "pwd" ? 0.5 : 1.0) : raf_parameter;
    c.raf = RafSpec::parse(raf, param);
    c.n_starts = starts;
    c.subsample_size = subsample;
    c.max_iter = max_iter;
    c.tol = tol;
    c.root_threshold = root_threshold;
    c.init_rule = init_rule == "literal" ? InitOffDiagonal::kLiteral : InitOffDiagonal::kCorrelationScaled;
    c.seed = seed;
    return c;
  }
};

// Writes to the named file, or to `fallback` when the path is empty.
template <typename F>
void emit(const std::string& path, std::ostream& fallback, F&& write) {
  if (path.empty()) {
    write(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error(ErrorKind::kIo, "cannot write '" + path + "'");
  write(file);
  if (!file) throw Error(ErrorKind::kIo, "write to '" + path + "' failed");
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Upper-triangle entries (row-major) into a symmetric matrix with zero diagonal.
Eigen::MatrixXd lambda_from_upper(const std::vector<double>& upper, Eigen::Index p) {
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(p, p);
  if (upper.empty()) return lambda;
  require(static_cast<Eigen::Index>(upper.size()) == p * (p - 1) / 2,
          "--lambda needs p(p-1)/2 upper-triangle entries");
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = i + 1; j < p; ++j) lambda(i, j) = lambda(j, i) = upper[k++];
  return lambda;
}

SineParams params_from_flags(const std::vector<double>& mu, const std::vector<double>& kappa,
                             const std::vector<double>& lambda_upper, bool degrees) {
  require(!kappa.empty(), "--kappa is required");
  const auto p = static_cast<Eigen::Index>(kappa.size());
  Eigen::VectorXd m = mu.empty() ? Eigen::VectorXd::Zero(p) : to_vector(mu);
  require(m.size() == p, "--mu and --kappa must have the same length");
  if (degrees) m *= std::numbers::pi / 180.0;
  return make_params(m, to_vector(kappa), lambda_from_upper(lambda_upper, p));
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return kExitUsage;
    case ErrorKind::kParse:
    case ErrorKind::kIo: return kExitIo;
    default: return kExitEstimation;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust fitting of the multivariate von Mises sine model on the torus", "vmtorus"};
  app.require_subcommand(1);

  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
  bool degrees = false;
  app.add_option("--seed", seed, "Master random seed")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
  app.add_flag("--degrees", degrees, "Read and write angles in degrees");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit the sine model to an angle table");
  std::string fit_input, fit_output, method = "wle";
  bool fit_quiet = false;
  WleFlags fit_flags;
  fit_cmd->add_option("input", fit_input, "CSV angle table")->required();
  fit_cmd->add_option("--method", method, "Estimator")->check(CLI::IsMember({"mle", "wle"}))->capture_default_str();
  fit_cmd->add_option("-o,--output", fit_output, "Report path (default: standard output)");
  fit_cmd->add_flag("-q,--quiet", fit_quiet, "Suppress the rounded summary on standard error");
  fit_flags.attach(fit_cmd);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Draw a sample from the sine model, optionally contaminated");
  std::vector<double> sim_mu, sim_kappa, sim_lambda, out_shift, out_conc;
  std::vector<Eigen::Index> out_dims;
  long sim_n = 250;
  int n_outliers = 0, burn_in = 1000, thinning = 10;
  std::string out_mode = "append", sim_output;
  sim_cmd->add_option("--mu", sim_mu, "Locations (default 0)")->delimiter(',');
  sim_cmd->add_option("--kappa", sim_kappa, "Concentrations")->delimiter(',')->required();
  sim_cmd->add_option("--lambda", sim_lambda, "Interactions, upper triangle row-major")->delimiter(',');
  sim_cmd->add_option("-n", sim_n, "Genuine sample size")->capture_default_str();
  sim_cmd->add_option("--outliers", n_outliers, "Number of outliers")->capture_default_str();
  sim_cmd->add_option("--outlier-mode", out_mode, "append or replace")
      ->check(CLI::IsMember({"append", "replace"}))
      ->capture_default_str();
  sim_cmd->add_option("--outlier-dims", out_dims, "Contaminated coordinates (default all)")->delimiter(',');
  sim_cmd->add_option("--outlier-shift", out_shift, "Shift of the outlier cluster (radians)")->delimiter(',');
  sim_cmd->add_option("--outlier-concentration", out_conc, "Outlier cluster concentration")->delimiter(',');
  sim_cmd->add_option("--burn-in", burn_in, "Gibbs burn-in sweeps")->capture_default_str();
  sim_cmd->add_option("--thinning", thinning, "Gibbs thinning")->capture_default_str();
  sim_cmd->add_option("-o,--output", sim_output, "Output CSV (default: standard output)");

  // mc
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo comparison of MLE, MLE0 and WLE");
  std::string scenario_path, mc_output, mc_summary;
  int trials = 50;
  mc_cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  mc_cmd->add_option("--trials", trials, "Number of trials")->capture_default_str();
  mc_cmd->add_option("-o,--output", mc_output, "Trial table CSV (default: standard output)");
  mc_cmd->add_option("--summary", mc_summary, "Summary CSV (default: standard error)");

  // monitor
  auto* mon_cmd = app.add_subcommand("monitor", "Refit over a grid of kernel bandwidths");
  std::string mon_input, mon_output, grid_spec;
  WleFlags mon_flags;
  mon_cmd->add_option("input", mon_input, "CSV angle table")->required();
  mon_cmd->add_option("--grid", grid_spec, "k* grid: start:stop:step or a comma list")->required();
  mon_cmd->add_option("-o,--output", mon_output, "Table path (default: standard output)");
  mon_flags.attach(mon_cmd);

  // density-grid
  auto* grid_cmd = app.add_subcommand("density-grid", "Export a bivariate density grid on [-pi, pi)^2");
  std::string report_path, grid_output;
  std::vector<double> g_mu, g_kappa, g_lambda;
  std::vector<Eigen::Index> pair{0, 1};
  int resolution = 128;
  grid_cmd->add_option("--report", report_path, "Fit report providing the parameters");
  grid_cmd->add_option("--mu", g_mu, "Locations")->delimiter(',');
  grid_cmd->add_option("--kappa", g_kappa, "Concentrations")->delimiter(',');
  grid_cmd->add_option("--lambda", g_lambda, "Interactions, upper triangle row-major")->delimiter(',');
  grid_cmd->add_option("--pair", pair, "Pair of coordinates")->delimiter(',')->expected(2)->capture_default_str();
  grid_cmd->add_option("--resolution", resolution, "Points per axis (>= 16)")->capture_default_str();
  grid_cmd->add_option("-o,--output", grid_output, "Output CSV (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }
  if (threads > 0) set_thread_count(threads);

  try {
    if (*fit_cmd) {
      const AngleTable table = read_angle_table_file(fit_input, degrees);
      FitReport report;
      report.method = method;
      report.seed = seed;
      if (method == "mle") {
        report.fit = mle_fit(table.sample);
      } else {
        report.config = fit_flags.config(seed);
        report.fit = wle_fit(table.sample, *report.config);
      }
      emit(fit_output, out, [&](std::ostream& o) { write_fit_report(o, report); });
      if (!fit_quiet) {
        write_estimate_summary(err, method == "mle" ? "MLE" : "WLE", report.fit.params);
        err << "down-weighting level: " << std::fixed << std::setprecision(2) << report.fit.downweighting_level()
            << '\n';
      }
      return kExitOk;
    }

    if (*sim_cmd) {
      require(sim_n >= 0, "-n must be non-negative");
      const SineParams params = params_from_flags(sim_mu, sim_kappa, sim_lambda, degrees);
      const Eigen::Index p = params.dims();
      Eigen::MatrixXd angles(0, p);
      std::vector<bool> mask;
      if (sim_n > 0) {
        GibbsConfig gibbs{burn_in, thinning, derive_seed(seed, {1})};
        const TorusSample genuine = sample_sine_model(params, sim_n, gibbs);
        if (n_outliers > 0) {
          std::vector<Eigen::Index> dims = out_dims;
          if (dims.empty())
            for (Eigen::Index j = 0; j < p; ++j) dims.push_back(j);
          ContaminationSpec spec = default_contamination(
              n_outliers, dims, out_mode == "append" ? ContaminationMode::kAppend : ContaminationMode::kReplace);
          Eigen::VectorXd center(static_cast<Eigen::Index>(dims.size()));
          for (std::size_t k = 0; k < dims.size(); ++k) center(static_cast<Eigen::Index>(k)) = params.mu(dims[k]);
          spec.center = center;
          if (!out_shift.empty()) spec.shift = to_vector(out_shift);
          if (!out_conc.empty()) spec.concentration = to_vector(out_conc);
          ContaminatedSample c = contaminate(genuine, spec, derive_seed(seed, {2}));
          angles = c.sample.angles();
          mask = std::move(c.outlier);
        } else {
          angles = genuine.angles();
          mask.assign(static_cast<std::size_t>(sim_n), false);
        }
      }
      emit(sim_output, out, [&](std::ostream& o) { write_angle_table(o, angles, &mask, degrees); });
      return kExitOk;
    }

    if (*mc_cmd) {
      const ScenarioFile file = read_scenario_file(scenario_path);
      const auto records = run_trials(file.scenario, file.wle, trials, seed);
      emit(mc_output, out, [&](std::ostream& o) { write_trials_csv(o, records); });
      emit(mc_summary, err, [&](std::ostream& o) { write_summary_csv(o, summarize(records)); });
      return kExitOk;
    }

    if (*mon_cmd) {
      std::vector<double> grid;
      try {
        grid = parse_grid(grid_spec);
      } catch (const Error& e) {
        err << e.what() << '\n';
        return kExitUsage;
      }
      const AngleTable table = read_angle_table_file(mon_input, degrees);
      const MonitorResult result = monitor(table.sample, grid, mon_flags.config(seed));
      const Eigen::Index p = table.sample.dims();
      emit(mon_output, out, [&](std::ostream& o) {
        o << "kstar";
        for (Eigen::Index j = 0; j < p; ++j) o << ",mu" << j + 1;
        for (Eigen::Index j = 0; j < p; ++j) o << ",kappa" << j + 1;
        for (Eigen::Index i = 0; i < p; ++i)
          for (Eigen::Index j = i + 1; j < p; ++j) o << ",lambda" << i + 1 << j + 1;
        o << ",mean_weight,downweighting_level,converged,failed\n";
        for (const auto& pt : result.points) {
          o << format_double(pt.kstar);
          if (pt.fit) {
            const SineParams& q = pt.fit->params;
            for (Eigen::Index j = 0; j < p; ++j) o << ',' << format_double(q.mu(j));
            for (Eigen::Index j = 0; j < p; ++j) o << ',' << format_double(q.kappa(j));
            const Eigen::VectorXd lam = upper_triangle(q.lambda);
            for (Eigen::Index j = 0; j < lam.size(); ++j) o << ',' << format_double(lam(j));
            o << ',' << format_double(pt.mean_weight) << ',' << format_double(pt.downweighting_level) << ','
              << (pt.fit->converged ? 1 : 0) << ",0\n";
          } else {
            for (Eigen::Index j = 0; j < 2 * p + p * (p - 1) / 2; ++j) o << ",nan";
            o << ",nan,nan,0,1\n";
            err << "k* = " << pt.kstar << ": " << pt.failure << '\n';
          }
        }
      });
      return kExitOk;
    }

    if (*grid_cmd) {
      if (resolution < 16) {
        err << "--resolution must be at least 16\n";
        return kExitUsage;
      }
      SineParams params;
      if (!report_path.empty()) {
        params = read_fit_report_file(report_path).fit.params;
      } else {
        params = params_from_flags(g_mu, g_kappa, g_lambda, degrees);
      }
      const Eigen::Index p = params.dims();
      if (p < 2 || pair.size() != 2 || pair[0] == pair[1] || pair[0] < 0 || pair[1] < 0 || pair[0] >= p ||
          pair[1] >= p) {
        err << "--pair must name two distinct coordinates of a model with p >= 2\n";
        return kExitUsage;
      }
      const SineParams sub = make_bivariate_params(params.mu(pair[0]), params.mu(pair[1]), params.kappa(pair[0]),
                                                   params.kappa(pair[1]), params.lambda(pair[0], pair[1]));
      const SineDensity density(sub, NormalizationStrategy::quadrature());
      const double h = kTwoPi<double> / resolution;
      const double scale = degrees ? 180.0 / std::numbers::pi : 1.0;
      emit(grid_output, out, [&](std::ostream& o) {
        o << "theta" << pair[0] + 1 << ",theta" << pair[1] + 1 << ",density\n";
        for (int a = 0; a < resolution; ++a) {
          for (int b = 0; b < resolution; ++b) {
            const double t1 = -std::numbers::pi + a * h;
            const double t2 = -std::numbers::pi + b * h;
            const double d = std::exp(density.log_eval(Eigen::Vector2d(t1, t2)));
            o << format_double(t1 * scale) << ',' << format_double(t2 * scale) << ',' << format_double(d) << '\n';
          }
        }
      });
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
  return kExitUsage;
}

}  // namespace vmtorus
