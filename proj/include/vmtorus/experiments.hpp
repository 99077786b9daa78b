#pragma once

// Monte Carlo comparison of MLE, MLE on genuine data only (MLE0) and WLE under contamination.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vmtorus/estimator.hpp"
#include "vmtorus/sampling.hpp"

namespace vmtorus {

/// (1/p) sum_j (1 - cos(mu_hat_j - mu_true_j)), in [0, 2].
double angle_separation(const Eigen::VectorXd& mu_hat, const Eigen::VectorXd& mu_true);

/// Euclidean norm of v_hat - v_true.
double rmse(const Eigen::VectorXd& v_hat, const Eigen::VectorXd& v_true);

/// Strict upper triangle, row-major: (0,1), (0,2), ..., (1,2), ...
Eigen::VectorXd upper_triangle(const Eigen::MatrixXd& m);

struct ScenarioSpec {
  std::string name;
  SineParams true_params;                      // full p-dimensional truth
  std::vector<SineParams> blocks;              // independent blocks; empty means one block = true_params
  Eigen::Index n = 250;                        // genuine sample size
  std::optional<ContaminationSpec> contamination;
  GibbsConfig gibbs;                           // seed field is ignored; trials derive their own

  Eigen::Index dims() const { return true_params.dims(); }
  void validate() const;
};

/// Joins independent blocks into one block-diagonal parameter set.
SineParams join_blocks(const std::vector<SineParams>& blocks);

/// Bivariate scenario with 50 appended outliers: kappa0 = (k1, k2), lambda0 = lam, zero means.
ScenarioSpec bivariate_scenario(double k1, double k2, double lam, Eigen::Index n = 250, int n_outliers = 50);

/// Five-dimensional block scenario: (5, 10; 5), (10, 20; 15) and an independent kappa = 30
/// coordinate, n = 300, the last 50 rows replaced by outliers in the first two coordinates.
ScenarioSpec five_dim_scenario(Eigen::Index n = 300, int n_outliers = 50);

enum class EstimatorTag { kMle, kMle0, kWle };

std::string to_string(EstimatorTag tag);

struct TrialRecord {
  int trial = 0;
  EstimatorTag estimator = EstimatorTag::kMle;
  double as_mu = 0.0;
  double rmse_kappa = 0.0;
  double rmse_lambda = 0.0;
  bool failed = false;
  std::string failure;
  std::uint64_t seed = 0;
};

/// Simulated data of one trial: genuine sample and its contaminated version.
struct TrialData {
  TorusSample genuine;
  ContaminatedSample contaminated;
};

TrialData simulate_trial(const ScenarioSpec& scenario, std::uint64_t trial_seed);

/// Three records (MLE, MLE0, WLE) per trial, ordered by trial index. Per-trial seeds are
/// derived from (seed, trial) so results do not depend on the thread count.
std::vector<TrialRecord> run_trials(const ScenarioSpec& scenario, const WleConfig& config, int n_trials,
                                    std::uint64_t seed);

/// min, lower quartile, median, upper quartile, max (linear interpolation between order statistics).
struct FiveNumber {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  std::size_t count = 0;
};

FiveNumber five_number(std::vector<double> values);

struct EstimatorSummary {
  FiveNumber as_mu;
  FiveNumber rmse_kappa;
  FiveNumber rmse_lambda;
  std::size_t failures = 0;
};

/// Failed records are counted and excluded from the quantiles.
std::map<EstimatorTag, EstimatorSummary> summarize(const std::vector<TrialRecord>& records);

/// Columns: trial,estimator,AS_mu,rmse_kappa,rmse_lambda,failed
void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records);
void write_summary_csv(std::ostream& out, const std::map<EstimatorTag, EstimatorSummary>& summary);

}  // namespace vmtorus
