#pragma once

// Approximate maximum likelihood and weighted likelihood estimation for the sine model.
//
// Both estimators solve the same moment equations. With weights w_i (all 1 for MLE):
//
//   mu        = atan2(sum w sin(theta), sum w cos(theta))         per dimension
//   Sigma_jk  = sum w sin(theta_j - mu_j) sin(theta_k - mu_k) / sum w   (j != k)
//   Sigma_jj  = 2 sum w (1 - cos(theta_j - mu_j)) / sum w
//
// and (kappa, Lambda) are read off Sigma^-1. The WLE iterates these equations with weights
// recomputed from Pearson residuals of a fixed torus KDE against the current model.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vmtorus/kde.hpp"
#include "vmtorus/model.hpp"
#include "vmtorus/weights.hpp"

namespace vmtorus {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

struct FitResult {
  SineParams params;
  Eigen::MatrixXd sigma_hat;
  Eigen::VectorXd weights;
  Eigen::VectorXd residuals;  // NaN for MLE, which has no density estimate
  int iterations = 0;
  bool converged = false;
  double sum_weights = 0.0;
  bool pd_flag = false;
  double root_score = 0.0;
  int start = -1;             // chain that produced the selected root; -1 for MLE
  int distinct_roots = 0;
  int failed_starts = 0;

  /// 1 - sum(w) / n.
  double downweighting_level() const {
    return 1.0 - sum_weights / static_cast<double>(weights.size());
  }
};

/// Off-diagonal rule for the subsample starting value of Sigma.
enum class InitOffDiagonal {
  kCorrelationScaled,  // rho_c(r, s) sqrt(Sigma_rr Sigma_ss)
  kLiteral,            // rho_c(r, s) Sigma_rr Sigma_ss
};

struct WleConfig {
  double kstar = 10.0;
  RafSpec raf = RafSpec::schi();
  int max_iter = 200;
  double tol = 1e-6;
  int n_starts = 100;
  int subsample_size = 10;
  double root_threshold = -0.9;
  std::uint64_t seed = kDefaultSeed;
  InitOffDiagonal init_rule = InitOffDiagonal::kCorrelationScaled;
  std::optional<NormalizationStrategy> strategy;  // default: chosen per iterate by default_strategy

  void validate(Eigen::Index p) const;
};

struct MomentEstimate {
  SineParams params;
  Eigen::MatrixXd sigma;
};

/// Solves the weighted moment equations for fixed weights. Throws kEstimationFailure when
/// Sigma is singular or its inverse has a non-positive diagonal.
MomentEstimate weighted_moment_estimate(const Eigen::MatrixXd& angles, const Eigen::VectorXd& weights);

/// Approximate MLE; weights are all 1.
FitResult mle_fit(const TorusSample& sample);

struct WleStep {
  SineParams params;
  Eigen::MatrixXd sigma;
  ResidualReport report;  // residuals and weights at the input parameters
};

/// One reweighting update from current. log_fhat holds the KDE at every observation.
/// Throws kStepFailure when the total weight drops to p + 1 or below, or when damping fails.
WleStep wle_step(const TorusSample& sample, const SineParams& current, const Eigen::VectorXd& log_fhat,
                 const NormalizationStrategy& strategy, const RafSpec& raf);
WleStep wle_step(const TorusSample& sample, const SineParams& current, const TorusKde& kde,
                 const NormalizationStrategy& strategy, const RafSpec& raf);

/// Largest change between parameter sets: 1 - cos for locations, absolute for kappa and lambda.
double parameter_change(const SineParams& a, const SineParams& b);

/// Largest absolute difference, locations compared on the circle.
double parameter_distance(const SineParams& a, const SineParams& b);

/// Starting value from a (small) subsample: circular mean, Sigma_rr = -2 log rho_r and
/// off-diagonals from circular correlations. Off-diagonals are halved until the inverse
/// has a positive diagonal. Throws kDegenerateSubsample.
SineParams init_from_subsample(const TorusSample& sub, InitOffDiagonal rule = InitOffDiagonal::kCorrelationScaled);

/// Row indices of the subsample used by chain `start`, attempt `attempt`. Selection depends on
/// the rows' values and the seed, not on row order.
std::vector<Eigen::Index> subsample_indices(const TorusSample& sample, int size, std::uint64_t seed, int start,
                                            int attempt);

/// Multi-start weighted likelihood fit. Throws kEstimationFailure if every start fails.
FitResult wle_fit(const TorusSample& sample, const WleConfig& config);

struct MonitorPoint {
  double kstar = 0.0;
  std::optional<FitResult> fit;
  std::string failure;  // empty on success
  double mean_weight = 0.0;
  double downweighting_level = 0.0;
};

struct MonitorResult {
  std::vector<MonitorPoint> points;
};

/// Independent WLE fits over a strictly increasing k* grid, same seed for every point.
MonitorResult monitor(const TorusSample& sample, const std::vector<double>& kstar_grid, const WleConfig& base);

}  // namespace vmtorus
