#pragma once

// Multivariate von Mises sine model on the p-torus.
//
//   m(theta) = C(kappa, Lambda)^-1 exp[ kappa' cos(theta - mu) + 1/2 s' Lambda s ],
//   s = sin(theta - mu),
//
// with Lambda symmetric and zero on the diagonal. The associated precision matrix
// Sigma^-1 has diagonal kappa and off-diagonal -Lambda, so that for concentrated data
// the exponent behaves like sum(kappa) - 1/2 (theta - mu)' Sigma^-1 (theta - mu).

#include <cstdint>

#include <Eigen/Dense>

#include "vmtorus/torus.hpp"

namespace vmtorus {

struct SineParams {
  Eigen::VectorXd mu;
  Eigen::VectorXd kappa;
  Eigen::MatrixXd lambda;

  Eigen::Index dims() const { return mu.size(); }

  /// Throws unless sizes agree, mu is finite, kappa > 0 and lambda is symmetric with zero diagonal.
  void validate() const;
};

SineParams make_params(Eigen::VectorXd mu, Eigen::VectorXd kappa, Eigen::MatrixXd lambda);

/// Independent (Lambda = 0) model.
SineParams make_independent_params(Eigen::VectorXd mu, Eigen::VectorXd kappa);

/// Bivariate model with interaction lambda12.
SineParams make_bivariate_params(double mu1, double mu2, double kappa1, double kappa2, double lambda12);

struct PrecisionForm {
  Eigen::MatrixXd precision;  // Sigma^-1
  bool positive_definite = false;
  double condition_number = 0.0;  // ratio of extreme absolute eigenvalues of Sigma^-1

  /// Sigma = (Sigma^-1)^-1; throws kStrategyInvalid when the precision is singular.
  Eigen::MatrixXd sigma() const;
};

PrecisionForm precision_from_params(const SineParams& params);

/// kappa_j = P_jj, lambda_ij = -P_ij. Throws on asymmetric P or a non-positive diagonal.
SineParams params_from_precision(const Eigen::MatrixXd& precision, const Eigen::VectorXd& mu);
SineParams params_from_precision(const Eigen::MatrixXd& precision);

struct NormalizationStrategy {
  enum class Kind { kQuadrature, kConcentrated, kImportanceSampling };

  Kind kind = Kind::kQuadrature;
  int grid_points = 512;          // quadrature resolution per axis
  std::int64_t draws = 200000;    // importance-sampling sample size
  std::uint64_t seed = 0x5eed;    // importance-sampling stream

  static NormalizationStrategy quadrature(int grid_points = 512) { return {Kind::kQuadrature, grid_points}; }
  static NormalizationStrategy concentrated() { return {Kind::kConcentrated}; }
  static NormalizationStrategy importance_sampling(std::int64_t draws = 200000, std::uint64_t seed = 0x5eed) {
    return {Kind::kImportanceSampling, 512, draws, seed};
  }
};

/// Quadrature for p <= 2, concentrated approximation for p > 2 with PD precision,
/// importance sampling otherwise.
NormalizationStrategy default_strategy(const SineParams& params);

/// kappa' cos(theta - mu) + 1/2 sin(theta - mu)' Lambda sin(theta - mu).
template <typename Derived>
double log_unnormalized_density(const Eigen::MatrixBase<Derived>& theta, const SineParams& params) {
  require(theta.size() == params.dims(), "log_unnormalized_density: dimension mismatch");
  const Eigen::VectorXd d = theta.derived().reshaped().template cast<double>() - params.mu;
  const Eigen::VectorXd s = d.array().sin().matrix();
  return params.kappa.dot(d.array().cos().matrix()) + 0.5 * s.dot(params.lambda * s);
}

/// Row-wise exponent for an n x p matrix of angles.
Eigen::VectorXd log_unnormalized_density_rows(const Eigen::MatrixXd& angles, const SineParams& params);

/// log C(kappa, Lambda). Quadrature requires p <= 2; the concentrated approximation
/// requires a positive definite precision (kStrategyInvalid otherwise).
double log_norm_const(const SineParams& params, const NormalizationStrategy& strategy);

template <typename Derived>
double log_density(const Eigen::MatrixBase<Derived>& theta, const SineParams& params,
                   const NormalizationStrategy& strategy) {
  return log_unnormalized_density(theta, params) - log_norm_const(params, strategy);
}

/// Model with its normalizing constant computed once.
class SineDensity {
 public:
  SineDensity(SineParams params, const NormalizationStrategy& strategy);
  explicit SineDensity(SineParams params) : SineDensity(params, default_strategy(params)) {}

  const SineParams& params() const { return params_; }
  double log_norm() const { return log_norm_; }

  template <typename Derived>
  double log_eval(const Eigen::MatrixBase<Derived>& theta) const {
    return log_unnormalized_density(theta, params_) - log_norm_;
  }
  Eigen::VectorXd log_eval_rows(const Eigen::MatrixXd& angles) const {
    return (log_unnormalized_density_rows(angles, params_).array() - log_norm_).matrix();
  }

 private:
  SineParams params_;
  double log_norm_;
};

}  // namespace vmtorus
