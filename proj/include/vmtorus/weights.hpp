#pragma once

// Pearson residuals, residual adjustment functions (RAF) and the weight map
//
//   w(delta) = 1                                 for delta <= 0
//   w(delta) = min{1, [A(delta) + 1]^+ / (delta + 1)}  otherwise.

#include <string>

#include <Eigen/Dense>

#include "vmtorus/kde.hpp"
#include "vmtorus/model.hpp"

namespace vmtorus {

enum class RafKind {
  kSchi,  // symmetric chi-squared
  kGkl,   // generalized Kullback-Leibler, parameter tau in (0, 1]
  kPwd,   // power divergence, exponent lambda > 0
};

class RafSpec {
 public:
  static RafSpec schi() { return RafSpec(RafKind::kSchi, 0.0); }
  static RafSpec gkl(double tau = 1.0) { return RafSpec(RafKind::kGkl, tau); }
  static RafSpec pwd(double lambda = 0.5) { return RafSpec(RafKind::kPwd, lambda); }
  /// "schi", "gkl" or "pwd"; parameter is tau or lambda where relevant.
  static RafSpec parse(const std::string& name, double parameter);

  RafKind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  std::string name() const;

  /// A(delta) for delta >= -1.
  double adjust(double delta) const;

 private:
  // Checks A(0) = 0, A'(0) = 1 and monotonicity numerically; throws on failure.
  RafSpec(RafKind kind, double parameter);

  RafKind kind_;
  double parameter_;
};

double raf_value(const RafSpec& spec, double delta);

/// Weight in [0, 1]; identically 1 on [-1, 0]. delta = +inf maps to the limiting weight.
double weight(const RafSpec& spec, double delta);

/// fhat / m - 1; both densities must be strictly positive.
double pearson_residual(double fhat, double m);

struct ResidualReport {
  Eigen::VectorXd residuals;
  Eigen::VectorXd weights;
};

/// Residuals and weights from log densities: delta_i = exp(log_fhat_i - log_m_i) - 1.
ResidualReport residual_report(const Eigen::VectorXd& log_fhat, const Eigen::VectorXd& log_m, const RafSpec& spec);

/// Residuals of every observation against the non-smoothed model density.
ResidualReport residual_report(const TorusSample& sample, const SineParams& params, const TorusKde& kde,
                               const NormalizationStrategy& strategy, const RafSpec& spec);

}  // namespace vmtorus
