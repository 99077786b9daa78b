#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "vmtorus/model.hpp"
#include "vmtorus/rng.hpp"

namespace vmtorus {

/// One von Mises(mu, kappa) draw (Best-Fisher wrapped-Cauchy envelope). kappa = 0 is uniform.
double draw_von_mises(Rng& rng, double mu, double kappa);

/// n i.i.d. von Mises(mu, kappa) draws.
Eigen::VectorXd sample_univariate_vm(double mu, double kappa, Eigen::Index n, std::uint64_t seed);

struct GibbsConfig {
  int burn_in = 1000;
  int thinning = 10;
  std::uint64_t seed = 1;
};

/// Full conditional of theta_j given the other coordinates: von Mises with this
/// center and concentration.
struct Conditional {
  double center;
  double concentration;
};

/// Exponent in theta_j is kappa_j cos(d_j) + b_j sin(d_j), b_j = sum_{l != j} lambda_jl sin(d_l),
/// which is a von Mises kernel with concentration sqrt(kappa_j^2 + b_j^2) about
/// mu_j + atan2(b_j, kappa_j).
Conditional conditional_from_coefficients(double mu, double kappa, double b);

template <typename Derived>
Conditional sine_conditional(const SineParams& params, const Eigen::MatrixBase<Derived>& theta, Eigen::Index j) {
  double b = 0.0;
  for (Eigen::Index l = 0; l < params.dims(); ++l)
    if (l != j) b += params.lambda(j, l) * std::sin(theta(l) - params.mu(l));
  return conditional_from_coefficients(params.mu(j), params.kappa(j), b);
}

/// Gibbs sampler with exact von Mises full conditionals; deterministic given config.seed.
TorusSample sample_sine_model(const SineParams& params, Eigen::Index n, const GibbsConfig& config);

enum class ContaminationMode {
  kAppend,   // new outlying rows are added
  kReplace,  // the last n_outliers rows get their contaminated coordinates overwritten
};

struct ContaminationSpec {
  int n_outliers = 0;
  ContaminationMode mode = ContaminationMode::kAppend;
  std::vector<Eigen::Index> dims;     // contaminated coordinates
  Eigen::VectorXd center;             // genuine location in the contaminated coordinates (default 0)
  Eigen::VectorXd shift;              // added to center, one entry per contaminated coordinate
  Eigen::VectorXd concentration;      // outlier cluster concentration per contaminated coordinate

  void validate(Eigen::Index p) const;
};

/// Clustered outliers in dims: shift alternates +pi/2, -pi/2, concentration 20.
ContaminationSpec default_contamination(int n_outliers, std::vector<Eigen::Index> dims,
                                        ContaminationMode mode = ContaminationMode::kAppend);

struct ContaminatedSample {
  TorusSample sample;
  std::vector<bool> outlier;  // one flag per row
};

/// Outlying coordinates are independent von Mises(center + shift, concentration) draws.
/// In append mode the untouched coordinates of a new row are copied from a random genuine row.
ContaminatedSample contaminate(const TorusSample& sample, const ContaminationSpec& spec, std::uint64_t seed);

}  // namespace vmtorus
