#include "vmtorus/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "vmtorus/bessel.hpp"
#include "vmtorus/sampling.hpp"

namespace vmtorus {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

double log_sum_exp(const std::vector<double>& v) {
  const double top = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - top);
  return top + std::log(acc);
}

// p = 2: the inner integral over theta_2 is a von Mises kernel,
//   int exp(k2 cos d2 + lambda s1 sin d2) dtheta_2 = 2 pi I0(sqrt(k2^2 + lambda^2 s1^2)),
// leaving a periodic one-dimensional integrand handled by the rectangle rule.
double log_norm_quadrature_2d(const SineParams& params, int grid_points) {
  const double k1 = params.kappa(0);
  const double k2 = params.kappa(1);
  const double lam = params.lambda(0, 1);
  // Fourier content of exp(k cos t) decays like exp(-m^2 / 2k); keep it resolved.
  const int n = std::max(grid_points, static_cast<int>(std::ceil(10.0 * std::sqrt(k1 + std::abs(lam) + 1.0))));
  const double h = kTwoPi<double> / n;
  std::vector<double> terms(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double t = k * h;
    const double s = std::sin(t);
    const double r = std::sqrt(k2 * k2 + lam * lam * s * s);
    terms[static_cast<std::size_t>(k)] = k1 * std::cos(t) + kLog2Pi + log_bessel_i0(r);
  }
  return std::log(h) + log_sum_exp(terms);
}

double log_norm_concentrated(const SineParams& params) {
  const PrecisionForm form = precision_from_params(params);
  if (!form.positive_definite)
    throw Error(ErrorKind::kStrategyInvalid,
                "log_norm_const: concentrated approximation needs a positive definite precision matrix");
  Eigen::LLT<Eigen::MatrixXd> llt(form.precision);
  const double log_det_precision = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double p = static_cast<double>(params.dims());
  return 0.5 * p * kLog2Pi - 0.5 * log_det_precision + params.kappa.sum();
}

// Defensive proposal: an equal mixture of the product of univariate von Mises(mu_j, kappa_j)
// and a flatter product with kappa_j / 4. The flat component covers the ridges that a strong
// interaction (especially a non-PD one) pulls away from mu, keeping the weights bounded.
double log_norm_importance(const SineParams& params, const NormalizationStrategy& strategy) {
  require(strategy.draws >= 1, "log_norm_const: importance sampling needs at least one draw");
  constexpr double kFlatten = 0.25;
  const Eigen::Index p = params.dims();
  const auto draws = static_cast<Eigen::Index>(strategy.draws);
  const Eigen::VectorXd flat_kappa = kFlatten * params.kappa;
  double log_norm_sharp = 0.0, log_norm_flat = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    log_norm_sharp += kLog2Pi + log_bessel_i0(params.kappa(j));
    log_norm_flat += kLog2Pi + log_bessel_i0(flat_kappa(j));
  }

  Rng rng(strategy.seed);
  std::vector<double> terms(static_cast<std::size_t>(draws));
  Eigen::VectorXd d(p);
  for (Eigen::Index i = 0; i < draws; ++i) {
    const Eigen::VectorXd& kappa = rng.uniform() < 0.5 ? params.kappa : flat_kappa;
    for (Eigen::Index j = 0; j < p; ++j) d(j) = draw_von_mises(rng, 0.0, kappa(j));
    const Eigen::ArrayXd c = d.array().cos();
    const Eigen::VectorXd s = d.array().sin().matrix();
    const double sharp = params.kappa.dot(c.matrix()) - log_norm_sharp;
    const double flat = flat_kappa.dot(c.matrix()) - log_norm_flat;
    const double log_q = std::log(0.5) + std::max(sharp, flat) + std::log1p(std::exp(-std::abs(sharp - flat)));
    terms[static_cast<std::size_t>(i)] = params.kappa.dot(c.matrix()) + 0.5 * s.dot(params.lambda * s) - log_q;
  }
  return log_sum_exp(terms) - std::log(static_cast<double>(draws));
}

}  // namespace

void SineParams::validate() const {
  const Eigen::Index p = mu.size();
  require(p >= 1, "SineParams: dimension must be at least 1");
  require(kappa.size() == p, "SineParams: kappa length differs from mu");
  require(lambda.rows() == p && lambda.cols() == p, "SineParams: lambda must be p x p");
  require(mu.allFinite() && kappa.allFinite() && lambda.allFinite(), "SineParams: parameters must be finite");
  require((kappa.array() > 0.0).all(), "SineParams: kappa must be strictly positive");
  require(lambda.diagonal().isZero(0.0), "SineParams: lambda must have a zero diagonal");
  require(lambda == lambda.transpose(), "SineParams: lambda must be symmetric");
}

SineParams make_params(Eigen::VectorXd mu, Eigen::VectorXd kappa, Eigen::MatrixXd lambda) {
  SineParams params{wrapped(mu), std::move(kappa), std::move(lambda)};
  params.validate();
  return params;
}

SineParams make_independent_params(Eigen::VectorXd mu, Eigen::VectorXd kappa) {
  const Eigen::Index p = mu.size();
  return make_params(std::move(mu), std::move(kappa), Eigen::MatrixXd::Zero(p, p));
}

SineParams make_bivariate_params(double mu1, double mu2, double kappa1, double kappa2, double lambda12) {
  Eigen::MatrixXd lambda(2, 2);
  lambda << 0.0, lambda12, lambda12, 0.0;
  return make_params(Eigen::Vector2d(mu1, mu2), Eigen::Vector2d(kappa1, kappa2), lambda);
}

Eigen::MatrixXd PrecisionForm::sigma() const {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(precision);
  if (!lu.isInvertible()) throw Error(ErrorKind::kStrategyInvalid, "PrecisionForm: precision matrix is singular");
  return lu.inverse();
}

PrecisionForm precision_from_params(const SineParams& params) {
  params.validate();
  PrecisionForm form;
  form.precision = -params.lambda;
  form.precision.diagonal() = params.kappa;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(form.precision, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = eig.eigenvalues();
  form.positive_definite = ev.minCoeff() > 0.0;
  const double smallest = ev.cwiseAbs().minCoeff();
  form.condition_number =
      smallest > 0.0 ? ev.cwiseAbs().maxCoeff() / smallest : std::numeric_limits<double>::infinity();
  return form;
}

SineParams params_from_precision(const Eigen::MatrixXd& precision, const Eigen::VectorXd& mu) {
  require(precision.rows() == precision.cols(), "params_from_precision: matrix must be square");
  require(precision == precision.transpose(), "params_from_precision: matrix must be symmetric");
  require(mu.size() == precision.rows(), "params_from_precision: mu length differs from matrix size");
  require((precision.diagonal().array() > 0.0).all(),
          "params_from_precision: diagonal must be positive (kappa > 0)");
  Eigen::MatrixXd lambda = -precision;
  lambda.diagonal().setZero();
  return make_params(mu, precision.diagonal(), lambda);
}

SineParams params_from_precision(const Eigen::MatrixXd& precision) {
  return params_from_precision(precision, Eigen::VectorXd::Zero(precision.rows()));
}

NormalizationStrategy default_strategy(const SineParams& params) {
  if (params.dims() <= 2) return NormalizationStrategy::quadrature();
  if (precision_from_params(params).positive_definite) return NormalizationStrategy::concentrated();
  return NormalizationStrategy::importance_sampling();
}

Eigen::VectorXd log_unnormalized_density_rows(const Eigen::MatrixXd& angles, const SineParams& params) {
  require(angles.cols() == params.dims(), "log_unnormalized_density_rows: dimension mismatch");
  const Eigen::MatrixXd d = angles.rowwise() - params.mu.transpose();
  const Eigen::MatrixXd s = d.array().sin().matrix();
  const Eigen::VectorXd linear = d.array().cos().matrix() * params.kappa;
  const Eigen::VectorXd quadratic = (s * params.lambda).cwiseProduct(s).rowwise().sum();
  return linear + 0.5 * quadratic;
}

double log_norm_const(const SineParams& params, const NormalizationStrategy& strategy) {
  params.validate();
  switch (strategy.kind) {
    case NormalizationStrategy::Kind::kQuadrature:
      if (params.dims() > 2)
        throw Error(ErrorKind::kStrategyInvalid, "log_norm_const: quadrature is only available for p <= 2");
      require(strategy.grid_points >= 8, "log_norm_const: quadrature needs at least 8 grid points");
      if (params.dims() == 1) return kLog2Pi + log_bessel_i0(params.kappa(0));
      return log_norm_quadrature_2d(params, strategy.grid_points);
    case NormalizationStrategy::Kind::kConcentrated:
      return log_norm_concentrated(params);
    case NormalizationStrategy::Kind::kImportanceSampling:
      return log_norm_importance(params, strategy);
  }
  throw Error(ErrorKind::kInvalidArgument, "log_norm_const: unknown strategy");
}

SineDensity::SineDensity(SineParams params, const NormalizationStrategy& strategy)
    : params_(std::move(params)), log_norm_(log_norm_const(params_, strategy)) {}

}  // namespace vmtorus
