#include "vmtorus/kde.hpp"

#include <cmath>

#include "vmtorus/bessel.hpp"
#include "vmtorus/parallel.hpp"

namespace vmtorus {

TorusKde::TorusKde(TorusSample data, double kstar) : data_(std::move(data)), kstar_(kstar) {
  require(std::isfinite(kstar) && kstar >= 0.0, "TorusKde: kstar must be finite and non-negative");
  require(data_.size() >= 1, "TorusKde: reference data must be non-empty");
  cos_ = data_.angles().array().cos();
  sin_ = data_.angles().array().sin();
  const double p = static_cast<double>(data_.dims());
  log_scale_ = -std::log(static_cast<double>(data_.size())) -
               p * (std::log(kTwoPi<double>) + log_bessel_i0(kstar_));
}

double TorusKde::log_eval(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  require(theta.size() == dims(), "TorusKde: dimension mismatch");
  const Eigen::VectorXd c = theta.array().cos();
  const Eigen::VectorXd s = theta.array().sin();
  // sum_j cos(theta_j - theta_ij) for every reference row i
  const Eigen::VectorXd agreement = cos_ * c + sin_ * s;
  const Eigen::ArrayXd exponent = kstar_ * agreement.array();
  const double top = exponent.maxCoeff();
  return log_scale_ + top + std::log((exponent - top).exp().sum());
}

double TorusKde::eval(const Eigen::Ref<const Eigen::VectorXd>& theta) const { return std::exp(log_eval(theta)); }

Eigen::VectorXd TorusKde::log_eval_batch(const Eigen::MatrixXd& points) const {
  require(points.cols() == dims(), "TorusKde: dimension mismatch");
  Eigen::VectorXd out(points.rows());
  parallel_for(static_cast<std::size_t>(points.rows()), [&](std::size_t i) {
    const auto r = static_cast<Eigen::Index>(i);
    out(r) = log_eval(points.row(r).transpose());
  });
  return out;
}

Eigen::VectorXd TorusKde::eval_batch(const Eigen::MatrixXd& points) const {
  // scalar exp, so batch and pointwise results agree bit for bit
  return log_eval_batch(points).unaryExpr([](double v) { return std::exp(v); });
}

}  // namespace vmtorus
