#pragma once

#include <Eigen/Dense>

#include "vmtorus/torus.hpp"

namespace vmtorus {

/// Kernel density estimate on the p-torus with a product of von Mises kernels sharing
/// the concentration bandwidth kstar:
///
///   fhat(theta) = 1/n sum_i prod_j exp(kstar cos(theta_j - theta_ij)) / (2 pi I0(kstar)).
///
/// Evaluated in log space, so large kstar does not overflow. kstar = 0 gives the uniform density.
class TorusKde {
 public:
  TorusKde(TorusSample data, double kstar);

  double kstar() const { return kstar_; }
  const TorusSample& data() const { return data_; }
  Eigen::Index dims() const { return data_.dims(); }

  double log_eval(const Eigen::Ref<const Eigen::VectorXd>& theta) const;
  double eval(const Eigen::Ref<const Eigen::VectorXd>& theta) const;

  /// Row-wise evaluation of an m x p matrix of points.
  Eigen::VectorXd log_eval_batch(const Eigen::MatrixXd& points) const;
  Eigen::VectorXd eval_batch(const Eigen::MatrixXd& points) const;

 private:
  TorusSample data_;
  double kstar_;
  Eigen::MatrixXd cos_;  // n x p
  Eigen::MatrixXd sin_;
  double log_scale_;     // -log n - p log(2 pi I0(kstar))
};

}  // namespace vmtorus
