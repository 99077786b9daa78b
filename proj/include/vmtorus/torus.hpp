#pragma once

// Angle arithmetic and circular summary statistics on the p-torus.
//
// Angles are stored in radians on the canonical interval [0, 2pi). Samples are dense
// n x p matrices with one observation per row.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vmtorus/error.hpp"

namespace vmtorus {

template <typename Scalar>
inline constexpr Scalar kTwoPi = Scalar(2) * std::numbers::pi_v<Scalar>;

/// Reduces x to [0, 2pi). Non-finite input is rejected.
template <typename Scalar>
Scalar wrap(Scalar x) {
  require(std::isfinite(x), "wrap: angle must be finite");
  Scalar r = std::fmod(x, kTwoPi<Scalar>);
  if (r < Scalar(0)) r += kTwoPi<Scalar>;
  // fmod of a tiny negative value can round up to exactly 2pi
  if (r >= kTwoPi<Scalar>) r = Scalar(0);
  return r;
}

/// Signed difference a - b mapped to [-pi, pi).
template <typename Scalar>
Scalar angle_diff(Scalar a, Scalar b) {
  Scalar d = wrap(a - b);
  return d >= std::numbers::pi_v<Scalar> ? d - kTwoPi<Scalar> : d;
}

template <typename Derived>
auto wrapped(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return wrap(v); }).eval();
}

/// n x p matrix of wrapped angles, n >= 1 and p >= 1.
class TorusSample {
 public:
  TorusSample() = default;

  /// Wraps every entry; rejects empty or non-finite input.
  explicit TorusSample(const Eigen::MatrixXd& radians) : angles_(radians.rows(), radians.cols()) {
    require(radians.rows() >= 1, "TorusSample: need at least one observation");
    require(radians.cols() >= 1, "TorusSample: dimension must be at least 1");
    angles_ = wrapped(radians);
  }

  Eigen::Index size() const { return angles_.rows(); }
  Eigen::Index dims() const { return angles_.cols(); }
  const Eigen::MatrixXd& angles() const { return angles_; }
  auto row(Eigen::Index i) const { return angles_.row(i); }
  auto col(Eigen::Index j) const { return angles_.col(j); }

  TorusSample rows(const std::vector<Eigen::Index>& index) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(index.size()), dims());
    for (std::size_t k = 0; k < index.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = angles_.row(index[k]);
    return TorusSample(out);
  }

 private:
  Eigen::MatrixXd angles_;
};

/// Per-column (mean cos, mean sin), returned as a 2 x p matrix.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, 2, Eigen::Dynamic> trig_moments(const Eigen::MatrixBase<Derived>& angles) {
  using Scalar = typename Derived::Scalar;
  require(angles.rows() >= 1, "trig_moments: need at least one observation");
  Eigen::Matrix<Scalar, 2, Eigen::Dynamic> m(2, angles.cols());
  const Scalar n = static_cast<Scalar>(angles.rows());
  m.row(0) = angles.array().cos().colwise().sum() / n;
  m.row(1) = angles.array().sin().colwise().sum() / n;
  return m;
}

/// Per-dimension mean resultant length, each in [0, 1].
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> mean_resultant_length(
    const Eigen::MatrixBase<Derived>& angles) {
  auto m = trig_moments(angles);
  return m.colwise().norm().transpose().cwiseMin(typename Derived::Scalar(1));
}

inline constexpr double kDegenerateResultant = 1e-12;

/// Per-dimension mean direction atan2(mean sin, mean cos), wrapped to [0, 2pi).
/// Throws kDegenerateDirection when a resultant length is below 1e-12.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> mean_direction(const Eigen::MatrixBase<Derived>& angles) {
  using Scalar = typename Derived::Scalar;
  auto m = trig_moments(angles);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mu(angles.cols());
  for (Eigen::Index j = 0; j < angles.cols(); ++j) {
    if (std::hypot(m(0, j), m(1, j)) < Scalar(kDegenerateResultant))
      throw Error(ErrorKind::kDegenerateDirection,
                  "mean_direction: resultant length vanishes in dimension " + std::to_string(j));
    mu(j) = wrap(std::atan2(m(1, j), m(0, j)));
  }
  return mu;
}

/// Circular correlation coefficient of two angle columns:
/// sum sin(a-abar) sin(b-bbar) / sqrt(sum sin^2(a-abar) * sum sin^2(b-bbar)).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar circular_correlation(const Eigen::MatrixBase<DerivedA>& a,
                                                const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  require(a.size() == b.size(), "circular_correlation: columns differ in length");
  require(a.size() >= 2, "circular_correlation: need at least two observations");
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> va = a.derived().reshaped();
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vb = b.derived().reshaped();
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> sa = (va.array() - mean_direction(va)(0)).sin();
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> sb = (vb.array() - mean_direction(vb)(0)).sin();
  const Scalar denom = std::sqrt(sa.square().sum() * sb.square().sum());
  // a constant column leaves only rounding noise in its sines
  const Scalar floor = Scalar(kDegenerateResultant) * Scalar(kDegenerateResultant) * static_cast<Scalar>(va.size());
  if (!(sa.square().sum() > floor && sb.square().sum() > floor))
    throw Error(ErrorKind::kDegenerateCorrelation, "circular_correlation: zero sine deviation");
  return std::clamp((sa * sb).sum() / denom, Scalar(-1), Scalar(1));
}

}  // namespace vmtorus
