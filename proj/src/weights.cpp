#include "vmtorus/weights.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace vmtorus {

RafSpec::RafSpec(RafKind kind, double parameter) : kind_(kind), parameter_(parameter) {
  if (kind_ == RafKind::kGkl) require(parameter_ > 0.0 && parameter_ <= 1.0, "RafSpec: GKL tau must be in (0, 1]");
  if (kind_ == RafKind::kPwd) require(parameter_ > 0.0 && std::isfinite(parameter_), "RafSpec: PWD lambda must be > 0");

  require(adjust(0.0) == 0.0, "RafSpec: A(0) must vanish");
  constexpr double h = 1e-6;
  const double slope = (adjust(h) - adjust(-h)) / (2.0 * h);
  require(std::abs(slope - 1.0) < 1e-4, "RafSpec: A'(0) must equal 1");
  double previous = adjust(-0.99);
  for (int k = 1; k <= 200; ++k) {
    const double a = adjust(-0.99 + (100.99 * k) / 200.0);
    require(a >= previous, "RafSpec: A must be non-decreasing");
    previous = a;
  }
}

RafSpec RafSpec::parse(const std::string& raw, double parameter) {
  std::string name = raw;
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  if (name == "schi") return schi();
  if (name == "gkl") return gkl(parameter);
  if (name == "pwd") return pwd(parameter);
  throw Error(ErrorKind::kInvalidArgument, "RafSpec: unknown RAF '" + raw + "' (expected schi, gkl or pwd)");
}

std::string RafSpec::name() const {
  switch (kind_) {
    case RafKind::kSchi: return "schi";
    case RafKind::kGkl: return "gkl";
    case RafKind::kPwd: return "pwd";
  }
  return "unknown";
}

double RafSpec::adjust(double delta) const {
  require(delta >= -1.0, "RafSpec: residual must be >= -1");
  switch (kind_) {
    case RafKind::kSchi:
      return delta * (delta + 4.0) / ((delta + 2.0) * (delta + 2.0));
    case RafKind::kGkl: {
      const double arg = parameter_ * delta + 1.0;
      require(arg > 0.0, "RafSpec: GKL argument must be positive");
      return std::log1p(parameter_ * delta) / parameter_;
    }
    case RafKind::kPwd:
      return std::expm1(parameter_ * std::log1p(delta)) / parameter_;
  }
  return 0.0;
}

double raf_value(const RafSpec& spec, double delta) { return spec.adjust(delta); }

double weight(const RafSpec& spec, double delta) {
  require(!std::isnan(delta) && delta >= -1.0, "weight: residual must be >= -1");
  if (delta <= 0.0) return 1.0;
  if (std::isinf(delta)) {
    // [A + 1] / (delta + 1) -> 0 except for PWD with exponent >= 1 where it stays >= 1
    return spec.kind() == RafKind::kPwd && spec.parameter() >= 1.0 ? 1.0 : 0.0;
  }
  const double numerator = std::max(0.0, spec.adjust(delta) + 1.0);
  return std::clamp(numerator / (delta + 1.0), 0.0, 1.0);
}

double pearson_residual(double fhat, double m) {
  require(fhat > 0.0 && m > 0.0, "pearson_residual: densities must be strictly positive");
  return fhat / m - 1.0;
}

ResidualReport residual_report(const Eigen::VectorXd& log_fhat, const Eigen::VectorXd& log_m, const RafSpec& spec) {
  require(log_fhat.size() == log_m.size(), "residual_report: length mismatch");
  ResidualReport report{Eigen::VectorXd(log_fhat.size()), Eigen::VectorXd(log_fhat.size())};
  for (Eigen::Index i = 0; i < log_fhat.size(); ++i) {
    require(std::isfinite(log_fhat(i)) && std::isfinite(log_m(i)), "residual_report: densities must be positive");
    const double delta = std::expm1(log_fhat(i) - log_m(i));
    report.residuals(i) = delta;
    report.weights(i) = weight(spec, delta);
  }
  return report;
}

ResidualReport residual_report(const TorusSample& sample, const SineParams& params, const TorusKde& kde,
                               const NormalizationStrategy& strategy, const RafSpec& spec) {
  require(sample.dims() == params.dims() && kde.dims() == params.dims(), "residual_report: dimension mismatch");
  const SineDensity model(params, strategy);
  return residual_report(kde.log_eval_batch(sample.angles()), model.log_eval_rows(sample.angles()), spec);
}

}  // namespace vmtorus
