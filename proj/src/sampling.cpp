#include "vmtorus/sampling.hpp"

#include <cmath>
#include <numbers>

namespace vmtorus {

double draw_von_mises(Rng& rng, double mu, double kappa) {
  require(std::isfinite(kappa) && kappa >= 0.0, "draw_von_mises: kappa must be finite and non-negative");
  if (kappa < 1e-8) return wrap(kTwoPi<double> * rng.uniform());

  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double z = std::cos(std::numbers::pi * rng.uniform());
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    const double u2 = rng.uniform_open();
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double offset = std::acos(std::clamp(f, -1.0, 1.0));
      return wrap(rng.uniform() < 0.5 ? mu - offset : mu + offset);
    }
  }
}

Eigen::VectorXd sample_univariate_vm(double mu, double kappa, Eigen::Index n, std::uint64_t seed) {
  require(n >= 0, "sample_univariate_vm: n must be non-negative");
  Rng rng(seed);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = draw_von_mises(rng, mu, kappa);
  return out;
}

Conditional conditional_from_coefficients(double mu, double kappa, double b) {
  return {wrap(mu + std::atan2(b, kappa)), std::hypot(kappa, b)};
}

TorusSample sample_sine_model(const SineParams& params, Eigen::Index n, const GibbsConfig& config) {
  params.validate();
  require(n >= 1, "sample_sine_model: n must be at least 1");
  require(config.burn_in >= 0 && config.thinning >= 1, "sample_sine_model: invalid burn-in or thinning");

  Rng rng(config.seed);
  const Eigen::Index p = params.dims();
  Eigen::VectorXd state = params.mu;
  auto sweep = [&] {
    for (Eigen::Index j = 0; j < p; ++j) {
      const Conditional c = sine_conditional(params, state, j);
      state(j) = draw_von_mises(rng, c.center, c.concentration);
    }
  };

  for (int t = 0; t < config.burn_in; ++t) sweep();
  Eigen::MatrixXd out(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int t = 0; t < config.thinning; ++t) sweep();
    out.row(i) = state.transpose();
  }
  return TorusSample(out);
}

void ContaminationSpec::validate(Eigen::Index p) const {
  require(n_outliers >= 0, "ContaminationSpec: n_outliers must be non-negative");
  require(!dims.empty(), "ContaminationSpec: contaminated dimensions must be non-empty");
  const auto k = static_cast<Eigen::Index>(dims.size());
  for (Eigen::Index d : dims) require(d >= 0 && d < p, "ContaminationSpec: dimension index out of range");
  require(center.size() == 0 || center.size() == k, "ContaminationSpec: center length must match dims");
  require(shift.size() == k, "ContaminationSpec: shift length must match dims");
  require(concentration.size() == k, "ContaminationSpec: concentration length must match dims");
  require((concentration.array() > 0.0).all(), "ContaminationSpec: concentration must be positive");
}

ContaminationSpec default_contamination(int n_outliers, std::vector<Eigen::Index> dims, ContaminationMode mode) {
  ContaminationSpec spec;
  spec.n_outliers = n_outliers;
  spec.mode = mode;
  const auto k = static_cast<Eigen::Index>(dims.size());
  spec.dims = std::move(dims);
  spec.center = Eigen::VectorXd::Zero(k);
  spec.shift.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) spec.shift(i) = (i % 2 == 0 ? 0.5 : -0.5) * std::numbers::pi;
  spec.concentration = Eigen::VectorXd::Constant(k, 20.0);
  return spec;
}

ContaminatedSample contaminate(const TorusSample& sample, const ContaminationSpec& spec, std::uint64_t seed) {
  const Eigen::Index n = sample.size();
  const Eigen::Index p = sample.dims();
  spec.validate(p);
  const Eigen::Index m = spec.n_outliers;
  const auto k = static_cast<Eigen::Index>(spec.dims.size());
  const Eigen::VectorXd center = spec.center.size() == 0 ? Eigen::VectorXd::Zero(k) : spec.center;

  Rng rng(seed);
  Eigen::MatrixXd out;
  Eigen::Index first = 0;
  if (spec.mode == ContaminationMode::kAppend) {
    out.resize(n + m, p);
    out.topRows(n) = sample.angles();
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto donor = static_cast<Eigen::Index>(rng.next() % static_cast<std::uint64_t>(n));
      out.row(n + i) = sample.row(donor);
    }
    first = n;
  } else {
    require(m <= n, "contaminate: more outliers than observations in replace mode");
    out = sample.angles();
    first = n - m;
  }

  for (Eigen::Index i = first; i < first + m; ++i)
    for (Eigen::Index c = 0; c < k; ++c)
      out(i, spec.dims[static_cast<std::size_t>(c)]) =
          draw_von_mises(rng, center(c) + spec.shift(c), spec.concentration(c));

  std::vector<bool> mask(static_cast<std::size_t>(out.rows()), false);
  for (Eigen::Index i = first; i < first + m; ++i) mask[static_cast<std::size_t>(i)] = true;
  return {TorusSample(out), std::move(mask)};
}

}  // namespace vmtorus
