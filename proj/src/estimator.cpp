#include "vmtorus/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "vmtorus/parallel.hpp"
#include "vmtorus/rng.hpp"

namespace vmtorus {
namespace {

constexpr double kRootTolerance = 1e-3;
constexpr int kMaxDamping = 10;
constexpr int kMaxSubsampleAttempts = 50;

// Inverts a symmetric Sigma; nullopt when singular or when kappa would be non-positive.
std::optional<Eigen::MatrixXd> precision_of(const Eigen::MatrixXd& sigma) {
  if (!sigma.allFinite()) return std::nullopt;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd d = ldlt.vectorD();
  const double scale = std::max(sigma.diagonal().cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if (d.cwiseAbs().minCoeff() <= 1e-13 * scale) return std::nullopt;
  Eigen::MatrixXd precision = ldlt.solve(Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols()));
  precision = 0.5 * (precision + precision.transpose()).eval();
  if (!precision.allFinite() || (precision.diagonal().array() <= 0.0).any()) return std::nullopt;
  return precision;
}

Eigen::VectorXd weighted_location(const Eigen::MatrixXd& angles, const Eigen::VectorXd& weights) {
  require(angles.rows() == weights.size(), "weighted_moment_estimate: weight count differs from sample size");
  require(angles.rows() >= 1, "weighted_moment_estimate: empty sample");
  require((weights.array() >= 0.0).all(), "weighted_moment_estimate: weights must be non-negative");
  const double total = weights.sum();
  if (!(total > 0.0)) throw Error(ErrorKind::kEstimationFailure, "weighted_moment_estimate: total weight is zero");

  const Eigen::RowVectorXd c = weights.transpose() * angles.array().cos().matrix();
  const Eigen::RowVectorXd s = weights.transpose() * angles.array().sin().matrix();
  Eigen::VectorXd mu(angles.cols());
  for (Eigen::Index j = 0; j < angles.cols(); ++j) {
    if (std::hypot(c(j), s(j)) < kDegenerateResultant * total)
      throw Error(ErrorKind::kEstimationFailure,
                  "weighted_moment_estimate: mean direction undefined in dimension " + std::to_string(j));
    mu(j) = wrap(std::atan2(s(j), c(j)));
  }
  return mu;
}

// Off-diagonal: weighted sine cross-moments; diagonal: 2 x weighted mean of 1 - cos.
Eigen::MatrixXd weighted_sigma(const Eigen::MatrixXd& angles, const Eigen::VectorXd& weights,
                               const Eigen::VectorXd& mu) {
  const double total = weights.sum();
  const Eigen::MatrixXd d = angles.rowwise() - mu.transpose();
  const Eigen::MatrixXd sines = d.array().sin().matrix();
  Eigen::MatrixXd sigma = (sines.transpose() * weights.asDiagonal() * sines) / total;
  sigma.diagonal() = (2.0 / total) * (weights.transpose() * (1.0 - d.array().cos()).matrix()).transpose();
  return 0.5 * (sigma + sigma.transpose());
}

NormalizationStrategy strategy_for(const std::optional<NormalizationStrategy>& fixed, const SineParams& params) {
  return fixed ? *fixed : default_strategy(params);
}

// Per-row digest of the centered angles, quantized so that a rotation of the whole
// sample (which only perturbs the centered values in the last bits) keeps it stable.
std::vector<std::uint64_t> row_digests(const TorusSample& sample) {
  Eigen::MatrixXd centered = sample.angles();
  try {
    const Eigen::VectorXd mu = mean_direction(sample.angles());
    centered = centered.rowwise() - mu.transpose();
  } catch (const Error&) {
    // no usable center; raw values
  }
  constexpr double kQuantum = 0x1.0p24;
  std::vector<std::uint64_t> digest(static_cast<std::size_t>(sample.size()));
  for (Eigen::Index i = 0; i < sample.size(); ++i) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (Eigen::Index j = 0; j < sample.dims(); ++j) {
      h = mix64(h ^ static_cast<std::uint64_t>(std::llround(std::cos(centered(i, j)) * kQuantum)));
      h = mix64(h ^ static_cast<std::uint64_t>(std::llround(std::sin(centered(i, j)) * kQuantum)));
    }
    digest[static_cast<std::size_t>(i)] = h;
  }
  return digest;
}

std::vector<Eigen::Index> select_by_key(const std::vector<std::uint64_t>& digest, int size, std::uint64_t stream) {
  std::vector<std::pair<std::uint64_t, Eigen::Index>> keyed(digest.size());
  for (std::size_t i = 0; i < digest.size(); ++i)
    keyed[i] = {mix64(digest[i] ^ stream), static_cast<Eigen::Index>(i)};
  const auto k = static_cast<std::ptrdiff_t>(std::min<std::size_t>(static_cast<std::size_t>(size), keyed.size()));
  std::partial_sort(keyed.begin(), keyed.begin() + k, keyed.end());
  std::vector<Eigen::Index> out;
  out.reserve(static_cast<std::size_t>(k));
  for (std::ptrdiff_t i = 0; i < k; ++i) out.push_back(keyed[static_cast<std::size_t>(i)].second);
  return out;
}

std::uint64_t subsample_stream(std::uint64_t seed, int start, int attempt) {
  return derive_seed(seed, {static_cast<std::uint64_t>(start), static_cast<std::uint64_t>(attempt)});
}

struct Chain {
  std::optional<FitResult> fit;
  std::string failure;
};

Chain run_chain(const TorusSample& sample, const std::vector<std::uint64_t>& digest, const Eigen::VectorXd& log_fhat,
                const WleConfig& config, int start) {
  Chain chain;
  std::optional<SineParams> params;
  std::string init_failure;
  for (int attempt = 0; attempt < kMaxSubsampleAttempts && !params; ++attempt) {
    const auto index = select_by_key(digest, config.subsample_size, subsample_stream(config.seed, start, attempt));
    try {
      params = init_from_subsample(sample.rows(index), config.init_rule);
    } catch (const Error& e) {
      init_failure = e.what();
    }
  }
  if (!params) {
    chain.failure = "initialization: " + init_failure;
    return chain;
  }

  try {
    FitResult fit;
    Eigen::MatrixXd sigma;
    for (int it = 1; it <= config.max_iter; ++it) {
      WleStep step = wle_step(sample, *params, log_fhat, strategy_for(config.strategy, *params), config.raf);
      const double change = parameter_change(*params, step.params);
      params = std::move(step.params);
      sigma = std::move(step.sigma);
      fit.iterations = it;
      if (change < config.tol) {
        fit.converged = true;
        break;
      }
    }
    const SineDensity model(*params, strategy_for(config.strategy, *params));
    ResidualReport report = residual_report(log_fhat, model.log_eval_rows(sample.angles()), config.raf);
    fit.params = *params;
    fit.sigma_hat = sigma;
    fit.pd_flag = precision_from_params(fit.params).positive_definite;
    fit.sum_weights = report.weights.sum();
    const auto small = (report.residuals.array() <= config.root_threshold).count();
    fit.root_score = static_cast<double>(small) / static_cast<double>(sample.size());
    fit.weights = std::move(report.weights);
    fit.residuals = std::move(report.residuals);
    fit.start = start;
    chain.fit = std::move(fit);
  } catch (const Error& e) {
    chain.failure = e.what();
  }
  return chain;
}

}  // namespace

void WleConfig::validate(Eigen::Index p) const {
  require(std::isfinite(kstar) && kstar > 0.0, "WleConfig: kstar must be positive");
  require(max_iter >= 1, "WleConfig: max_iter must be at least 1");
  require(tol > 0.0, "WleConfig: tol must be positive");
  require(n_starts >= 1, "WleConfig: n_starts must be at least 1");
  require(subsample_size >= p + 1, "WleConfig: subsample_size must be at least p + 1");
  require(root_threshold > -1.0 && root_threshold < 0.0, "WleConfig: root_threshold must lie in (-1, 0)");
}

MomentEstimate weighted_moment_estimate(const Eigen::MatrixXd& angles, const Eigen::VectorXd& weights) {
  const Eigen::VectorXd mu = weighted_location(angles, weights);
  const Eigen::MatrixXd sigma = weighted_sigma(angles, weights, mu);
  const auto precision = precision_of(sigma);
  if (!precision)
    throw Error(ErrorKind::kEstimationFailure,
                "weighted_moment_estimate: Sigma is singular or its inverse has a non-positive diagonal");
  return {params_from_precision(*precision, mu), sigma};
}

FitResult mle_fit(const TorusSample& sample) {
  const Eigen::Index n = sample.size();
  const Eigen::Index p = sample.dims();
  if (n < p + 1)
    throw Error(ErrorKind::kEstimationFailure, "mle_fit: need at least p + 1 observations");
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  MomentEstimate est = weighted_moment_estimate(sample.angles(), ones);
  FitResult fit;
  fit.params = std::move(est.params);
  fit.sigma_hat = std::move(est.sigma);
  fit.weights = ones;
  fit.residuals = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  fit.converged = true;
  fit.sum_weights = static_cast<double>(n);
  fit.pd_flag = precision_from_params(fit.params).positive_definite;
  fit.root_score = std::numeric_limits<double>::quiet_NaN();
  fit.distinct_roots = 1;
  return fit;
}

WleStep wle_step(const TorusSample& sample, const SineParams& current, const Eigen::VectorXd& log_fhat,
                 const NormalizationStrategy& strategy, const RafSpec& raf) {
  require(sample.dims() == current.dims(), "wle_step: dimension mismatch");
  require(log_fhat.size() == sample.size(), "wle_step: one density estimate per observation required");
  const SineDensity model(current, strategy);
  ResidualReport report = residual_report(log_fhat, model.log_eval_rows(sample.angles()), raf);

  const double total = report.weights.sum();
  if (!(total > static_cast<double>(sample.dims() + 1)))
    throw Error(ErrorKind::kStepFailure, "wle_step: effective sample collapsed (sum of weights " +
                                             std::to_string(total) + ")");

  // Solve the moment equations; if Sigma^-1 is unusable, pull Sigma toward the current iterate.
  const Eigen::VectorXd mu = weighted_location(sample.angles(), report.weights);
  Eigen::MatrixXd sigma = weighted_sigma(sample.angles(), report.weights, mu);
  if (auto precision = precision_of(sigma)) return {params_from_precision(*precision, mu), sigma, std::move(report)};

  Eigen::MatrixXd previous;
  try {
    previous = precision_from_params(current).sigma();
  } catch (const Error&) {
    throw Error(ErrorKind::kStepFailure, "wle_step: update unusable and current iterate has singular precision");
  }
  for (int k = 0; k < kMaxDamping; ++k) {
    sigma = 0.5 * (sigma + previous);
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
    if (auto precision = precision_of(sigma)) return {params_from_precision(*precision, mu), sigma, std::move(report)};
  }
  throw Error(ErrorKind::kStepFailure, "wle_step: damping failed to restore a positive kappa");
}

WleStep wle_step(const TorusSample& sample, const SineParams& current, const TorusKde& kde,
                 const NormalizationStrategy& strategy, const RafSpec& raf) {
  return wle_step(sample, current, kde.log_eval_batch(sample.angles()), strategy, raf);
}

double parameter_change(const SineParams& a, const SineParams& b) {
  const double loc = (1.0 - (a.mu - b.mu).array().cos()).maxCoeff();
  const double conc = (a.kappa - b.kappa).cwiseAbs().maxCoeff();
  const double inter = (a.lambda - b.lambda).cwiseAbs().maxCoeff();
  return std::max({loc, conc, inter});
}

double parameter_distance(const SineParams& a, const SineParams& b) {
  double loc = 0.0;
  for (Eigen::Index j = 0; j < a.dims(); ++j) loc = std::max(loc, std::abs(angle_diff(a.mu(j), b.mu(j))));
  const double conc = (a.kappa - b.kappa).cwiseAbs().maxCoeff();
  const double inter = (a.lambda - b.lambda).cwiseAbs().maxCoeff();
  return std::max({loc, conc, inter});
}

SineParams init_from_subsample(const TorusSample& sub, InitOffDiagonal rule) {
  const Eigen::Index p = sub.dims();
  Eigen::VectorXd mu;
  try {
    mu = mean_direction(sub.angles());
  } catch (const Error& e) {
    throw Error(ErrorKind::kDegenerateSubsample, std::string("init_from_subsample: ") + e.what());
  }
  const Eigen::VectorXd rho = mean_resultant_length(sub.angles());
  for (Eigen::Index r = 0; r < p; ++r)
    if (!(rho(r) > kDegenerateResultant && rho(r) < 1.0 - 1e-12))
      throw Error(ErrorKind::kDegenerateSubsample,
                  "init_from_subsample: resultant length outside (0, 1) in dimension " + std::to_string(r));

  Eigen::MatrixXd sigma(p, p);
  for (Eigen::Index r = 0; r < p; ++r) sigma(r, r) = -2.0 * std::log(rho(r));
  for (Eigen::Index r = 0; r < p; ++r) {
    for (Eigen::Index s = r + 1; s < p; ++s) {
      double rc;
      try {
        rc = circular_correlation(sub.col(r), sub.col(s));
      } catch (const Error& e) {
        throw Error(ErrorKind::kDegenerateSubsample, std::string("init_from_subsample: ") + e.what());
      }
      const double scale = rule == InitOffDiagonal::kCorrelationScaled ? std::sqrt(sigma(r, r) * sigma(s, s))
                                                                       : sigma(r, r) * sigma(s, s);
      sigma(r, s) = sigma(s, r) = rc * scale;
    }
  }

  for (int k = 0; k < 64; ++k) {
    if (auto precision = precision_of(sigma)) return params_from_precision(*precision, mu);
    Eigen::MatrixXd diag = sigma.diagonal().asDiagonal();
    sigma = 0.5 * (sigma + diag);
  }
  throw Error(ErrorKind::kDegenerateSubsample, "init_from_subsample: could not obtain a positive kappa");
}

std::vector<Eigen::Index> subsample_indices(const TorusSample& sample, int size, std::uint64_t seed, int start,
                                            int attempt) {
  return select_by_key(row_digests(sample), size, subsample_stream(seed, start, attempt));
}

FitResult wle_fit(const TorusSample& sample, const WleConfig& config) {
  config.validate(sample.dims());
  if (sample.size() < config.subsample_size)
    throw Error(ErrorKind::kEstimationFailure, "wle_fit: sample smaller than the subsample size");

  const TorusKde kde(sample, config.kstar);
  const Eigen::VectorXd log_fhat = kde.log_eval_batch(sample.angles());
  const auto digest = row_digests(sample);

  std::vector<Chain> chains(static_cast<std::size_t>(config.n_starts));
  parallel_for(chains.size(), [&](std::size_t s) {
    chains[s] = run_chain(sample, digest, log_fhat, config, static_cast<int>(s));
  });

  int failed = 0;
  bool any_converged = false;
  for (const auto& c : chains) {
    if (!c.fit) ++failed;
    else any_converged = any_converged || c.fit->converged;
  }
  if (failed == config.n_starts) {
    std::map<std::string, int> causes;
    for (const auto& c : chains) ++causes[c.failure];
    std::ostringstream msg;
    msg << "wle_fit: all " << config.n_starts << " starts failed:";
    for (const auto& [cause, count] : causes) msg << "\n  " << count << " x " << cause;
    throw Error(ErrorKind::kEstimationFailure, msg.str());
  }

  // Distinct roots in start order; the first chain reaching a root represents it.
  std::vector<const FitResult*> roots;
  for (const auto& c : chains) {
    if (!c.fit || (any_converged && !c.fit->converged)) continue;
    const bool seen = std::any_of(roots.begin(), roots.end(), [&](const FitResult* r) {
      return parameter_distance(r->params, c.fit->params) < kRootTolerance;
    });
    if (!seen) roots.push_back(&*c.fit);
  }

  const FitResult* best = roots.front();
  for (const FitResult* r : roots) {
    if (r->root_score < best->root_score ||
        (r->root_score == best->root_score && r->sum_weights > best->sum_weights))
      best = r;
  }
  FitResult out = *best;
  out.distinct_roots = static_cast<int>(roots.size());
  out.failed_starts = failed;
  return out;
}

MonitorResult monitor(const TorusSample& sample, const std::vector<double>& kstar_grid, const WleConfig& base) {
  require(!kstar_grid.empty(), "monitor: k* grid must be non-empty");
  for (std::size_t i = 1; i < kstar_grid.size(); ++i)
    require(kstar_grid[i] > kstar_grid[i - 1], "monitor: k* grid must be strictly increasing");

  MonitorResult result;
  result.points.resize(kstar_grid.size());
  for (std::size_t g = 0; g < kstar_grid.size(); ++g) {
    MonitorPoint& point = result.points[g];
    point.kstar = kstar_grid[g];
    WleConfig config = base;
    config.kstar = kstar_grid[g];
    try {
      point.fit = wle_fit(sample, config);
      point.mean_weight = point.fit->weights.mean();
      point.downweighting_level = point.fit->downweighting_level();
    } catch (const Error& e) {
      point.failure = e.what();
      point.mean_weight = std::numeric_limits<double>::quiet_NaN();
      point.downweighting_level = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return result;
}

}  // namespace vmtorus
