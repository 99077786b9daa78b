#include "vmtorus/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "vmtorus/io.hpp"
#include "vmtorus/parallel.hpp"

namespace vmtorus {

double angle_separation(const Eigen::VectorXd& mu_hat, const Eigen::VectorXd& mu_true) {
  require(mu_hat.size() == mu_true.size() && mu_hat.size() >= 1, "angle_separation: length mismatch");
  return (1.0 - (mu_hat - mu_true).array().cos()).mean();
}

double rmse(const Eigen::VectorXd& v_hat, const Eigen::VectorXd& v_true) {
  require(v_hat.size() == v_true.size(), "rmse: length mismatch");
  return (v_hat - v_true).norm();
}

Eigen::VectorXd upper_triangle(const Eigen::MatrixXd& m) {
  const Eigen::Index p = m.rows();
  Eigen::VectorXd out(p * (p - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = i + 1; j < p; ++j) out(k++) = m(i, j);
  return out;
}

SineParams join_blocks(const std::vector<SineParams>& blocks) {
  require(!blocks.empty(), "join_blocks: no blocks");
  Eigen::Index p = 0;
  for (const auto& b : blocks) p += b.dims();
  Eigen::VectorXd mu(p), kappa(p);
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(p, p);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    const Eigen::Index q = b.dims();
    mu.segment(at, q) = b.mu;
    kappa.segment(at, q) = b.kappa;
    lambda.block(at, at, q, q) = b.lambda;
    at += q;
  }
  return make_params(mu, kappa, lambda);
}

void ScenarioSpec::validate() const {
  true_params.validate();
  require(n >= 1, "ScenarioSpec: n must be at least 1");
  if (!blocks.empty()) {
    Eigen::Index p = 0;
    for (const auto& b : blocks) p += b.dims();
    require(p == dims(), "ScenarioSpec: block dimensions must sum to p");
  }
  if (contamination) contamination->validate(dims());
}

ScenarioSpec bivariate_scenario(double k1, double k2, double lam, Eigen::Index n, int n_outliers) {
  ScenarioSpec s;
  s.name = "bivariate";
  s.true_params = make_bivariate_params(0.0, 0.0, k1, k2, lam);
  s.n = n;
  if (n_outliers > 0) s.contamination = default_contamination(n_outliers, {0, 1}, ContaminationMode::kAppend);
  return s;
}

ScenarioSpec five_dim_scenario(Eigen::Index n, int n_outliers) {
  ScenarioSpec s;
  s.name = "five-dim";
  s.blocks = {make_bivariate_params(0.0, 0.0, 5.0, 10.0, 5.0), make_bivariate_params(0.0, 0.0, 10.0, 20.0, 15.0),
              make_independent_params(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 30.0))};
  s.true_params = join_blocks(s.blocks);
  s.n = n;
  if (n_outliers > 0) s.contamination = default_contamination(n_outliers, {0, 1}, ContaminationMode::kReplace);
  return s;
}

std::string to_string(EstimatorTag tag) {
  switch (tag) {
    case EstimatorTag::kMle: return "MLE";
    case EstimatorTag::kMle0: return "MLE0";
    case EstimatorTag::kWle: return "WLE";
  }
  return "?";
}

TrialData simulate_trial(const ScenarioSpec& scenario, std::uint64_t trial_seed) {
  const std::vector<SineParams> blocks =
      scenario.blocks.empty() ? std::vector<SineParams>{scenario.true_params} : scenario.blocks;
  Eigen::MatrixXd angles(scenario.n, scenario.dims());
  Eigen::Index at = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    GibbsConfig gibbs = scenario.gibbs;
    gibbs.seed = derive_seed(trial_seed, {1, b});
    angles.middleCols(at, blocks[b].dims()) = sample_sine_model(blocks[b], scenario.n, gibbs).angles();
    at += blocks[b].dims();
  }
  TrialData data{TorusSample(angles), {}};
  if (scenario.contamination) {
    data.contaminated = contaminate(data.genuine, *scenario.contamination, derive_seed(trial_seed, {2}));
  } else {
    data.contaminated = {data.genuine, std::vector<bool>(static_cast<std::size_t>(scenario.n), false)};
  }
  return data;
}

namespace {

TrialRecord score(int trial, EstimatorTag tag, const SineParams& fit, const SineParams& truth, std::uint64_t seed) {
  TrialRecord r;
  r.trial = trial;
  r.estimator = tag;
  r.seed = seed;
  r.as_mu = angle_separation(fit.mu, truth.mu);
  r.rmse_kappa = rmse(fit.kappa, truth.kappa);
  r.rmse_lambda = rmse(upper_triangle(fit.lambda), upper_triangle(truth.lambda));
  return r;
}

TrialRecord failed_record(int trial, EstimatorTag tag, std::uint64_t seed, const std::string& why) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  return {trial, tag, nan, nan, nan, true, why, seed};
}

}  // namespace

std::vector<TrialRecord> run_trials(const ScenarioSpec& scenario, const WleConfig& config, int n_trials,
                                    std::uint64_t seed) {
  scenario.validate();
  require(n_trials >= 0, "run_trials: n_trials must be non-negative");
  std::vector<std::array<TrialRecord, 3>> slots(static_cast<std::size_t>(n_trials));

  parallel_for(slots.size(), [&](std::size_t t) {
    const int trial = static_cast<int>(t);
    const std::uint64_t trial_seed = derive_seed(seed, {t});
    const TrialData data = simulate_trial(scenario, trial_seed);
    auto attempt = [&](EstimatorTag tag, auto&& fit) {
      try {
        return score(trial, tag, fit(), scenario.true_params, trial_seed);
      } catch (const Error& e) {
        return failed_record(trial, tag, trial_seed, e.what());
      }
    };
    WleConfig trial_config = config;
    trial_config.seed = derive_seed(trial_seed, {3});
    slots[t][0] = attempt(EstimatorTag::kMle, [&] { return mle_fit(data.contaminated.sample).params; });
    slots[t][1] = attempt(EstimatorTag::kMle0, [&] { return mle_fit(data.genuine).params; });
    slots[t][2] = attempt(EstimatorTag::kWle, [&] { return wle_fit(data.contaminated.sample, trial_config).params; });
  });

  std::vector<TrialRecord> records;
  records.reserve(slots.size() * 3);
  for (auto& triple : slots)
    for (auto& r : triple) records.push_back(std::move(r));
  return records;
}

FiveNumber five_number(std::vector<double> values) {
  FiveNumber f;
  f.count = values.size();
  if (values.empty()) return f;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  f.min = values.front();
  f.q1 = quantile(0.25);
  f.median = quantile(0.5);
  f.q3 = quantile(0.75);
  f.max = values.back();
  return f;
}

std::map<EstimatorTag, EstimatorSummary> summarize(const std::vector<TrialRecord>& records) {
  std::map<EstimatorTag, std::array<std::vector<double>, 3>> columns;
  std::map<EstimatorTag, std::size_t> failures;
  for (const auto& r : records) {
    if (r.failed) {
      ++failures[r.estimator];
      columns[r.estimator];
      continue;
    }
    auto& c = columns[r.estimator];
    c[0].push_back(r.as_mu);
    c[1].push_back(r.rmse_kappa);
    c[2].push_back(r.rmse_lambda);
  }
  std::map<EstimatorTag, EstimatorSummary> out;
  for (auto& [tag, c] : columns)
    out[tag] = {five_number(std::move(c[0])), five_number(std::move(c[1])), five_number(std::move(c[2])),
                failures[tag]};
  return out;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "trial,estimator,AS_mu,rmse_kappa,rmse_lambda,failed\n";
  for (const auto& r : records) {
    out << r.trial << ',' << to_string(r.estimator) << ',' << format_double(r.as_mu) << ','
        << format_double(r.rmse_kappa) << ',' << format_double(r.rmse_lambda) << ',' << (r.failed ? 1 : 0) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::map<EstimatorTag, EstimatorSummary>& summary) {
  out << "estimator,metric,count,failures,min,q1,median,q3,max\n";
  for (const auto& [tag, s] : summary) {
    const std::pair<const char*, const FiveNumber*> metrics[] = {
        {"AS_mu", &s.as_mu}, {"rmse_kappa", &s.rmse_kappa}, {"rmse_lambda", &s.rmse_lambda}};
    for (const auto& [name, f] : metrics) {
      out << to_string(tag) << ',' << name << ',' << f->count << ',' << s.failures << ',' << format_double(f->min)
          << ',' << format_double(f->q1) << ',' << format_double(f->median) << ',' << format_double(f->q3) << ','
          << format_double(f->max) << '\n';
    }
  }
}

}  // namespace vmtorus
