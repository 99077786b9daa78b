// Acceptance suite: one PASS / FAIL / SKIP line per criterion. Exit status is non-zero when
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vmtorus/estimator.hpp"
#include "vmtorus/experiments.hpp"
#include "vmtorus/io.hpp"
#include "vmtorus/parallel.hpp"
#include "vmtorus/sampling.hpp"

using namespace vmtorus;
using std::numbers::pi;

namespace {

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict;
  std::string detail;
  std::vector<double> table;  // every metric the criterion computed, for the determinism check
};

std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

double median(std::vector<double> v) { return five_number(std::move(v)).median; }

// ---------------------------------------------------------------------------------------

double grid_mass(const SineParams& params) {
  const SineDensity density(params);
  if (params.dims() == 1)
    return oracle::integrate_1d([&](double t) { return std::exp(density.log_eval(Eigen::VectorXd::Constant(1, t))); },
                                512);
  return oracle::integrate_2d([&](double a, double b) { return std::exp(density.log_eval(Eigen::Vector2d(a, b))); },
                              512);
}

Outcome normalization() {
  Rng rng(1001);
  std::vector<SineParams> sets = {make_bivariate_params(0, 0, 10, 20, 15)};
  for (int k = 0; k < 4; ++k)
    sets.push_back(make_bivariate_params(2 * pi * rng.uniform(), 2 * pi * rng.uniform(), 0.5 + 30 * rng.uniform(),
                                         0.5 + 30 * rng.uniform(), 40 * (rng.uniform() - 0.5)));
  for (int k = 0; k < 5; ++k)
    sets.push_back(make_independent_params(Eigen::VectorXd::Constant(1, 2 * pi * rng.uniform()),
                                           Eigen::VectorXd::Constant(1, 0.1 + 50 * rng.uniform())));
  double worst = 0;
  Outcome o{Verdict::kPass, "", {}};
  for (const auto& p : sets) {
    const double err = std::abs(grid_mass(p) - 1.0);
    worst = std::max(worst, err);
    o.table.push_back(err);
  }
  o.verdict = worst < 1e-4 ? Verdict::kPass : Verdict::kFail;
  o.detail = "max |mass - 1| = " + fmt(worst, 3) + " over 10 sets (p = 1, 2)";
  return o;
}

Outcome bessel_constant() {
  double worst = 0;
  Outcome o{Verdict::kPass, "", {}};
  for (double k : {0.5, 1.0, 5.0, 20.0}) {
    const SineParams p = make_independent_params(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, k));
    const long double expected = std::log(2 * std::numbers::pi_v<long double> * oracle::bessel_i0(k));
    const double got = log_norm_const(p, NormalizationStrategy::quadrature());
    const double rel = static_cast<double>(std::abs((got - expected) / expected));
    worst = std::max(worst, rel);
    o.table.push_back(got);
  }
  o.verdict = worst < 1e-10 ? Verdict::kPass : Verdict::kFail;
  o.detail = "max relative error " + fmt(worst, 3);
  return o;
}

Outcome sampler_validity() {
  const SineParams p = make_bivariate_params(0, 0, 5, 10, 5);
  const TorusSample s = sample_sine_model(p, 20000, {1000, 10, derive_seed(kDefaultSeed, {3})});
  auto kernel = [&](double a, double b) {
    return std::exp(oracle::sine_exponent(a, b, 0, 0, 5, 10, 5) - 15.0);
  };
  const double mass = oracle::integrate_2d(kernel, 512);
  auto expect = [&](auto g) { return oracle::integrate_2d([&](double a, double b) { return kernel(a, b) * g(a, b); }, 512) / mass; };
  const double e1 = expect([](double a, double) { return std::cos(a); });
  const double e2 = expect([](double, double b) { return std::cos(b); });
  const double e12 = expect([](double a, double b) { return std::sin(a) * std::sin(b); });
  const Eigen::ArrayXd d1 = s.col(0).array(), d2 = s.col(1).array();
  const double m1 = d1.cos().mean(), m2 = d2.cos().mean(), m12 = (d1.sin() * d2.sin()).mean();
  const double worst = std::max({std::abs(m1 - e1), std::abs(m2 - e2), std::abs(m12 - e12)});
  return {worst < 0.02 ? Verdict::kPass : Verdict::kFail,
          "E[cos d1] " + fmt(m1) + " vs " + fmt(e1) + ", E[cos d2] " + fmt(m2) + " vs " + fmt(e2) +
              ", E[s1 s2] " + fmt(m12) + " vs " + fmt(e12) + "; max gap " + fmt(worst, 2),
          {m1, m2, m12}};
}

Outcome mle_consistency() {
  const SineParams truth = make_bivariate_params(0, 0, 5, 10, 5);
  int good = 0;
  Outcome o{Verdict::kPass, "", {}};
  double k1 = 0, k2 = 0, lam = 0;
  for (std::uint64_t r = 0; r < 10; ++r) {
    const FitResult fit = mle_fit(sample_sine_model(truth, 5000, {1000, 10, derive_seed(kDefaultSeed, {4, r})}));
    const double as = angle_separation(fit.params.mu, truth.mu);
    const double e1 = fit.params.kappa(0) / 5 - 1, e2 = fit.params.kappa(1) / 10 - 1;
    const double el = fit.params.lambda(0, 1) / 5 - 1;
    good += as < 0.001 && std::abs(e1) < 0.10 && std::abs(e2) < 0.10 && std::abs(el) < 0.15;
    k1 += fit.params.kappa(0) / 10, k2 += fit.params.kappa(1) / 10, lam += fit.params.lambda(0, 1) / 10;
    o.table.insert(o.table.end(), {as, fit.params.kappa(0), fit.params.kappa(1), fit.params.lambda(0, 1)});
  }
  o.verdict = good >= 9 ? Verdict::kPass : Verdict::kFail;
  o.detail = std::to_string(good) + "/10 replicates within tolerance; mean estimates kappa = (" + fmt(k1) + ", " +
             fmt(k2) + "), lambda = " + fmt(lam) + " vs (5, 10), 5";
  return o;
}

Outcome efficiency() {
  Outcome o{Verdict::kPass, "", {}};
  bool ok = true;
  std::uint64_t idx = 0;
  for (const SineParams& truth : {make_bivariate_params(0, 0, 5, 10, 5), make_bivariate_params(0, 0, 10, 20, 15)}) {
    const TorusSample s = sample_sine_model(truth, 250, {1000, 10, derive_seed(kDefaultSeed, {5, idx++})});
    WleConfig cfg;
    cfg.kstar = 50;
    const FitResult wle = wle_fit(s, cfg);
    const FitResult mle = mle_fit(s);
    const double as = angle_separation(wle.params.mu, mle.params.mu);
    const double mw = wle.weights.mean();
    ok = ok && as < 0.001 && mw > 0.95;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("kappa0 = (") + fmt(truth.kappa(0)) + ", " +
                fmt(truth.kappa(1)) + "): AS(WLE, MLE) = " + fmt(as, 3) + ", mean weight = " + fmt(mw);
    o.table.insert(o.table.end(), {as, mw});
  }
  o.verdict = ok ? Verdict::kPass : Verdict::kFail;
  return o;
}

Outcome robustness() {
  WleConfig cfg;  // SCHI, k* = 10
  const auto records = run_trials(bivariate_scenario(10, 20, 15), cfg, 50, derive_seed(kDefaultSeed, {6}));
  const auto summary = summarize(records);
  const auto& wle = summary.at(EstimatorTag::kWle);
  const auto& mle = summary.at(EstimatorTag::kMle);
  const bool ok = wle.as_mu.median < 0.05 && wle.as_mu.median <= mle.as_mu.median / 3 &&
                  wle.rmse_kappa.median <= mle.rmse_kappa.median / 2;
  Outcome o{ok ? Verdict::kPass : Verdict::kFail,
            "median AS: WLE " + fmt(wle.as_mu.median, 3) + ", MLE " + fmt(mle.as_mu.median, 3) + ", MLE0 " +
                fmt(summary.at(EstimatorTag::kMle0).as_mu.median, 3) + "; median RMSE(kappa): WLE " +
                fmt(wle.rmse_kappa.median, 3) + ", MLE " + fmt(mle.rmse_kappa.median, 3) + "; WLE failures " +
                std::to_string(wle.failures),
            {}};
  for (const auto& r : records) o.table.insert(o.table.end(), {r.as_mu, r.rmse_kappa, r.rmse_lambda});
  return o;
}

Outcome discrimination() {
  WleConfig cfg;
  cfg.kstar = 5;
  cfg.raf = RafSpec::gkl();
  int good = 0;
  Outcome o{Verdict::kPass, "", {}};
  double worst_out = 1, worst_gen = 1;
  for (std::uint64_t r = 0; r < 10; ++r) {
    const TrialData data = simulate_trial(bivariate_scenario(10, 20, 15), derive_seed(kDefaultSeed, {7, r}));
    cfg.seed = derive_seed(kDefaultSeed, {7, r, 1});
    const FitResult fit = wle_fit(data.contaminated.sample, cfg);
    int out_low = 0, out_n = 0, gen_high = 0, gen_n = 0;
    for (std::size_t i = 0; i < data.contaminated.outlier.size(); ++i) {
      const double w = fit.weights(static_cast<Eigen::Index>(i));
      if (data.contaminated.outlier[i]) out_low += w < 0.2, ++out_n;
      else gen_high += w > 0.5, ++gen_n;
    }
    const double fo = static_cast<double>(out_low) / out_n, fg = static_cast<double>(gen_high) / gen_n;
    good += fo >= 0.8 && fg >= 0.9;
    worst_out = std::min(worst_out, fo);
    worst_gen = std::min(worst_gen, fg);
    o.table.insert(o.table.end(), {fo, fg});
  }
  o.verdict = good >= 8 ? Verdict::kPass : Verdict::kFail;
  o.detail = std::to_string(good) + "/10 replicates; worst outlier share w < 0.2: " + fmt(worst_out) +
             ", worst genuine share w > 0.5: " + fmt(worst_gen);
  return o;
}

Outcome raf_axioms() {
  const std::vector<RafSpec> rafs = {RafSpec::schi(),  RafSpec::gkl(0.25), RafSpec::gkl(0.5),
                                     RafSpec::gkl(1.0), RafSpec::pwd(0.5),  RafSpec::pwd(1.0)};
  std::string problems;
  for (const RafSpec& r : rafs) {
    const std::string id = r.name() + "(" + fmt(r.parameter()) + ")";
    if (r.adjust(0.0) != 0.0) problems += " " + id + ":A(0)";
    const double h = 1e-6;
    if (std::abs((r.adjust(h) - r.adjust(-h)) / (2 * h) - 1.0) >= 1e-4) problems += " " + id + ":A'(0)";
    double prev = -INFINITY;
    for (int i = 0; i < 200; ++i) {
      const double d = -0.99 + (100.99) * i / 199.0;
      const double a = r.adjust(d);
      if (a < prev) problems += " " + id + ":monotone@" + fmt(d);
      prev = a;
      const double w = weight(r, d);
      if (!(w >= 0 && w <= 1)) problems += " " + id + ":range@" + fmt(d);
      if (d <= 0 && w != 1.0) problems += " " + id + ":unit@" + fmt(d);
    }
    for (int i = 0; i <= 100; ++i)
      if (weight(r, -1.0 + i / 100.0) != 1.0) problems += " " + id + ":unit";
  }
  return {problems.empty() ? Verdict::kPass : Verdict::kFail,
          problems.empty() ? "SCHI, GKL(0.25, 0.5, 1), PWD(0.5, 1) satisfy all axioms" : "violations:" + problems, {}};
}

Outcome table_one() {
  const std::string path = std::string(VMTORUS_FIXTURE_DIR) + "/tim8.csv";
  if (!std::filesystem::exists(path))
    return {Verdict::kSkip, "fixture " + path + " not present (see tools/fetch_fixtures.sh)", {}};
  const AngleTable table = read_angle_table_file(path);
  const FitResult mle = mle_fit(table.sample);
  auto row = [](const SineParams& p) {
    return std::vector<double>{p.mu(0), p.mu(1), p.kappa(0), p.kappa(1), p.lambda(0, 1)};
  };
  const std::vector<double> mle_paper = {4.87, 5.87, 1.28, 0.60, 0.06};
  const std::vector<double> wle_paper = {5.17, 5.64, 6.47, 4.64, -0.98};
  WleConfig cfg;
  cfg.kstar = 1;
  const FitResult wle = wle_fit(table.sample, cfg);
  const auto m = row(mle.params), w = row(wle.params);
  bool ok = std::abs(wle.downweighting_level() - 0.48) <= 0.08;
  std::string detail = "MLE (";
  for (int i = 0; i < 5; ++i) {
    const double gap = i < 2 ? std::abs(angle_diff(m[i], mle_paper[i])) : std::abs(m[i] - mle_paper[i]);
    const double wgap = i < 2 ? std::abs(angle_diff(w[i], wle_paper[i])) : std::abs(w[i] - wle_paper[i]);
    ok = ok && gap <= 0.05 && wgap <= 0.5;
    detail += (i ? ", " : "") + fmt(m[i], 3);
  }
  detail += "), WLE (";
  for (int i = 0; i < 5; ++i) detail += (i ? ", " : "") + fmt(w[i], 3);
  detail += "), down-weighting " + fmt(wle.downweighting_level(), 3);
  return {ok ? Verdict::kPass : Verdict::kFail, detail, {}};
}

Outcome five_dim() {
  WleConfig cfg;
  std::vector<TrialRecord> records;
  try {
    records = run_trials(five_dim_scenario(), cfg, 20, derive_seed(kDefaultSeed, {10}));
  } catch (const Error& e) {
    return {Verdict::kFail, std::string("global failure: ") + e.what(), {}};
  }
  const auto summary = summarize(records);
  const auto& wle = summary.at(EstimatorTag::kWle);
  const auto& mle = summary.at(EstimatorTag::kMle);
  Outcome o{wle.as_mu.median < mle.as_mu.median ? Verdict::kPass : Verdict::kFail,
            "20 trials; median AS: WLE " + fmt(wle.as_mu.median, 3) + ", MLE " + fmt(mle.as_mu.median, 3) +
                ", MLE0 " + fmt(summary.at(EstimatorTag::kMle0).as_mu.median, 3) + "; failures WLE " +
                std::to_string(wle.failures) + ", MLE " + std::to_string(mle.failures),
            {}};
  for (const auto& r : records) o.table.insert(o.table.end(), {r.as_mu, r.rmse_kappa, r.rmse_lambda});
  return o;
}

// ---------------------------------------------------------------------------------------

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
  double budget_seconds;  // 0 = no runtime bound
  bool replayed;          // part of the determinism check
};

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "normalization suite", normalization, 10, false},
      {2, "Bessel / constant oracle", bessel_constant, 0, false},
      {3, "sampler validity", sampler_validity, 30, true},
      {4, "MLE consistency", mle_consistency, 0, true},
      {5, "efficiency at the model", efficiency, 0, true},
      {6, "robustness reproduction", robustness, 900, true},
      {7, "weight discrimination", discrimination, 0, true},
      {8, "RAF axioms", raf_axioms, 0, false},
      {9, "TIM8 backbone fit", table_one, 0, false},
      {10, "p = 5 block scenario", five_dim, 0, true},
  };

  const unsigned base_threads = thread_count();
  std::vector<std::vector<double>> tables(criteria.size());
  bool failed = false;
  auto report = [&](int id, const std::string& name, Verdict v, const std::string& detail, double seconds) {
    const char* tag = v == Verdict::kPass ? "PASS" : v == Verdict::kFail ? "FAIL" : "SKIP";
    std::cout << '[' << tag << "] " << id << ". " << name << ": " << detail << " (" << fmt(seconds, 3) << " s)"
              << std::endl;
    failed = failed || v == Verdict::kFail;
  };

  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const auto& cr = criteria[c];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {Verdict::kFail, std::string("exception: ") + e.what(), {}};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.budget_seconds > 0 && secs > cr.budget_seconds && o.verdict == Verdict::kPass) {
      o.verdict = Verdict::kFail;
      o.detail += "; runtime over " + fmt(cr.budget_seconds) + " s";
    }
    tables[c] = std::move(o.table);
    report(cr.id, cr.name, o.verdict, o.detail, secs);
  }

  // Replay with a different worker count; every metric must match bit for bit.
  const unsigned other_threads = base_threads == 3 ? 2 : 3;
  set_thread_count(other_threads);
  const auto t0 = std::chrono::steady_clock::now();
  std::string mismatch;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    if (!criteria[c].replayed) continue;
    Outcome o;
    try {
      o = criteria[c].run();
    } catch (const std::exception&) {
      o.table.clear();
    }
    if (tables[c].empty() || !bit_equal(tables[c], o.table)) mismatch += " " + std::to_string(criteria[c].id);
  }
  set_thread_count(base_threads);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(11, "determinism", mismatch.empty() ? Verdict::kPass : Verdict::kFail,
         mismatch.empty() ? "criteria 3-7 and 10 bit-identical with " + std::to_string(base_threads) + " and " +
                                std::to_string(other_threads) + " threads"
                          : "tables differ for criteria" + mismatch,
         secs);

  return failed ? 1 : 0;
}
