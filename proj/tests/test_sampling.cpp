#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "vmtorus/bessel.hpp"
#include "vmtorus/sampling.hpp"

using namespace vmtorus;
using std::numbers::pi;

namespace {

// E[g] under the bivariate sine model on a 512^2 grid.
double grid_moment(const SineParams& p, const std::function<double(double, double)>& g) {
  auto kernel = [&](double a, double b) {
    return std::exp(oracle::sine_exponent(a, b, p.mu(0), p.mu(1), p.kappa(0), p.kappa(1), p.lambda(0, 1)) -
                    p.kappa.sum());
  };
  const double mass = oracle::integrate_2d(kernel, 512);
  return oracle::integrate_2d([&](double a, double b) { return kernel(a, b) * g(a, b); }, 512) / mass;
}

}  // namespace

TEST_CASE("univariate von Mises draws") {
  const Eigen::VectorXd flat = sample_univariate_vm(1.0, 0.0, 100000, 4);
  CHECK(mean_resultant_length(flat)(0) < 0.01);
  CHECK((flat.array() >= 0.0).all());
  CHECK((flat.array() < 2 * pi).all());

  const Eigen::VectorXd x = sample_univariate_vm(2.0, 5.0, 100000, 8);
  CHECK(std::abs(angle_diff(mean_direction(x)(0), 2.0)) < 0.02);
  CHECK(mean_resultant_length(x)(0) == doctest::Approx(0.8934).epsilon(0.01 / 0.8934));
  CHECK(std::abs(mean_resultant_length(x)(0) - bessel_ratio_a1(5.0)) < 0.01);

  CHECK(sample_univariate_vm(2.0, 5.0, 100, 8) == x.head(100));
  CHECK_THROWS_AS(sample_univariate_vm(0.0, -1.0, 10, 1), Error);
}

TEST_CASE("conditional arithmetic") {
  const Conditional c = conditional_from_coefficients(0.0, 10.0, 15.0 * 0.1);
  CHECK(c.concentration == doctest::Approx(10.1119).epsilon(1e-5));
  CHECK(c.center == doctest::Approx(0.14889).epsilon(1e-4));

  const SineParams params = make_bivariate_params(0.0, 0.0, 10, 20, 15);
  const Conditional via_params = sine_conditional(params, Eigen::Vector2d(0.0, std::asin(0.1)), 0);
  CHECK(via_params.concentration == doctest::Approx(c.concentration));
  CHECK(via_params.center == doctest::Approx(c.center));
}

TEST_CASE("closed-form conditional reproduces the joint density") {
  const SineParams p = make_bivariate_params(0.7, 4.0, 5, 10, 12);
  auto joint = [&](double a, double b) {
    return std::exp(oracle::sine_exponent(a, b, p.mu(0), p.mu(1), p.kappa(0), p.kappa(1), p.lambda(0, 1)));
  };
  double worst = 0.0;
  const double h = 2 * pi / 64;
  for (int a = 0; a < 64; ++a) {
    for (int b = 0; b < 64; ++b) {
      const Eigen::Vector2d t(a * h, b * h);
      for (int j = 0; j < 2; ++j) {
        const Conditional c = sine_conditional(p, t, j);
        const double vm = std::exp(c.concentration * std::cos(t(j) - c.center)) /
                          (2 * pi * static_cast<double>(oracle::bessel_i0(c.concentration)));
        const double marginal = oracle::integrate_1d(
            [&](double x) { return j == 0 ? joint(x, t(1)) : joint(t(0), x); }, 512);
        worst = std::max(worst, std::abs(vm / (joint(t(0), t(1)) / marginal) - 1.0));
      }
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("Gibbs sampler") {
  SUBCASE("independent coordinates") {
    const SineParams p = make_independent_params(Eigen::Vector2d(1, 5), Eigen::Vector2d(2, 8));
    const TorusSample s = sample_sine_model(p, 100000, {200, 1, 3});
    const Eigen::VectorXd r = mean_resultant_length(s.angles());
    CHECK(std::abs(r(0) - bessel_ratio_a1(2)) < 0.01);
    CHECK(std::abs(r(1) - bessel_ratio_a1(8)) < 0.01);
  }

  SUBCASE("bivariate moments match quadrature within three standard errors") {
    const SineParams p = make_bivariate_params(0.5, 3.0, 5, 10, 5);
    const TorusSample s = sample_sine_model(p, 20000, {});
    const Eigen::ArrayXd d1 = s.col(0).array() - p.mu(0);
    const Eigen::ArrayXd d2 = s.col(1).array() - p.mu(1);
    auto check_moment = [&](const Eigen::ArrayXd& values, double expected) {
      const double mean = values.mean();
      const double se = std::sqrt((values - mean).square().sum() / (values.size() - 1) / values.size());
      CHECK(std::abs(mean - expected) < 0.02);
      // thinning leaves little autocorrelation; allow for it with a modest inflation
      CHECK(std::abs(mean - expected) < 3 * 1.5 * se);
    };
    check_moment(d1.cos(), grid_moment(p, [&](double a, double) { return std::cos(a - p.mu(0)); }));
    check_moment(d2.cos(), grid_moment(p, [&](double, double b) { return std::cos(b - p.mu(1)); }));
    check_moment(d1.sin() * d2.sin(), grid_moment(p, [&](double a, double b) {
                   return std::sin(a - p.mu(0)) * std::sin(b - p.mu(1));
                 }));
  }

  SUBCASE("deterministic per seed") {
    const SineParams p = make_bivariate_params(0, 0, 10, 20, 15);
    GibbsConfig cfg{100, 2, 42};
    CHECK(sample_sine_model(p, 50, cfg).angles() == sample_sine_model(p, 50, cfg).angles());
    cfg.seed = 43;
    CHECK(sample_sine_model(p, 50, cfg).angles() != sample_sine_model(p, 50, {100, 2, 42}).angles());
  }

  CHECK_THROWS_AS(sample_sine_model(make_bivariate_params(0, 0, 1, 1, 0), 10, {10, 0, 1}), Error);
}

TEST_CASE("contamination") {
  const SineParams p = make_bivariate_params(0, 0, 10, 20, 15);
  const TorusSample genuine = sample_sine_model(p, 250, {});

  SUBCASE("no outliers is a no-op") {
    const ContaminatedSample c = contaminate(genuine, default_contamination(0, {0, 1}), 1);
    CHECK(c.sample.angles() == genuine.angles());
    CHECK(std::count(c.outlier.begin(), c.outlier.end(), true) == 0);
  }

  SUBCASE("append mode with shift (pi, pi)") {
    ContaminationSpec spec = default_contamination(50, {0, 1});
    spec.shift = Eigen::Vector2d(pi, pi);
    const ContaminatedSample c = contaminate(genuine, spec, 1);
    CHECK(c.sample.size() == 300);
    CHECK(std::count(c.outlier.begin(), c.outlier.end(), true) == 50);
    CHECK(c.sample.angles().topRows(250) == genuine.angles());
    for (Eigen::Index i = 250; i < 300; ++i) {
      CHECK(c.outlier[static_cast<std::size_t>(i)]);
      CHECK(std::abs(angle_diff(c.sample.angles()(i, 0), pi)) < 1.5);
    }
  }

  SUBCASE("append mode on one coordinate copies the rest from genuine rows") {
    const ContaminatedSample c = contaminate(genuine, default_contamination(20, {1}), 9);
    for (Eigen::Index i = 250; i < 270; ++i) {
      bool found = false;
      for (Eigen::Index r = 0; r < 250 && !found; ++r) found = genuine.angles()(r, 0) == c.sample.angles()(i, 0);
      CHECK(found);
    }
  }

  SUBCASE("replace mode leaves other coordinates untouched") {
    Eigen::MatrixXd five(300, 5);
    five.leftCols(2) = sample_sine_model(p, 300, {}).angles();
    five.rightCols(3) = sample_sine_model(make_independent_params(Eigen::Vector3d::Zero(), Eigen::Vector3d(5, 9, 30)),
                                          300, {})
                            .angles();
    const TorusSample s(five);
    const ContaminatedSample c = contaminate(s, default_contamination(50, {0, 1}, ContaminationMode::kReplace), 3);
    CHECK(c.sample.size() == 300);
    CHECK(c.sample.angles().rightCols(3) == s.angles().rightCols(3));
    CHECK(c.sample.angles().topRows(250) == s.angles().topRows(250));
    CHECK(c.outlier[249] == false);
    CHECK(c.outlier[250] == true);
    CHECK(c.sample.angles().bottomRows(50).leftCols(2) != s.angles().bottomRows(50).leftCols(2));

    CHECK_THROWS_AS(contaminate(s, default_contamination(301, {0}, ContaminationMode::kReplace), 3), Error);
  }

  CHECK_THROWS_AS(contaminate(genuine, default_contamination(5, {2}), 1), Error);
  CHECK_THROWS_AS(contaminate(genuine, default_contamination(5, {}), 1), Error);
}
