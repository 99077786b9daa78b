#include "vmtorus/bessel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "vmtorus/error.hpp"

namespace vmtorus {
namespace {

constexpr double kSeriesLimit = 15.0;

// sum_k (x/2)^(2k+order) / (k! (k+order)!)
double power_series(int order, double x) {
  const double q = 0.25 * x * x;
  double term = order == 0 ? 1.0 : 0.5 * x;
  double sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k + order));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

// exp(-x) I_order(x) ~ (2 pi x)^(-1/2) sum_k (-1)^k a_k / x^k,
// a_k = prod_{m<=k} (4 order^2 - (2m-1)^2) / (k! 8^k). Stops at the smallest term.
double asymptotic_scaled(int order, double x) {
  const double mu = 4.0 * order * order;
  double term = 1.0;
  double sum = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * x);
    if (std::abs(term) >= previous) break;
    sum += term;
    previous = std::abs(term);
    if (previous < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

void check_argument(double x) {
  require(std::isfinite(x) && x >= 0.0, "bessel: argument must be finite and non-negative");
}

}  // namespace

double bessel_i0(double x) {
  check_argument(x);
  return x <= kSeriesLimit ? power_series(0, x) : std::exp(x) * asymptotic_scaled(0, x);
}

double bessel_i1(double x) {
  check_argument(x);
  return x <= kSeriesLimit ? power_series(1, x) : std::exp(x) * asymptotic_scaled(1, x);
}

double bessel_i0_scaled(double x) {
  check_argument(x);
  return x <= kSeriesLimit ? std::exp(-x) * power_series(0, x) : asymptotic_scaled(0, x);
}

double bessel_i1_scaled(double x) {
  check_argument(x);
  return x <= kSeriesLimit ? std::exp(-x) * power_series(1, x) : asymptotic_scaled(1, x);
}

double log_bessel_i0(double x) {
  check_argument(x);
  return x <= kSeriesLimit ? std::log(power_series(0, x)) : x + std::log(asymptotic_scaled(0, x));
}

double bessel_ratio_a1(double kappa) {
  check_argument(kappa);
  if (kappa == 0.0) return 0.0;
  return kappa <= kSeriesLimit ? power_series(1, kappa) / power_series(0, kappa)
                               : asymptotic_scaled(1, kappa) / asymptotic_scaled(0, kappa);
}

}  // namespace vmtorus
