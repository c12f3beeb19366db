#include "otdcov/special_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace otdcov {

namespace {
// Series representation of P(a, x), valid (fast) for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int k = 0; k < 1000; ++k) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) = 1 - P(a, x), valid for x >= a + 1.
// Modified Lentz evaluation.
double gamma_q_cf(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int k = 1; k <= 1000; ++k) {
    const double an = -k * (k - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}
}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("regularized_gamma_p: a must be > 0");
  if (!(x >= 0.0)) throw std::invalid_argument("regularized_gamma_p: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double chi2_cdf(double x, int d) {
  if (d < 1) throw std::invalid_argument("chi2_cdf: d must be >= 1");
  if (x <= 0.0) return 0.0;
  return regularized_gamma_p(0.5 * d, 0.5 * x);
}

double chi2_quantile(double p, int d) {
  if (d < 1) throw std::invalid_argument("chi2_quantile: d must be >= 1");
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("chi2_quantile: p must lie in [0, 1)");
  if (p == 0.0) return 0.0;
  double hi = static_cast<double>(d) + 10.0;
  while (chi2_cdf(hi, d) < p) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (chi2_cdf(mid, d) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace otdcov
