#include "pcac/fdist.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pcac/common.hpp"

namespace pcac {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for I_x(a, b), modified Lentz. Converges quickly for
// x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericalFailure("incomplete_beta: continued fraction did not converge");
}

double beta_density(double a, double b, double x) {
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
                  log_beta(a, b));
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0))
    throw std::invalid_argument("incomplete_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) -
                                log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double inverse_incomplete_beta(double a, double b, double prob) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("inverse_incomplete_beta: a, b must be > 0");
  if (!(prob > 0.0 && prob < 1.0))
    throw std::invalid_argument("inverse_incomplete_beta: prob outside (0, 1)");

  // I_x is increasing in x, so [lo, hi] always brackets the root. Newton
  // steps that leave the bracket fall back to bisection.
  double lo = 0.0;
  double hi = 1.0;
  double x = a / (a + b);
  for (int iter = 0; iter < 400; ++iter) {
    const double f = incomplete_beta(a, b, x) - prob;
    if (f == 0.0) return x;
    if (f < 0.0) lo = x; else hi = x;

    const double dens = beta_density(a, b, x);
    double next = (dens > 0.0 && std::isfinite(dens)) ? x - f / dens : -1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);

    if (std::fabs(next - x) <= 4.0 * kEps * std::fmax(x, kTiny) ||
        hi - lo <= 4.0 * kEps * std::fmax(x, kTiny))
      return next;
    x = next;
  }
  throw NumericalFailure("inverse_incomplete_beta: did not converge");
}

double f_cdf(double d1, double d2, double x) {
  if (!(d1 > 0.0) || !(d2 > 0.0))
    throw std::invalid_argument("f_cdf: degrees of freedom must be positive");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  // Upper tail through 1 - z = d2 / (d1 x + d2) to avoid cancellation.
  const double z = d1 * x / (d1 * x + d2);
  if (z <= 0.5) return incomplete_beta(0.5 * d1, 0.5 * d2, z);
  return 1.0 - incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d1 * x + d2));
}

double inverse_f_cdf(double d1, double d2, double prob) {
  if (!(d1 > 0.0) || !(d2 > 0.0))
    throw std::invalid_argument(
        "inverse_f_cdf: degrees of freedom must be positive");
  if (!(prob > 0.0 && prob < 1.0))
    throw std::invalid_argument("inverse_f_cdf: prob outside (0, 1)");
  if (prob <= 0.5) {
    const double z = inverse_incomplete_beta(0.5 * d1, 0.5 * d2, prob);
    return d2 * z / (d1 * (1.0 - z));
  }
  // Solve for w = 1 - z directly: I_w(d2/2, d1/2) = 1 - prob.
  const double w = inverse_incomplete_beta(0.5 * d2, 0.5 * d1, 1.0 - prob);
  if (!(w > 0.0)) throw NumericalFailure("inverse_f_cdf: quantile overflows");
  return d2 * (1.0 - w) / (d1 * w);
}

}  // namespace pcac
