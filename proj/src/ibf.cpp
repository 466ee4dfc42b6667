#include "psaug/ibf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "psaug/errors.hpp"

namespace psaug {
namespace {

double log_gamma(double v) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(v, &sign);
#else
  return std::lgamma(v);
#endif
}

void check_shape(double alpha, double beta) {
  const bool ok = std::isfinite(alpha) && std::isfinite(beta) && alpha > 0.0 && beta > 0.0 &&
                  alpha <= kMaxShape && beta <= kMaxShape;
  if (!ok) {
    throw DomainError("incomplete beta: shape parameters must lie in (0, 1e4], got alpha=" +
                      std::to_string(alpha) + " beta=" + std::to_string(beta));
  }
}

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
// Converges rapidly for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEpsilon = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;

  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
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
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEpsilon) return h;
  }
  throw DomainError("incomplete beta: continued fraction failed to converge");
}

}  // namespace

void IbfParams::validate() const {
  if (!(std::isfinite(s) && s > 0.0)) {
    throw DomainError("ibf params: s must be a positive finite number, got " + std::to_string(s));
  }
  if (!(a > 0.0 && a < 1.0)) {
    throw DomainError("ibf params: a must lie in (0, 1), got " + std::to_string(a));
  }
  check_shape(alpha(), beta());
}

double regularized_ibf(double x, double alpha, double beta) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("incomplete beta: x must lie in [0, 1], got " + std::to_string(x));
  }
  check_shape(alpha, beta);
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double log_front = alpha * std::log(x) + beta * std::log1p(-x) + log_gamma(alpha + beta) -
                           log_gamma(alpha) - log_gamma(beta);
  const double front = std::exp(log_front);

  double value;
  if (x < (alpha + 1.0) / (alpha + beta + 2.0)) {
    value = front * beta_continued_fraction(alpha, beta, x) / alpha;
  } else {
    value = 1.0 - front * beta_continued_fraction(beta, alpha, 1.0 - x) / beta;
  }
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace psaug
