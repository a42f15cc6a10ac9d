#include "lossrisk/specfun.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace lossrisk::specfun {

namespace {

// Lanczos coefficients, g = 7, n = 9 (Godfrey's set).
constexpr double kLanczosG = 7.0;
constexpr double kLanczos[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,    12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6,  1.5056327351493116e-7};

double lanczos_log_gamma(double x) {
  // valid for x >= 0.5
  const double z = x - 1.0;
  double a = kLanczos[0];
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (z + i);
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * M_PI) + (z + 0.5) * std::log(t) - t + std::log(a);
}

void require_positive(double x, const char* who) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::domain_error(std::string(who) + ": argument must be positive");
}

}  // namespace

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  if (x < 0.5) {
    // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return std::log(M_PI / std::sin(M_PI * x)) - lanczos_log_gamma(1.0 - x);
  }
  return lanczos_log_gamma(x);
}

double digamma(double x) {
  require_positive(x, "digamma");
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // asymptotic series with Bernoulli coefficients through x^-14
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = std::log(x) - 0.5 * inv;
  series -= inv2 * (1.0 / 12 + inv2 * (-1.0 / 120 + inv2 * (1.0 / 252 +
            inv2 * (-1.0 / 240 + inv2 * (1.0 / 132 +
            inv2 * (-691.0 / 32760 + inv2 * (1.0 / 12)))))));
  return acc + series;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double acc = 0.0;
  while (x < 6.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = inv * (1.0 + 0.5 * inv);
  series += inv * inv2 * (1.0 / 6 + inv2 * (-1.0 / 30 + inv2 * (1.0 / 42 +
            inv2 * (-1.0 / 30 + inv2 * (5.0 / 66 + inv2 * (-691.0 / 2730 +
            inv2 * (7.0 / 6)))))));
  return acc + series;
}

double log_pochhammer(double alpha, double m) {
  if (!(alpha > 0.0) || !(alpha + m > 0.0) || !std::isfinite(alpha) || !std::isfinite(m))
    throw std::domain_error("log_pochhammer: need alpha > 0 and alpha + m > 0");
  if (m == 0.0) return 0.0;
  const double mi = std::round(m);
  if (mi == m && std::abs(mi) <= 64.0) {
    // (alpha)_m with integer m: plain log product, no Gamma cancellation
    double acc = 0.0;
    if (mi > 0) {
      for (int j = 0; j < static_cast<int>(mi); ++j) acc += std::log(alpha + j);
    } else {
      for (int j = 0; j < static_cast<int>(-mi); ++j) acc -= std::log(alpha + m + j);
    }
    return acc;
  }
  return log_gamma(alpha + m) - log_gamma(alpha);
}

}  // namespace lossrisk::specfun
