#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "lossrisk/distributions.hpp"
#include "lossrisk/specfun.hpp"

using namespace lossrisk::specfun;

namespace {

struct Moments {
  double mean, se, var;
};

Moments moments(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double var = ss / (n - 1.0);
  return {mean, std::sqrt(var / n), var};
}

}  // namespace

TEST_CASE("reproducibility: same (seed, stream) gives identical sequences") {
  RngStream s{12345, 77};
  const auto a = sample(DistSpec::gamma(2.5, 1.3), s, 512);
  const auto b = sample(DistSpec::gamma(2.5, 1.3), s, 512);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

  // a longer run extends the shorter one sample-for-sample
  const auto c = sample(DistSpec::gamma(2.5, 1.3), s, 1024);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == c[i]);
}

TEST_CASE("distinct stream ids decorrelate") {
  const auto a = sample(DistSpec::gamma(3.0, 1.0), RngStream{9, 0}, 20000);
  const auto b = sample(DistSpec::gamma(3.0, 1.0), RngStream{9, 1}, 20000);
  const auto ma = moments(a), mb = moments(b);
  double cov = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - ma.mean) * (b[i] - mb.mean);
  cov /= (a.size() - 1.0);
  const double corr = cov / std::sqrt(ma.var * mb.var);
  CHECK(std::abs(corr) < 0.03);
}

TEST_CASE("gamma sample mean a/b within 4 SE over 1e6 draws") {
  const double a = 3.7, b = 2.2;
  const auto v = sample(DistSpec::gamma(a, b), RngStream{2024, 5}, 1000000);
  const auto m = moments(v);
  CHECK(std::abs(m.mean - a / b) < 4.0 * m.se);
}

TEST_CASE("noncentral chi-square: zero noncentrality reduces to chi-square") {
  RngStream s{31, 4};
  Rng r1(s, 0), r2(s, 0);
  // with lambda = 0 the sampler must consume the identical variates
  for (int i = 0; i < 100; ++i)
    CHECK(sample_noncentral_chisq(r1, 5.0, 0.0) == sample_chisq(r2, 5.0));
}

TEST_CASE("noncentral chi-square mean d + lambda within 4 SE") {
  const double d = 4.0, lam = 7.5;
  const auto v = sample(DistSpec::noncentral_chi_square(d, lam), RngStream{8, 3}, 400000);
  const auto m = moments(v);
  CHECK(std::abs(m.mean - (d + lam)) < 4.0 * m.se);
}

TEST_CASE("beta type II mean sigma a/(b-1) within 4 SE") {
  const double a = 2.0, b = 3.0, sigma = 2.0;
  const auto v = sample(DistSpec::beta_type_ii(a, b, sigma), RngStream{77, 1}, 400000);
  const auto m = moments(v);
  CHECK(std::abs(m.mean - sigma * a / (b - 1.0)) < 4.0 * m.se);
}

TEST_CASE("poisson and negative binomial moments") {
  const auto p = sample(DistSpec::poisson(3.4), RngStream{11, 0}, 400000);
  auto mp_ = moments(p);
  CHECK(std::abs(mp_.mean - 3.4) < 4.0 * mp_.se);

  const auto pl = sample(DistSpec::poisson(48.0), RngStream{11, 9}, 400000);
  auto mpl = moments(pl);
  CHECK(std::abs(mpl.mean - 48.0) < 4.0 * mpl.se);

  const double r = 2.0, theta = 3.0;
  const auto nb = sample(DistSpec::neg_binomial(r, theta), RngStream{11, 1}, 400000);
  auto mnb = moments(nb);
  CHECK(std::abs(mnb.mean - theta) < 4.0 * mnb.se);
  // variance theta (theta + r) / r, variance of the sample variance ~ m4/n
  CHECK(std::abs(mnb.var - theta * (theta + r) / r) < 0.15);
}

TEST_CASE("dirichlet normalizes and has the right marginal means") {
  const std::vector<double> w{2.0, 3.0, 5.0};
  const auto draws = sample_vec(DistSpec::dirichlet(w), RngStream{6, 2}, 100000);
  std::vector<double> mean(3, 0.0);
  for (const auto& u : draws) {
    CHECK(std::abs(u[0] + u[1] + u[2] - 1.0) < 1e-12);
    for (int i = 0; i < 3; ++i) mean[i] += u[i];
  }
  for (int i = 0; i < 3; ++i) {
    mean[i] /= draws.size();
    CHECK(std::abs(mean[i] - w[i] / 10.0) < 4e-3);
  }
}

TEST_CASE("gamma law identities for W^h and log W") {
  // For W ~ G(xi, beta): V(W^h), V(log W) = trigamma(xi), Cov(W^h, log W)
  const double xi = 3.3, beta = 1.7, h = 0.6;
  const std::size_t n = 1000000;
  const auto w = sample(DistSpec::gamma(xi, beta), RngStream{101, 0}, n);

  std::vector<double> wh(n), lw(n);
  for (std::size_t i = 0; i < n; ++i) {
    wh[i] = std::pow(w[i], h);
    lw[i] = std::log(w[i]);
  }
  const auto mh = moments(wh);
  const auto ml = moments(lw);

  const double var_h = std::pow(beta, -2.0 * h) *
                       (std::exp(log_pochhammer(xi, 2.0 * h)) -
                        std::exp(2.0 * log_pochhammer(xi, h)));
  // sampling error of a variance estimate: se ~ sqrt((m4 - var^2)/n)
  CHECK(std::abs(mh.var - var_h) < 0.01);
  CHECK(std::abs(ml.var - trigamma(xi)) < 0.005);

  double cov = 0.0;
  for (std::size_t i = 0; i < n; ++i) cov += (wh[i] - mh.mean) * (lw[i] - ml.mean);
  cov /= (n - 1.0);
  const double cov_exact = std::pow(beta, -h) * std::exp(log_pochhammer(xi, h)) *
                           (digamma(xi + h) - digamma(xi));
  CHECK(std::abs(cov - cov_exact) < 0.005);
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(DistSpec::gamma(-1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(DistSpec::gamma(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(DistSpec::chi_square(0.0), std::domain_error);
  CHECK_THROWS_AS(DistSpec::noncentral_chi_square(2.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(DistSpec::beta_type_ii(1.0, 1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(DistSpec::dirichlet({1.0, 0.0}), std::domain_error);
  CHECK_THROWS_AS(sample(DistSpec::normal_d({0.0}, 1.0), RngStream{}, 10), std::domain_error);
}
