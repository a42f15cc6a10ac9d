#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "lossrisk/models.hpp"

using namespace lossrisk;
using namespace lossrisk::models;

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("normal posterior: uniform prior gives N(x, sigma2)") {
  const auto model = ModelSpec::normal_known_var(3, 2.0);
  const Observation x = Vec{1.0, -2.0, 0.5};
  const auto post = posterior(model, PriorSpec::normal_uniform(), x);
  REQUIRE(post.family == PosteriorSummary::Family::NormalD);
  CHECK(post.tau2 == doctest::Approx(2.0));
  CHECK(post.mu[0] == doctest::Approx(1.0));
  CHECK(post.mu[1] == doctest::Approx(-2.0));
}

TEST_CASE("normal posterior: conjugate update") {
  const auto model = ModelSpec::normal_known_var(2, 1.0);
  const auto prior = PriorSpec::normal(Vec{0.0, 0.0}, 3.0);
  const auto post = posterior(model, prior, Observation{Vec{4.0, -4.0}});
  CHECK(post.tau2 == doctest::Approx(3.0 / 4.0));
  CHECK(post.mu[0] == doctest::Approx(3.0));  // (tau2 x + sigma2 mu)/(tau2+sigma2)
}

TEST_CASE("poisson-gamma posterior: G(a+x, 1+b)") {
  const auto post =
      posterior(ModelSpec::poisson(), PriorSpec::gamma(3.0, 1.0), Observation{4LL});
  REQUIRE(post.family == PosteriorSummary::Family::Gamma);
  CHECK(post.shape == doctest::Approx(7.0));
  CHECK(post.rate == doctest::Approx(2.0));
}

TEST_CASE("negative binomial posterior: B2(a+x, b+r, r)") {
  const auto post = posterior(ModelSpec::neg_binomial(2.0),
                              PriorSpec::beta_ii(2.0, 1.0, 2.0), Observation{5LL});
  REQUIRE(post.family == PosteriorSummary::Family::BetaII);
  CHECK(post.a == doctest::Approx(7.0));
  CHECK(post.b == doctest::Approx(3.0));
  CHECK(post.sigma == doctest::Approx(2.0));
  // prior sigma must match the model r
  CHECK_THROWS_AS(posterior(ModelSpec::neg_binomial(2.0), PriorSpec::beta_ii(2.0, 1.0, 3.0),
                            Observation{5LL}),
                  std::domain_error);
}

TEST_CASE("gamma model posterior: G(alpha+a, x+b), with 1/theta limit") {
  const auto p1 = posterior(ModelSpec::gamma(3.0), PriorSpec::gamma(2.0, 5.0),
                            Observation{1.5});
  CHECK(p1.shape == doctest::Approx(5.0));
  CHECK(p1.rate == doctest::Approx(6.5));
  const auto p0 =
      posterior(ModelSpec::gamma(3.0), PriorSpec::inverse_scale(), Observation{2.0});
  CHECK(p0.shape == doctest::Approx(3.0));
  CHECK(p0.rate == doctest::Approx(2.0));
}

TEST_CASE("exp-location posterior is Beta(a,1) scaled by the minimum") {
  const auto model = ModelSpec::exp_location(4);
  const auto post = posterior(model, PriorSpec::gamma(2.0, 4.0),
                              Observation{Vec{3.0, 2.5, 4.0, 2.9}});
  REQUIRE(post.family == PosteriorSummary::Family::ScaledBeta);
  CHECK(post.a == doctest::Approx(2.0));
  CHECK(post.scale == doctest::Approx(2.5));
  // the prior scale hyperparameter is pinned to n
  CHECK_THROWS_AS(posterior(model, PriorSpec::gamma(2.0, 3.0),
                            Observation{Vec{3.0, 2.5, 4.0, 2.9}}),
                  std::domain_error);
}

TEST_CASE("normal-gamma posterior hyperparameters") {
  const int d = 2, n = 5;
  const auto model = ModelSpec::normal_unknown_var(d, n);
  const auto prior = PriorSpec::normal_gamma(Vec{1.0, 1.0}, 2.0, 3.0, 4.0);
  SuffPair sp{Vec{2.0, 0.0}, 6.0};
  const auto post = posterior(model, prior, Observation{sp});
  REQUIRE(post.family == PosteriorSummary::Family::NormalGamma);
  CHECK(post.c == doctest::Approx(7.0));
  // a(x) = a + nd/2
  CHECK(post.a == doctest::Approx(3.0 + 0.5 * n * d));
  // b(x) = (s + 2b + nc/(n+c) ||xbar - xi||^2)/2 with ||.||^2 = 1 + 1 = 2
  CHECK(post.b == doctest::Approx(0.5 * (6.0 + 8.0 + (10.0 / 7.0) * 2.0)));
  CHECK(post.mu[0] == doctest::Approx((5.0 * 2.0 + 2.0 * 1.0) / 7.0));
}

TEST_CASE("multipoisson posterior: Dirichlet(x+1) and G(a+Z, b+1)") {
  const auto model = ModelSpec::multi_poisson(3);
  const auto prior = PriorSpec::multi_poisson_gamma_total(2.0, 1.5);
  const auto post = posterior(model, prior, Observation{std::vector<long long>{1, 0, 4}});
  REQUIRE(post.family == PosteriorSummary::Family::DirichletGammaTotal);
  CHECK(post.shape == doctest::Approx(7.0));
  CHECK(post.rate == doctest::Approx(2.5));
  CHECK(post.dirichlet_weights[0] == doctest::Approx(2.0));
  CHECK(post.dirichlet_weights[2] == doctest::Approx(5.0));
}

TEST_CASE("conjugacy closure: sequential equals pooled") {
  // normal: two-step update equals the single update with pooled precision
  const auto model = ModelSpec::normal_known_var(1, 1.0);
  const auto prior = PriorSpec::normal(Vec{0.5}, 2.0);
  const auto p1 = posterior(model, prior, Observation{Vec{1.0}});
  const auto p2 = posterior(model, PriorSpec::normal(p1.mu, p1.tau2), Observation{Vec{3.0}});
  // pooled: prior precision 1/2 plus two unit-precision observations
  const double prec = 1.0 / 2.0 + 2.0;
  const double mean = (0.5 / 2.0 + 1.0 + 3.0) / prec;
  CHECK(p2.tau2 == doctest::Approx(1.0 / prec).epsilon(1e-12));
  CHECK(p2.mu[0] == doctest::Approx(mean).epsilon(1e-12));

  // poisson-gamma: G(a + x1 + x2, b + 2)
  const auto q1 = posterior(ModelSpec::poisson(), PriorSpec::gamma(3.0, 1.0), Observation{4LL});
  const auto q2 = posterior(ModelSpec::poisson(), PriorSpec::gamma(q1.shape, q1.rate),
                            Observation{2LL});
  CHECK(q2.shape == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(q2.rate == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("posterior mean sanity via Monte Carlo") {
  const auto post =
      posterior(ModelSpec::poisson(), PriorSpec::gamma(3.0, 1.0), Observation{4LL});
  const std::size_t n = 200000;
  std::vector<double> draws(n);
  for (std::size_t i = 0; i < n; ++i) {
    specfun::Rng r(specfun::RngStream{5, 0}, i);
    draws[i] = std::get<double>(sample_posterior_one(post, r));
  }
  const double mean = mean_of(draws);
  double ss = 0.0;
  for (double v : draws) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  CHECK(std::abs(mean - 7.0 / 2.0) < 4.0 * se);
}

TEST_CASE("gamma-total prior with a = d reduces to independent G(1, b) components") {
  // posterior of theta_i must match G(1 + x_i, 1 + b) component-wise
  const int d = 3;
  const double b = 2.0;
  const std::vector<long long> x{2, 0, 5};
  const auto post = posterior(ModelSpec::multi_poisson(d),
                              PriorSpec::multi_poisson_gamma_total(d, b), Observation{x});
  const std::size_t n = 400000;
  std::vector<double> sums(d, 0.0), sq(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    specfun::Rng r(specfun::RngStream{17, 0}, i);
    const Vec th = std::get<Vec>(sample_posterior_one(post, r));
    for (int j = 0; j < d; ++j) {
      sums[j] += th[j];
      sq[j] += th[j] * th[j];
    }
  }
  for (int j = 0; j < d; ++j) {
    const double mean = sums[j] / n;
    const double var = sq[j] / n - mean * mean;
    const double se = std::sqrt(var / n);
    const double expected = (1.0 + x[j]) / (1.0 + b);  // G(1 + x_j, 1 + b) mean
    CHECK(std::abs(mean - expected) < 4.0 * se);
    // second moment of the independent-component posterior
    const double exp_var = (1.0 + x[j]) / ((1.0 + b) * (1.0 + b));
    CHECK(std::abs(var - exp_var) < 0.02);
  }
}

TEST_CASE("sample_model moments: Poisson and negative binomial") {
  const std::size_t n = 1000000;
  {
    const auto obs = sample_model(ModelSpec::poisson(), 2.5, specfun::RngStream{1, 1}, n);
    double s = 0.0;
    for (const auto& o : obs) s += static_cast<double>(std::get<long long>(o));
    const double mean = s / n;
    CHECK(std::abs(mean - 2.5) < 4.0 * std::sqrt(2.5 / n));
  }
  {
    const double r = 2.0, theta = 3.0;
    const auto obs =
        sample_model(ModelSpec::neg_binomial(r), theta, specfun::RngStream{1, 2}, n);
    double s = 0.0, s2 = 0.0;
    for (const auto& o : obs) {
      const double v = static_cast<double>(std::get<long long>(o));
      s += v;
      s2 += v * v;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    const double exp_var = theta * (theta + r) / r;
    CHECK(std::abs(mean - theta) < 4.0 * std::sqrt(exp_var / n));
    CHECK(std::abs(var - exp_var) < 0.2);
  }
}

TEST_CASE("normal unknown-variance sufficient pair distribution") {
  const int d = 2, nn = 5;
  const auto model = ModelSpec::normal_unknown_var(d, nn);
  const LocScale theta{Vec{1.0, -1.0}, 2.0};  // sigma = 2
  const std::size_t n = 200000;
  const auto obs = sample_model(model, theta, specfun::RngStream{3, 3}, n);
  double sx = 0.0, ss = 0.0, ss2 = 0.0;
  for (const auto& o : obs) {
    const auto& sp = std::get<SuffPair>(o);
    sx += sp.xbar[0];
    ss += sp.s;
    ss2 += sp.s * sp.s;
  }
  const double k = (nn - 1.0) * d;
  CHECK(std::abs(sx / n - 1.0) < 4.0 * std::sqrt(4.0 / nn / n));
  // S ~ G(k/2, 1/(2 sigma2)): mean = k sigma2
  const double s_mean = ss / n;
  const double s_var = ss2 / n - s_mean * s_mean;
  CHECK(std::abs(s_mean - k * 4.0) < 4.0 * std::sqrt(s_var / n));
}

TEST_CASE("unsupported pairs and bad observations are rejected") {
  CHECK_THROWS_AS(posterior(ModelSpec::poisson(), PriorSpec::inverse_scale(), Observation{1LL}),
                  std::invalid_argument);
  CHECK_THROWS_AS(posterior(ModelSpec::gamma(2.0), PriorSpec::normal_uniform(),
                            Observation{1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(posterior(ModelSpec::poisson(), PriorSpec::gamma(3.0, 1.0),
                            Observation{-2LL}),
                  std::domain_error);
  CHECK_THROWS_AS(posterior(ModelSpec::gamma(2.0), PriorSpec::gamma(1.0, 1.0),
                            Observation{-0.5}),
                  std::domain_error);
  CHECK_THROWS_AS(PriorSpec::gamma(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(PriorSpec::multi_poisson_gamma_total(2.0, 0.0), std::domain_error);
}
