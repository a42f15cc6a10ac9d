#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lossrisk/losses.hpp"

using namespace lossrisk;
using namespace lossrisk::losses;

TEST_CASE("first-stage losses: spot values") {
  CHECK(eval_first(FirstStageLoss::squared_error(), Vec{1.0, 2.0}, Vec{1.0, 2.0}) == 0.0);
  CHECK(eval_first(FirstStageLoss::poisson_normalized(), 2.0, 3.0) == doctest::Approx(0.5));
  // (4 - 1)^2 / (1 * (1 + 2)) = 3
  CHECK(eval_first(FirstStageLoss::nb_normalized(2.0), 1.0, 4.0) == doctest::Approx(3.0));
  CHECK(eval_first(FirstStageLoss::scaled_squared_error(4.0), Vec{0.0}, Vec{2.0}) ==
        doctest::Approx(1.0));
  CHECK(eval_first(FirstStageLoss::multipoisson_normalized(), Vec{1.0, 2.0}, Vec{2.0, 2.0}) ==
        doctest::Approx(1.0));
  // entropy rho_m at gamma = theta is 0
  CHECK(eval_first(FirstStageLoss::entropy_scale(1.5), 3.0, 3.0) == doctest::Approx(0.0));
  // beta-composed power
  CHECK(eval_first(FirstStageLoss::beta_composed(BetaTag::power(2.0), 1.0), Vec{0.0},
                   Vec{2.0}) == doctest::Approx(16.0));
  // studentized: beta(n ||g - mu||^2 / sigma^2)
  LocScale th{Vec{1.0}, 2.0};
  CHECK(eval_first(FirstStageLoss::location_scale(BetaTag::identity(), 4.0), th, Vec{2.0}) ==
        doctest::Approx(1.0));
}

TEST_CASE("first-stage losses: domain errors") {
  CHECK_THROWS_AS(eval_first(FirstStageLoss::poisson_normalized(), 0.0, 1.0),
                  std::domain_error);
  LocScale degenerate{Vec{0.0}, 0.0};
  CHECK_THROWS_AS(eval_first(FirstStageLoss::location_scale(), degenerate, Vec{1.0}),
                  std::domain_error);
  CHECK_THROWS_AS(eval_first(FirstStageLoss::squared_error(), Vec{1.0, 2.0}, Vec{1.0}),
                  std::domain_error);
  CHECK_THROWS_AS(FirstStageLoss::entropy_scale(0.0), std::domain_error);
}

TEST_CASE("second-stage losses: spot values") {
  CHECK(eval_second(SecondStageLoss::rho_b(), 3.0, 3.0) == doctest::Approx(0.0));
  CHECK(eval_second(SecondStageLoss::rho_m(1.0), 1.0, std::exp(1.0)) ==
        doctest::Approx(std::exp(1.0) - 2.0));
  CHECK(eval_second(SecondStageLoss::rho_a(2.0), 1.0, 2.0) == doctest::Approx(9.0));
  CHECK(eval_second(SecondStageLoss::rho_a(-1.0), 2.0, 2.0) == 0.0);
  CHECK(eval_second(SecondStageLoss::rho_m(-2.5), 4.0, 4.0) == doctest::Approx(0.0));
  CHECK(eval_second(SecondStageLoss::rho_c(), 1.0, std::exp(2.0)) == doctest::Approx(4.0));
  CHECK(eval_second(SecondStageLoss::squared_error(), 1.5, 4.0) == doctest::Approx(6.25));
  CHECK_THROWS_AS(eval_second(SecondStageLoss::rho_b(), 1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(eval_second(SecondStageLoss::rho_b(), 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(SecondStageLoss::rho_a(0.0), std::domain_error);
}

TEST_CASE("scale invariance of the rho family") {
  std::uint64_t state = 99;
  auto u = [&state]() {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  const SecondStageLoss variants[] = {
      SecondStageLoss::rho_a(1.3), SecondStageLoss::rho_a(-0.7),
      SecondStageLoss::rho_m(2.0), SecondStageLoss::rho_m(-1.0),
      SecondStageLoss::rho_b(), SecondStageLoss::rho_c()};
  for (int trial = 0; trial < 100; ++trial) {
    const double L = 0.1 + 5.0 * u();
    const double Lhat = 0.1 + 5.0 * u();
    const double c = 0.05 + 8.0 * u();
    for (const auto& v : variants) {
      CHECK(eval_second(v, c * L, c * Lhat) ==
            doctest::Approx(eval_second(v, L, Lhat)).epsilon(1e-10));
    }
  }
}

TEST_CASE("rho_B and rho_C symmetry under t -> 1/t") {
  for (double t : {0.2, 0.7, 1.9, 6.0}) {
    CHECK(eval_second(SecondStageLoss::rho_b(), 1.0, t) ==
          doctest::Approx(eval_second(SecondStageLoss::rho_b(), 1.0, 1.0 / t)));
    CHECK(eval_second(SecondStageLoss::rho_c(), 1.0, t) ==
          doctest::Approx(eval_second(SecondStageLoss::rho_c(), 1.0, 1.0 / t)));
  }
}

TEST_CASE("bowl shape: W(L, .) decreasing below L, increasing above") {
  const SecondStageLoss variants[] = {SecondStageLoss::rho_a(0.8),
                                      SecondStageLoss::rho_m(-1.0),
                                      SecondStageLoss::rho_b(), SecondStageLoss::rho_c()};
  const double L = 2.3;
  for (const auto& v : variants) {
    double prev = eval_second(v, L, 0.05 * L);
    for (double t = 0.1; t < 1.0; t += 0.05) {
      const double cur = eval_second(v, L, t * L);
      CHECK(cur < prev);
      prev = cur;
    }
    prev = eval_second(v, L, L);
    for (double t = 1.05; t < 3.0; t += 0.05) {
      const double cur = eval_second(v, L, t * L);
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("rukhin loss: spot values and minimizer") {
  const RukhinLoss h = RukhinLoss::sqrt2();
  CHECK(eval_rukhin(h, 4.0, 4.0) == doctest::Approx(4.0));  // 4/2 + 2
  CHECK(eval_rukhin(h, 0.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(eval_rukhin(h, 1.0, 0.0), std::domain_error);

  // eval at Lhat = L equals h(L), for a second concave h as well
  const RukhinLoss hlog = RukhinLoss::custom(
      [](double t) { return std::log1p(t); }, [](double t) { return 1.0 / (1.0 + t); },
      "log1p");
  for (double L : {0.3, 1.0, 5.5}) {
    CHECK(eval_rukhin(h, L, L) == doctest::Approx(h.h(L)));
    CHECK(eval_rukhin(hlog, L, L) == doctest::Approx(hlog.h(L)));
  }

  // grid search: minimum over Lhat sits at Lhat = L
  const double L = 2.7;
  double best = 1e300, best_lhat = 0.0;
  for (double lh = 0.05; lh <= 12.0; lh += 0.005) {
    const double v = eval_rukhin(h, L, lh);
    if (v < best) {
      best = v;
      best_lhat = lh;
    }
  }
  CHECK(std::abs(best_lhat - L) < 0.01);
}
