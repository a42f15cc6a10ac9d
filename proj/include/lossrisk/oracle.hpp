#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lossrisk/losses.hpp"
#include "lossrisk/models.hpp"

namespace lossrisk::oracle {

using losses::FirstStageLoss;
using losses::SecondStageLoss;
using models::ModelSpec;
using models::PriorSpec;
using specfun::RngStream;

struct QuadratureSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;
};

// Numerically minimized Bayes loss estimate: argmin over Lhat of the
// posterior expected second-stage loss, inner integral by adaptive
// quadrature over theta (half-line mapped through t/(1-t)), outer
// minimization by golden section to 1e-8 relative.  Only 1-D posteriors are
// supported; multivariate cases go through the Monte-Carlo path below.
// This path never touches the closed-form loss-estimator catalog.
double oracle_bayes_loss_estimate(const ModelSpec& model, const PriorSpec& prior,
                                  const Observation& x, const FirstStageLoss& first,
                                  const SecondStageLoss& second,
                                  const QuadratureSpec& quad = {});

// Monte-Carlo variant: golden-section argmin of the empirical expected
// second-stage loss over posterior-loss draws, with a batch standard error.
struct McOracleEstimate {
  double estimate = 0.0;
  double std_error = 0.0;  // from per-batch argmins
};
McOracleEstimate oracle_bayes_loss_estimate_mc(std::span<const double> loss_samples,
                                               const SecondStageLoss& second,
                                               int batches = 16);

// Moment-path oracle: evaluates the Bayes loss estimate directly from the
// required moments of the posterior loss law (sample-based, or by
// quadrature of the 1-D posterior).
double oracle_closed_second_stage(std::span<const double> loss_samples,
                                  const SecondStageLoss& second);
double oracle_closed_second_stage(const ModelSpec& model, const PriorSpec& prior,
                                  const Observation& x, const FirstStageLoss& first,
                                  const SecondStageLoss& second,
                                  const QuadratureSpec& quad = {});

// Checks E(T^-m) / E(T^-2m) <= (E T)^m for a positive law, by Monte Carlo
// with a 4-standard-error slack.  m must lie in (0, inf) or (-inf, -1].
// The law is given as a sampler so Gamma, Beta type II, lognormal, or
// degenerate laws can all be plugged in.
struct MomentInequalityRow {
  double m = 0.0;
  double lhs = 0.0;   // E(T^-m) / E(T^-2m)
  double rhs = 0.0;   // (E T)^m
  double slack = 0.0; // 4 SE of (rhs - lhs)
  bool pass = false;
};
std::vector<MomentInequalityRow> moment_inequality_check(
    const std::function<double(specfun::Rng&)>& law, std::span<const double> m_grid,
    RngStream rng, std::uint64_t n);

// Exact Gamma-law version of the same inequality via Gamma-ratio moments.
MomentInequalityRow moment_inequality_exact_gamma(double shape, double rate, double m);

// Root m0 in (-1, 0) of L_rhoA(m; d, tau0^2 = 1) = d, by bisection to 1e-8.
double cutoff_m0(int d);

}  // namespace lossrisk::oracle
