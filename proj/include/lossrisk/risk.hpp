#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "lossrisk/estimators.hpp"
#include "lossrisk/losses.hpp"
#include "lossrisk/models.hpp"

namespace lossrisk::risk {

using estimators::EstimatorPair;
using estimators::MinimaxSolution;
using estimators::RukhinSolution;
using losses::BetaTag;
using losses::FirstStageLoss;
using losses::RukhinLoss;
using losses::SecondStageLoss;
using models::ModelSpec;
using specfun::RngStream;

// Number of workers used by the Monte-Carlo loops: hardware parallelism,
// capped by the LOSSRISK_THREADS environment variable.  Results are
// bit-identical for every worker count.
unsigned worker_count();

struct RiskEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  Parameter theta;
};

struct ConvergenceReport {
  std::vector<std::pair<std::uint64_t, double>> sequence;  // (n, r_n)
  double target = 0.0;      // Rbar
  double final_gap = 0.0;   // |r_N - Rbar|
  double final_se = 0.0;    // Monte-Carlo standard error of r_N (0 if exact)
  double tolerance = 0.0;
  bool converged = false;
};

struct SequenceOptions {
  std::vector<std::uint64_t> n_list = {1, 2, 5, 10, 50, 100, 1000, 10000};
  // verdict tolerance; default is max(1e-3 |target|, 3 SE(r_N))
  std::optional<double> tolerance;
  std::uint64_t outer_samples = 10000;  // outer draws for the nested normal path
  std::uint64_t inner_samples = 1000;   // inner draws when beta has no closed moments
};

// Monte-Carlo frequentist risk E_theta W(L(theta, gamma(X)), Lhat(X)).
RiskEstimate mc_risk(const ModelSpec& model, const Parameter& theta,
                     const EstimatorPair& pair, const FirstStageLoss& first,
                     const SecondStageLoss& second, RngStream rng, std::uint64_t n);

// Monte-Carlo joint risk under a Rukhin loss.
RiskEstimate mc_rukhin_risk(const ModelSpec& model, const Parameter& theta,
                            const EstimatorPair& pair, const FirstStageLoss& first,
                            const RukhinLoss& rukhin, RngStream rng, std::uint64_t n);

// Integrated Bayes risks r_n for the normal minimax problem under the
// N_d(0, n sigma^2 I) prior sequence; the limit target is the constant risk
// of normal_minimax.  Outer expectation over Y ~ chi2_d is Monte Carlo with
// common random numbers across n; inner noncentral-chi-square expectations
// are evaluated exactly for Identity/Power beta.
ConvergenceReport normal_bayes_risk_sequence(int d, const BetaTag& beta,
                                             const SecondStageLoss& second, RngStream rng,
                                             const SequenceOptions& opt = {});

// Closed-form r_n for the Gamma minimax problem under G(1/n, 1/n) priors.
ConvergenceReport gamma_bayes_risk_sequence(double alpha, double m,
                                            const SequenceOptions& opt = {});

// r^W_n = h'(c_n) r_n - c_n h'(c_n) + h(c_n) for a Rukhin catalog solution;
// the integrated first-stage Bayes risk r_n equals the constant posterior
// expected loss c_n for every supported model.
ConvergenceReport rukhin_bayes_risk_sequence(const RukhinSolution& sol,
                                             const RukhinLoss& rukhin,
                                             const SequenceOptions& opt = {});

// Per-theta comparison of E Lhat(X) against E L(theta, gamma(X)).
struct UnbiasednessRow {
  Parameter theta;
  double mean_lhat = 0.0;
  double mean_loss = 0.0;
  double gap = 0.0;       // mean_lhat - mean_loss
  double joint_se = 0.0;  // standard error of the paired difference
  bool biased = false;    // |gap| > 4 joint_se
};

std::vector<UnbiasednessRow> unbiasedness_check(const ModelSpec& model,
                                                const EstimatorPair& pair,
                                                const FirstStageLoss& first,
                                                const std::vector<Parameter>& theta_grid,
                                                RngStream rng, std::uint64_t n);

// E[Z_n^h | y] for Z_n ~ (n/(n+1)) chi2_d(y/n), via the Poisson mixture of
// central chi-square moments.  Exposed for the convergence property checks.
double scaled_noncentral_moment(int d, double y, std::uint64_t n, double h);

}  // namespace lossrisk::risk
