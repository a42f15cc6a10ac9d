#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "lossrisk/losses.hpp"
#include "lossrisk/models.hpp"
#include "lossrisk/types.hpp"

namespace lossrisk::estimators {

using losses::BetaTag;
using losses::FirstStageLoss;
using losses::RukhinLoss;
using losses::SecondStageLoss;
using models::ModelSpec;
using models::PriorSpec;
using specfun::RngStream;

// A first-stage estimator together with its loss estimator.  When the loss
// estimator does not depend on the data, l_hat_constant carries the value
// (and l_hat still evaluates the defining formula).
struct EstimatorPair {
  std::function<Estimate(const Observation&)> gamma_hat;
  std::function<double(const Observation&)> l_hat;
  std::optional<double> l_hat_constant;
  std::string provenance;
};

// Descriptor of a prior sequence {pi_n}: family name plus the hyperparameter
// schedule, valid for every n >= 1.
struct PriorSequence {
  std::string family;
  std::function<Vec(std::uint64_t)> hyper_at;
};

struct MinimaxSolution {
  EstimatorPair pair;
  double risk_bar = 0.0;  // constant (minimax) frequentist risk
  PriorSequence prior_sequence;
};

// Joint solution for the Rukhin losses: (gamma_0, L_0) with L_0 constant c,
// the first-stage risk bound Rbar, and the joint constant risk
// h'(c) Rbar - c h'(c) + h(c).
struct RukhinSolution {
  EstimatorPair pair;
  double c = 0.0;                 // constant value of L_0
  double first_stage_risk = 0.0;  // Rbar of gamma_0
  double risk_bar = 0.0;          // joint constant risk under the configured h
  PriorSequence prior_sequence;
  std::function<double(std::uint64_t)> c_n;  // constant Bayes loss estimate under pi_n
};

// --- Bayes pairs (Section "same prior for both stages") --------------------

// Normal N_d(theta, sigma2 I) with conjugate N_d(mu, tau2 I) prior; pass
// tau2 = nullopt for the flat prior (tau0^2 = sigma2).  The loss estimator
// is the posterior-law constant for the chosen second-stage loss.
EstimatorPair normal_conjugate_pair(int d, double sigma2, const Vec& mu,
                                    std::optional<double> tau2,
                                    const SecondStageLoss& second);

// Poisson mean with G(a, b) prior, normalized squared error first stage,
// squared error second stage: gamma(x) = (a+x-1)/(1+b), Lhat = 1/(1+b).
// Hyperparameters: a > 2 with b >= 0, or the flat-prior case (a, b) = (1, 0).
EstimatorPair poisson_pair(double a, double b);

// Independent Poisson counts with the Gamma-total prior on S = sum theta_i:
// the Clevenson-Zidek-type estimator and its loss estimator.
EstimatorPair multipoisson_pair(int d, double a, double b);

// Negative binomial with B2(a, b, r) prior under variance-normalized
// squared error: gamma(x) = r(a+x-1)/(b+r+1), Lhat = 1/(b+r+1).
EstimatorPair negbinomial_pair(double r, double a, double b);

// Gamma scale model G(alpha, theta) with G(a, b) prior under the entropy
// first-stage loss rho_m(gamma/theta); (a, b) = (0, 0) is the 1/theta prior.
EstimatorPair gamma_pair(double alpha, double a, double b, double m);

// Location exponential with n observations and G(a, n) prior under the
// entropy loss: gamma(x) = a x_(1) / (a+1), Lhat = 1/a - log(1 + 1/a).
EstimatorPair explocation_pair(int n, double a);

// d-variate normal, unknown variance, normal-gamma prior, studentized
// squared error first stage and squared error second stage.
EstimatorPair normal_unknownvar_pair(int d, int n, const Vec& xi, double c, double a,
                                     double b);

// --- minimax loss estimators ----------------------------------------------

// Minimax estimator of L = beta(||X - theta||^2 / sigma2) incurred by
// gamma(X) = X, for beta = Identity or Power(q), under the chosen
// second-stage loss.  risk_bar is the constant frequentist risk.
MinimaxSolution normal_minimax(int d, const BetaTag& beta, const SecondStageLoss& second);

// Minimax estimator of the entropy loss incurred by k/X in the Gamma model,
// under second-stage squared error; requires alpha > 2m.
MinimaxSolution gamma_minimax(double alpha, double m);

// --- Rukhin joint solutions -------------------------------------------------

RukhinSolution rukhin_normal(int d, const RukhinLoss& h);
RukhinSolution rukhin_gamma(double alpha, double m, const RukhinLoss& h);
RukhinSolution rukhin_multipoisson(int d, const RukhinLoss& h);
RukhinSolution rukhin_negbinomial(double r, const RukhinLoss& h);

// Dispatcher over the supported model tags; m is only used by the Gamma model.
RukhinSolution rukhin_solution(const ModelSpec& model, const RukhinLoss& h,
                               double m = -1.0);

// --- posterior loss sampling -------------------------------------------------

// i.i.d. draws of L(theta, gamma_pi(x)) with theta ~ posterior(x), where
// gamma_pi is the Bayes estimate for the (model, prior, first) combination.
std::vector<double> posterior_loss_sampler(const ModelSpec& model, const PriorSpec& prior,
                                           const Observation& x, const FirstStageLoss& first,
                                           RngStream rng, std::size_t count);

// The Bayes first-stage estimate used by posterior_loss_sampler.
Estimate bayes_gamma_hat(const ModelSpec& model, const models::PosteriorSummary& post,
                         const FirstStageLoss& first, const Observation& x);

}  // namespace lossrisk::estimators
