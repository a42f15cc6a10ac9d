#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lossrisk/distributions.hpp"
#include "lossrisk/types.hpp"

namespace lossrisk::models {

using specfun::RngStream;

// ---------------------------------------------------------------------------
// Sampling models

struct ModelSpec {
  enum class Kind {
    NormalKnownVar,   // X ~ N_d(theta, sigma2 I)
    NormalUnknownVar, // n iid N_d(mu, sigma2 I); works on the sufficient pair
    Gamma,            // X ~ G(alpha, theta), theta unknown rate
    Poisson,          // X ~ Poisson(theta)
    MultiPoisson,     // X_i ~ Poisson(theta_i) independent
    NegBinomial,      // X ~ NB(r, theta), mean theta
    ExpLocation,      // n iid with density exp(-(t - theta)), t > theta
  };

  Kind kind;
  int d = 1;          // dimension
  int n = 1;          // sample count (NormalUnknownVar, ExpLocation)
  double sigma2 = 1;  // NormalKnownVar
  double alpha = 1;   // Gamma shape
  double r = 1;       // NegBinomial

  static ModelSpec normal_known_var(int d, double sigma2);
  static ModelSpec normal_unknown_var(int d, int n);
  static ModelSpec gamma(double alpha);
  static ModelSpec poisson();
  static ModelSpec multi_poisson(int d);
  static ModelSpec neg_binomial(double r);
  static ModelSpec exp_location(int n);
};

// ---------------------------------------------------------------------------
// Conjugate priors.  Improper priors are explicit variants; the posterior is
// computed from the same formulas with the improper limits taken analytically.

struct PriorSpec {
  enum class Kind {
    Normal,               // theta ~ N_d(mu, tau2 I)
    NormalUniform,        // flat prior, tau2 = +inf limit (also the flat prior
                          // on (0,inf) for the Poisson mean, i.e. G(1,0))
    Gamma,                // theta ~ G(a, b)
    InverseScale,         // d(theta)/theta, the (a,b) = (0,0) Gamma limit
    BetaII,               // theta ~ B2(a, b, sigma)
    BetaIIImproper,       // B2(1, 0, sigma)
    NormalGamma,          // theta1|theta2 ~ N_d(xi, theta2^2/c I), 1/theta2^2 ~ G(a,b)
    MultiPoissonGammaTotal,     // S = sum theta_i ~ G(a, b), U ~ uniform simplex
    MultiPoissonGammaImproper,  // the b = 0 limit of the above
  };

  Kind kind;
  Vec mu;             // Normal
  Vec xi;             // NormalGamma
  double tau2 = 1;    // Normal
  double a = 1, b = 1;
  double sigma = 1;   // BetaII
  double c = 1;       // NormalGamma

  static PriorSpec normal(Vec mu, double tau2);
  static PriorSpec normal_uniform();
  static PriorSpec gamma(double a, double b);
  static PriorSpec inverse_scale();
  static PriorSpec beta_ii(double a, double b, double sigma);
  static PriorSpec beta_ii_improper(double sigma);
  static PriorSpec normal_gamma(Vec xi, double c, double a, double b);
  static PriorSpec multi_poisson_gamma_total(double a, double b);
  static PriorSpec multi_poisson_gamma_improper(double a);
};

// ---------------------------------------------------------------------------
// Posterior families produced by the supported conjugate pairs.

struct SuffStats {
  std::optional<Vec> xbar;
  std::optional<double> s;    // sum of within-sample squared deviations
  std::optional<double> x1;   // min observation (ExpLocation)
  std::optional<long long> z; // sum of counts (MultiPoisson)
};

struct PosteriorSummary {
  enum class Family {
    NormalD,             // theta | x ~ N_d(mu, tau2 I)
    Gamma,               // theta | x ~ G(shape, rate)
    BetaII,              // theta | x ~ B2(a, b, sigma)
    ScaledBeta,          // theta / scale | x ~ Beta(a, 1) on (0, scale)
    NormalGamma,         // NG(xi, c, a, b)
    DirichletGammaTotal, // U | x ~ Dirichlet(weights), S | x ~ G(shape, rate)
  };

  Family family;
  Vec mu;                 // NormalD mean / NormalGamma xi
  double tau2 = 0;        // NormalD per-coordinate variance
  double shape = 0, rate = 0;
  double a = 0, b = 0, sigma = 0;  // BetaII params / NG(a, b)
  double c = 0;                    // NormalGamma precision multiplier
  double scale = 0;                // ScaledBeta scale = x_(1)
  Vec dirichlet_weights;
  SuffStats stats;
};

// Exact conjugate update.  Throws std::invalid_argument for unsupported
// (model, prior) pairs and std::domain_error for observations outside the
// model support.
PosteriorSummary posterior(const ModelSpec& model, const PriorSpec& prior,
                           const Observation& x);

// i.i.d. observations from f_theta.  NormalUnknownVar returns the sufficient
// pair (xbar, S) with xbar ~ N_d(mu, sigma2/n I) and S ~ G(k/2, 1/(2 sigma2)),
// k = (n-1) d.
std::vector<Observation> sample_model(const ModelSpec& model, const Parameter& theta,
                                      RngStream rng, std::size_t count);

// Single draw, consuming from an explicit substream engine.
Observation sample_model_one(const ModelSpec& model, const Parameter& theta,
                             specfun::Rng& rng);

// One draw of theta from a posterior.
Parameter sample_posterior_one(const PosteriorSummary& post, specfun::Rng& rng);

// Validates that theta lies in the model's parameter space.
void check_parameter(const ModelSpec& model, const Parameter& theta);

}  // namespace lossrisk::models
