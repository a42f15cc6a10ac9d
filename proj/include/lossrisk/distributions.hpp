#pragma once

#include <cstdint>
#include <vector>

#include "lossrisk/rng.hpp"

namespace lossrisk::specfun {

// --- primitive samplers, all driven by one substream Rng -----------------

double sample_normal(Rng& rng);                       // N(0,1)
double sample_exponential(Rng& rng);                  // rate 1
double sample_gamma(Rng& rng, double shape, double rate);
double sample_chisq(Rng& rng, double df);
// Poisson mixture route: chi2_{d+2K} with K ~ Poisson(lambda/2)
double sample_noncentral_chisq(Rng& rng, double df, double lambda);
long long sample_poisson(Rng& rng, double mean);
// pmf (r)_x/x! (r/(theta+r))^r (theta/(theta+r))^x, mean theta
long long sample_negbinomial(Rng& rng, double r, double theta);
double sample_beta(Rng& rng, double a, double b);
// sigma * G1/G2 with G1 ~ G(a,1), G2 ~ G(b,1) independent
double sample_betaii(Rng& rng, double a, double b, double sigma);
std::vector<double> sample_dirichlet(Rng& rng, const std::vector<double>& weights);

// --- tagged distribution spec for the public sample() entry points ------

struct DistSpec {
  enum class Kind {
    NormalD,
    ChiSquare,
    NoncentralChiSquare,
    Gamma,
    Poisson,
    NegBinomial,
    Beta,
    BetaTypeII,
    Dirichlet,
    ExpLocation,
  };

  Kind kind;
  std::vector<double> mean;     // NormalD
  std::vector<double> weights;  // Dirichlet
  double variance = 1.0;        // NormalD
  double df = 0.0;              // ChiSquare / NoncentralChiSquare
  double lambda = 0.0;          // NoncentralChiSquare
  double shape = 0.0, rate = 0.0;                  // Gamma
  double poisson_mean = 0.0;                       // Poisson
  double r = 0.0, theta = 0.0;                     // NegBinomial / ExpLocation
  double a = 0.0, b = 0.0, sigma = 1.0;            // Beta / BetaTypeII

  static DistSpec normal_d(std::vector<double> mean, double variance);
  static DistSpec chi_square(double df);
  static DistSpec noncentral_chi_square(double df, double lambda);
  static DistSpec gamma(double shape, double rate);
  static DistSpec poisson(double mean);
  static DistSpec neg_binomial(double r, double theta);
  static DistSpec beta(double a, double b);
  static DistSpec beta_type_ii(double a, double b, double sigma);
  static DistSpec dirichlet(std::vector<double> weights);
  static DistSpec exp_location(double theta);
};

// i.i.d. draws from a scalar-valued distribution; sample i consumes
// substream i of `stream`, so any chunked evaluation is reproducible.
std::vector<double> sample(const DistSpec& dist, RngStream stream, std::size_t count);

// vector-valued counterparts (NormalD, Dirichlet)
std::vector<std::vector<double>> sample_vec(const DistSpec& dist, RngStream stream,
                                            std::size_t count);

}  // namespace lossrisk::specfun
