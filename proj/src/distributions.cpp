#include "lossrisk/distributions.hpp"

#include <cmath>
#include <stdexcept>

#include "lossrisk/specfun.hpp"

namespace lossrisk::specfun {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::domain_error(msg);
}

// Poisson via inversion-by-multiplication for small means (Knuth).
long long poisson_small(Rng& rng, double mean) {
  const double limit = std::exp(-mean);
  long long k = 0;
  double prod = rng.u01();
  while (prod > limit) {
    ++k;
    prod *= rng.u01();
  }
  return k;
}

// Poisson via the PTRS transformed-rejection sampler (Hoermann, 1993),
// valid for mean >= 10.
long long poisson_ptrs(Rng& rng, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = rng.u01() - 0.5;
    const double v = rng.u01();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<long long>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        k * loglam - mean - log_gamma(k + 1.0)) {
      return static_cast<long long>(k);
    }
  }
}

}  // namespace

double sample_normal(Rng& rng) {
  // Marsaglia polar method; the spare deviate is discarded so that the
  // draw count per call stays a pure function of the substream state.
  while (true) {
    const double x1 = 2.0 * rng.u01() - 1.0;
    const double x2 = 2.0 * rng.u01() - 1.0;
    const double s = x1 * x1 + x2 * x2;
    if (s < 1.0 && s > 0.0) return x1 * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double sample_exponential(Rng& rng) { return -std::log(rng.u01()); }

double sample_gamma(Rng& rng, double shape, double rate) {
  require(shape > 0.0 && rate > 0.0, "sample_gamma: shape and rate must be positive");
  if (shape < 1.0) {
    // Marsaglia-Tsang boost for shape < 1
    const double u = rng.u01();
    return sample_gamma(rng, shape + 1.0, rate) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia & Tsang (2000)
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = sample_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.u01();
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double sample_chisq(Rng& rng, double df) {
  require(df > 0.0, "sample_chisq: df must be positive");
  return sample_gamma(rng, 0.5 * df, 0.5);
}

double sample_noncentral_chisq(Rng& rng, double df, double lambda) {
  require(df > 0.0, "sample_noncentral_chisq: df must be positive");
  require(lambda >= 0.0, "sample_noncentral_chisq: lambda must be nonnegative");
  const long long k = lambda > 0.0 ? sample_poisson(rng, 0.5 * lambda) : 0;
  return sample_chisq(rng, df + 2.0 * static_cast<double>(k));
}

long long sample_poisson(Rng& rng, double mean) {
  require(mean >= 0.0 && std::isfinite(mean), "sample_poisson: mean must be nonnegative");
  if (mean == 0.0) return 0;
  return mean < 10.0 ? poisson_small(rng, mean) : poisson_ptrs(rng, mean);
}

long long sample_negbinomial(Rng& rng, double r, double theta) {
  require(r > 0.0, "sample_negbinomial: r must be positive");
  require(theta >= 0.0, "sample_negbinomial: theta must be nonnegative");
  if (theta == 0.0) return 0;
  // Gamma-Poisson mixture: X | lam ~ Poisson(lam), lam ~ G(r, r/theta)
  const double lam = sample_gamma(rng, r, r / theta);
  return sample_poisson(rng, lam);
}

double sample_beta(Rng& rng, double a, double b) {
  require(a > 0.0 && b > 0.0, "sample_beta: parameters must be positive");
  const double g1 = sample_gamma(rng, a, 1.0);
  const double g2 = sample_gamma(rng, b, 1.0);
  return g1 / (g1 + g2);
}

double sample_betaii(Rng& rng, double a, double b, double sigma) {
  require(a > 0.0 && b > 0.0 && sigma > 0.0, "sample_betaii: parameters must be positive");
  const double g1 = sample_gamma(rng, a, 1.0);
  const double g2 = sample_gamma(rng, b, 1.0);
  return sigma * g1 / g2;
}

std::vector<double> sample_dirichlet(Rng& rng, const std::vector<double>& weights) {
  require(!weights.empty(), "sample_dirichlet: weights must be nonempty");
  std::vector<double> out(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    require(weights[i] > 0.0, "sample_dirichlet: weights must be positive");
    out[i] = sample_gamma(rng, weights[i], 1.0);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

DistSpec DistSpec::normal_d(std::vector<double> mean, double variance) {
  require(!mean.empty(), "NormalD: dimension must be >= 1");
  require(variance > 0.0, "NormalD: variance must be positive");
  DistSpec d{Kind::NormalD};
  d.mean = std::move(mean);
  d.variance = variance;
  return d;
}
DistSpec DistSpec::chi_square(double df) {
  require(df > 0.0, "ChiSquare: df must be positive");
  DistSpec d{Kind::ChiSquare};
  d.df = df;
  return d;
}
DistSpec DistSpec::noncentral_chi_square(double df, double lambda) {
  require(df > 0.0, "NoncentralChiSquare: df must be positive");
  require(lambda >= 0.0, "NoncentralChiSquare: lambda must be nonnegative");
  DistSpec d{Kind::NoncentralChiSquare};
  d.df = df;
  d.lambda = lambda;
  return d;
}
DistSpec DistSpec::gamma(double shape, double rate) {
  require(shape > 0.0 && rate > 0.0, "Gamma: shape and rate must be positive");
  DistSpec d{Kind::Gamma};
  d.shape = shape;
  d.rate = rate;
  return d;
}
DistSpec DistSpec::poisson(double mean) {
  require(mean >= 0.0, "Poisson: mean must be nonnegative");
  DistSpec d{Kind::Poisson};
  d.poisson_mean = mean;
  return d;
}
DistSpec DistSpec::neg_binomial(double r, double theta) {
  require(r > 0.0, "NegBinomial: r must be positive");
  require(theta >= 0.0, "NegBinomial: theta must be nonnegative");
  DistSpec d{Kind::NegBinomial};
  d.r = r;
  d.theta = theta;
  return d;
}
DistSpec DistSpec::beta(double a, double b) {
  require(a > 0.0 && b > 0.0, "Beta: parameters must be positive");
  DistSpec d{Kind::Beta};
  d.a = a;
  d.b = b;
  return d;
}
DistSpec DistSpec::beta_type_ii(double a, double b, double sigma) {
  require(a > 0.0 && b > 0.0 && sigma > 0.0, "BetaTypeII: parameters must be positive");
  DistSpec d{Kind::BetaTypeII};
  d.a = a;
  d.b = b;
  d.sigma = sigma;
  return d;
}
DistSpec DistSpec::dirichlet(std::vector<double> weights) {
  require(!weights.empty(), "Dirichlet: weights must be nonempty");
  for (double w : weights) require(w > 0.0, "Dirichlet: weights must be positive");
  DistSpec d{Kind::Dirichlet};
  d.weights = std::move(weights);
  return d;
}
DistSpec DistSpec::exp_location(double theta) {
  DistSpec d{Kind::ExpLocation};
  d.theta = theta;
  return d;
}

namespace {

double sample_scalar_one(const DistSpec& dist, Rng& rng) {
  switch (dist.kind) {
    case DistSpec::Kind::ChiSquare:
      return sample_chisq(rng, dist.df);
    case DistSpec::Kind::NoncentralChiSquare:
      return sample_noncentral_chisq(rng, dist.df, dist.lambda);
    case DistSpec::Kind::Gamma:
      return sample_gamma(rng, dist.shape, dist.rate);
    case DistSpec::Kind::Poisson:
      return static_cast<double>(sample_poisson(rng, dist.poisson_mean));
    case DistSpec::Kind::NegBinomial:
      return static_cast<double>(sample_negbinomial(rng, dist.r, dist.theta));
    case DistSpec::Kind::Beta:
      return sample_beta(rng, dist.a, dist.b);
    case DistSpec::Kind::BetaTypeII:
      return sample_betaii(rng, dist.a, dist.b, dist.sigma);
    case DistSpec::Kind::ExpLocation:
      return dist.theta + sample_exponential(rng);
    default:
      throw std::domain_error("sample: distribution is vector-valued; use sample_vec");
  }
}

}  // namespace

std::vector<double> sample(const DistSpec& dist, RngStream stream, std::size_t count) {
  require(count > 0, "sample: count must be positive");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(stream, i);
    out[i] = sample_scalar_one(dist, rng);
  }
  return out;
}

std::vector<std::vector<double>> sample_vec(const DistSpec& dist, RngStream stream,
                                            std::size_t count) {
  require(count > 0, "sample_vec: count must be positive");
  std::vector<std::vector<double>> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(stream, i);
    if (dist.kind == DistSpec::Kind::NormalD) {
      const double sd = std::sqrt(dist.variance);
      std::vector<double> x(dist.mean.size());
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = dist.mean[j] + sd * sample_normal(rng);
      out[i] = std::move(x);
    } else if (dist.kind == DistSpec::Kind::Dirichlet) {
      out[i] = sample_dirichlet(rng, dist.weights);
    } else {
      throw std::domain_error("sample_vec: distribution is scalar-valued; use sample");
    }
  }
  return out;
}

}  // namespace lossrisk::specfun
