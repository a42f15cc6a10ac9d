#include "lossrisk/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "lossrisk/specfun.hpp"

namespace lossrisk::estimators {

using models::PosteriorSummary;
using specfun::digamma;
using specfun::log_pochhammer;
using specfun::Rng;

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::domain_error(msg);
}

long long obs_count(const Observation& x) {
  if (const auto* c = std::get_if<long long>(&x)) {
    require(*c >= 0, "observation: count must be nonnegative");
    return *c;
  }
  throw std::domain_error("observation: expected a count");
}

double obs_real(const Observation& x) {
  if (const auto* s = std::get_if<double>(&x)) return *s;
  throw std::domain_error("observation: expected a real scalar");
}

const Vec& obs_vec(const Observation& x) {
  if (const auto* v = std::get_if<Vec>(&x)) return *v;
  throw std::domain_error("observation: expected a real vector");
}

const std::vector<long long>& obs_counts(const Observation& x) {
  if (const auto* v = std::get_if<std::vector<long long>>(&x)) return *v;
  throw std::domain_error("observation: expected a count vector");
}

// (Gamma(s) / Gamma(s - m))^{1/m}, the entropy-loss Bayes constant
double gamma_ratio_root(double s, double m) {
  return std::exp(log_pochhammer(s - m, m) / m);
}

// E beta(Z)^h for Z ~ chi2_d and beta = Power(q); requires d/2 + qh > 0.
double chisq_power_moment(int d, double q, double h) {
  const double qh = q * h;
  require(0.5 * d + qh > 0.0, "moment condition violated: need d/2 + q h > 0");
  return std::exp(qh * std::log(2.0) + log_pochhammer(0.5 * d, qh));
}

}  // namespace

EstimatorPair normal_conjugate_pair(int d, double sigma2, const Vec& mu,
                                    std::optional<double> tau2,
                                    const SecondStageLoss& second) {
  require(d >= 1, "normal_conjugate_pair: d >= 1");
  require(sigma2 > 0, "normal_conjugate_pair: sigma2 > 0");
  double tau02, w;
  if (tau2) {
    require(*tau2 > 0, "normal_conjugate_pair: tau2 > 0");
    require(mu.size() == static_cast<std::size_t>(d), "normal_conjugate_pair: mu dimension");
    tau02 = *tau2 * sigma2 / (*tau2 + sigma2);
    w = *tau2 / (*tau2 + sigma2);
  } else {
    tau02 = sigma2;  // flat prior
    w = 1.0;
  }

  const double half_d = 0.5 * d;
  double constant;
  switch (second.kind) {
    case SecondStageLoss::Kind::SquaredErrorW:
      constant = d * tau02;
      break;
    case SecondStageLoss::Kind::RhoA:
      require(d > 4.0 * second.m, "normal_conjugate_pair: rho_A needs d > 4m");
      constant = 2.0 * tau02 * std::exp(log_pochhammer(half_d - 2.0 * second.m, second.m) /
                                        second.m);
      break;
    case SecondStageLoss::Kind::RhoM:
      require(d > 2.0 * second.m, "normal_conjugate_pair: rho_m needs d > 2m");
      constant = 2.0 * tau02 * std::exp(log_pochhammer(half_d - second.m, second.m) /
                                        second.m);
      break;
    case SecondStageLoss::Kind::RhoB:
      require(d >= 3, "normal_conjugate_pair: rho_B needs d >= 3");
      constant = tau02 * std::sqrt(static_cast<double>(d) * (d - 2.0));
      break;
    case SecondStageLoss::Kind::RhoC:
      constant = 2.0 * tau02 * std::exp(digamma(half_d));
      break;
    default:
      throw std::domain_error("normal_conjugate_pair: unsupported second-stage loss");
  }

  EstimatorPair pair;
  const Vec mu_copy = mu;
  pair.gamma_hat = [w, mu_copy, d](const Observation& x) -> Estimate {
    const Vec& xv = obs_vec(x);
    require(xv.size() == static_cast<std::size_t>(d), "gamma_hat: observation dimension");
    Vec g(xv.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = w * xv[i] + (1.0 - w) * (mu_copy.empty() ? 0.0 : mu_copy[i]);
    return g;
  };
  pair.l_hat = [constant](const Observation&) { return constant; };
  pair.l_hat_constant = constant;
  pair.provenance = "normal conjugate / " + second.name();
  return pair;
}

EstimatorPair poisson_pair(double a, double b) {
  const bool proper = a > 2.0 && b >= 0.0;
  const bool flat = a == 1.0 && b == 0.0;
  require(proper || flat, "poisson_pair: need a > 2 with b >= 0, or (a, b) = (1, 0)");
  const double constant = 1.0 / (1.0 + b);
  EstimatorPair pair;
  pair.gamma_hat = [a, b](const Observation& x) -> Estimate {
    return (a + static_cast<double>(obs_count(x)) - 1.0) / (1.0 + b);
  };
  pair.l_hat = [constant](const Observation&) { return constant; };
  pair.l_hat_constant = constant;
  pair.provenance = "poisson-gamma";
  return pair;
}

EstimatorPair multipoisson_pair(int d, double a, double b) {
  require(d >= 1, "multipoisson_pair: d >= 1");
  require(a >= 1.0 && b >= 0.0, "multipoisson_pair: a >= 1 and b >= 0");
  EstimatorPair pair;
  const double dd = d;
  pair.gamma_hat = [d, a, b](const Observation& x) -> Estimate {
    const auto& xv = obs_counts(x);
    require(xv.size() == static_cast<std::size_t>(d), "gamma_hat: observation dimension");
    long long z = 0;
    for (long long c : xv) {
      require(c >= 0, "gamma_hat: counts must be nonnegative");
      z += c;
    }
    if (d == 1) {
      // univariate reduction: X/Z is identically 1, leaving the Poisson form
      return Vec{(a + static_cast<double>(z) - 1.0) / (b + 1.0)};
    }
    Vec g(xv.size());
    const double denom = (b + 1.0) * (static_cast<double>(z) + d - 1.0);
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = static_cast<double>(xv[i]) * (a + static_cast<double>(z) - 1.0) / denom;
    return g;
  };
  pair.l_hat = [d, dd, a, b](const Observation& x) {
    const auto& xv = obs_counts(x);
    require(xv.size() == static_cast<std::size_t>(d), "l_hat: observation dimension");
    if (d == 1) return 1.0 / (1.0 + b);  // univariate reduction
    long long z = 0;
    for (long long c : xv) z += c;
    const double zz = static_cast<double>(z);
    // division ordering keeps l_hat exactly equal to d/(b+1) when a = d
    return ((dd * zz + a * (dd - 1.0)) / (zz + dd - 1.0)) / (b + 1.0);
  };
  if (d == 1 || a == dd) pair.l_hat_constant = dd / (b + 1.0);
  pair.provenance = "multipoisson Clevenson-Zidek";
  return pair;
}

EstimatorPair negbinomial_pair(double r, double a, double b) {
  require(r > 0.0, "negbinomial_pair: r > 0");
  require(a >= 1.0 && b >= 0.0, "negbinomial_pair: a >= 1 and b >= 0");
  const double constant = 1.0 / (b + r + 1.0);
  EstimatorPair pair;
  pair.gamma_hat = [r, a, b](const Observation& x) -> Estimate {
    return r * (a + static_cast<double>(obs_count(x)) - 1.0) / (b + r + 1.0);
  };
  pair.l_hat = [constant](const Observation&) { return constant; };
  pair.l_hat_constant = constant;
  pair.provenance = "negative binomial / beta-II";
  return pair;
}

EstimatorPair gamma_pair(double alpha, double a, double b, double m) {
  require(alpha > 0.0, "gamma_pair: alpha > 0");
  require((a > 0.0 && b > 0.0) || (a == 0.0 && b == 0.0),
          "gamma_pair: hyperparameters positive, or (0, 0) for the 1/theta prior");
  require(m != 0.0, "gamma_pair: m must be nonzero");
  const double s = a + alpha;
  require(m < s, "gamma_pair: need m < a + alpha");
  const double k = gamma_ratio_root(s, m);
  const double constant = m * digamma(s) - log_pochhammer(s - m, m);
  EstimatorPair pair;
  pair.gamma_hat = [k, b](const Observation& x) -> Estimate {
    const double xv = obs_real(x);
    require(xv > 0.0, "gamma_hat: observation must be positive");
    return k / (xv + b);
  };
  pair.l_hat = [constant](const Observation&) { return constant; };
  pair.l_hat_constant = constant;
  pair.provenance = "gamma scale / entropy loss";
  return pair;
}

EstimatorPair explocation_pair(int n, double a) {
  require(n >= 1, "explocation_pair: n >= 1");
  require(a > 0.0, "explocation_pair: a > 0");
  const double constant = 1.0 / a - std::log1p(1.0 / a);
  EstimatorPair pair;
  pair.gamma_hat = [n, a](const Observation& x) -> Estimate {
    const Vec& xv = obs_vec(x);
    require(xv.size() == static_cast<std::size_t>(n), "gamma_hat: need n observations");
    double x1 = xv[0];
    for (double v : xv) x1 = std::min(x1, v);
    return a * x1 / (a + 1.0);
  };
  pair.l_hat = [constant](const Observation&) { return constant; };
  pair.l_hat_constant = constant;
  pair.provenance = "exponential location / entropy loss";
  return pair;
}

EstimatorPair normal_unknownvar_pair(int d, int n, const Vec& xi, double c, double a,
                                     double b) {
  require(d >= 1 && n >= 2, "normal_unknownvar_pair: d >= 1, n >= 2");
  require(xi.size() == static_cast<std::size_t>(d), "normal_unknownvar_pair: xi dimension");
  require(c > 0 && a > 0 && b > 0, "normal_unknownvar_pair: hyperparameters positive");
  const double constant = d / (static_cast<double>(n) + c);
  EstimatorPair pair;
  const Vec xi_copy = xi;
  pair.gamma_hat = [n, c, xi_copy](const Observation& x) -> Estimate {
    const auto* sp = std::get_if<SuffPair>(&x);
    if (!sp) throw std::domain_error("gamma_hat: expected the sufficient pair (xbar, S)");
    require(sp->xbar.size() == xi_copy.size(), "gamma_hat: xbar dimension");
    Vec g(sp->xbar.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = (n * sp->xbar[i] + c * xi_copy[i]) / (n + c);
    return g;
  };
  pair.l_hat = [constant](const Observation&) { return constant; };
  pair.l_hat_constant = constant;
  pair.provenance = "normal-gamma / studentized squared error";
  return pair;
}

MinimaxSolution normal_minimax(int d, const BetaTag& beta, const SecondStageLoss& second) {
  require(d >= 1, "normal_minimax: d >= 1");
  require(beta.is_power(), "normal_minimax: beta must be Identity or Power(q)");
  const double q = beta.exponent();
  const double half_d = 0.5 * d;
  // moments of beta(Z), Z ~ chi2_d
  const auto g = [d, q](double h) { return chisq_power_moment(d, q, h); };
  const double elog = q * (digamma(half_d) + std::log(2.0));  // E log beta(Z)
  const double vlog = q * q * specfun::trigamma(half_d);      // Var log beta(Z)

  double lhat, risk;
  const double m = second.m;
  switch (second.kind) {
    case SecondStageLoss::Kind::RhoM:
      lhat = std::pow(g(-m), -1.0 / m);
      risk = m * elog + std::log(g(-m));
      break;
    case SecondStageLoss::Kind::RhoA: {
      const double g1 = g(-m), g2 = g(-2.0 * m);
      lhat = std::pow(g1 / g2, 1.0 / m);
      risk = 1.0 - g1 * g1 / g2;
      break;
    }
    case SecondStageLoss::Kind::RhoB: {
      const double gp = g(1.0), gm = g(-1.0);
      lhat = std::sqrt(gp / gm);
      risk = 2.0 * (std::sqrt(gp * gm) - 1.0);
      break;
    }
    case SecondStageLoss::Kind::RhoC:
      lhat = std::exp(elog);
      risk = vlog;
      break;
    case SecondStageLoss::Kind::SquaredErrorW: {
      const double g1 = g(1.0);
      lhat = g1;
      risk = g(2.0) - g1 * g1;
      break;
    }
    default:
      throw std::domain_error("normal_minimax: unsupported second-stage loss");
  }

  MinimaxSolution sol;
  sol.pair.gamma_hat = [d](const Observation& x) -> Estimate {
    if (const auto* sp = std::get_if<SuffPair>(&x)) return sp->xbar;
    const Vec& xv = obs_vec(x);
    require(xv.size() == static_cast<std::size_t>(d), "gamma_hat: observation dimension");
    return xv;
  };
  sol.pair.l_hat = [lhat](const Observation&) { return lhat; };
  sol.pair.l_hat_constant = lhat;
  sol.pair.provenance = "normal minimax / " + second.name();
  sol.risk_bar = risk;
  sol.prior_sequence.family = "N_d(0, n sigma^2 I)";
  sol.prior_sequence.hyper_at = [](std::uint64_t n) {
    return Vec{0.0, static_cast<double>(n)};
  };
  return sol;
}

MinimaxSolution gamma_minimax(double alpha, double m) {
  require(m != 0.0, "gamma_minimax: m must be nonzero");
  require(alpha > 2.0 * m, "gamma_minimax: need alpha > 2m");
  const double k = gamma_ratio_root(alpha, m);
  const double lhat = m * digamma(alpha) - log_pochhammer(alpha - m, m);
  const double lp1 = log_pochhammer(alpha - m, m);          // ln Gamma(a)/Gamma(a-m)
  const double lp2 = log_pochhammer(alpha - 2.0 * m, 2.0 * m);
  const double risk = std::exp(2.0 * lp1 - lp2) - 1.0 + m * m * specfun::trigamma(alpha) +
                      2.0 * m * (digamma(alpha - m) - digamma(alpha));

  MinimaxSolution sol;
  sol.pair.gamma_hat = [k](const Observation& x) -> Estimate {
    const double xv = obs_real(x);
    require(xv > 0.0, "gamma_hat: observation must be positive");
    return k / xv;
  };
  sol.pair.l_hat = [lhat](const Observation&) { return lhat; };
  sol.pair.l_hat_constant = lhat;
  sol.pair.provenance = "gamma minimax / entropy loss";
  sol.risk_bar = risk;
  sol.prior_sequence.family = "G(1/n, 1/n)";
  sol.prior_sequence.hyper_at = [](std::uint64_t n) {
    return Vec{1.0 / static_cast<double>(n), 1.0 / static_cast<double>(n)};
  };
  return sol;
}

namespace {

RukhinSolution make_rukhin(EstimatorPair pair, double c, double rbar,
                           PriorSequence seq, std::function<double(std::uint64_t)> cn,
                           const RukhinLoss& h) {
  RukhinSolution sol;
  sol.pair = std::move(pair);
  sol.c = c;
  sol.first_stage_risk = rbar;
  sol.risk_bar = h.hprime(c) * rbar - c * h.hprime(c) + h.h(c);
  sol.prior_sequence = std::move(seq);
  sol.c_n = std::move(cn);
  return sol;
}

}  // namespace

RukhinSolution rukhin_normal(int d, const RukhinLoss& h) {
  require(d >= 1, "rukhin_normal: d >= 1");
  EstimatorPair pair;
  pair.gamma_hat = [d](const Observation& x) -> Estimate {
    const Vec& xv = obs_vec(x);
    require(xv.size() == static_cast<std::size_t>(d), "gamma_hat: observation dimension");
    return xv;
  };
  const double c = d;
  pair.l_hat = [c](const Observation&) { return c; };
  pair.l_hat_constant = c;
  pair.provenance = "rukhin normal";
  PriorSequence seq{"N_d(0, n sigma^2 I)",
                    [](std::uint64_t n) { return Vec{0.0, static_cast<double>(n)}; }};
  const double dd = d;
  auto cn = [dd](std::uint64_t n) {
    return static_cast<double>(n) * dd / (static_cast<double>(n) + 1.0);
  };
  return make_rukhin(std::move(pair), c, c, std::move(seq), cn, h);
}

RukhinSolution rukhin_gamma(double alpha, double m, const RukhinLoss& h) {
  require(m != 0.0 && m < alpha, "rukhin_gamma: need m < alpha, m != 0");
  const double k = gamma_ratio_root(alpha, m);
  const double c = m * digamma(alpha) - log_pochhammer(alpha - m, m);
  EstimatorPair pair;
  pair.gamma_hat = [k](const Observation& x) -> Estimate {
    const double xv = obs_real(x);
    require(xv > 0.0, "gamma_hat: observation must be positive");
    return k / xv;
  };
  pair.l_hat = [c](const Observation&) { return c; };
  pair.l_hat_constant = c;
  pair.provenance = "rukhin gamma";
  PriorSequence seq{"G(1/n, 1/n)", [](std::uint64_t n) {
                      return Vec{1.0 / static_cast<double>(n), 1.0 / static_cast<double>(n)};
                    }};
  auto cn = [alpha, m](std::uint64_t n) {
    const double a = 1.0 / static_cast<double>(n);
    return m * digamma(alpha + a) - log_pochhammer(alpha + a - m, m);
  };
  return make_rukhin(std::move(pair), c, c, std::move(seq), cn, h);
}

RukhinSolution rukhin_multipoisson(int d, const RukhinLoss& h) {
  require(d >= 1, "rukhin_multipoisson: d >= 1");
  EstimatorPair pair;
  pair.gamma_hat = [d](const Observation& x) -> Estimate {
    const auto& xv = obs_counts(x);
    require(xv.size() == static_cast<std::size_t>(d), "gamma_hat: observation dimension");
    Vec g(xv.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(xv[i]);
    return g;
  };
  const double c = d;
  pair.l_hat = [c](const Observation&) { return c; };
  pair.l_hat_constant = c;
  pair.provenance = "rukhin multipoisson";
  PriorSequence seq{"S ~ G(d, 1/n)", [d](std::uint64_t n) {
                      return Vec{static_cast<double>(d), 1.0 / static_cast<double>(n)};
                    }};
  const double dd = d;
  auto cn = [dd](std::uint64_t n) { return dd / (1.0 + 1.0 / static_cast<double>(n)); };
  return make_rukhin(std::move(pair), c, c, std::move(seq), cn, h);
}

RukhinSolution rukhin_negbinomial(double r, const RukhinLoss& h) {
  require(r > 0.0, "rukhin_negbinomial: r > 0");
  EstimatorPair pair;
  pair.gamma_hat = [r](const Observation& x) -> Estimate {
    return r * static_cast<double>(obs_count(x)) / (r + 1.0);
  };
  const double c = 1.0 / (r + 1.0);
  pair.l_hat = [c](const Observation&) { return c; };
  pair.l_hat_constant = c;
  pair.provenance = "rukhin negative binomial";
  PriorSequence seq{"B2(1, 1/n, r)", [r](std::uint64_t n) {
                      return Vec{1.0, 1.0 / static_cast<double>(n), r};
                    }};
  auto cn = [r](std::uint64_t n) { return 1.0 / (r + 1.0 + 1.0 / static_cast<double>(n)); };
  return make_rukhin(std::move(pair), c, c, std::move(seq), cn, h);
}

RukhinSolution rukhin_solution(const ModelSpec& model, const RukhinLoss& h, double m) {
  switch (model.kind) {
    case ModelSpec::Kind::NormalKnownVar: return rukhin_normal(model.d, h);
    case ModelSpec::Kind::Gamma: return rukhin_gamma(model.alpha, m, h);
    case ModelSpec::Kind::MultiPoisson: return rukhin_multipoisson(model.d, h);
    case ModelSpec::Kind::NegBinomial: return rukhin_negbinomial(model.r, h);
    default:
      throw std::domain_error("rukhin_solution: unsupported model tag");
  }
}

Estimate bayes_gamma_hat(const ModelSpec& model, const PosteriorSummary& post,
                         const FirstStageLoss& first, const Observation& x) {
  switch (post.family) {
    case PosteriorSummary::Family::NormalD:
      // posterior mean; Bayes for squared error and its monotone compositions
      return post.mu;
    case PosteriorSummary::Family::Gamma:
      if (model.kind == ModelSpec::Kind::Poisson) {
        require(first.kind == FirstStageLoss::Kind::PoissonNormalized,
                "bayes_gamma_hat: Poisson uses the normalized squared error loss");
        return (post.shape - 1.0) / post.rate;
      }
      // Gamma scale model under entropy loss rho_m
      require(first.kind == FirstStageLoss::Kind::EntropyScale,
              "bayes_gamma_hat: Gamma model uses the entropy loss");
      require(first.m < post.shape, "bayes_gamma_hat: need m < posterior shape");
      return gamma_ratio_root(post.shape, first.m) / post.rate;
    case PosteriorSummary::Family::BetaII: {
      require(first.kind == FirstStageLoss::Kind::NBNormalized,
              "bayes_gamma_hat: NB uses the variance-normalized squared error loss");
      return post.sigma * (post.a - 1.0) / (post.b + 1.0);
    }
    case PosteriorSummary::Family::ScaledBeta:
      require(first.kind == FirstStageLoss::Kind::EntropyScale && first.m == -1.0,
              "bayes_gamma_hat: ExpLocation uses the entropy loss with m = -1");
      return post.a * post.scale / (post.a + 1.0);  // posterior mean
    case PosteriorSummary::Family::NormalGamma:
      require(first.kind == FirstStageLoss::Kind::LocationScale,
              "bayes_gamma_hat: NormalUnknownVar uses the studentized loss");
      return post.mu;
    case PosteriorSummary::Family::DirichletGammaTotal: {
      require(first.kind == FirstStageLoss::Kind::MultiPoissonNormalized,
              "bayes_gamma_hat: MultiPoisson uses the normalized squared error loss");
      const auto& xv = obs_counts(x);
      if (xv.size() == 1) return Vec{(post.shape - 1.0) / post.rate};
      long long z = 0;
      for (long long c : xv) z += c;
      Vec g(xv.size());
      const double denom = post.rate * (static_cast<double>(z) + xv.size() - 1.0);
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = static_cast<double>(xv[i]) * (post.shape - 1.0) / denom;
      return g;
    }
  }
  throw std::logic_error("bayes_gamma_hat: unhandled family");
}

std::vector<double> posterior_loss_sampler(const ModelSpec& model, const PriorSpec& prior,
                                           const Observation& x, const FirstStageLoss& first,
                                           RngStream rng, std::size_t count) {
  require(count > 0, "posterior_loss_sampler: count must be positive");
  const PosteriorSummary post = models::posterior(model, prior, x);
  const Estimate gamma = bayes_gamma_hat(model, post, first, x);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng r(rng, i);
    const Parameter theta = models::sample_posterior_one(post, r);
    out[i] = losses::eval_first(first, theta, gamma);
  }
  return out;
}

}  // namespace lossrisk::estimators
