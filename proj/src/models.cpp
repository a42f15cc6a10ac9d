#include "lossrisk/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lossrisk::models {

using specfun::Rng;

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::domain_error(msg);
}

[[noreturn]] void unsupported(const char* what) {
  throw std::invalid_argument(std::string("posterior: unsupported pair: ") + what);
}

}  // namespace

ModelSpec ModelSpec::normal_known_var(int d, double sigma2) {
  require(d >= 1, "NormalKnownVar: d >= 1");
  require(sigma2 > 0, "NormalKnownVar: sigma2 > 0");
  ModelSpec m{Kind::NormalKnownVar};
  m.d = d;
  m.sigma2 = sigma2;
  return m;
}
ModelSpec ModelSpec::normal_unknown_var(int d, int n) {
  require(d >= 1 && n >= 2, "NormalUnknownVar: d >= 1 and n >= 2");
  ModelSpec m{Kind::NormalUnknownVar};
  m.d = d;
  m.n = n;
  return m;
}
ModelSpec ModelSpec::gamma(double alpha) {
  require(alpha > 0, "Gamma model: alpha > 0");
  ModelSpec m{Kind::Gamma};
  m.alpha = alpha;
  return m;
}
ModelSpec ModelSpec::poisson() { return ModelSpec{Kind::Poisson}; }
ModelSpec ModelSpec::multi_poisson(int d) {
  require(d >= 1, "MultiPoisson: d >= 1");
  ModelSpec m{Kind::MultiPoisson};
  m.d = d;
  return m;
}
ModelSpec ModelSpec::neg_binomial(double r) {
  require(r > 0, "NegBinomial: r > 0");
  ModelSpec m{Kind::NegBinomial};
  m.r = r;
  return m;
}
ModelSpec ModelSpec::exp_location(int n) {
  require(n >= 1, "ExpLocation: n >= 1");
  ModelSpec m{Kind::ExpLocation};
  m.n = n;
  return m;
}

PriorSpec PriorSpec::normal(Vec mu, double tau2) {
  require(!mu.empty() && tau2 > 0, "NormalPrior: tau2 > 0 and nonempty mean");
  PriorSpec p{Kind::Normal};
  p.mu = std::move(mu);
  p.tau2 = tau2;
  return p;
}
PriorSpec PriorSpec::normal_uniform() { return PriorSpec{Kind::NormalUniform}; }
PriorSpec PriorSpec::gamma(double a, double b) {
  require(a > 0 && b > 0, "GammaPrior: hyperparameters must be positive");
  PriorSpec p{Kind::Gamma};
  p.a = a;
  p.b = b;
  return p;
}
PriorSpec PriorSpec::inverse_scale() { return PriorSpec{Kind::InverseScale}; }
PriorSpec PriorSpec::beta_ii(double a, double b, double sigma) {
  require(a > 0 && b > 0 && sigma > 0, "BetaIIPrior: hyperparameters must be positive");
  PriorSpec p{Kind::BetaII};
  p.a = a;
  p.b = b;
  p.sigma = sigma;
  return p;
}
PriorSpec PriorSpec::beta_ii_improper(double sigma) {
  require(sigma > 0, "BetaIIImproper: sigma must be positive");
  PriorSpec p{Kind::BetaIIImproper};
  p.a = 1;
  p.b = 0;
  p.sigma = sigma;
  return p;
}
PriorSpec PriorSpec::normal_gamma(Vec xi, double c, double a, double b) {
  require(!xi.empty() && c > 0 && a > 0 && b > 0,
          "NormalGammaPrior: hyperparameters must be positive");
  PriorSpec p{Kind::NormalGamma};
  p.xi = std::move(xi);
  p.c = c;
  p.a = a;
  p.b = b;
  return p;
}
PriorSpec PriorSpec::multi_poisson_gamma_total(double a, double b) {
  require(a >= 1 && b > 0, "MultiPoissonGammaTotal: a >= 1 and b > 0");
  PriorSpec p{Kind::MultiPoissonGammaTotal};
  p.a = a;
  p.b = b;
  return p;
}
PriorSpec PriorSpec::multi_poisson_gamma_improper(double a) {
  require(a >= 1, "MultiPoissonGammaImproper: a >= 1");
  PriorSpec p{Kind::MultiPoissonGammaImproper};
  p.a = a;
  p.b = 0;
  return p;
}

namespace {

const Vec& obs_vec(const Observation& x) {
  if (const auto* v = std::get_if<Vec>(&x)) return *v;
  throw std::domain_error("posterior: expected a real-vector observation");
}

long long obs_count(const Observation& x) {
  if (const auto* c = std::get_if<long long>(&x)) {
    require(*c >= 0, "posterior: count observation must be nonnegative");
    return *c;
  }
  throw std::domain_error("posterior: expected a count observation");
}

double obs_positive(const Observation& x) {
  if (const auto* s = std::get_if<double>(&x)) {
    require(*s > 0, "posterior: observation must be positive");
    return *s;
  }
  throw std::domain_error("posterior: expected a positive real observation");
}

PosteriorSummary normal_posterior(const ModelSpec& model, const PriorSpec& prior,
                                  const Observation& x) {
  const Vec& xv = obs_vec(x);
  require(static_cast<int>(xv.size()) == model.d, "posterior: observation dimension");
  PosteriorSummary post;
  post.family = PosteriorSummary::Family::NormalD;
  if (prior.kind == PriorSpec::Kind::NormalUniform) {
    post.mu = xv;
    post.tau2 = model.sigma2;
    return post;
  }
  require(prior.mu.size() == xv.size(), "posterior: prior mean dimension");
  const double t2 = prior.tau2, s2 = model.sigma2;
  const double w = t2 / (t2 + s2);
  post.mu.resize(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i)
    post.mu[i] = w * xv[i] + (1.0 - w) * prior.mu[i];
  post.tau2 = t2 * s2 / (t2 + s2);
  return post;
}

}  // namespace

PosteriorSummary posterior(const ModelSpec& model, const PriorSpec& prior,
                           const Observation& x) {
  switch (model.kind) {
    case ModelSpec::Kind::NormalKnownVar:
      if (prior.kind == PriorSpec::Kind::Normal ||
          prior.kind == PriorSpec::Kind::NormalUniform)
        return normal_posterior(model, prior, x);
      unsupported("NormalKnownVar model needs a normal or uniform prior");

    case ModelSpec::Kind::Poisson: {
      // theta | x ~ G(a + x, 1 + b); the flat prior on (0,inf) is (a,b)=(1,0)
      double a, b;
      if (prior.kind == PriorSpec::Kind::Gamma) {
        a = prior.a;
        b = prior.b;
      } else if (prior.kind == PriorSpec::Kind::NormalUniform) {
        a = 1;
        b = 0;
      } else {
        unsupported("Poisson model needs a gamma or uniform prior");
      }
      const long long xc = obs_count(x);
      PosteriorSummary post;
      post.family = PosteriorSummary::Family::Gamma;
      post.shape = a + static_cast<double>(xc);
      post.rate = 1.0 + b;
      return post;
    }

    case ModelSpec::Kind::NegBinomial: {
      double a, b;
      if (prior.kind == PriorSpec::Kind::BetaII) {
        require(prior.sigma == model.r, "posterior: NB prior requires sigma = r");
        a = prior.a;
        b = prior.b;
      } else if (prior.kind == PriorSpec::Kind::BetaIIImproper) {
        require(prior.sigma == model.r, "posterior: NB prior requires sigma = r");
        a = 1;
        b = 0;
      } else {
        unsupported("NegBinomial model needs a Beta type II prior");
      }
      const long long xc = obs_count(x);
      PosteriorSummary post;
      post.family = PosteriorSummary::Family::BetaII;
      post.a = a + static_cast<double>(xc);
      post.b = b + model.r;
      post.sigma = model.r;
      return post;
    }

    case ModelSpec::Kind::Gamma: {
      // theta | x ~ G(alpha + a, x + b)
      double a, b;
      if (prior.kind == PriorSpec::Kind::Gamma) {
        a = prior.a;
        b = prior.b;
      } else if (prior.kind == PriorSpec::Kind::InverseScale) {
        a = 0;
        b = 0;
      } else {
        unsupported("Gamma model needs a gamma or inverse-scale prior");
      }
      const double xv = obs_positive(x);
      PosteriorSummary post;
      post.family = PosteriorSummary::Family::Gamma;
      post.shape = model.alpha + a;
      post.rate = xv + b;
      return post;
    }

    case ModelSpec::Kind::ExpLocation: {
      if (prior.kind != PriorSpec::Kind::Gamma)
        unsupported("ExpLocation model needs a G(a, n) prior");
      // the scale hyperparameter is pinned to the sample count
      require(prior.b == static_cast<double>(model.n),
              "posterior: ExpLocation prior requires b = n");
      const Vec& xv = obs_vec(x);
      require(static_cast<int>(xv.size()) == model.n, "posterior: need n observations");
      const double x1 = *std::min_element(xv.begin(), xv.end());
      require(x1 > 0, "posterior: ExpLocation needs positive minimum (theta > 0 support)");
      PosteriorSummary post;
      post.family = PosteriorSummary::Family::ScaledBeta;
      post.a = prior.a;
      post.scale = x1;
      post.stats.x1 = x1;
      return post;
    }

    case ModelSpec::Kind::NormalUnknownVar: {
      if (prior.kind != PriorSpec::Kind::NormalGamma)
        unsupported("NormalUnknownVar model needs a normal-gamma prior");
      const auto* sp = std::get_if<SuffPair>(&x);
      if (!sp) throw std::domain_error("posterior: expected the sufficient pair (xbar, S)");
      require(static_cast<int>(sp->xbar.size()) == model.d, "posterior: xbar dimension");
      require(sp->s >= 0, "posterior: S must be nonnegative");
      require(prior.xi.size() == sp->xbar.size(), "posterior: xi dimension");
      const double n = model.n, c = prior.c, d = model.d;
      const double k = (n - 1.0) * d;
      PosteriorSummary post;
      post.family = PosteriorSummary::Family::NormalGamma;
      post.mu.resize(sp->xbar.size());
      double dist2 = 0.0;
      for (std::size_t i = 0; i < sp->xbar.size(); ++i) {
        post.mu[i] = (n * sp->xbar[i] + c * prior.xi[i]) / (n + c);
        const double dd = sp->xbar[i] - prior.xi[i];
        dist2 += dd * dd;
      }
      post.c = c + n;
      post.a = prior.a + 0.5 * (d + k);
      post.b = 0.5 * (sp->s + 2.0 * prior.b + (n * c / (n + c)) * dist2);
      post.stats.xbar = sp->xbar;
      post.stats.s = sp->s;
      return post;
    }

    case ModelSpec::Kind::MultiPoisson: {
      double a, b;
      if (prior.kind == PriorSpec::Kind::MultiPoissonGammaTotal) {
        a = prior.a;
        b = prior.b;
      } else if (prior.kind == PriorSpec::Kind::MultiPoissonGammaImproper) {
        a = prior.a;
        b = 0;
      } else {
        unsupported("MultiPoisson model needs a Gamma-total prior");
      }
      const auto* xv = std::get_if<std::vector<long long>>(&x);
      if (!xv) throw std::domain_error("posterior: expected a count-vector observation");
      require(static_cast<int>(xv->size()) == model.d, "posterior: observation dimension");
      long long z = 0;
      PosteriorSummary post;
      post.family = PosteriorSummary::Family::DirichletGammaTotal;
      post.dirichlet_weights.resize(xv->size());
      for (std::size_t i = 0; i < xv->size(); ++i) {
        require((*xv)[i] >= 0, "posterior: counts must be nonnegative");
        post.dirichlet_weights[i] = static_cast<double>((*xv)[i]) + 1.0;
        z += (*xv)[i];
      }
      post.shape = a + static_cast<double>(z);
      post.rate = b + 1.0;
      post.stats.z = z;
      return post;
    }
  }
  unsupported("unknown model");
}

void check_parameter(const ModelSpec& model, const Parameter& theta) {
  switch (model.kind) {
    case ModelSpec::Kind::NormalKnownVar: {
      const auto* v = std::get_if<Vec>(&theta);
      require(v && static_cast<int>(v->size()) == model.d,
              "theta must be a d-vector for NormalKnownVar");
      return;
    }
    case ModelSpec::Kind::NormalUnknownVar: {
      const auto* ls = std::get_if<LocScale>(&theta);
      require(ls && static_cast<int>(ls->loc.size()) == model.d && ls->scale > 0,
              "theta must be (mu, sigma) with sigma > 0 for NormalUnknownVar");
      return;
    }
    case ModelSpec::Kind::Gamma:
    case ModelSpec::Kind::Poisson:
    case ModelSpec::Kind::NegBinomial: {
      const auto* s = std::get_if<double>(&theta);
      require(s && *s > 0, "theta must be a positive scalar");
      return;
    }
    case ModelSpec::Kind::MultiPoisson: {
      const auto* v = std::get_if<Vec>(&theta);
      require(v && static_cast<int>(v->size()) == model.d, "theta must be a d-vector");
      for (double t : *v) require(t > 0, "theta components must be positive");
      return;
    }
    case ModelSpec::Kind::ExpLocation: {
      const auto* s = std::get_if<double>(&theta);
      require(s && *s > 0, "theta must be a positive scalar location");
      return;
    }
  }
}

Observation sample_model_one(const ModelSpec& model, const Parameter& theta, Rng& rng) {
  switch (model.kind) {
    case ModelSpec::Kind::NormalKnownVar: {
      const Vec& mu = std::get<Vec>(theta);
      const double sd = std::sqrt(model.sigma2);
      Vec x(mu.size());
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = mu[i] + sd * specfun::sample_normal(rng);
      return x;
    }
    case ModelSpec::Kind::NormalUnknownVar: {
      const auto& ls = std::get<LocScale>(theta);
      const double sigma2 = ls.scale * ls.scale;
      const double n = model.n;
      const double k = (n - 1.0) * model.d;
      SuffPair sp;
      sp.xbar.resize(ls.loc.size());
      const double sd = std::sqrt(sigma2 / n);
      for (std::size_t i = 0; i < sp.xbar.size(); ++i)
        sp.xbar[i] = ls.loc[i] + sd * specfun::sample_normal(rng);
      sp.s = specfun::sample_gamma(rng, 0.5 * k, 0.5 / sigma2);
      return sp;
    }
    case ModelSpec::Kind::Gamma:
      return specfun::sample_gamma(rng, model.alpha, std::get<double>(theta));
    case ModelSpec::Kind::Poisson:
      return specfun::sample_poisson(rng, std::get<double>(theta));
    case ModelSpec::Kind::NegBinomial:
      return specfun::sample_negbinomial(rng, model.r, std::get<double>(theta));
    case ModelSpec::Kind::MultiPoisson: {
      const Vec& th = std::get<Vec>(theta);
      std::vector<long long> x(th.size());
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = specfun::sample_poisson(rng, th[i]);
      return x;
    }
    case ModelSpec::Kind::ExpLocation: {
      const double th = std::get<double>(theta);
      Vec x(model.n);
      for (double& v : x) v = th + specfun::sample_exponential(rng);
      return x;
    }
  }
  throw std::logic_error("sample_model_one: unhandled model kind");
}

std::vector<Observation> sample_model(const ModelSpec& model, const Parameter& theta,
                                      RngStream stream, std::size_t count) {
  check_parameter(model, theta);
  require(count > 0, "sample_model: count must be positive");
  std::vector<Observation> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(stream, i);
    out.push_back(sample_model_one(model, theta, rng));
  }
  return out;
}

Parameter sample_posterior_one(const PosteriorSummary& post, Rng& rng) {
  switch (post.family) {
    case PosteriorSummary::Family::NormalD: {
      Vec th(post.mu.size());
      const double sd = std::sqrt(post.tau2);
      for (std::size_t i = 0; i < th.size(); ++i)
        th[i] = post.mu[i] + sd * specfun::sample_normal(rng);
      return th;
    }
    case PosteriorSummary::Family::Gamma:
      return specfun::sample_gamma(rng, post.shape, post.rate);
    case PosteriorSummary::Family::BetaII:
      return specfun::sample_betaii(rng, post.a, post.b, post.sigma);
    case PosteriorSummary::Family::ScaledBeta:
      return post.scale * std::pow(rng.u01(), 1.0 / post.a);
    case PosteriorSummary::Family::NormalGamma: {
      const double prec = specfun::sample_gamma(rng, post.a, post.b);  // 1/theta2^2
      const double theta2 = 1.0 / std::sqrt(prec);
      LocScale th;
      th.scale = theta2;
      th.loc.resize(post.mu.size());
      const double sd = theta2 / std::sqrt(post.c);
      for (std::size_t i = 0; i < th.loc.size(); ++i)
        th.loc[i] = post.mu[i] + sd * specfun::sample_normal(rng);
      return th;
    }
    case PosteriorSummary::Family::DirichletGammaTotal: {
      const double s = specfun::sample_gamma(rng, post.shape, post.rate);
      Vec u = specfun::sample_dirichlet(rng, post.dirichlet_weights);
      for (double& v : u) v *= s;
      return u;
    }
  }
  throw std::logic_error("sample_posterior_one: unhandled family");
}

}  // namespace lossrisk::models
