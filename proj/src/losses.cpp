#include "lossrisk/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace lossrisk::losses {

namespace {

double sq_dist(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw std::domain_error("eval_first: estimate and parameter dimensions differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Vec as_vec(const Estimate& e) {
  if (const auto* v = std::get_if<Vec>(&e)) return *v;
  return Vec{std::get<double>(e)};
}

Vec as_vec(const Parameter& p) {
  if (const auto* v = std::get_if<Vec>(&p)) return *v;
  if (const auto* s = std::get_if<double>(&p)) return Vec{*s};
  throw std::domain_error("eval_first: expected a scalar or vector parameter");
}

double as_scalar(const Parameter& p) {
  if (const auto* s = std::get_if<double>(&p)) return *s;
  throw std::domain_error("eval_first: expected a scalar parameter");
}

double as_scalar(const Estimate& e) {
  if (const auto* s = std::get_if<double>(&e)) return *s;
  throw std::domain_error("eval_first: expected a scalar estimate");
}

double rho_m_value(double m, double t) {
  if (!(t > 0.0)) throw std::domain_error("rho_m: ratio must be positive");
  return std::pow(t, m) - m * std::log(t) - 1.0;
}

}  // namespace

BetaTag BetaTag::identity() { return BetaTag{}; }
BetaTag BetaTag::power(double q) {
  if (!(q > 0.0)) throw std::domain_error("BetaTag::power: q must be positive");
  BetaTag b;
  b.kind = Kind::Power;
  b.q = q;
  return b;
}
BetaTag BetaTag::monotone(std::function<double(double)> f) {
  BetaTag b;
  b.kind = Kind::Table;
  b.table = std::move(f);
  return b;
}

double BetaTag::operator()(double t) const {
  switch (kind) {
    case Kind::Identity: return t;
    case Kind::Power: return std::pow(t, q);
    case Kind::Table: return table(t);
  }
  return t;
}

FirstStageLoss FirstStageLoss::squared_error() { return FirstStageLoss{}; }
FirstStageLoss FirstStageLoss::scaled_squared_error(double sigma2) {
  if (!(sigma2 > 0.0)) throw std::domain_error("ScaledSquaredError: sigma2 must be positive");
  FirstStageLoss l;
  l.kind = Kind::ScaledSquaredError;
  l.sigma2 = sigma2;
  return l;
}
FirstStageLoss FirstStageLoss::beta_composed(BetaTag beta, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::domain_error("BetaComposed: sigma2 must be positive");
  FirstStageLoss l;
  l.kind = Kind::BetaComposed;
  l.beta = std::move(beta);
  l.sigma2 = sigma2;
  return l;
}
FirstStageLoss FirstStageLoss::weighted_squared_error(std::function<double(double)> w) {
  FirstStageLoss l;
  l.kind = Kind::WeightedSquaredError;
  l.weight = std::move(w);
  return l;
}
FirstStageLoss FirstStageLoss::poisson_normalized() {
  FirstStageLoss l;
  l.kind = Kind::PoissonNormalized;
  return l;
}
FirstStageLoss FirstStageLoss::multipoisson_normalized() {
  FirstStageLoss l;
  l.kind = Kind::MultiPoissonNormalized;
  return l;
}
FirstStageLoss FirstStageLoss::nb_normalized(double r) {
  if (!(r > 0.0)) throw std::domain_error("NBNormalized: r must be positive");
  FirstStageLoss l;
  l.kind = Kind::NBNormalized;
  l.r = r;
  return l;
}
FirstStageLoss FirstStageLoss::entropy_scale(double m) {
  if (m == 0.0) throw std::domain_error("EntropyScale: m must be nonzero");
  FirstStageLoss l;
  l.kind = Kind::EntropyScale;
  l.m = m;
  return l;
}
FirstStageLoss FirstStageLoss::location_scale(BetaTag beta, double factor) {
  if (!(factor > 0.0)) throw std::domain_error("LocationScale: factor must be positive");
  FirstStageLoss l;
  l.kind = Kind::LocationScale;
  l.beta = std::move(beta);
  l.factor = factor;
  return l;
}

double eval_first(const FirstStageLoss& loss, const Parameter& theta,
                  const Estimate& gamma_hat) {
  switch (loss.kind) {
    case FirstStageLoss::Kind::SquaredError:
      return sq_dist(as_vec(gamma_hat), as_vec(theta));
    case FirstStageLoss::Kind::ScaledSquaredError:
      return sq_dist(as_vec(gamma_hat), as_vec(theta)) / loss.sigma2;
    case FirstStageLoss::Kind::BetaComposed:
      return loss.beta(sq_dist(as_vec(gamma_hat), as_vec(theta)) / loss.sigma2);
    case FirstStageLoss::Kind::WeightedSquaredError: {
      const double th = as_scalar(theta);
      const double g = as_scalar(gamma_hat);
      return loss.weight(th) * (g - th) * (g - th);
    }
    case FirstStageLoss::Kind::PoissonNormalized: {
      const double th = as_scalar(theta);
      if (!(th > 0.0)) throw std::domain_error("PoissonNormalized: theta must be positive");
      const double g = as_scalar(gamma_hat);
      return (g - th) * (g - th) / th;
    }
    case FirstStageLoss::Kind::MultiPoissonNormalized: {
      const Vec th = as_vec(theta);
      const Vec g = as_vec(gamma_hat);
      if (th.size() != g.size())
        throw std::domain_error("MultiPoissonNormalized: dimension mismatch");
      double s = 0.0;
      for (std::size_t i = 0; i < th.size(); ++i) {
        if (!(th[i] > 0.0))
          throw std::domain_error("MultiPoissonNormalized: theta components must be positive");
        s += (g[i] - th[i]) * (g[i] - th[i]) / th[i];
      }
      return s;
    }
    case FirstStageLoss::Kind::NBNormalized: {
      const double th = as_scalar(theta);
      if (!(th > 0.0)) throw std::domain_error("NBNormalized: theta must be positive");
      const double g = as_scalar(gamma_hat);
      return (g - th) * (g - th) / (th * (th + loss.r));
    }
    case FirstStageLoss::Kind::EntropyScale: {
      const double th = as_scalar(theta);
      if (!(th > 0.0)) throw std::domain_error("EntropyScale: theta must be positive");
      return rho_m_value(loss.m, as_scalar(gamma_hat) / th);
    }
    case FirstStageLoss::Kind::LocationScale: {
      const auto* ls = std::get_if<LocScale>(&theta);
      if (!ls) throw std::domain_error("LocationScale: parameter must be a location-scale pair");
      if (!(ls->scale > 0.0)) throw std::domain_error("LocationScale: scale must be positive");
      const double d2 = sq_dist(as_vec(gamma_hat), ls->loc);
      return loss.beta(loss.factor * d2 / (ls->scale * ls->scale));
    }
  }
  throw std::logic_error("eval_first: unhandled loss kind");
}

SecondStageLoss SecondStageLoss::squared_error() { return SecondStageLoss{}; }
SecondStageLoss SecondStageLoss::rho_a(double m) {
  if (m == 0.0) throw std::domain_error("RhoA: m must be nonzero");
  return SecondStageLoss{Kind::RhoA, m};
}
SecondStageLoss SecondStageLoss::rho_m(double m) {
  if (m == 0.0) throw std::domain_error("RhoM: m must be nonzero");
  return SecondStageLoss{Kind::RhoM, m};
}
SecondStageLoss SecondStageLoss::rho_b() { return SecondStageLoss{Kind::RhoB, 0.0}; }
SecondStageLoss SecondStageLoss::rho_c() { return SecondStageLoss{Kind::RhoC, 0.0}; }

std::string SecondStageLoss::name() const {
  switch (kind) {
    case Kind::SquaredErrorW: return "squared_error";
    case Kind::RhoA: return "rho_a(" + std::to_string(m) + ")";
    case Kind::RhoM: return "rho_m(" + std::to_string(m) + ")";
    case Kind::RhoB: return "rho_b";
    case Kind::RhoC: return "rho_c";
  }
  return "?";
}

double eval_second(const SecondStageLoss& loss, double L, double Lhat) {
  if (loss.kind == SecondStageLoss::Kind::SquaredErrorW) {
    const double d = Lhat - L;
    return d * d;
  }
  if (!(L > 0.0) || !(Lhat > 0.0))
    throw std::domain_error("eval_second: rho losses need L > 0 and Lhat > 0");
  const double t = Lhat / L;
  switch (loss.kind) {
    case SecondStageLoss::Kind::RhoA: {
      const double u = std::pow(t, loss.m) - 1.0;
      return u * u;
    }
    case SecondStageLoss::Kind::RhoM:
      return rho_m_value(loss.m, t);
    case SecondStageLoss::Kind::RhoB:
      return t + 1.0 / t - 2.0;
    case SecondStageLoss::Kind::RhoC: {
      const double u = std::log(t);
      return u * u;
    }
    default:
      break;
  }
  throw std::logic_error("eval_second: unhandled loss kind");
}

RukhinLoss RukhinLoss::sqrt2() {
  RukhinLoss l;
  l.h = [](double t) { return 2.0 * std::sqrt(t); };
  l.hprime = [](double t) { return 1.0 / std::sqrt(t); };
  l.tag = "sqrt2";
  return l;
}

RukhinLoss RukhinLoss::custom(std::function<double(double)> h,
                              std::function<double(double)> hprime, std::string tag) {
  RukhinLoss l;
  l.h = std::move(h);
  l.hprime = std::move(hprime);
  l.tag = std::move(tag);
  return l;
}

double eval_rukhin(const RukhinLoss& loss, double L, double Lhat) {
  if (!(Lhat > 0.0)) throw std::domain_error("eval_rukhin: Lhat must be positive");
  if (L < 0.0) throw std::domain_error("eval_rukhin: L must be nonnegative");
  const double hp = loss.hprime(Lhat);
  return hp * L - hp * Lhat + loss.h(Lhat);
}

}  // namespace lossrisk::losses
