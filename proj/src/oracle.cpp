#include "lossrisk/oracle.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "lossrisk/estimators.hpp"
#include "lossrisk/specfun.hpp"

namespace lossrisk::oracle {

using models::PosteriorSummary;
using specfun::log_gamma;
using specfun::log_pochhammer;
using specfun::Rng;

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::domain_error(msg);
}

// --- adaptive Gauss-Kronrod (G7/K15) ----------------------------------------
// All nodes are interior, which matters here: the integrands carry integrable
// log-type singularities where the first-stage loss vanishes, and those points
// must never be evaluated exactly.

constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kGaussWeights[4] = {0.129484966168870, 0.279705391489277,
                                     0.381830050505119, 0.417959183673469};

struct GkCtx {
  const std::function<double(double)>* f;
  double rel_tol;
  double abs_tol;
  int panels_left;
  std::vector<std::pair<double, double>>* collect = nullptr;
};

void gk15(const std::function<double(double)>& f, double a, double b, double* kronrod,
          double* gauss) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double k = 0.0, g = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double x = h * kKronrodNodes[i];
    const double fs = (i == 7) ? f(c) : f(c - x) + f(c + x);
    k += kKronrodWeights[i] * fs;
    if (i % 2 == 1) g += kGaussWeights[i / 2] * fs;
  }
  *kronrod = k * h;
  *gauss = g * h;
}

double gk_adaptive(GkCtx& ctx, double a, double b) {
  double k, g;
  gk15(*ctx.f, a, b, &k, &g);
  const double err = std::abs(k - g);
  if (err <= std::max(ctx.abs_tol, ctx.rel_tol * std::abs(k)) || ctx.panels_left <= 0) {
    if (ctx.collect) ctx.collect->emplace_back(a, b);
    return k;
  }
  ctx.panels_left -= 2;
  const double mid = 0.5 * (a + b);
  return gk_adaptive(ctx, a, mid) + gk_adaptive(ctx, mid, b);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureSpec& quad) {
  GkCtx ctx{&f, quad.rel_tol, quad.abs_tol, quad.max_subdivisions};
  const int panels = 8;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + (b - a) * p / panels;
    const double hi = a + (b - a) * (p + 1) / panels;
    total += gk_adaptive(ctx, lo, hi);
  }
  return total;
}

// Fixed panelization for the argmin path.  The adaptive refinement is run
// once (the singular locus of the integrand does not depend on Lhat), and
// golden section then sees a smooth objective: evaluating every candidate on
// the same panels keeps the minimizer accurate to the quadrature bias rather
// than to the square root of the adaptive noise.
std::vector<std::pair<double, double>> build_panels(const std::function<double(double)>& f,
                                                    double a, double b,
                                                    const QuadratureSpec& quad) {
  std::vector<std::pair<double, double>> panels;
  GkCtx ctx{&f, 0.01 * quad.rel_tol, 0.01 * quad.abs_tol, 4 * quad.max_subdivisions,
            &panels};
  const int base = 8;
  for (int p = 0; p < base; ++p) {
    const double lo = a + (b - a) * p / base;
    const double hi = a + (b - a) * (p + 1) / base;
    gk_adaptive(ctx, lo, hi);
  }
  return panels;
}

double integrate_on(const std::vector<std::pair<double, double>>& panels,
                    const std::function<double(double)>& f) {
  double total = 0.0;
  for (const auto& [a, b] : panels) {
    double k, g;
    gk15(f, a, b, &k, &g);
    total += k;
  }
  return total;
}

// --- golden section --------------------------------------------------------

double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  double rel_tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > rel_tol * (std::abs(x1) + std::abs(x2)) + 1e-300) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

// argmin with bracket [1e-8, 1e3] * scale, widened on boundary hits
double minimize_lhat(const std::function<double(double)>& objective, double scale) {
  double lo = 1e-8 * scale;
  double hi = 1e3 * scale;
  for (int attempt = 0; attempt < 5; ++attempt) {
    const double hat = golden_min(objective, lo, hi, 1e-8);
    if (hat <= lo * (1.0 + 1e-6)) {
      lo *= 0.1;
      continue;
    }
    if (hat >= hi * (1.0 - 1e-6)) {
      hi *= 10.0;
      continue;
    }
    return hat;
  }
  throw std::domain_error("oracle: minimizer pinned to the bracket boundary");
}

// --- 1-D posterior plumbing -------------------------------------------------

// loss as a function of the scalar posterior variable
std::function<double(double)> scalar_loss_fn(const ModelSpec& model,
                                             const FirstStageLoss& first,
                                             const Estimate& gamma) {
  if (model.kind == ModelSpec::Kind::NormalKnownVar) {
    const Vec g = std::get<Vec>(gamma);
    return [g, first](double th) {
      return losses::eval_first(first, Vec{th}, g);
    };
  }
  const double g = std::get<double>(gamma);
  return [g, first](double th) { return losses::eval_first(first, th, g); };
}

// posterior density of the scalar theta
std::function<double(double)> posterior_density(const PosteriorSummary& post) {
  switch (post.family) {
    case PosteriorSummary::Family::Gamma: {
      const double shape = post.shape, rate = post.rate;
      const double lognorm = shape * std::log(rate) - log_gamma(shape);
      return [shape, rate, lognorm](double th) {
        return th > 0.0 ? std::exp(lognorm + (shape - 1.0) * std::log(th) - rate * th) : 0.0;
      };
    }
    case PosteriorSummary::Family::BetaII: {
      const double a = post.a, b = post.b, sigma = post.sigma;
      const double lognorm = b * std::log(sigma) + log_gamma(a + b) - log_gamma(a) - log_gamma(b);
      return [a, b, sigma, lognorm](double th) {
        return th > 0.0
                   ? std::exp(lognorm + (a - 1.0) * std::log(th) -
                              (a + b) * std::log(sigma + th))
                   : 0.0;
      };
    }
    case PosteriorSummary::Family::ScaledBeta: {
      const double a = post.a, scale = post.scale;
      return [a, scale](double th) {
        return (th > 0.0 && th < scale)
                   ? a * std::pow(th / scale, a - 1.0) / scale
                   : 0.0;
      };
    }
    case PosteriorSummary::Family::NormalD: {
      require(post.mu.size() == 1, "oracle: quadrature path needs a 1-D posterior");
      const double mu = post.mu[0], tau2 = post.tau2;
      const double norm = 1.0 / std::sqrt(2.0 * M_PI * tau2);
      return [mu, tau2, norm](double th) {
        const double z = th - mu;
        return norm * std::exp(-0.5 * z * z / tau2);
      };
    }
    default:
      throw std::domain_error("oracle: quadrature path needs a 1-D posterior");
  }
}

// Transformed-domain view of one posterior-loss integral.  The loss is
// floored at a subnormal so that a node landing exactly on a loss zero
// produces a large finite integrand value instead of a domain error.
class PosteriorQuad {
 public:
  PosteriorQuad(const PosteriorSummary& post, std::function<double(double)> loss_fn)
      : family_(post.family),
        loss_(std::move(loss_fn)),
        density_(posterior_density(post)),
        scale_(post.family == PosteriorSummary::Family::ScaledBeta ? post.scale : 1.0),
        center_(post.family == PosteriorSummary::Family::NormalD ? post.mu[0] : 0.0) {}

  double lo() const { return 0.0; }
  double hi() const { return family_ == PosteriorSummary::Family::ScaledBeta ? scale_ : 1.0; }

  std::function<double(double)> integrand(std::function<double(double)> g) const {
    const auto loss = loss_;
    const auto density = density_;
    const double center = center_;
    switch (family_) {
      case PosteriorSummary::Family::ScaledBeta: {
        const double sup = scale_;
        return [loss, density, g, sup](double th) {
          if (th <= 0.0 || th >= sup) return 0.0;
          return g(std::max(loss(th), 1e-300)) * density(th);
        };
      }
      case PosteriorSummary::Family::NormalD:
        // two-sided half-line transform around the posterior center
        return [loss, density, g, center](double t) {
          if (t <= 0.0 || t >= 1.0) return 0.0;
          const double s = t / (1.0 - t);
          const double jac = 1.0 / ((1.0 - t) * (1.0 - t));
          return (g(std::max(loss(center + s), 1e-300)) * density(center + s) +
                  g(std::max(loss(center - s), 1e-300)) * density(center - s)) *
                 jac;
        };
      default:
        // positive half line: theta = t / (1 - t)
        return [loss, density, g](double t) {
          if (t <= 0.0 || t >= 1.0) return 0.0;
          const double th = t / (1.0 - t);
          const double jac = 1.0 / ((1.0 - t) * (1.0 - t));
          const double p = density(th);
          if (p == 0.0) return 0.0;
          return g(std::max(loss(th), 1e-300)) * p * jac;
        };
    }
  }

 private:
  PosteriorSummary::Family family_;
  std::function<double(double)> loss_;
  std::function<double(double)> density_;
  double scale_;
  double center_;
};

double posterior_expect(const PosteriorSummary& post,
                        const std::function<double(double)>& loss_fn,
                        const std::function<double(double)>& g,
                        const QuadratureSpec& quad) {
  const PosteriorQuad pq(post, loss_fn);
  return integrate(pq.integrand(g), pq.lo(), pq.hi(), quad);
}

double check_positive_estimate(double v, const char* who) {
  if (!std::isfinite(v)) throw std::domain_error(std::string(who) + ": divergent moment");
  return v;
}

}  // namespace

double oracle_bayes_loss_estimate(const ModelSpec& model, const PriorSpec& prior,
                                  const Observation& x, const FirstStageLoss& first,
                                  const SecondStageLoss& second,
                                  const QuadratureSpec& quad) {
  const PosteriorSummary post = models::posterior(model, prior, x);
  const Estimate gamma = estimators::bayes_gamma_hat(model, post, first, x);
  const PosteriorQuad pq(post, scalar_loss_fn(model, first, gamma));

  const double mean_loss = check_positive_estimate(
      integrate(pq.integrand([](double L) { return L; }), pq.lo(), pq.hi(), quad),
      "oracle_bayes_loss_estimate");
  require(mean_loss > 0.0, "oracle_bayes_loss_estimate: posterior mean loss not positive");

  const auto w_integrand = [&](double lhat) {
    return pq.integrand([&second, lhat](double L) {
      return losses::eval_second(second, L, lhat);
    });
  };
  const auto panels = build_panels(w_integrand(mean_loss), pq.lo(), pq.hi(), quad);
  const auto objective = [&](double lhat) {
    const double v = integrate_on(panels, w_integrand(lhat));
    if (!std::isfinite(v))
      throw std::domain_error("oracle_bayes_loss_estimate: divergent inner integral");
    return v;
  };
  return minimize_lhat(objective, mean_loss);
}

McOracleEstimate oracle_bayes_loss_estimate_mc(std::span<const double> loss_samples,
                                               const SecondStageLoss& second, int batches) {
  require(loss_samples.size() >= 1000, "oracle mc: need at least 1000 loss samples");
  require(batches >= 2, "oracle mc: need at least 2 batches");

  const auto argmin_over = [&](std::span<const double> part) {
    double mean = 0.0;
    for (double v : part) mean += v;
    mean /= static_cast<double>(part.size());
    const auto objective = [&](double lhat) {
      double acc = 0.0;
      for (double v : part) acc += losses::eval_second(second, v, lhat);
      return acc / static_cast<double>(part.size());
    };
    return minimize_lhat(objective, mean);
  };

  McOracleEstimate out;
  out.estimate = argmin_over(loss_samples);
  const std::size_t per = loss_samples.size() / batches;
  double s = 0.0, s2 = 0.0;
  for (int b = 0; b < batches; ++b) {
    const double v = argmin_over(loss_samples.subspan(b * per, per));
    s += v;
    s2 += v * v;
  }
  const double mean = s / batches;
  const double var = std::max(0.0, (s2 - batches * mean * mean) / (batches - 1.0));
  out.std_error = std::sqrt(var / batches);
  return out;
}

namespace {

struct LossMoments {
  double mean = 0.0;      // E L
  double inv = 0.0;       // E 1/L
  double neg_m = 0.0;     // E L^-m
  double neg_2m = 0.0;    // E L^-2m
  double log_mean = 0.0;  // E log L
};

double closed_from_moments(const LossMoments& mo, const SecondStageLoss& second) {
  switch (second.kind) {
    case SecondStageLoss::Kind::SquaredErrorW:
      return mo.mean;
    case SecondStageLoss::Kind::RhoA:
      return std::pow(mo.neg_m / mo.neg_2m, 1.0 / second.m);
    case SecondStageLoss::Kind::RhoM:
      return std::pow(mo.neg_m, -1.0 / second.m);
    case SecondStageLoss::Kind::RhoB:
      return std::sqrt(mo.mean / mo.inv);
    case SecondStageLoss::Kind::RhoC:
      return std::exp(mo.log_mean);
  }
  throw std::logic_error("oracle_closed_second_stage: unhandled loss");
}

}  // namespace

double oracle_closed_second_stage(std::span<const double> loss_samples,
                                  const SecondStageLoss& second) {
  require(!loss_samples.empty(), "oracle_closed_second_stage: no samples");
  LossMoments mo;
  const double m = second.m;
  for (double v : loss_samples) {
    require(v > 0.0, "oracle_closed_second_stage: losses must be positive");
    mo.mean += v;
    mo.inv += 1.0 / v;
    mo.log_mean += std::log(v);
    if (second.kind == SecondStageLoss::Kind::RhoA ||
        second.kind == SecondStageLoss::Kind::RhoM) {
      mo.neg_m += std::pow(v, -m);
      mo.neg_2m += std::pow(v, -2.0 * m);
    }
  }
  const double n = static_cast<double>(loss_samples.size());
  mo.mean /= n;
  mo.inv /= n;
  mo.log_mean /= n;
  mo.neg_m /= n;
  mo.neg_2m /= n;
  return check_positive_estimate(closed_from_moments(mo, second),
                                 "oracle_closed_second_stage");
}

double oracle_closed_second_stage(const ModelSpec& model, const PriorSpec& prior,
                                  const Observation& x, const FirstStageLoss& first,
                                  const SecondStageLoss& second,
                                  const QuadratureSpec& quad) {
  const PosteriorSummary post = models::posterior(model, prior, x);
  const Estimate gamma = estimators::bayes_gamma_hat(model, post, first, x);
  const auto loss_fn = scalar_loss_fn(model, first, gamma);
  const auto expect = [&](auto&& g) {
    return check_positive_estimate(posterior_expect(post, loss_fn, g, quad),
                                   "oracle_closed_second_stage");
  };
  LossMoments mo;
  const double m = second.m;
  switch (second.kind) {
    case SecondStageLoss::Kind::SquaredErrorW:
      mo.mean = expect([](double L) { return L; });
      break;
    case SecondStageLoss::Kind::RhoA:
    case SecondStageLoss::Kind::RhoM:
      mo.neg_m = expect([m](double L) { return std::pow(L, -m); });
      mo.neg_2m = expect([m](double L) { return std::pow(L, -2.0 * m); });
      break;
    case SecondStageLoss::Kind::RhoB:
      mo.mean = expect([](double L) { return L; });
      mo.inv = expect([](double L) { return 1.0 / L; });
      break;
    case SecondStageLoss::Kind::RhoC:
      mo.log_mean = posterior_expect(post, loss_fn, [](double L) { return std::log(L); }, quad);
      break;
  }
  return closed_from_moments(mo, second);
}

std::vector<MomentInequalityRow> moment_inequality_check(
    const std::function<double(specfun::Rng&)>& law, std::span<const double> m_grid,
    RngStream rng, std::uint64_t n) {
  require(n >= 1000, "moment_inequality_check: need n >= 1000");
  constexpr int kBatches = 20;
  std::vector<MomentInequalityRow> rows;
  for (double m : m_grid) {
    require(m > 0.0 || m <= -1.0, "moment_inequality_check: m must be in (0,inf) or (-inf,-1]");
    const std::uint64_t per = n / kBatches;
    double stat_sum = 0.0, stat_sumsq = 0.0;
    double lhs_all = 0.0, rhs_all = 0.0;
    for (int b = 0; b < kBatches; ++b) {
      double s1 = 0.0, sm = 0.0, s2m = 0.0;
      for (std::uint64_t i = 0; i < per; ++i) {
        Rng r(rng, static_cast<std::uint64_t>(b) * per + i);
        const double t = law(r);
        require(t > 0.0, "moment_inequality_check: law must be positive");
        s1 += t;
        sm += std::pow(t, -m);
        s2m += std::pow(t, -2.0 * m);
      }
      const double np = static_cast<double>(per);
      const double lhs = (sm / np) / (s2m / np);
      const double rhs = std::pow(s1 / np, m);
      if (!std::isfinite(lhs) || !std::isfinite(rhs))
        throw std::domain_error("moment_inequality_check: divergent moment");
      const double stat = rhs - lhs;
      stat_sum += stat;
      stat_sumsq += stat * stat;
      lhs_all += lhs;
      rhs_all += rhs;
    }
    const double mean_stat = stat_sum / kBatches;
    const double var =
        std::max(0.0, (stat_sumsq - kBatches * mean_stat * mean_stat) / (kBatches - 1.0));
    const double se = std::sqrt(var / kBatches);
    MomentInequalityRow row;
    row.m = m;
    row.lhs = lhs_all / kBatches;
    row.rhs = rhs_all / kBatches;
    row.slack = 4.0 * se;
    row.pass = mean_stat >= -row.slack;
    rows.push_back(row);
  }
  return rows;
}

MomentInequalityRow moment_inequality_exact_gamma(double shape, double rate, double m) {
  require(shape > 0.0 && rate > 0.0, "moment_inequality_exact_gamma: bad law");
  require(m > 0.0 || m <= -1.0, "moment_inequality_exact_gamma: bad m");
  require(shape > 2.0 * m, "moment_inequality_exact_gamma: E T^-2m requires shape > 2m");
  // E T^h = rate^-h (shape)_h
  const double lhs = std::exp(std::log(rate) * m + log_pochhammer(shape, -m) -
                              log_pochhammer(shape, -2.0 * m));
  const double rhs = std::pow(shape / rate, m);
  MomentInequalityRow row;
  row.m = m;
  row.lhs = lhs;
  row.rhs = rhs;
  row.slack = 0.0;
  row.pass = lhs <= rhs * (1.0 + 1e-12);
  return row;
}

double cutoff_m0(int d) {
  require(d >= 5, "cutoff_m0: need d >= 5");
  const auto f = [d](double m) {
    return 2.0 * std::exp(log_pochhammer(0.5 * d - 2.0 * m, m) / m) - static_cast<double>(d);
  };
  double lo = -1.0 + 1e-9, hi = -1e-9;
  double flo = f(lo), fhi = f(hi);
  require(flo > 0.0 && fhi < 0.0, "cutoff_m0: no sign change on (-1, 0)");
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace lossrisk::oracle
