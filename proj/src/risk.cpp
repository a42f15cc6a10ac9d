#include "lossrisk/risk.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "lossrisk/specfun.hpp"

namespace lossrisk::risk {

using models::sample_model_one;
using specfun::digamma;
using specfun::log_pochhammer;
using specfun::Rng;
using specfun::trigamma;

unsigned worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("LOSSRISK_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1 && static_cast<unsigned>(cap) < hw)
      hw = static_cast<unsigned>(cap);
  }
  return hw;
}

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::domain_error(msg);
}

struct Accum {
  double sum = 0.0;
  double sumsq = 0.0;
};

// Deterministic parallel reduction: samples are grouped into fixed blocks,
// each block is summed sequentially, and block sums are combined in index
// order.  The result is therefore independent of the worker count.
constexpr std::uint64_t kBlock = 8192;

template <class F>
Accum accumulate_samples(std::uint64_t n, F&& per_sample) {
  const std::uint64_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<Accum> partial(nblocks);
  std::exception_ptr error;
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};

  auto work = [&]() {
    try {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::uint64_t b = next.fetch_add(1);
        if (b >= nblocks) break;
        const std::uint64_t lo = b * kBlock;
        const std::uint64_t hi = std::min(n, lo + kBlock);
        double s = 0.0, s2 = 0.0;
        for (std::uint64_t i = lo; i < hi; ++i) {
          const double v = per_sample(i);
          s += v;
          s2 += v * v;
        }
        partial[b] = Accum{s, s2};
      }
    } catch (...) {
      if (!failed.exchange(true)) error = std::current_exception();
    }
  };

  const unsigned workers = std::min<std::uint64_t>(worker_count(), nblocks);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  Accum total;
  for (const Accum& a : partial) {
    total.sum += a.sum;
    total.sumsq += a.sumsq;
  }
  return total;
}

RiskEstimate finish_estimate(const Accum& acc, std::uint64_t n, const Parameter& theta) {
  RiskEstimate est;
  est.n_samples = n;
  est.theta = theta;
  est.mean = acc.sum / static_cast<double>(n);
  const double var =
      std::max(0.0, (acc.sumsq - n * est.mean * est.mean) / (static_cast<double>(n) - 1.0));
  est.std_error = std::sqrt(var / static_cast<double>(n));
  return est;
}

}  // namespace

RiskEstimate mc_risk(const ModelSpec& model, const Parameter& theta,
                     const EstimatorPair& pair, const FirstStageLoss& first,
                     const SecondStageLoss& second, RngStream rng, std::uint64_t n) {
  require(n >= 100, "mc_risk: need n >= 100");
  models::check_parameter(model, theta);
  const Accum acc = accumulate_samples(n, [&](std::uint64_t i) {
    Rng r(rng, i);
    const Observation x = sample_model_one(model, theta, r);
    const double loss = losses::eval_first(first, theta, pair.gamma_hat(x));
    return losses::eval_second(second, loss, pair.l_hat(x));
  });
  return finish_estimate(acc, n, theta);
}

RiskEstimate mc_rukhin_risk(const ModelSpec& model, const Parameter& theta,
                            const EstimatorPair& pair, const FirstStageLoss& first,
                            const RukhinLoss& rukhin, RngStream rng, std::uint64_t n) {
  require(n >= 100, "mc_rukhin_risk: need n >= 100");
  models::check_parameter(model, theta);
  const Accum acc = accumulate_samples(n, [&](std::uint64_t i) {
    Rng r(rng, i);
    const Observation x = sample_model_one(model, theta, r);
    const double loss = losses::eval_first(first, theta, pair.gamma_hat(x));
    return losses::eval_rukhin(rukhin, loss, pair.l_hat(x));
  });
  return finish_estimate(acc, n, theta);
}

// ---------------------------------------------------------------------------
// Normal minimax sequence

namespace {

// Poisson(lambda) weights truncated where the cumulative mass reaches
// 1 - 1e-16 past the mode.
std::vector<double> poisson_weights(double lambda) {
  if (lambda <= 0.0) return {1.0};
  const std::size_t kmax =
      static_cast<std::size_t>(lambda + 12.0 * std::sqrt(lambda) + 60.0);
  std::vector<double> w;
  w.reserve(64);
  double lw = -lambda;  // log weight at k = 0
  double total = 0.0;
  for (std::size_t k = 0; k <= kmax; ++k) {
    if (k > 0) lw += std::log(lambda) - std::log(static_cast<double>(k));
    w.push_back(std::exp(lw));
    total += w.back();
    if (total >= 1.0 - 1e-16 && static_cast<double>(k) >= lambda) break;
  }
  for (double& v : w) v /= total;
  return w;
}

struct InnerMoments {
  // E beta(Z_n)^h for requested h, E log beta(Z_n), Var log beta(Z_n)
  double elog = 0.0;
  double vlog = 0.0;
};

// exact conditional moments for beta = Power(q) given the Poisson weights
double zn_power_moment(int d, double q, double h, double s, const std::vector<double>& w) {
  const double qh = q * h;
  require(0.5 * d + qh > 0.0, "sequence: moment condition d/2 + q h > 0 violated");
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k)
    acc += w[k] * std::exp(qh * std::log(2.0) +
                           log_pochhammer(0.5 * d + static_cast<double>(k), qh));
  return std::pow(s, qh) * acc;
}

InnerMoments zn_log_moments(int d, double q, double s, const std::vector<double>& w) {
  double m1 = 0.0, m2 = 0.0, tri = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double p = digamma(0.5 * d + static_cast<double>(k));
    m1 += w[k] * p;
    m2 += w[k] * p * p;
    tri += w[k] * trigamma(0.5 * d + static_cast<double>(k));
  }
  InnerMoments im;
  im.elog = q * (std::log(2.0 * s) + m1);
  im.vlog = q * q * (tri + std::max(0.0, m2 - m1 * m1));
  return im;
}

// minimized expected posterior second-stage loss u_n(y), exact inner
double u_n_exact(int d, double q, const SecondStageLoss& second, std::uint64_t n, double y) {
  const double nn = static_cast<double>(n);
  const double s = nn / (nn + 1.0);
  const std::vector<double> w = poisson_weights(0.5 * y / nn);
  switch (second.kind) {
    case SecondStageLoss::Kind::RhoM: {
      const double m = second.m;
      return m * zn_log_moments(d, q, s, w).elog + std::log(zn_power_moment(d, q, -m, s, w));
    }
    case SecondStageLoss::Kind::RhoA: {
      const double m = second.m;
      const double g1 = zn_power_moment(d, q, -m, s, w);
      const double g2 = zn_power_moment(d, q, -2.0 * m, s, w);
      return 1.0 - g1 * g1 / g2;
    }
    case SecondStageLoss::Kind::RhoB: {
      const double gp = zn_power_moment(d, q, 1.0, s, w);
      const double gm = zn_power_moment(d, q, -1.0, s, w);
      return 2.0 * (std::sqrt(gp * gm) - 1.0);
    }
    case SecondStageLoss::Kind::RhoC:
      return zn_log_moments(d, q, s, w).vlog;
    case SecondStageLoss::Kind::SquaredErrorW: {
      const double g1 = zn_power_moment(d, q, 1.0, s, w);
      return zn_power_moment(d, q, 2.0, s, w) - g1 * g1;
    }
  }
  throw std::logic_error("u_n_exact: unhandled second-stage loss");
}

// inner Monte Carlo fallback for a monotone-table beta
double u_n_mc(int d, const BetaTag& beta, const SecondStageLoss& second, std::uint64_t n,
              double y, Rng& rng, std::uint64_t inner) {
  const double nn = static_cast<double>(n);
  const double s = nn / (nn + 1.0);
  std::vector<double> b(inner);
  for (std::uint64_t j = 0; j < inner; ++j)
    b[j] = beta(s * specfun::sample_noncentral_chisq(rng, d, y / nn));
  const double m = second.m;
  auto mean_of = [&](auto&& f) {
    double acc = 0.0;
    for (double v : b) acc += f(v);
    return acc / static_cast<double>(inner);
  };
  switch (second.kind) {
    case SecondStageLoss::Kind::RhoM:
      return m * mean_of([](double v) { return std::log(v); }) +
             std::log(mean_of([m](double v) { return std::pow(v, -m); }));
    case SecondStageLoss::Kind::RhoA: {
      const double g1 = mean_of([m](double v) { return std::pow(v, -m); });
      const double g2 = mean_of([m](double v) { return std::pow(v, -2.0 * m); });
      return 1.0 - g1 * g1 / g2;
    }
    case SecondStageLoss::Kind::RhoB: {
      const double gp = mean_of([](double v) { return v; });
      const double gm = mean_of([](double v) { return 1.0 / v; });
      return 2.0 * (std::sqrt(gp * gm) - 1.0);
    }
    case SecondStageLoss::Kind::RhoC: {
      const double m1 = mean_of([](double v) { return std::log(v); });
      const double m2 = mean_of([](double v) { return std::log(v) * std::log(v); });
      return m2 - m1 * m1;
    }
    case SecondStageLoss::Kind::SquaredErrorW: {
      const double g1 = mean_of([](double v) { return v; });
      const double g2 = mean_of([](double v) { return v * v; });
      return g2 - g1 * g1;
    }
  }
  throw std::logic_error("u_n_mc: unhandled second-stage loss");
}

ConvergenceReport finish_report(std::vector<std::pair<std::uint64_t, double>> seq,
                                double target, double final_se,
                                const SequenceOptions& opt) {
  ConvergenceReport rep;
  rep.sequence = std::move(seq);
  rep.target = target;
  rep.final_se = final_se;
  rep.final_gap = std::abs(rep.sequence.back().second - target);
  rep.tolerance = opt.tolerance
                      ? *opt.tolerance
                      : std::max(1e-3 * std::abs(target), 3.0 * final_se);
  rep.converged = rep.final_gap <= rep.tolerance;
  return rep;
}

}  // namespace

double scaled_noncentral_moment(int d, double y, std::uint64_t n, double h) {
  require(d >= 1 && y >= 0.0 && n >= 1, "scaled_noncentral_moment: bad arguments");
  const double nn = static_cast<double>(n);
  return zn_power_moment(d, 1.0, h, nn / (nn + 1.0), poisson_weights(0.5 * y / nn));
}

ConvergenceReport normal_bayes_risk_sequence(int d, const BetaTag& beta,
                                             const SecondStageLoss& second, RngStream rng,
                                             const SequenceOptions& opt) {
  require(!opt.n_list.empty(), "sequence: n_list must be nonempty");
  for (std::size_t i = 1; i < opt.n_list.size(); ++i)
    require(opt.n_list[i] > opt.n_list[i - 1], "sequence: n_list must be increasing");
  const MinimaxSolution sol = estimators::normal_minimax(d, beta, second);

  // common random outer draws Y ~ chi2_d across all n
  const std::uint64_t outer = opt.outer_samples;
  std::vector<double> ys(outer);
  for (std::uint64_t i = 0; i < outer; ++i) {
    Rng r(rng, i);
    ys[i] = specfun::sample_chisq(r, d);
  }

  std::vector<std::pair<std::uint64_t, double>> seq;
  double final_se = 0.0;
  for (std::uint64_t n : opt.n_list) {
    double s = 0.0, s2 = 0.0;
    for (std::uint64_t i = 0; i < outer; ++i) {
      double u;
      if (beta.is_power()) {
        u = u_n_exact(d, beta.exponent(), second, n, ys[i]);
      } else {
        Rng r(rng, (n << 20) + i);  // fresh substream per (n, outer index)
        u = u_n_mc(d, beta, second, n, ys[i], r, opt.inner_samples);
      }
      s += u;
      s2 += u * u;
    }
    const double mean = s / static_cast<double>(outer);
    const double var =
        std::max(0.0, (s2 - outer * mean * mean) / (static_cast<double>(outer) - 1.0));
    final_se = std::sqrt(var / static_cast<double>(outer));
    seq.emplace_back(n, mean);
  }
  return finish_report(std::move(seq), sol.risk_bar, final_se, opt);
}

ConvergenceReport gamma_bayes_risk_sequence(double alpha, double m,
                                            const SequenceOptions& opt) {
  require(m != 0.0 && alpha > 2.0 * m, "gamma_bayes_risk_sequence: need alpha > 2m");
  require(!opt.n_list.empty(), "sequence: n_list must be nonempty");
  const MinimaxSolution sol = estimators::gamma_minimax(alpha, m);
  const double k = std::exp(log_pochhammer(alpha - m, m) / m);

  std::vector<std::pair<std::uint64_t, double>> seq;
  for (std::uint64_t n : opt.n_list) {
    const double a = 1.0 / static_cast<double>(n);
    const double s = alpha + a;
    const double lp1 = log_pochhammer(s - m, m);            // ln G(s)/G(s-m)
    const double lp2 = log_pochhammer(s - 2.0 * m, 2.0 * m);
    const double cn = std::exp(-lp2) - std::exp(-2.0 * lp1);
    const double dn = std::exp(-lp1) * (digamma(s - m) - digamma(s));
    // E Y^h = k^h (alpha)_{-h} / (alpha + a)_{-h}, h < alpha
    auto ey = [&](double h) {
      return std::pow(k, h) *
             std::exp(log_pochhammer(alpha, -h) - log_pochhammer(alpha + a, -h));
    };
    const double rn = cn * ey(2.0 * m) + m * m * trigamma(s) + 2.0 * m * dn * ey(m);
    seq.emplace_back(n, rn);
  }
  return finish_report(std::move(seq), sol.risk_bar, 0.0, opt);
}

ConvergenceReport rukhin_bayes_risk_sequence(const RukhinSolution& sol,
                                             const RukhinLoss& rukhin,
                                             const SequenceOptions& opt) {
  require(!opt.n_list.empty(), "sequence: n_list must be nonempty");
  std::vector<std::pair<std::uint64_t, double>> seq;
  for (std::uint64_t n : opt.n_list) {
    const double cn = sol.c_n(n);
    const double rn = cn;  // integrated first-stage Bayes risk of the Bayes pair
    seq.emplace_back(n, rukhin.hprime(cn) * rn - cn * rukhin.hprime(cn) + rukhin.h(cn));
  }
  return finish_report(std::move(seq), sol.risk_bar, 0.0, opt);
}

std::vector<UnbiasednessRow> unbiasedness_check(const ModelSpec& model,
                                                const EstimatorPair& pair,
                                                const FirstStageLoss& first,
                                                const std::vector<Parameter>& theta_grid,
                                                RngStream rng, std::uint64_t n) {
  require(!theta_grid.empty(), "unbiasedness_check: empty theta grid");
  require(n >= 100, "unbiasedness_check: need n >= 100");
  std::vector<UnbiasednessRow> rows;
  rows.reserve(theta_grid.size());
  std::uint64_t grid_index = 0;
  for (const Parameter& theta : theta_grid) {
    models::check_parameter(model, theta);
    RngStream sub = rng;
    sub.stream_id = rng.stream_id * 1000003 + grid_index++;
    double sum_lhat = 0.0, sum_loss = 0.0;
    const Accum diff = accumulate_samples(n, [&](std::uint64_t i) {
      Rng r(sub, i);
      const Observation x = sample_model_one(model, theta, r);
      return pair.l_hat(x) - losses::eval_first(first, theta, pair.gamma_hat(x));
    });
    // second pass for the component means (cheap relative to sampling noise
    // bookkeeping; reuses the identical substreams)
    const Accum lh = accumulate_samples(n, [&](std::uint64_t i) {
      Rng r(sub, i);
      const Observation x = sample_model_one(model, theta, r);
      return pair.l_hat(x);
    });
    sum_lhat = lh.sum;
    sum_loss = sum_lhat - diff.sum;

    UnbiasednessRow row;
    row.theta = theta;
    row.mean_lhat = sum_lhat / static_cast<double>(n);
    row.mean_loss = sum_loss / static_cast<double>(n);
    row.gap = diff.sum / static_cast<double>(n);
    const double var = std::max(
        0.0, (diff.sumsq - n * row.gap * row.gap) / (static_cast<double>(n) - 1.0));
    row.joint_se = std::sqrt(var / static_cast<double>(n));
    row.biased = std::abs(row.gap) > 4.0 * row.joint_se;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace lossrisk::risk
