// lossrisk: batch experiment runner for the loss-estimation catalog.
//
// Commands:
//   estimate  print (gamma_hat(x), l_hat(x)) for a model/prior pair
//   risk      Monte-Carlo frequentist risk over a theta grid -> CSV
//   minimax   least-favourable-sequence convergence report -> JSON
//   rukhin    joint-risk rows for the Rukhin catalog solutions -> CSV
//   verify    closed-form catalog vs numerical oracle, nonzero exit on failure

#include <CLI11.hpp>
#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "lossrisk/estimators.hpp"
#include "lossrisk/oracle.hpp"
#include "lossrisk/risk.hpp"

using nlohmann::json;
using namespace lossrisk;

namespace {

struct ExperimentConfig {
  std::string command;
  std::string model;
  std::string prior;
  std::string second = "squared-error";
  std::string pair = "bayes";  // bayes | minimax
  std::optional<std::string> x;
  std::vector<double> theta_grid;
  std::vector<std::uint64_t> n_list;
  std::optional<std::uint64_t> seed;
  std::uint64_t n_samples = 100000;
  std::string out;
  int d = 1;
  int n = 2;
  double sigma2 = 1.0, tau2 = 0.0, mu = 0.0;
  double alpha = 1.0, r = 1.0;
  double a = 0.0, b = 0.0, c = 1.0, xi = 0.0;
  double m = -1.0;
  double q = 1.0;
  bool tau2_set = false;
  bool inject_error = false;  // verify-only test hook
};

[[noreturn]] void config_error(const std::string& field, const std::string& why) {
  std::cerr << "config error: field '" << field << "': " << why << "\n";
  std::exit(2);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("config", "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    config_error("config", std::string("invalid JSON: ") + e.what());
  }
  const auto get = [&](const char* key, auto& dst) {
    if (j.contains(key)) {
      try {
        dst = j.at(key).get<std::decay_t<decltype(dst)>>();
      } catch (const std::exception&) {
        config_error(key, "wrong type");
      }
    }
  };
  get("command", cfg.command);
  get("model", cfg.model);
  get("prior", cfg.prior);
  get("second", cfg.second);
  get("pair", cfg.pair);
  get("theta_grid", cfg.theta_grid);
  get("n_list", cfg.n_list);
  get("n_samples", cfg.n_samples);
  get("out", cfg.out);
  get("d", cfg.d);
  get("n", cfg.n);
  get("sigma2", cfg.sigma2);
  get("mu", cfg.mu);
  get("alpha", cfg.alpha);
  get("r", cfg.r);
  get("a", cfg.a);
  get("b", cfg.b);
  get("c", cfg.c);
  get("xi", cfg.xi);
  get("m", cfg.m);
  get("q", cfg.q);
  if (j.contains("x")) cfg.x = j.at("x").is_string() ? j.at("x").get<std::string>()
                                                     : j.at("x").dump();
  if (j.contains("seed")) {
    std::uint64_t s = 0;
    get("seed", s);
    cfg.seed = s;
  }
  if (j.contains("tau2")) {
    get("tau2", cfg.tau2);
    cfg.tau2_set = true;
  }
}

losses::SecondStageLoss parse_second(const ExperimentConfig& cfg) {
  if (cfg.second == "squared-error") return losses::SecondStageLoss::squared_error();
  if (cfg.second == "rho-a") return losses::SecondStageLoss::rho_a(cfg.m);
  if (cfg.second == "rho-m") return losses::SecondStageLoss::rho_m(cfg.m);
  if (cfg.second == "rho-b") return losses::SecondStageLoss::rho_b();
  if (cfg.second == "rho-c") return losses::SecondStageLoss::rho_c();
  config_error("second", "unknown tag '" + cfg.second + "'");
}

losses::BetaTag parse_beta(const ExperimentConfig& cfg) {
  return cfg.q == 1.0 ? losses::BetaTag::identity() : losses::BetaTag::power(cfg.q);
}

struct Problem {
  models::ModelSpec model;
  estimators::EstimatorPair pair;
  losses::FirstStageLoss first;
};

// Builds the (model, catalog pair, first-stage loss) triple for the risk and
// estimate commands.
Problem build_problem(const ExperimentConfig& cfg) {
  using losses::FirstStageLoss;
  const auto second = parse_second(cfg);
  if (cfg.model == "poisson") {
    models::ModelSpec m = models::ModelSpec::poisson();
    double a = cfg.a, b = cfg.b;
    if (cfg.prior == "uniform") a = 1.0, b = 0.0;
    return {m, estimators::poisson_pair(a, b), FirstStageLoss::poisson_normalized()};
  }
  if (cfg.model == "negbinomial") {
    models::ModelSpec m = models::ModelSpec::neg_binomial(cfg.r);
    double a = cfg.a, b = cfg.b;
    if (cfg.prior == "betaii-improper") a = 1.0, b = 0.0;
    return {m, estimators::negbinomial_pair(cfg.r, a, b),
            FirstStageLoss::nb_normalized(cfg.r)};
  }
  if (cfg.model == "gamma") {
    models::ModelSpec m = models::ModelSpec::gamma(cfg.alpha);
    double a = cfg.a, b = cfg.b;
    if (cfg.prior == "inverse-scale") a = 0.0, b = 0.0;
    if (cfg.pair == "minimax")
      return {m, estimators::gamma_minimax(cfg.alpha, cfg.m).pair,
              FirstStageLoss::entropy_scale(cfg.m)};
    return {m, estimators::gamma_pair(cfg.alpha, a, b, cfg.m),
            FirstStageLoss::entropy_scale(cfg.m)};
  }
  if (cfg.model == "multipoisson") {
    models::ModelSpec m = models::ModelSpec::multi_poisson(cfg.d);
    return {m, estimators::multipoisson_pair(cfg.d, cfg.a, cfg.b),
            FirstStageLoss::multipoisson_normalized()};
  }
  if (cfg.model == "explocation") {
    models::ModelSpec m = models::ModelSpec::exp_location(cfg.n);
    return {m, estimators::explocation_pair(cfg.n, cfg.a),
            FirstStageLoss::entropy_scale(-1.0)};
  }
  if (cfg.model == "normal") {
    models::ModelSpec m = models::ModelSpec::normal_known_var(cfg.d, cfg.sigma2);
    if (cfg.pair == "minimax") {
      return {m, estimators::normal_minimax(cfg.d, parse_beta(cfg), second).pair,
              FirstStageLoss::beta_composed(parse_beta(cfg), cfg.sigma2)};
    }
    std::optional<double> tau2;
    if (cfg.prior != "uniform") {
      if (!cfg.tau2_set) config_error("tau2", "required for the conjugate normal prior");
      tau2 = cfg.tau2;
    }
    const Vec mu(cfg.d, cfg.mu);
    return {m, estimators::normal_conjugate_pair(cfg.d, cfg.sigma2, mu, tau2, second),
            FirstStageLoss::squared_error()};
  }
  if (cfg.model == "normal-unknown") {
    models::ModelSpec m = models::ModelSpec::normal_unknown_var(cfg.d, cfg.n);
    const Vec xi(cfg.d, cfg.xi);
    return {m, estimators::normal_unknownvar_pair(cfg.d, cfg.n, xi, cfg.c, cfg.a, cfg.b),
            FirstStageLoss::location_scale()};
  }
  config_error("model", "unknown tag '" + cfg.model + "'");
}

Observation parse_observation(const ExperimentConfig& cfg, const models::ModelSpec& model) {
  if (!cfg.x) config_error("x", "required for the estimate command");
  std::vector<double> vals;
  std::string tok;
  std::stringstream ss(*cfg.x);
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) vals.push_back(std::stod(tok));
  }
  if (vals.empty()) config_error("x", "could not parse any value");
  switch (model.kind) {
    case models::ModelSpec::Kind::Poisson:
    case models::ModelSpec::Kind::NegBinomial:
      return Observation{static_cast<long long>(std::llround(vals[0]))};
    case models::ModelSpec::Kind::Gamma:
      return Observation{vals[0]};
    case models::ModelSpec::Kind::MultiPoisson: {
      std::vector<long long> c;
      for (double v : vals) c.push_back(static_cast<long long>(std::llround(v)));
      return Observation{std::move(c)};
    }
    case models::ModelSpec::Kind::ExpLocation:
    case models::ModelSpec::Kind::NormalKnownVar:
      return Observation{vals};
    case models::ModelSpec::Kind::NormalUnknownVar: {
      // xbar components followed by S
      if (vals.size() < 2) config_error("x", "need xbar components plus S");
      SuffPair sp;
      sp.xbar.assign(vals.begin(), vals.end() - 1);
      sp.s = vals.back();
      return Observation{sp};
    }
  }
  config_error("x", "unsupported model");
}

Parameter theta_from_scalar(const models::ModelSpec& model, double t) {
  switch (model.kind) {
    case models::ModelSpec::Kind::NormalKnownVar:
      return Parameter{Vec(model.d, t)};
    case models::ModelSpec::Kind::MultiPoisson:
      return Parameter{Vec(model.d, t)};
    case models::ModelSpec::Kind::NormalUnknownVar:
      return Parameter{LocScale{Vec(model.d, t), 1.0}};
    default:
      return Parameter{t};
  }
}

std::string theta_to_string(const Parameter& theta) {
  if (const auto* s = std::get_if<double>(&theta)) return fmt(*s);
  std::string out;
  if (const auto* v = std::get_if<Vec>(&theta)) {
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (i) out += ';';
      out += fmt((*v)[i]);
    }
    return out;
  }
  const auto& ls = std::get<LocScale>(theta);
  for (std::size_t i = 0; i < ls.loc.size(); ++i) {
    if (i) out += ';';
    out += fmt(ls.loc[i]);
  }
  out += ';';
  out += fmt(ls.scale);
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) config_error("out", "cannot open " + path);
  f << content;
}

specfun::RngStream require_seed(const ExperimentConfig& cfg) {
  if (!cfg.seed) config_error("seed", "required for stochastic commands");
  return specfun::RngStream{*cfg.seed, 0};
}

int cmd_estimate(const ExperimentConfig& cfg) {
  const Problem prob = build_problem(cfg);
  const Observation x = parse_observation(cfg, prob.model);
  const Estimate g = prob.pair.gamma_hat(x);
  std::string gs;
  if (const auto* s = std::get_if<double>(&g)) {
    gs = fmt(*s);
  } else {
    const auto& v = std::get<Vec>(g);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) gs += ';';
      gs += fmt(v[i]);
    }
  }
  std::cout << "gamma_hat = " << gs << "\n";
  std::cout << "l_hat = " << fmt(prob.pair.l_hat(x)) << "\n";
  return 0;
}

int cmd_risk(const ExperimentConfig& cfg) {
  if (cfg.theta_grid.empty()) config_error("theta_grid", "required for the risk command");
  const Problem prob = build_problem(cfg);
  const auto second = parse_second(cfg);
  specfun::RngStream rng = require_seed(cfg);
  std::string csv = "theta,mean,std_error,n_samples\n";
  std::uint64_t stream = 0;
  for (double t : cfg.theta_grid) {
    rng.stream_id = stream++;
    const Parameter theta = theta_from_scalar(prob.model, t);
    const auto est =
        risk::mc_risk(prob.model, theta, prob.pair, prob.first, second, rng, cfg.n_samples);
    csv += theta_to_string(theta) + "," + fmt(est.mean) + "," + fmt(est.std_error) + "," +
           std::to_string(est.n_samples) + "\n";
  }
  write_text(cfg.out, csv);
  return 0;
}

std::string report_to_json(const risk::ConvergenceReport& rep) {
  std::string out = "{\"sequence\":[";
  for (std::size_t i = 0; i < rep.sequence.size(); ++i) {
    if (i) out += ",";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "[%" PRIu64 ",%s]",
                  static_cast<std::uint64_t>(rep.sequence[i].first),
                  fmt(rep.sequence[i].second).c_str());
    out += buf;
  }
  out += "],\"target\":" + fmt(rep.target);
  out += ",\"final_gap\":" + fmt(rep.final_gap);
  out += ",\"converged\":";
  out += rep.converged ? "true" : "false";
  out += "}\n";
  return out;
}

int cmd_minimax(const ExperimentConfig& cfg) {
  risk::SequenceOptions opt;
  if (!cfg.n_list.empty()) opt.n_list = cfg.n_list;
  risk::ConvergenceReport rep;
  if (cfg.model == "gamma") {
    rep = risk::gamma_bayes_risk_sequence(cfg.alpha, cfg.m, opt);
  } else if (cfg.model == "normal") {
    rep = risk::normal_bayes_risk_sequence(cfg.d, parse_beta(cfg), parse_second(cfg),
                                           require_seed(cfg), opt);
  } else {
    config_error("model", "minimax supports 'normal' and 'gamma'");
  }
  write_text(cfg.out, report_to_json(rep));
  return 0;
}

int cmd_rukhin(const ExperimentConfig& cfg) {
  if (cfg.theta_grid.empty()) config_error("theta_grid", "required for the rukhin command");
  const auto h = losses::RukhinLoss::sqrt2();
  models::ModelSpec model = models::ModelSpec::poisson();
  if (cfg.model == "normal")
    model = models::ModelSpec::normal_known_var(cfg.d, cfg.sigma2);
  else if (cfg.model == "gamma")
    model = models::ModelSpec::gamma(cfg.alpha);
  else if (cfg.model == "multipoisson")
    model = models::ModelSpec::multi_poisson(cfg.d);
  else if (cfg.model == "negbinomial")
    model = models::ModelSpec::neg_binomial(cfg.r);
  else
    config_error("model", "rukhin supports normal, gamma, multipoisson, negbinomial");

  const auto sol = estimators::rukhin_solution(model, h, cfg.m);
  losses::FirstStageLoss first = losses::FirstStageLoss::scaled_squared_error(cfg.sigma2);
  if (cfg.model == "gamma") first = losses::FirstStageLoss::entropy_scale(cfg.m);
  if (cfg.model == "multipoisson") first = losses::FirstStageLoss::multipoisson_normalized();
  if (cfg.model == "negbinomial") first = losses::FirstStageLoss::nb_normalized(cfg.r);

  specfun::RngStream rng = require_seed(cfg);
  std::string csv = "theta,mean,std_error,n_samples\n";
  std::uint64_t stream = 0;
  for (double t : cfg.theta_grid) {
    rng.stream_id = stream++;
    const Parameter theta = theta_from_scalar(model, t);
    const auto est =
        risk::mc_rukhin_risk(model, theta, sol.pair, first, h, rng, cfg.n_samples);
    csv += theta_to_string(theta) + "," + fmt(est.mean) + "," + fmt(est.std_error) + "," +
           std::to_string(est.n_samples) + "\n";
  }
  write_text(cfg.out, csv);
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg) {
  const specfun::RngStream rng = require_seed(cfg);
  const double corrupt = cfg.inject_error ? 1e-3 : 0.0;
  int failures = 0, total = 0;
  const auto report = [&](const std::string& name, double closed, double reference,
                          double tol) {
    ++total;
    const bool ok = std::abs(closed - reference) <= tol;
    if (!ok) ++failures;
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << ": catalog=" << fmt(closed)
              << " oracle=" << fmt(reference) << " tol=" << fmt(tol) << "\n";
  };

  using losses::FirstStageLoss;
  using losses::SecondStageLoss;
  const oracle::QuadratureSpec quad;

  {
    const auto pair = estimators::poisson_pair(3.0, 1.0);
    const double closed = *pair.l_hat_constant + corrupt;
    const double orc = oracle::oracle_bayes_loss_estimate(
        models::ModelSpec::poisson(), models::PriorSpec::gamma(3.0, 1.0), Observation{4LL},
        FirstStageLoss::poisson_normalized(), SecondStageLoss::squared_error(), quad);
    report("poisson a=3 b=1 x=4", closed, orc, 1e-6 * std::abs(orc));
  }
  {
    const auto pair = estimators::negbinomial_pair(2.0, 2.0, 1.0);
    const double closed = *pair.l_hat_constant + corrupt;
    const double orc = oracle::oracle_bayes_loss_estimate(
        models::ModelSpec::neg_binomial(2.0), models::PriorSpec::beta_ii(2.0, 1.0, 2.0),
        Observation{5LL}, FirstStageLoss::nb_normalized(2.0),
        SecondStageLoss::squared_error(), quad);
    report("negbinomial r=2 a=2 b=1 x=5", closed, orc, 1e-6 * std::abs(orc));
  }
  {
    const auto pair = estimators::gamma_pair(3.0, 0.0, 0.0, 1.0);
    const double closed = *pair.l_hat_constant + corrupt;
    const double orc = oracle::oracle_bayes_loss_estimate(
        models::ModelSpec::gamma(3.0), models::PriorSpec::inverse_scale(), Observation{2.0},
        FirstStageLoss::entropy_scale(1.0), SecondStageLoss::squared_error(), quad);
    report("gamma alpha=3 improper m=1 x=2", closed, orc, 1e-6 * std::abs(orc));
  }
  {
    const auto pair = estimators::explocation_pair(4, 2.0);
    const double closed = *pair.l_hat_constant + corrupt;
    const double orc = oracle::oracle_bayes_loss_estimate(
        models::ModelSpec::exp_location(4), models::PriorSpec::gamma(2.0, 4.0),
        Observation{Vec{3.0, 2.5, 4.0, 2.9}}, FirstStageLoss::entropy_scale(-1.0),
        SecondStageLoss::squared_error(), quad);
    report("explocation n=4 a=2", closed, orc, 1e-6 * std::abs(orc));
  }
  // Monte-Carlo path for a multivariate case
  {
    const auto second = SecondStageLoss::rho_c();
    const auto pair =
        estimators::normal_conjugate_pair(5, 1.0, Vec(5, 0.0), std::nullopt, second);
    const double closed = *pair.l_hat_constant + corrupt;
    const auto samples = estimators::posterior_loss_sampler(
        models::ModelSpec::normal_known_var(5, 1.0), models::PriorSpec::normal_uniform(),
        Observation{Vec{0.4, -1.0, 2.0, 0.0, 1.1}}, FirstStageLoss::squared_error(), rng,
        400000);
    const auto orc = oracle::oracle_bayes_loss_estimate_mc(samples, second);
    report("normal d=5 uniform rho_C (MC)", closed, orc.estimate,
           std::max(4.0 * orc.std_error, 1e-4));
  }

  std::cout << (failures == 0 ? "PASS" : "FAIL") << ": " << (total - failures) << "/" << total
            << " catalog values verified\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loss-estimation catalog, risk engine, and oracles"};
  app.require_subcommand(0);

  std::string command, config_path;
  ExperimentConfig cfg;

  app.add_option("command", command, "estimate | risk | minimax | rukhin | verify")
      ->required();
  app.add_option("--config", config_path, "JSON config file; flags override its fields");
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::optional<std::string> out, model, prior, second, pair_kind, xval;
  std::optional<int> dopt, nopt;
  std::optional<double> sigma2, tau2, mu, alpha, r, a, b, c, xi, m, q;
  std::vector<double> theta_grid;
  std::vector<std::uint64_t> n_list;
  app.add_option("--seed", seed, "RNG seed (required for stochastic commands)");
  app.add_option("--samples", samples, "Monte-Carlo sample count");
  app.add_option("--out", out, "output path (stdout when omitted)");
  app.add_option("--model", model, "model tag");
  app.add_option("--prior", prior, "prior tag");
  app.add_option("--second", second, "second-stage loss tag");
  app.add_option("--pair", pair_kind, "bayes | minimax");
  app.add_option("--x", xval, "observation (comma-separated for vectors)");
  app.add_option("--theta-grid", theta_grid, "theta grid values")->delimiter(',');
  app.add_option("--n-list", n_list, "prior-sequence indices")->delimiter(',');
  app.add_option("--d", dopt, "dimension");
  app.add_option("--n", nopt, "sample count (models with replicates)");
  app.add_option("--sigma2", sigma2, "known variance");
  app.add_option("--tau2", tau2, "prior variance");
  app.add_option("--mu", mu, "prior mean (replicated over coordinates)");
  app.add_option("--alpha", alpha, "gamma model shape");
  app.add_option("--r", r, "negative binomial r");
  app.add_option("--a", a, "prior hyperparameter a");
  app.add_option("--b", b, "prior hyperparameter b");
  app.add_option("--c", c, "normal-gamma precision multiplier");
  app.add_option("--xi", xi, "normal-gamma prior mean (replicated)");
  app.add_option("--m", m, "second-stage / entropy exponent");
  app.add_option("--q", q, "first-stage power exponent (1 = identity)");
  bool inject = false;
  app.add_flag("--inject-error", inject)->group("");  // hidden test hook

  CLI11_PARSE(app, argc, argv);

  if (!config_path.empty()) load_config_file(cfg, config_path);
  cfg.command = command;
  if (seed) cfg.seed = *seed;
  if (samples) cfg.n_samples = *samples;
  if (out) cfg.out = *out;
  if (model) cfg.model = *model;
  if (prior) cfg.prior = *prior;
  if (second) cfg.second = *second;
  if (pair_kind) cfg.pair = *pair_kind;
  if (xval) cfg.x = *xval;
  if (!theta_grid.empty()) cfg.theta_grid = theta_grid;
  if (!n_list.empty()) cfg.n_list = n_list;
  if (dopt) cfg.d = *dopt;
  if (nopt) cfg.n = *nopt;
  if (sigma2) cfg.sigma2 = *sigma2;
  if (tau2) {
    cfg.tau2 = *tau2;
    cfg.tau2_set = true;
  }
  if (mu) cfg.mu = *mu;
  if (alpha) cfg.alpha = *alpha;
  if (r) cfg.r = *r;
  if (a) cfg.a = *a;
  if (b) cfg.b = *b;
  if (c) cfg.c = *c;
  if (xi) cfg.xi = *xi;
  if (m) cfg.m = *m;
  if (q) cfg.q = *q;
  cfg.inject_error = inject;

  try {
    if (cfg.command == "estimate") return cmd_estimate(cfg);
    if (cfg.command == "risk") return cmd_risk(cfg);
    if (cfg.command == "minimax") return cmd_minimax(cfg);
    if (cfg.command == "rukhin") return cmd_rukhin(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
    config_error("command", "unknown command '" + cfg.command + "'");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
