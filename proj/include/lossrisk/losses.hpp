#pragma once

#include <functional>
#include <string>

#include "lossrisk/types.hpp"

namespace lossrisk::losses {

// Monotone map applied to the normalized squared error, restricted to a
// tagged family so closed-form and Monte-Carlo paths can share it.
struct BetaTag {
  enum class Kind { Identity, Power, Table };
  Kind kind = Kind::Identity;
  double q = 1.0;                                   // Power exponent
  std::function<double(double)> table;              // user-supplied monotone map

  static BetaTag identity();
  static BetaTag power(double q);
  static BetaTag monotone(std::function<double(double)> f);

  double operator()(double t) const;
  bool is_power() const { return kind != Kind::Table; }
  double exponent() const { return kind == Kind::Identity ? 1.0 : q; }
};

// ---------------------------------------------------------------------------
// First-stage losses L(theta, gamma_hat)

struct FirstStageLoss {
  enum class Kind {
    SquaredError,          // ||g - theta||^2
    ScaledSquaredError,    // ||g - theta||^2 / sigma2
    BetaComposed,          // beta(||g - theta||^2 / sigma2)
    WeightedSquaredError,  // w(theta) (g - theta)^2, scalar theta
    PoissonNormalized,     // (g - theta)^2 / theta
    MultiPoissonNormalized,// sum_i (g_i - theta_i)^2 / theta_i
    NBNormalized,          // (g - theta)^2 / (theta (theta + r))
    EntropyScale,          // rho_m(g / theta)
    LocationScale,         // beta(factor * ||g - theta_1||^2 / theta_2^2)
  };

  Kind kind = Kind::SquaredError;
  double sigma2 = 1.0;   // ScaledSquaredError / BetaComposed
  double r = 1.0;        // NBNormalized
  double m = -1.0;       // EntropyScale
  double factor = 1.0;   // LocationScale multiplier (n for the studentized case)
  BetaTag beta;          // BetaComposed / LocationScale
  std::function<double(double)> weight;  // WeightedSquaredError

  static FirstStageLoss squared_error();
  static FirstStageLoss scaled_squared_error(double sigma2);
  static FirstStageLoss beta_composed(BetaTag beta, double sigma2);
  static FirstStageLoss weighted_squared_error(std::function<double(double)> w);
  static FirstStageLoss poisson_normalized();
  static FirstStageLoss multipoisson_normalized();
  static FirstStageLoss nb_normalized(double r);
  static FirstStageLoss entropy_scale(double m);
  static FirstStageLoss location_scale(BetaTag beta = BetaTag::identity(),
                                       double factor = 1.0);
};

double eval_first(const FirstStageLoss& loss, const Parameter& theta,
                  const Estimate& gamma_hat);

// ---------------------------------------------------------------------------
// Second-stage losses W(L, Lhat), with t = Lhat / L for the rho variants

struct SecondStageLoss {
  enum class Kind { SquaredErrorW, RhoA, RhoM, RhoB, RhoC };
  Kind kind = Kind::SquaredErrorW;
  double m = 1.0;  // RhoA / RhoM exponent, m != 0

  static SecondStageLoss squared_error();
  static SecondStageLoss rho_a(double m);  // (t^m - 1)^2
  static SecondStageLoss rho_m(double m);  // t^m - m log t - 1
  static SecondStageLoss rho_b();          // t + 1/t - 2
  static SecondStageLoss rho_c();          // (log t)^2
  std::string name() const;
};

double eval_second(const SecondStageLoss& loss, double L, double Lhat);

// ---------------------------------------------------------------------------
// Rukhin joint losses W(theta, gamma_hat, Lhat) = h'(Lhat) L - h'(Lhat) Lhat + h(Lhat)

struct RukhinLoss {
  std::function<double(double)> h;       // increasing, concave on (0, inf)
  std::function<double(double)> hprime;  // derivative of h
  std::string tag = "sqrt2";

  static RukhinLoss sqrt2();  // h(t) = 2 sqrt(t)
  static RukhinLoss custom(std::function<double(double)> h,
                           std::function<double(double)> hprime, std::string tag);
};

double eval_rukhin(const RukhinLoss& loss, double L, double Lhat);

}  // namespace lossrisk::losses
