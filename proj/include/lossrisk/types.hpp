#pragma once

#include <variant>
#include <vector>

namespace lossrisk {

using Vec = std::vector<double>;

// sufficient pair (xbar, S) for the d-variate normal sample model
struct SuffPair {
  Vec xbar;
  double s = 0.0;
};

// (location vector, positive scale) parameter, e.g. (mu, sigma)
struct LocScale {
  Vec loc;
  double scale = 1.0;
};

// One observation from a sampling model: a count, a positive real, a count
// vector, a real vector, or a sufficient pair.
using Observation = std::variant<long long, double, std::vector<long long>, Vec, SuffPair>;

// A model parameter: scalar, vector, or location-scale pair.
using Parameter = std::variant<double, Vec, LocScale>;

// A first-stage estimate.
using Estimate = std::variant<double, Vec>;

}  // namespace lossrisk
