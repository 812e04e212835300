#pragma once

#include <functional>

#include "bamlab/model.hpp"

namespace bamlab {

// A single-stage direct mechanism as allocation/payment closures over the
// stage's valuation vectors. All constructors here return mechanisms that
// are single-shot IC and IR over the full support.
struct StageMechanism {
  std::function<Vec(const Vec&)> alloc;
  std::function<double(const Vec&)> pay;
  std::string name;
  double price = 0.0;  // posted/bundle price when the mechanism is one
};

// Revenue-optimal posted price over the support (one-item discrete stages:
// this is the optimal stage mechanism). Ties break toward the lowest price.
StageMechanism myerson_stage(const StageDistribution& dist);

// Everything free: alloc = 1, pay = 0.
StageMechanism give_for_free(const StageDistribution& dist);

// Posted price for the whole stage bundle at price r.
StageMechanism bundle_posted_price(const StageDistribution& dist, double r);

struct GrandBundlePrice {
  double theta = 0.0;
  double price = 0.0;
};

// The price r(theta) at which the buyer's expected bundle utility
// E[(1.v - r) 1[1.v >= r]] equals theta. Discrete: invert the piecewise
// linear utility curve, returning the largest r on flat pieces.
// Equal-revenue: r = v_max e^{-theta} while r >= 1, then r = Val - theta.
GrandBundlePrice bundle_price_for_utility(const StageDistribution& dist, double theta);

// Sell the grand bundle at r(theta): expected buyer utility is exactly theta.
StageMechanism grand_bundle_mech(const StageDistribution& dist, double theta);

// Exact expectations over a discrete stage.
double stage_revenue(const StageMechanism& m, const StageDistribution& dist);
double stage_utility(const StageMechanism& m, const StageDistribution& dist);

// Default per-stage optimal mechanisms for a whole instance: myerson_stage
// for one-item discrete stages, posted price 1 for equal-revenue stages
// (every price in [1, v_max] earns 1; price 1 maximizes buyer utility).
// Multi-item stages have no known optimum: callers must supply their own.
std::vector<StageMechanism> default_stage_mechs(const Instance& inst);

}  // namespace bamlab
