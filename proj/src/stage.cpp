#include "bamlab/stage.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace bamlab {

StageMechanism myerson_stage(const StageDistribution& dist) {
  if (!dist.is_discrete()) fail("UnsupportedContinuous", "myerson_stage needs a discrete stage");
  if (dist.items != 1)
    fail("UseProvidedStageMechanism", "no optimal stage mechanism is known for multi-item stages");
  double best_price = dist.support[0][0], best_rev = -1.0;
  for (int i = 0; i < dist.size(); ++i) {
    double price = dist.support[i][0];
    double sell = 0.0;
    for (int j = 0; j < dist.size(); ++j)
      if (dist.support[j][0] >= price) sell += dist.probs[j];
    double rev = price * sell;
    if (rev > best_rev + 1e-15) {  // ties keep the earlier (lower) price
      best_rev = rev;
      best_price = price;
    }
  }
  StageMechanism m = bundle_posted_price(dist, best_price);
  m.name = "myerson_posted_price";
  return m;
}

StageMechanism give_for_free(const StageDistribution& dist) {
  int k = dist.items;
  StageMechanism m;
  m.alloc = [k](const Vec&) { return Vec(k, 1.0); };
  m.pay = [](const Vec&) { return 0.0; };
  m.name = "give_for_free";
  return m;
}

StageMechanism bundle_posted_price(const StageDistribution& dist, double r) {
  int k = dist.items;
  StageMechanism m;
  // Sale condition is 1.v >= r with a hair of slack toward selling, so a
  // price that lands exactly on a support bundle value keeps that buyer in.
  double slack = 1e-12 * std::max(1.0, r);
  m.alloc = [k, r, slack](const Vec& v) { return Vec(k, sum(v) >= r - slack ? 1.0 : 0.0); };
  m.pay = [r, slack](const Vec& v) { return sum(v) >= r - slack ? r : 0.0; };
  m.name = "bundle_posted_price";
  m.price = r;
  return m;
}

GrandBundlePrice bundle_price_for_utility(const StageDistribution& dist, double theta) {
  double val = dist.val();
  double tol = 1e-12 * std::max(1.0, val);
  if (theta < -tol || theta > val + tol)
    fail("ThetaOutOfRange",
         "theta " + std::to_string(theta) + " outside [0, " + std::to_string(val) + "]");
  theta = std::clamp(theta, 0.0, val);

  if (!dist.is_discrete()) {
    // E[(v - r)^+] = ln(v_max / r) for r in [1, v_max]; below r = 1 every
    // buyer purchases and utility is Val - r.
    double r = theta <= std::log(dist.v_max) ? dist.v_max * std::exp(-theta) : val - theta;
    return {theta, r};
  }

  // Aggregate probabilities of equal bundle values, sorted ascending.
  std::map<double, double> mass;
  for (int i = 0; i < dist.size(); ++i) mass[dist.bundle_value(i)] += dist.probs[i];
  std::vector<double> w, pr;
  for (auto& [value, p] : mass) {
    w.push_back(value);
    pr.push_back(p);
  }
  auto utility_at = [&](double r) {
    double u = 0.0;
    for (size_t i = 0; i < w.size(); ++i)
      if (w[i] >= r) u += pr[i] * (w[i] - r);
    return u;
  };
  // Candidate breakpoints of the (continuous, weakly decreasing, piecewise
  // linear) utility curve, largest first; pick the largest r achieving theta.
  std::vector<double> grid = w;
  grid.push_back(0.0);
  std::sort(grid.begin(), grid.end());
  double r_hi = grid.back(), u_hi = utility_at(r_hi);  // = 0 at the top value
  if (theta <= u_hi + tol) return {theta, r_hi};
  for (int j = static_cast<int>(grid.size()) - 2; j >= 0; --j) {
    double r_lo = grid[j], u_lo = utility_at(r_lo);
    if (u_lo + tol >= theta) {
      if (std::abs(u_lo - theta) <= tol) return {theta, r_lo};
      // Invert the linear piece between (r_lo, u_lo) and (r_hi, u_hi).
      double r = r_lo + (u_lo - theta) / (u_lo - u_hi) * (r_hi - r_lo);
      return {theta, r};
    }
    r_hi = r_lo;
    u_hi = u_lo;
  }
  return {theta, 0.0};  // theta == Val: give the bundle away
}

StageMechanism grand_bundle_mech(const StageDistribution& dist, double theta) {
  GrandBundlePrice gp = bundle_price_for_utility(dist, theta);
  StageMechanism m = bundle_posted_price(dist, gp.price);
  m.name = "grand_bundle(theta=" + std::to_string(theta) + ")";
  return m;
}

double stage_revenue(const StageMechanism& m, const StageDistribution& dist) {
  if (!dist.is_discrete()) fail("UnsupportedContinuous", "stage_revenue needs a discrete stage");
  double r = 0.0;
  for (int i = 0; i < dist.size(); ++i) r += dist.probs[i] * m.pay(dist.support[i]);
  return r;
}

double stage_utility(const StageMechanism& m, const StageDistribution& dist) {
  if (!dist.is_discrete()) fail("UnsupportedContinuous", "stage_utility needs a discrete stage");
  double u = 0.0;
  for (int i = 0; i < dist.size(); ++i) {
    const Vec& v = dist.support[i];
    u += dist.probs[i] * (dot(m.alloc(v), v) - m.pay(v));
  }
  return u;
}

std::vector<StageMechanism> default_stage_mechs(const Instance& inst) {
  std::vector<StageMechanism> out;
  for (const auto& s : inst.stages) {
    if (!s.is_discrete())
      out.push_back(bundle_posted_price(s, 1.0));
    else if (s.items == 1)
      out.push_back(myerson_stage(s));
    else
      fail("UseProvidedStageMechanism",
           "multi-item stage: supply stage mechanisms explicitly");
  }
  return out;
}

}  // namespace bamlab
