#include "bamlab/approx.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace bamlab {

namespace {

Vec stage_vals(const Instance& inst) {
  Vec vals(inst.T());
  for (int t = 0; t < inst.T(); ++t) vals[t] = inst.stages[t].val();
  return vals;
}

// Grand-bundle sale at the price whose expected buyer utility is theta.
struct BundleSale {
  double price = 0.0;
  bool sold = false;
};

BundleSale bundle_sale(const StageDistribution& st, double theta, const Vec& v) {
  double r = bundle_price_for_utility(st, theta).price;
  return {r, sum(v) >= r - 1e-12 * std::max(1.0, r)};
}

}  // namespace

LambdaBam b_star(const Instance& inst) {
  validate_instance(inst);
  Vec vals = stage_vals(inst);
  LambdaBam bam;
  bam.T = inst.T();
  bam.alloc_f = [inst](int t, double, const Vec&) {
    return Vec(inst.stages[t].items, 1.0);
  };
  bam.charge_f = [](int, double, const Vec&) { return 0.0; };
  bam.deposit_f = [](int, double, const Vec& v) { return sum(v); };
  bam.spend_f = [vals](int t, double bal) { return std::min(bal, vals[t]); };
  return bam;
}

Vec spend_star_path(const Instance& inst, const std::vector<Vec>& values) {
  if (static_cast<int>(values.size()) != inst.T()) fail("BadPath", "value path length mismatch");
  Vec vals = stage_vals(inst), s(inst.T());
  double bal = 0.0;
  for (int t = 0; t < inst.T(); ++t) {
    s[t] = std::min(bal, vals[t]);
    bal = bal - s[t] + sum(values[t]);
  }
  return s;
}

double expected_spend_star(const Instance& inst) {
  validate_instance(inst);
  if (!inst.all_discrete())
    fail("UnsupportedContinuous", "expected_spend_star needs discrete stages");
  Vec vals = stage_vals(inst);
  // E[sum_t s*_t] by recursion over the tree; the balance is the only state.
  std::function<double(int, double)> walk = [&](int t, double bal) -> double {
    if (t == inst.T()) return 0.0;
    double s = std::min(bal, vals[t]);
    double e = s;
    const auto& st = inst.stages[t];
    for (int i = 0; i < st.size(); ++i)
      e += st.probs[i] * walk(t + 1, bal - s + st.bundle_value(i));
    return e;
  };
  return walk(0, 0.0);
}

RevenueUpperBound revenue_upper_bound(const Instance& inst) {
  return revenue_upper_bound(inst, default_stage_mechs(inst));
}

RevenueUpperBound revenue_upper_bound(const Instance& inst,
                                      const std::vector<StageMechanism>& msms) {
  validate_instance(inst);
  if (static_cast<int>(msms.size()) != inst.T())
    fail("BadArgument", "one stage mechanism per stage required");
  RevenueUpperBound ub;
  for (int t = 0; t < inst.T(); ++t) ub.msm_revenue += stage_revenue(msms[t], inst.stages[t]);
  ub.expected_spend_star = expected_spend_star(inst);
  ub.total = ub.msm_revenue + ub.expected_spend_star;
  return ub;
}

LambdaBam corollary_alpha(const Instance& inst, double alpha) {
  return corollary_alpha(inst, alpha, default_stage_mechs(inst));
}

LambdaBam corollary_alpha(const Instance& inst, double alpha,
                          const std::vector<StageMechanism>& msms) {
  validate_instance(inst);
  if (!(alpha > 0.0)) fail("BadArgument", "alpha must be positive");
  if (static_cast<int>(msms.size()) != inst.T())
    fail("BadArgument", "one stage mechanism per stage required");
  Vec vals = stage_vals(inst);
  double w = 1.0 / (2.0 * alpha + 1.0);        // weight of the stage mechanism
  double wa = alpha * w;                       // weight of the other two parts
  double scale = 2.0 + 1.0 / alpha;            // bundle utility target per spend
  auto spend = [vals, wa](int t, double bal) { return std::min(bal, wa * vals[t]); };

  LambdaBam bam;
  bam.T = inst.T();
  bam.spend_f = spend;
  bam.deposit_f = [wa](int, double, const Vec& v) { return wa * sum(v); };
  bam.alloc_f = [inst, msms, w, wa, scale, spend](int t, double bal, const Vec& v) {
    Vec z = msms[t].alloc(v);
    BundleSale sale = bundle_sale(inst.stages[t], scale * spend(t, bal), v);
    for (double& zc : z) {
      zc *= w;
      zc += wa * (1.0 + (sale.sold ? 1.0 : 0.0));
    }
    return z;
  };
  bam.charge_f = [inst, msms, w, wa, scale, spend](int t, double bal, const Vec& v) {
    BundleSale sale = bundle_sale(inst.stages[t], scale * spend(t, bal), v);
    return w * msms[t].pay(v) + wa * (sale.sold ? sale.price : 0.0);
  };
  return bam;
}

LambdaBam three_approx(const Instance& inst) { return corollary_alpha(inst, 1.0); }

LambdaBam three_approx(const Instance& inst, const std::vector<StageMechanism>& msms) {
  return corollary_alpha(inst, 1.0, msms);
}

LambdaBam sigma_bam(const Instance& inst, const SigmaString& sigma) {
  validate_instance(inst);
  if (static_cast<int>(sigma.size()) != inst.T()) fail("BadArgument", "one bit per stage");
  for (int b : sigma)
    if (b != 0 && b != 1) fail("BadArgument", "sigma entries must be 0 or 1");
  Vec vals = stage_vals(inst);
  auto spend = [vals, sigma](int t, double bal) {
    return sigma[t] ? std::min(bal, vals[t]) : 0.0;
  };
  LambdaBam bam;
  bam.T = inst.T();
  bam.spend_f = spend;
  bam.deposit_f = [sigma](int t, double, const Vec& v) { return sigma[t] ? 0.0 : sum(v); };
  bam.alloc_f = [inst, sigma, spend](int t, double bal, const Vec& v) {
    int k = inst.stages[t].items;
    if (!sigma[t]) return Vec(k, 1.0);
    BundleSale sale = bundle_sale(inst.stages[t], spend(t, bal), v);
    return Vec(k, sale.sold ? 1.0 : 0.0);
  };
  bam.charge_f = [inst, sigma, spend](int t, double bal, const Vec& v) {
    if (!sigma[t]) return 0.0;
    BundleSale sale = bundle_sale(inst.stages[t], spend(t, bal), v);
    return sale.sold ? sale.price : 0.0;
  };
  return bam;
}

BestDeterministicResult best_deterministic(const Instance& inst) {
  return best_deterministic(inst, default_stage_mechs(inst));
}

BestDeterministicResult best_deterministic(const Instance& inst,
                                           const std::vector<StageMechanism>& msms) {
  validate_instance(inst);
  if (!inst.all_discrete())
    fail("UnsupportedContinuous", "best_deterministic needs discrete stages");
  int T = inst.T();
  if (T > 20)
    fail("SigmaEnumerationTooLarge",
         std::to_string(T) + " stages means 2^" + std::to_string(T) + " candidates");

  long long count = 1LL << T;
  Vec revenues(count, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (long long mask = 0; mask < count; ++mask) {
    SigmaString sigma(T);
    for (int t = 0; t < T; ++t) sigma[t] = static_cast<int>((mask >> t) & 1);
    revenues[mask] = bam_revenue(sigma_bam(inst, sigma), inst);
  }
  long long best = 0;
  for (long long mask = 1; mask < count; ++mask)
    if (revenues[mask] > revenues[best]) best = mask;

  BestDeterministicResult out;
  out.sigma.resize(T);
  for (int t = 0; t < T; ++t) out.sigma[t] = static_cast<int>((best >> t) & 1);
  out.sigma_revenue = revenues[best];

  // History-independent composition of the per-stage mechanisms.
  LambdaBam comp;
  comp.T = T;
  comp.alloc_f = [msms](int t, double, const Vec& v) { return msms[t].alloc(v); };
  comp.charge_f = [msms](int t, double, const Vec& v) { return msms[t].pay(v); };
  comp.deposit_f = [](int, double, const Vec&) { return 0.0; };
  comp.spend_f = [](int, double) { return 0.0; };
  out.msm_revenue = bam_revenue(comp, inst);

  out.revenue = std::max(out.sigma_revenue, out.msm_revenue);
  return out;
}

Instance example1_instance(double v_max) {
  Instance inst;
  inst.stages = {StageDistribution::equal_revenue(v_max), StageDistribution::equal_revenue(v_max)};
  validate_instance(inst);
  return inst;
}

LambdaBam example1_bam(double v_max) {
  if (!(v_max > 1.0)) fail("BadArgument", "v_max must exceed 1");
  double cap = std::log(v_max);
  LambdaBam bam;
  bam.T = 2;
  bam.spend_f = [cap](int t, double bal) { return t == 0 ? 0.0 : std::min(bal, cap); };
  bam.deposit_f = [](int t, const double, const Vec& v) {
    return t == 0 ? std::max(0.0, v[0] - 1.0) : 0.0;
  };
  bam.alloc_f = [v_max, cap](int t, double bal, const Vec& v) {
    if (t == 0) return Vec(1, v[0] >= 1.0 ? 1.0 : 0.0);
    double r = v_max * std::exp(-std::min(bal, cap));
    return Vec(1, v[0] >= r ? 1.0 : 0.0);
  };
  bam.charge_f = [v_max, cap](int t, double bal, const Vec& v) {
    if (t == 0) return v[0] >= 1.0 ? 1.0 : 0.0;
    double r = v_max * std::exp(-std::min(bal, cap));
    return v[0] >= r ? r : 0.0;
  };
  return bam;
}

double example1_revenue(double v_max) {
  if (!(v_max > 1.0)) fail("BadArgument", "v_max must exceed 1");
  // Price 1 in stage one, the calibrated price in stage two each net 1 in
  // expectation; the spend adds E[min(v - 1, ln v_max)] = ln(1 + ln v_max).
  return 2.0 + std::log1p(std::log(v_max));
}

}  // namespace bamlab
