#pragma once

#include "bamlab/bam.hpp"
#include "bamlab/model.hpp"
#include "bamlab/stage.hpp"

namespace bamlab {

// The benchmark account B*: everything is given away for free, the whole
// stage value is deposited (d* = 1.v), and the spend is the largest feasible
// cap-respecting amount, s* = min(bal, Val_t). No other feasible deposit /
// spend pair (0 <= deposit <= 1.v, spend <= min(bal, Val_t), spend may be
// negative) can beat its cumulative spend on any prefix of any path.
LambdaBam b_star(const Instance& inst);

// Spends s*_1..s*_T of B* along one realized value path.
Vec spend_star_path(const Instance& inst, const std::vector<Vec>& values);

// E[sum_t s*_t], exactly, by walking the history tree (discrete only).
double expected_spend_star(const Instance& inst);

struct RevenueUpperBound {
  double msm_revenue = 0.0;         // sum of optimal single-stage revenues
  double expected_spend_star = 0.0; // E[sum_t s*_t]
  double total = 0.0;               // their sum bounds every IC-IR mechanism
};

// Upper bound on the optimal revenue: no mechanism can beat the sum of the
// per-stage optimal revenues plus the total expected spend of B*. Stage
// mechanisms default to per-stage optimal ones (see default_stage_mechs).
RevenueUpperBound revenue_upper_bound(const Instance& inst);
RevenueUpperBound revenue_upper_bound(const Instance& inst,
                                      const std::vector<StageMechanism>& msms);

// The 3-approximation: each stage mixes, with weight 1/3 each, the optimal
// single-stage mechanism, a free allocation that deposits a third of the
// stage value, and a grand-bundle price calibrated so the buyer's expected
// bundle utility equals three times the spend. Its balance, deposit, and
// spend equal exactly one third of B*'s on every path, and its revenue is at
// least a third of the optimum.
LambdaBam three_approx(const Instance& inst);
LambdaBam three_approx(const Instance& inst, const std::vector<StageMechanism>& msms);

// The same construction with mixing weights 1/(2a+1) on the single-stage
// mechanism and a/(2a+1) on each of the other two parts (a > 0); the bundle
// utility target becomes (2 + 1/a) times the spend. a = 1 reproduces
// three_approx exactly; the revenue guarantee degrades to the weighted
// blend of the two bound components.
LambdaBam corollary_alpha(const Instance& inst, double alpha);
LambdaBam corollary_alpha(const Instance& inst, double alpha,
                          const std::vector<StageMechanism>& msms);

// One bit per stage.
using SigmaString = std::vector<int>;

// Deterministic account indexed by a bit string: a 0-stage gives the items
// away and deposits the full stage value; a 1-stage spends s = min(bal,
// Val_t) and posts the grand-bundle price whose expected buyer utility is
// exactly that spend. Averaged over uniformly random bits, the expected
// spend of each stage is at least a quarter of B*'s.
LambdaBam sigma_bam(const Instance& inst, const SigmaString& sigma);

struct BestDeterministicResult {
  SigmaString sigma;           // argmax over bit strings
  double sigma_revenue = 0.0;  // its exact revenue
  double msm_revenue = 0.0;    // revenue of composing the optimal
                               // single-stage mechanisms independently
  double revenue = 0.0;        // max of the two
};

// Exhaustive sweep over all 2^T bit strings (OpenMP-parallel, deterministic
// argmax: ties go to the lexicographically smallest string) plus the
// stage-by-stage composition of deterministic optimal single-stage
// mechanisms. The winner is a deterministic mechanism with at least a fifth
// of the optimal revenue. Throws SigmaEnumerationTooLarge for T > 20.
BestDeterministicResult best_deterministic(const Instance& inst);
BestDeterministicResult best_deterministic(const Instance& inst,
                                           const std::vector<StageMechanism>& msms);

// Two equal-revenue stages with the same v_max.
Instance example1_instance(double v_max);

// The two-stage account for that instance: stage one posts price 1 and
// banks the buyer's surplus, capped utility-wise at ln v_max; stage two
// spends the balance (capped at ln v_max) and posts the price
// v_max e^{-spend}, which always nets exactly 1 in expectation from the
// posted price itself. Expected revenue: 2 + ln(1 + ln v_max), which grows
// without bound in v_max even though every single-stage mechanism on this
// instance earns exactly 1 per stage.
LambdaBam example1_bam(double v_max);

// Exact expected revenue of example1_bam: 2 + ln(1 + ln v_max).
double example1_revenue(double v_max);

}  // namespace bamlab
