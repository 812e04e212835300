#pragma once

#include "bamlab/bam.hpp"
#include "bamlab/core.hpp"
#include "bamlab/model.hpp"
#include "bamlab/pwl.hpp"

namespace bamlab {

// One stage's design at a given promise: a randomized posted price with mass
// w over the stage's support values (prepended with value 0 when absent, so
// free allocation is expressible). Types are screened by the cumulative
// allocation y; u is each type's truthful utility and g its outgoing promise
// xi + u - E[u], kept non-negative for every type, supported or not.
struct StageChoice {
  double value = 0.0;  // E[allocation value] + E[continuation at g]
  Vec w;               // over the padded support, sums to 1
  Vec y, u, g;         // per (real) support type
  int lp_solves = 0;
};

// Maximize E[y v] + E[cont(g)] over price distributions w at promise xi.
// cont must be concave; it enters through outer linearization cuts, refined
// until every used continuation value is tight to 1e-10. The reported value
// is recomputed from the final w (not read off the LP), so it is always
// achievable.
StageChoice stage_value(const StageDistribution& stage, double xi, const PwlBound& cont);

struct DpResult {
  double value_lower = 0.0;  // best provable revenue (max of the lower bound)
  double value_upper = 0.0;  // no mechanism beats this
  double epsilon = 0.0;
  double xi_star = 0.0;      // maximizing initial promise (leftmost)
  double delta = 0.0;        // final per-pass sandwich accuracy
  std::vector<PwlBound> lower, upper;  // index t = 0..T: bounds on the
                                       // revenue-to-go from stage t at each
                                       // promise level
  std::vector<int> breakpoints;        // lower-bound core sizes, per stage
  long long lp_count = 0;              // stage LPs solved across all passes
};

// Approximate revenue maximization over every IC, ex-post IR mechanism:
// value functions over the scalar promise state are bounded above and below
// by piecewise-linear concave sandwiches, tightened geometrically until
// value_lower >= (1 - epsilon) value_upper. One item per stage, discrete
// supports, epsilon in (0, 1). The optimum is always inside
// [value_lower, value_upper].
DpResult backward_dp(const Instance& inst, double epsilon);

struct ExtractResult {
  TabularBam bam;
  CoreBamSpec spec;
  double revenue = 0.0;  // exact expected revenue of bam
};

// Turns the lower-bound solution into an executable mechanism: walk the tree
// from xi_star, re-solving one stage LP per distinct promise (equal promises
// share the solve, which keeps the result symmetric by construction), then
// build the account mechanism from the resulting promises and allocations.
// Its revenue is at least dp.value_lower up to solver tolerance.
ExtractResult extract_mechanism(const Instance& inst, const DpResult& dp);

}  // namespace bamlab
