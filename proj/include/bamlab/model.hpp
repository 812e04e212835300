#pragma once

#include <map>
#include <optional>
#include <utility>

#include "bamlab/common.hpp"
#include "bamlab/rng.hpp"

namespace bamlab {

// Per-stage type distribution. Either an explicit discrete support over
// valuation vectors (k_t items) or the parametric equal-revenue family
// F(v) = 1 - 1/v on (1, v_max) with an atom of mass 1/v_max at v_max, so
// Pr[v >= r] = 1/r for every r in [1, v_max].
struct StageDistribution {
  enum class Kind { Discrete, EqualRevenue };
  Kind kind = Kind::Discrete;
  int items = 1;
  std::vector<Vec> support;  // Discrete: one valuation vector per type
  Vec probs;                 // Discrete: same length, sums to 1
  double v_max = 0.0;        // EqualRevenue only (> 1, items == 1)

  static StageDistribution discrete(std::vector<Vec> support, Vec probs);
  // Convenience for the ubiquitous one-item case.
  static StageDistribution one_item(Vec values, Vec probs);
  static StageDistribution equal_revenue(double v_max);

  bool is_discrete() const { return kind == Kind::Discrete; }
  int size() const { return static_cast<int>(support.size()); }
  // 1 . v^i
  double bundle_value(int i) const { return sum(support[i]); }
  double max_bundle_value() const;
  // Val_t = E[1 . v]  (equal-revenue: 1 + ln v_max)
  double val() const;
  // Inverse-CDF draw; u in [0,1). Discrete draws walk the CDF.
  Vec sample(double u) const;
  int sample_index(double u) const;  // Discrete only
};

struct Instance {
  std::vector<StageDistribution> stages;

  int T() const { return static_cast<int>(stages.size()); }
  bool all_discrete() const;
  bool one_item_per_stage() const;
  // Number of history-tree nodes, sum_t prod_{tau<=t} k_tau (discrete only);
  // saturates at `cap` to avoid overflow on silly inputs.
  long long tree_nodes(long long cap = (1LL << 62)) const;
};

// Throws on malformed data: probability sums, negative coordinates,
// duplicate support vectors, unsorted one-item supports, bad v_max.
void validate_instance(const Instance& inst);

struct StageOutcome {
  Vec alloc;          // in [0,1]^{k_t}
  double pay = 0.0;   // payment to the seller this stage
};

// Tabular direct mechanism on the discrete history tree: one outcome per
// node, keyed by the reported support indices of stages 1..t.
struct DirectMechanism {
  std::map<IndexPath, StageOutcome> nodes;

  const StageOutcome& at(const IndexPath& h) const;
  bool deterministic(double tol = 1e-9) const;
};

struct Totals {
  double revenue = 0.0;
  double utility = 0.0;
  double welfare = 0.0;  // always revenue + utility
};

// Every full-length index path with its product probability (sums to 1).
std::vector<std::pair<IndexPath, double>> enumerate_paths(const Instance& inst);

// Every tree node (lengths 1..T) in depth-first order with the probability
// of reaching it. Deterministic order; used by checkers and transforms.
std::vector<std::pair<IndexPath, double>> enumerate_nodes(const Instance& inst);

// Probability of one stage-t report given the node's last index.
double node_prob(const Instance& inst, const IndexPath& h);

// Realized valuation vectors for an index path.
std::vector<Vec> values_on_path(const Instance& inst, const IndexPath& h);

struct SamplePath {
  std::vector<Vec> values;           // one vector per stage
  std::vector<int> indices;          // support indices (discrete stages; -1 otherwise)
};

// Deterministic function of (seed, index); equal-revenue stages are drawn by
// inverse CDF including the v_max atom. Safe to call from many threads.
SamplePath sample_path(const Instance& inst, uint64_t seed, uint64_t index);

// Exact expectations by full tree enumeration (discrete only).
Totals expected_totals(const DirectMechanism& mech, const Instance& inst);

// Utl(M | h): realized stage utilities of the prefix plus the exact expected
// utility of the remaining stages. Empty prefix gives Utl(M).
double conditional_utility(const DirectMechanism& mech, const Instance& inst, const IndexPath& h);

// Exact expected utility / revenue of stages strictly after the prefix h.
double future_utility(const DirectMechanism& mech, const Instance& inst, const IndexPath& h);
double future_revenue(const DirectMechanism& mech, const Instance& inst, const IndexPath& h);

}  // namespace bamlab
