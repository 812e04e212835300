#include "bamlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "bamlab/report.hpp"

namespace bamlab {

StageDistribution StageDistribution::discrete(std::vector<Vec> support, Vec probs) {
  StageDistribution d;
  d.kind = Kind::Discrete;
  d.items = support.empty() ? 1 : static_cast<int>(support[0].size());
  d.support = std::move(support);
  d.probs = std::move(probs);
  return d;
}

StageDistribution StageDistribution::one_item(Vec values, Vec probs) {
  std::vector<Vec> sup;
  sup.reserve(values.size());
  for (double v : values) sup.push_back({v});
  return discrete(std::move(sup), std::move(probs));
}

StageDistribution StageDistribution::equal_revenue(double v_max) {
  StageDistribution d;
  d.kind = Kind::EqualRevenue;
  d.items = 1;
  d.v_max = v_max;
  return d;
}

double StageDistribution::max_bundle_value() const {
  if (kind == Kind::EqualRevenue) return v_max;
  double m = 0.0;
  for (int i = 0; i < size(); ++i) m = std::max(m, bundle_value(i));
  return m;
}

double StageDistribution::val() const {
  if (kind == Kind::EqualRevenue) return 1.0 + std::log(v_max);
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += probs[i] * bundle_value(i);
  return s;
}

Vec StageDistribution::sample(double u) const {
  if (kind == Kind::EqualRevenue) {
    // F(v) = 1 - 1/v on (1, v_max); mass 1/v_max sits at v_max.
    if (u >= 1.0 - 1.0 / v_max) return {v_max};
    return {1.0 / (1.0 - u)};
  }
  return support[sample_index(u)];
}

int StageDistribution::sample_index(double u) const {
  if (kind != Kind::Discrete) fail("UnsupportedContinuous", "sample_index needs a discrete stage");
  double acc = 0.0;
  for (int i = 0; i < size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return size() - 1;  // u landed in the rounding slack at the top
}

bool Instance::all_discrete() const {
  for (const auto& s : stages)
    if (!s.is_discrete()) return false;
  return true;
}

bool Instance::one_item_per_stage() const {
  for (const auto& s : stages)
    if (s.items != 1) return false;
  return true;
}

long long Instance::tree_nodes(long long cap) const {
  long long total = 0, level = 1;
  for (const auto& s : stages) {
    if (!s.is_discrete()) return cap;
    if (level > cap / std::max(1, s.size())) return cap;
    level *= s.size();
    total += level;
    if (total >= cap) return cap;
  }
  return total;
}

void validate_instance(const Instance& inst) {
  if (inst.T() < 1) fail("BadInstance", "instance needs at least one stage");
  for (int t = 0; t < inst.T(); ++t) {
    const auto& s = inst.stages[t];
    std::string where = "stage " + std::to_string(t + 1);
    if (s.kind == StageDistribution::Kind::EqualRevenue) {
      if (s.items != 1) fail("BadInstance", where + ": equal-revenue stages are one-item");
      if (!(s.v_max > 1.0)) fail("BadInstance", where + ": equal-revenue needs v_max > 1");
      continue;
    }
    if (s.size() == 0) fail("BadInstance", where + ": empty support");
    if (static_cast<int>(s.probs.size()) != s.size())
      fail("BadInstance", where + ": probs/support length mismatch");
    double psum = 0.0;
    for (double p : s.probs) {
      if (p < 0.0) fail("BadInstance", where + ": negative probability");
      psum += p;
    }
    if (std::abs(psum - 1.0) > 1e-12) fail("BadInstance", where + ": probabilities sum to " + std::to_string(psum));
    for (const auto& v : s.support) {
      if (static_cast<int>(v.size()) != s.items) fail("BadInstance", where + ": ragged support vector");
      for (double x : v)
        if (x < 0.0) fail("BadInstance", where + ": negative valuation coordinate");
    }
    for (int i = 0; i < s.size(); ++i)
      for (int j = i + 1; j < s.size(); ++j)
        if (s.support[i] == s.support[j]) fail("BadInstance", where + ": duplicate support vectors");
    if (s.items == 1) {
      for (int i = 0; i + 1 < s.size(); ++i)
        if (!(s.support[i][0] < s.support[i + 1][0]))
          fail("BadInstance", where + ": one-item support must be strictly ascending");
    }
  }
}

const StageOutcome& DirectMechanism::at(const IndexPath& h) const {
  auto it = nodes.find(h);
  if (it == nodes.end()) fail("IncompleteMechanism", "no outcome stored for history " + path_str(h));
  return it->second;
}

bool DirectMechanism::deterministic(double tol) const {
  for (const auto& [h, out] : nodes)
    for (double z : out.alloc)
      if (std::abs(z) > tol && std::abs(z - 1.0) > tol) return false;
  return true;
}

std::vector<std::pair<IndexPath, double>> enumerate_paths(const Instance& inst) {
  for (const auto& s : inst.stages)
    if (!s.is_discrete()) fail("UnsupportedContinuous", "enumerate_paths needs all-discrete stages");
  std::vector<std::pair<IndexPath, double>> out;
  IndexPath h;
  std::function<void(int, double)> rec = [&](int t, double p) {
    if (t == inst.T()) {
      out.emplace_back(h, p);
      return;
    }
    const auto& s = inst.stages[t];
    for (int i = 0; i < s.size(); ++i) {
      h.push_back(i);
      rec(t + 1, p * s.probs[i]);
      h.pop_back();
    }
  };
  rec(0, 1.0);
  return out;
}

std::vector<std::pair<IndexPath, double>> enumerate_nodes(const Instance& inst) {
  for (const auto& s : inst.stages)
    if (!s.is_discrete()) fail("UnsupportedContinuous", "enumerate_nodes needs all-discrete stages");
  std::vector<std::pair<IndexPath, double>> out;
  IndexPath h;
  std::function<void(int, double)> rec = [&](int t, double p) {
    if (t == inst.T()) return;
    const auto& s = inst.stages[t];
    for (int i = 0; i < s.size(); ++i) {
      h.push_back(i);
      out.emplace_back(h, p * s.probs[i]);
      rec(t + 1, p * s.probs[i]);
      h.pop_back();
    }
  };
  rec(0, 1.0);
  return out;
}

double node_prob(const Instance& inst, const IndexPath& h) {
  return inst.stages[h.size() - 1].probs[h.back()];
}

std::vector<Vec> values_on_path(const Instance& inst, const IndexPath& h) {
  std::vector<Vec> vals;
  vals.reserve(h.size());
  for (size_t t = 0; t < h.size(); ++t) {
    const auto& s = inst.stages[t];
    if (!s.is_discrete()) fail("UnsupportedContinuous", "values_on_path needs discrete stages");
    if (h[t] < 0 || h[t] >= s.size()) fail("BadHistory", "index out of range at " + path_str(h));
    vals.push_back(s.support[h[t]]);
  }
  return vals;
}

SamplePath sample_path(const Instance& inst, uint64_t seed, uint64_t index) {
  SamplePath sp;
  for (int t = 0; t < inst.T(); ++t) {
    double u = unit_draw(seed, index * 64 + static_cast<uint64_t>(t));
    const auto& s = inst.stages[t];
    if (s.is_discrete()) {
      int i = s.sample_index(u);
      sp.indices.push_back(i);
      sp.values.push_back(s.support[i]);
    } else {
      sp.indices.push_back(-1);
      sp.values.push_back(s.sample(u));
    }
  }
  return sp;
}

Totals expected_totals(const DirectMechanism& mech, const Instance& inst) {
  Totals tot;
  for (const auto& [path, p] : enumerate_paths(inst)) {
    double rev = 0.0, utl = 0.0;
    IndexPath h;
    for (size_t t = 0; t < path.size(); ++t) {
      h.push_back(path[t]);
      const auto& out = mech.at(h);
      const Vec& v = inst.stages[t].support[path[t]];
      rev += out.pay;
      utl += dot(out.alloc, v) - out.pay;
    }
    tot.revenue += p * rev;
    tot.utility += p * utl;
  }
  tot.welfare = tot.revenue + tot.utility;
  return tot;
}

namespace {

// Expected sum of per-node quantities over the subtree below h (stages
// |h|+1..T), where `node_term` reads one child node's contribution.
double subtree_expectation(const DirectMechanism& mech, const Instance& inst, IndexPath& node,
                           int t, double (*node_term)(const StageOutcome&, const Vec&)) {
  if (t == inst.T()) return 0.0;
  const auto& s = inst.stages[t];
  double e = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    node.push_back(i);
    e += s.probs[i] * (node_term(mech.at(node), s.support[i]) +
                       subtree_expectation(mech, inst, node, t + 1, node_term));
    node.pop_back();
  }
  return e;
}

double utility_term(const StageOutcome& o, const Vec& v) { return dot(o.alloc, v) - o.pay; }
double revenue_term(const StageOutcome& o, const Vec&) { return o.pay; }

}  // namespace

double future_utility(const DirectMechanism& mech, const Instance& inst, const IndexPath& h) {
  IndexPath node = h;
  return subtree_expectation(mech, inst, node, static_cast<int>(h.size()), utility_term);
}

double future_revenue(const DirectMechanism& mech, const Instance& inst, const IndexPath& h) {
  IndexPath node = h;
  return subtree_expectation(mech, inst, node, static_cast<int>(h.size()), revenue_term);
}

double conditional_utility(const DirectMechanism& mech, const Instance& inst, const IndexPath& h) {
  if (static_cast<int>(h.size()) > inst.T()) fail("BadHistory", "prefix longer than instance");
  double realized = 0.0;
  IndexPath pre;
  for (size_t t = 0; t < h.size(); ++t) {
    const auto& s = inst.stages[t];
    if (h[t] < 0 || h[t] >= s.size()) fail("BadHistory", "index out of range at " + path_str(h));
    pre.push_back(h[t]);
    const auto& out = mech.at(pre);
    realized += dot(out.alloc, s.support[h[t]]) - out.pay;
  }
  return realized + future_utility(mech, inst, h);
}

}  // namespace bamlab
