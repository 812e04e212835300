#include "bamlab/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace bamlab {

namespace {

std::vector<IndexPath> nodes_at_depth(const Instance& inst, int depth) {
  std::vector<IndexPath> out;
  IndexPath h;
  std::function<void(int)> walk = [&](int t) {
    if (t == depth) {
      out.push_back(h);
      return;
    }
    for (int i = 0; i < inst.stages[t].size(); ++i) {
      h.push_back(i);
      walk(t + 1);
      h.pop_back();
    }
  };
  walk(0);
  return out;
}

// All suffix paths of stages [from, T), shortest first. Used for grafting and
// for comparing continuation subtrees.
std::vector<IndexPath> suffixes_from(const Instance& inst, int from) {
  std::vector<IndexPath> out;
  IndexPath s;
  std::function<void(int)> walk = [&](int t) {
    if (!s.empty()) out.push_back(s);
    if (t == inst.T()) return;
    for (int i = 0; i < inst.stages[t].size(); ++i) {
      s.push_back(i);
      walk(t + 1);
      s.pop_back();
    }
  };
  walk(from);
  return out;
}

IndexPath concat(const IndexPath& a, const IndexPath& b) {
  IndexPath out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Greedy chain clustering of (key, index) pairs sorted by key: a new class
// starts whenever the gap to the previous key exceeds tol.
std::vector<std::vector<int>> cluster_by_value(const Vec& keys, double tol) {
  std::vector<int> order(keys.size());
  for (size_t i = 0; i < keys.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (keys[a] != keys[b]) return keys[a] < keys[b];
    return a < b;
  });
  std::vector<std::vector<int>> classes;
  for (size_t r = 0; r < order.size(); ++r) {
    if (r == 0 || keys[order[r]] - keys[order[r - 1]] > tol) classes.emplace_back();
    classes.back().push_back(order[r]);
  }
  return classes;
}

bool is_one_item(const Instance& inst) {
  for (const auto& s : inst.stages)
    if (s.items != 1) return false;
  return true;
}

}  // namespace

Vec implied_stage_utilities(const std::vector<Vec>& support, const std::vector<Vec>& y) {
  int k = static_cast<int>(support.size());
  Vec u(k, 0.0);
  if (k == 0) return u;
  if (support[0].size() == 1) {
    // One item, support ascending: u_i = sum_{j<i} y_j (v_{j+1} - v_j).
    for (int i = 1; i < k; ++i)
      u[i] = u[i - 1] + y[i - 1][0] * (support[i][0] - support[i - 1][0]);
    return u;
  }
  // Several items: integrate the allocation along the ray tau -> tau * v_i,
  // tau in [0, 1], stepping at every support vector that lies on the ray.
  // The allocation is zero below the smallest such point (the origin counts
  // if it is in the support).
  for (int i = 0; i < k; ++i) {
    const Vec& v = support[i];
    int c0 = -1;
    for (size_t c = 0; c < v.size(); ++c)
      if (v[c] > 1e-14) {
        c0 = static_cast<int>(c);
        break;
      }
    if (c0 < 0) continue;  // the zero vector earns nothing
    std::vector<std::pair<double, int>> ray;  // (tau, support index)
    for (int j = 0; j < k; ++j) {
      double tau = support[j][c0] / v[c0];
      if (tau < -1e-12 || tau > 1.0 + 1e-12) continue;
      bool on_ray = true;
      for (size_t c = 0; on_ray && c < v.size(); ++c)
        on_ray = std::abs(support[j][c] - tau * v[c]) <= 1e-9 * std::max(1.0, std::abs(v[c]));
      if (on_ray) ray.emplace_back(std::clamp(tau, 0.0, 1.0), j);
    }
    std::sort(ray.begin(), ray.end());
    for (size_t r = 0; r + 1 < ray.size(); ++r)
      u[i] += dot(y[ray[r].second], v) * (ray[r + 1].first - ray[r].first);
  }
  return u;
}

VerificationReport validate_core(const CoreBamSpec& spec, const Instance& inst) {
  validate_instance(inst);
  if (!inst.all_discrete())
    fail("UnsupportedContinuous", "core specifications need discrete stages");
  VerificationReport rep;
  int T = inst.T();

  double gscale = 1.0;
  for (const auto& [h, gv] : spec.g) gscale = std::max(gscale, std::abs(gv));
  double tol = 1e-9 * gscale;

  // Completeness: g on every node of depth 0..T, y on every node of depth
  // 1..T with the stage's item count.
  rep.set("complete", true);
  for (int d = 0; d <= T && rep.verdicts["complete"]; ++d) {
    for (const auto& h : nodes_at_depth(inst, d)) {
      if (!spec.g.count(h)) {
        rep.set("complete", false);
        rep.add_witness("complete", path_str(h), "missing g", 0, 0);
        break;
      }
      if (d >= 1) {
        auto it = spec.y.find(h);
        if (it == spec.y.end() ||
            static_cast<int>(it->second.size()) != inst.stages[d - 1].items) {
          rep.set("complete", false);
          rep.add_witness("complete", path_str(h), "missing or mis-sized y", 0, 0);
          break;
        }
      }
    }
  }
  if (!rep.verdicts["complete"]) return rep;

  bool one_item = is_one_item(inst);
  rep.set("allocation_range", true);
  rep.set(one_item ? "envelope" : "subgradient", true);
  if (one_item) rep.set("monotone_allocation", true);
  rep.set("consistency", true);
  rep.set("spend_determined", true);
  rep.set("spend_within_balance", true);

  // Per-depth sweeps: slope/subgradient and consistency.
  Vec c_by_depth(T, 0.0);
  for (int d = 0; d < T; ++d) {
    const auto& st = inst.stages[d];
    bool first_node = true;
    for (const auto& h : nodes_at_depth(inst, d)) {
      std::vector<double> gs(st.size());
      std::vector<Vec> ys(st.size());
      IndexPath child = h;
      child.push_back(0);
      for (int i = 0; i < st.size(); ++i) {
        child.back() = i;
        gs[i] = spec.g.at(child);
        ys[i] = spec.y.at(child);
      }
      for (int i = 0; i < st.size(); ++i)
        for (double yc : ys[i])
          if (yc < -1e-9 || yc > 1.0 + 1e-9) {
            rep.set("allocation_range", false);
            rep.add_witness("allocation_range", path_str(h), "type " + std::to_string(i), yc,
                            0.0);
          }
      if (one_item) {
        // The spend being balance-determined forces the allocation to equal
        // the slope of g between consecutive support values.
        for (int i = 0; i + 1 < st.size(); ++i) {
          double dv = st.support[i + 1][0] - st.support[i][0];
          double lhs = ys[i][0] * dv, rhs = gs[i + 1] - gs[i];
          if (std::abs(lhs - rhs) > tol) {
            rep.set("envelope", false);
            rep.add_witness("envelope", path_str(h), "types " + std::to_string(i) + "->" +
                                                         std::to_string(i + 1),
                            lhs, rhs);
          }
        }
        for (int i = 0; i + 1 < st.size(); ++i)
          if (ys[i][0] > ys[i + 1][0] + 1e-9) {
            rep.set("monotone_allocation", false);
            rep.add_witness("monotone_allocation", path_str(h), "type " + std::to_string(i),
                            ys[i][0], ys[i + 1][0]);
          }
      } else {
        for (int i = 0; i < st.size(); ++i)
          for (int j = 0; j < st.size(); ++j) {
            if (i == j) continue;
            Vec diff(st.support[j].size());
            for (size_t c = 0; c < diff.size(); ++c)
              diff[c] = st.support[j][c] - st.support[i][c];
            double lhs = gs[j], rhs = gs[i] + dot(ys[i], diff);
            if (lhs < rhs - tol) {
              rep.set("subgradient", false);
              rep.add_witness("subgradient", path_str(h),
                              "types " + std::to_string(i) + "," + std::to_string(j), lhs, rhs);
            }
          }
      }
      double c = spec.g.at(h);
      for (int i = 0; i < st.size(); ++i) c -= st.probs[i] * gs[i];
      if (first_node) {
        c_by_depth[d] = c;
        first_node = false;
      } else if (std::abs(c - c_by_depth[d]) > tol) {
        rep.set("consistency", false);
        rep.add_witness("consistency", path_str(h), "depth " + std::to_string(d), c,
                        c_by_depth[d]);
      }
    }
  }

  // Symmetry: equal promise at depth t (1 <= t < T) means the whole
  // continuation — promises and allocations — matches suffix by suffix.
  rep.set("symmetry", true);
  for (int d = 1; d < T; ++d) {
    auto nodes = nodes_at_depth(inst, d);
    Vec keys(nodes.size());
    for (size_t n = 0; n < nodes.size(); ++n) keys[n] = spec.g.at(nodes[n]);
    auto sufs = suffixes_from(inst, d);
    for (const auto& cls : cluster_by_value(keys, tol)) {
      const IndexPath& repn = nodes[cls[0]];
      for (size_t mi = 1; mi < cls.size(); ++mi) {
        const IndexPath& mem = nodes[cls[mi]];
        for (const auto& suf : sufs) {
          IndexPath a = concat(repn, suf), b = concat(mem, suf);
          if (std::abs(spec.g.at(a) - spec.g.at(b)) > tol) {
            rep.set("symmetry", false);
            rep.add_witness("symmetry", path_str(mem), "suffix " + path_str(suf) + " promise",
                            spec.g.at(b), spec.g.at(a));
          }
          const Vec &ya = spec.y.at(a), &yb = spec.y.at(b);
          for (size_t c = 0; c < ya.size(); ++c)
            if (std::abs(ya[c] - yb[c]) > tol) {
              rep.set("symmetry", false);
              rep.add_witness("symmetry", path_str(mem),
                              "suffix " + path_str(suf) + " allocation", yb[c], ya[c]);
            }
        }
      }
    }
  }

  // Spend feasibility. mu[d] shifts depth-d promises onto balances; the
  // spend closing the balance recursion must not depend on the stage type
  // (slope equality makes this automatic with one item; with several items
  // the ray payments can genuinely break it) and must stay within the
  // balance.
  Vec mu(T + 1, 0.0);
  for (int d = 0; d <= T; ++d) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& h : nodes_at_depth(inst, d)) m = std::min(m, spec.g.at(h));
    mu[d] = d == T ? std::min(0.0, m) : m;
  }
  for (int d = 0; d < T; ++d) {
    const auto& st = inst.stages[d];
    for (const auto& h : nodes_at_depth(inst, d)) {
      double bal = spec.g.at(h) - mu[d];
      std::vector<Vec> ys(st.size());
      IndexPath child = h;
      child.push_back(0);
      for (int i = 0; i < st.size(); ++i) {
        child.back() = i;
        ys[i] = spec.y.at(child);
      }
      Vec u = implied_stage_utilities(st.support, ys);
      double s0 = 0.0;
      for (int i = 0; i < st.size(); ++i) {
        child.back() = i;
        double s = bal + u[i] - (spec.g.at(child) - mu[d + 1]);
        if (i == 0)
          s0 = s;
        else if (std::abs(s - s0) > 1e-8 * gscale) {
          rep.set("spend_determined", false);
          rep.add_witness("spend_determined", path_str(h), "type " + std::to_string(i), s, s0);
        }
      }
      if (s0 > bal + 1e-9 * gscale) {
        rep.set("spend_within_balance", false);
        rep.add_witness("spend_within_balance", path_str(h), "", s0, bal);
      }
    }
  }
  return rep;
}

TabularBam construct_core_bam(const CoreBamSpec& spec, const Instance& inst) {
  VerificationReport rep = validate_core(spec, inst);
  if (!rep.passed()) {
    std::string what = "violated:";
    for (const auto& [name, ok] : rep.verdicts)
      if (!ok) what += " " + name;
    if (!rep.witnesses.empty())
      what += " (first witness at " + rep.witnesses[0].history + ")";
    fail("CoreBamInvalid", what);
  }
  int T = inst.T();
  double gscale = 1.0;
  for (const auto& [h, gv] : spec.g) gscale = std::max(gscale, std::abs(gv));

  Vec mu(T + 1, 0.0);
  for (int d = 0; d <= T; ++d) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& h : nodes_at_depth(inst, d)) m = std::min(m, spec.g.at(h));
    mu[d] = d == T ? std::min(0.0, m) : m;
  }

  TabularBam bam;
  bam.promised_utility = spec.g.at({});
  bam.policy.resize(T);
  for (int d = 0; d < T; ++d) {
    const auto& st = inst.stages[d];
    StagePolicy& pol = bam.policy[d];
    pol.support = st.support;
    auto nodes = nodes_at_depth(inst, d);
    Vec keys(nodes.size());
    for (size_t n = 0; n < nodes.size(); ++n) keys[n] = spec.g.at(nodes[n]) - mu[d];
    // One table row per distinct balance; symmetry makes any class member an
    // equally good representative, so take the first.
    for (const auto& cls : cluster_by_value(keys, 1e-9 * gscale)) {
      const IndexPath& h = nodes[cls[0]];
      double bal = keys[cls[0]];
      std::vector<Vec> ys(st.size());
      IndexPath child = h;
      child.push_back(0);
      for (int i = 0; i < st.size(); ++i) {
        child.back() = i;
        ys[i] = spec.y.at(child);
      }
      Vec u = implied_stage_utilities(st.support, ys);
      std::vector<double> qrow(st.size()), drow(st.size());
      for (int i = 0; i < st.size(); ++i) {
        qrow[i] = dot(ys[i], st.support[i]) - u[i];
        drow[i] = u[i];
      }
      child.back() = 0;
      double s = std::min(bal, bal + u[0] - (spec.g.at(child) - mu[d + 1]));
      pol.balances.push_back(bal);
      pol.spends.push_back(s);
      pol.z.push_back(ys);
      pol.q.push_back(qrow);
      pol.d.push_back(drow);
    }
  }
  return bam;
}

DirectMechanism shift_to_stagewise_ir(const DirectMechanism& m, const Instance& inst) {
  validate_instance(inst);
  if (!inst.all_discrete()) fail("UnsupportedContinuous", "needs discrete stages");
  int T = inst.T();
  double vscale = 1.0;
  for (const auto& st : inst.stages) vscale = std::max(vscale, st.max_bundle_value());

  DirectMechanism out;
  for (const auto& [n, pr] : enumerate_paths(inst)) {
    auto vals = values_on_path(inst, n);
    double total_p = 0.0, total_u = 0.0, shifted = 0.0;
    IndexPath h;
    for (int t = 0; t < T; ++t) {
      h.push_back(n[t]);
      const StageOutcome& o = m.at(h);
      total_p += o.pay;
      total_u += dot(o.alloc, vals[t]) - o.pay;
      if (t + 1 < T) {
        double bid = dot(o.alloc, vals[t]);
        out.nodes[h] = {o.alloc, bid};  // overwrites shared prefixes with equal values
        shifted += bid;
      }
    }
    if (total_u < -1e-9 * vscale)
      fail("NotExPostIR",
           "path " + path_str(n) + " has utility " + std::to_string(total_u));
    out.nodes[n] = {m.at(n).alloc, total_p - shifted};
  }
  return out;
}

DirectMechanism symmetrize(const DirectMechanism& m, const Instance& inst) {
  validate_instance(inst);
  if (!inst.all_discrete()) fail("UnsupportedContinuous", "needs discrete stages");
  int T = inst.T();
  DirectMechanism cur = m;
  for (int t = 1; t < T; ++t) {
    auto nodes = nodes_at_depth(inst, t);
    Vec utl(nodes.size()), pi(nodes.size());
    for (size_t n = 0; n < nodes.size(); ++n) {
      utl[n] = conditional_utility(cur, inst, nodes[n]);
      pi[n] = future_revenue(cur, inst, nodes[n]);
    }
    double scale = 1.0;
    for (double u : utl) scale = std::max(scale, std::abs(u));
    auto sufs = suffixes_from(inst, t);
    for (const auto& cls : cluster_by_value(utl, 1e-9 * scale)) {
      int best = cls[0];
      for (int n : cls)
        if (pi[n] > pi[best] + 1e-12 || (pi[n] >= pi[best] - 1e-12 && nodes[n] < nodes[best]))
          best = n;
      for (int n : cls) {
        if (n == best) continue;
        for (const auto& suf : sufs)
          cur.nodes[concat(nodes[n], suf)] = cur.nodes.at(concat(nodes[best], suf));
      }
    }
  }
  return cur;
}

CoreBamSpec core_bam_from_symmetric(const DirectMechanism& m, const Instance& inst) {
  CoreBamSpec spec;
  spec.g[{}] = conditional_utility(m, inst, {});
  for (const auto& [h, pr] : enumerate_nodes(inst)) {
    spec.g[h] = conditional_utility(m, inst, h);
    spec.y[h] = m.at(h).alloc;
  }
  VerificationReport rep = validate_core(spec, inst);
  if (!rep.passed()) {
    std::string what = "extracted promises fail:";
    for (const auto& [name, ok] : rep.verdicts)
      if (!ok) what += " " + name;
    fail("NotSymmetricOrNotIC", what);
  }
  return spec;
}

TabularBam bam_from_direct(const DirectMechanism& m, const Instance& inst) {
  DirectMechanism sym = symmetrize(shift_to_stagewise_ir(m, inst), inst);
  return construct_core_bam(core_bam_from_symmetric(sym, inst), inst);
}

}  // namespace bamlab
