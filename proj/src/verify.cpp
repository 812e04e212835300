#include "bamlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>

#include "bamlab/lp.hpp"

namespace bamlab {

VerificationReport check_ic(const DirectMechanism& m, const Instance& inst, double tol) {
  validate_instance(inst);
  if (!inst.all_discrete()) fail("UnsupportedContinuous", "check_ic needs discrete stages");
  VerificationReport rep;
  rep.set("ic", true);

  // Continuation utilities of every node, computed once.
  std::map<IndexPath, double> fu;
  fu[{}] = future_utility(m, inst, {});
  auto nodes = enumerate_nodes(inst);
  for (const auto& [h, pr] : nodes) fu[h] = future_utility(m, inst, h);

  std::vector<IndexPath> parents;
  parents.push_back({});
  for (const auto& [h, pr] : nodes)
    if (static_cast<int>(h.size()) < inst.T()) parents.push_back(h);

  for (const auto& h : parents) {
    const auto& st = inst.stages[h.size()];
    IndexPath a = h, b = h;
    a.push_back(0);
    b.push_back(0);
    for (int i = 0; i < st.size(); ++i) {
      a.back() = i;
      const StageOutcome& truth = m.at(a);
      double lhs = dot(truth.alloc, st.support[i]) - truth.pay + fu[a];
      for (int j = 0; j < st.size(); ++j) {
        if (j == i) continue;
        b.back() = j;
        const StageOutcome& dev = m.at(b);
        double rhs = dot(dev.alloc, st.support[i]) - dev.pay + fu[b];
        if (lhs < rhs - tol) {
          rep.set("ic", false);
          rep.add_witness("ic", path_str(h),
                          "true " + std::to_string(i) + " reports " + std::to_string(j), lhs,
                          rhs);
        }
      }
    }
  }
  return rep;
}

VerificationReport check_ir(const DirectMechanism& m, const Instance& inst, IrMode mode,
                            double tol) {
  validate_instance(inst);
  if (!inst.all_discrete()) fail("UnsupportedContinuous", "check_ir needs discrete stages");
  VerificationReport rep;

  auto expost = [&](double t) {
    bool ok = true;
    for (const auto& [n, pr] : enumerate_paths(inst)) {
      double u = 0.0;
      IndexPath h;
      for (size_t s = 0; s < n.size(); ++s) {
        h.push_back(n[s]);
        const auto& o = m.at(h);
        u += dot(o.alloc, inst.stages[s].support[n[s]]) - o.pay;
      }
      if (u < -t) {
        ok = false;
        rep.add_witness("expost_ir", path_str(n), "", u, 0.0);
      }
    }
    return ok;
  };

  if (mode == IrMode::ExPost) {
    rep.set("expost_ir", expost(tol));
    return rep;
  }

  bool stage_ok = true;
  for (const auto& [h, pr] : enumerate_nodes(inst)) {
    const auto& o = m.at(h);
    double u = dot(o.alloc, inst.stages[h.size() - 1].support[h.back()]) - o.pay;
    if (u < -tol) {
      stage_ok = false;
      rep.add_witness("stagewise_ir", path_str(h), "", u, 0.0);
    }
  }
  rep.set("stagewise_ir", stage_ok);
  // Stage-wise IR implies ex-post IR; verify the implication numerically
  // (per-stage slack can add up along a path, hence the T * tol allowance).
  bool ep = expost(inst.T() * tol);
  rep.set("expost_ir", ep);
  if (stage_ok && !ep)
    fail("InternalCheckInconsistent", "stage-wise IR passed but ex-post IR failed");
  return rep;
}

VerificationReport check_bam_conditions(const BankAccountMechanism& bam, const Instance& inst,
                                        double tol) {
  validate_instance(inst);
  if (!inst.all_discrete())
    fail("UnsupportedContinuous", "check_bam_conditions needs discrete stages");
  if (bam.stages() != inst.T()) fail("BadPath", "stage count mismatch");
  int T = inst.T();

  // Reachable pre-stage balances, per stage, from the empty account.
  std::vector<Vec> reach(T);
  std::function<void(int, double)> walk = [&](int t, double bal) {
    if (t == T) return;
    reach[t].push_back(bal);
    double s = bam.spend(t, bal);
    for (int i = 0; i < inst.stages[t].size(); ++i)
      walk(t + 1, bal - s + bam.deposit(t, bal, inst.stages[t].support[i]));
  };
  walk(0, 0.0);
  for (auto& r : reach) {
    std::sort(r.begin(), r.end());
    Vec dedup;
    for (double b : r)
      if (dedup.empty() || b - dedup.back() > 1e-12 * std::max(1.0, std::abs(b)))
        dedup.push_back(b);
    r = dedup;
  }

  VerificationReport rep;
  rep.set("stage_ic", true);
  rep.set("spend_transfer", true);
  rep.set("bam_ir", true);
  rep.set("structural", true);

  for (int t = 0; t < T; ++t) {
    const auto& st = inst.stages[t];
    int k = st.size();
    // Truthful stage utilities and their expectation at each balance.
    std::vector<Vec> u(reach[t].size(), Vec(k, 0.0));
    Vec eu(reach[t].size(), 0.0);
    for (size_t b = 0; b < reach[t].size(); ++b) {
      double bal = reach[t][b];
      std::string where = "stage " + std::to_string(t) + " bal " + std::to_string(bal);
      double s = bam.spend(t, bal);
      if (s > bal + tol) {
        rep.set("structural", false);
        rep.add_witness("structural", where, "spend exceeds balance", s, bal);
      }
      for (int i = 0; i < k; ++i) {
        const Vec& v = st.support[i];
        double q = bam.charge(t, bal, v), d = bam.deposit(t, bal, v);
        if (q < -tol) {
          rep.set("structural", false);
          rep.add_witness("structural", where, "charge < 0 at type " + std::to_string(i), q, 0);
        }
        if (d < -tol) {
          rep.set("structural", false);
          rep.add_witness("structural", where, "deposit < 0 at type " + std::to_string(i), d, 0);
        }
        u[b][i] = bam_stage_utility(bam, t, bal, v, v);
        eu[b] += st.probs[i] * u[b][i];
        if (u[b][i] < d - tol) {
          rep.set("bam_ir", false);
          rep.add_witness("bam_ir", where, "type " + std::to_string(i), u[b][i], d);
        }
        for (int j = 0; j < k; ++j) {
          if (j == i) continue;
          double dev = bam_stage_utility(bam, t, bal, st.support[j], v);
          if (u[b][i] < dev - tol) {
            rep.set("stage_ic", false);
            rep.add_witness("stage_ic", where,
                            "true " + std::to_string(i) + " reports " + std::to_string(j),
                            u[b][i], dev);
          }
        }
      }
    }
    for (size_t b = 0; b < reach[t].size(); ++b)
      for (size_t c = b + 1; c < reach[t].size(); ++c) {
        double lhs = bam.spend(t, reach[t][b]) - bam.spend(t, reach[t][c]);
        double rhs = eu[b] - eu[c];
        if (std::abs(lhs - rhs) > tol) {
          rep.set("spend_transfer", false);
          rep.add_witness("spend_transfer", "stage " + std::to_string(t),
                          "balances " + std::to_string(reach[t][b]) + "," +
                              std::to_string(reach[t][c]),
                          lhs, rhs);
        }
      }
  }
  return rep;
}

long long node_cap() {
  if (const char* env = std::getenv("BAMLAB_NODE_CAP")) {
    char* end = nullptr;
    long long v = std::strtoll(env, &end, 10);
    if (end != env && v > 0) return v;
  }
  return 5000;
}

OptResult bruteforce_opt(const Instance& inst) {
  validate_instance(inst);
  if (!inst.all_discrete()) fail("UnsupportedContinuous", "bruteforce_opt needs discrete stages");
  long long cap = node_cap();
  if (inst.tree_nodes(cap + 1) > cap)
    fail("InstanceTooLarge", "history tree exceeds " + std::to_string(cap) +
                                 " nodes (set BAMLAB_NODE_CAP to raise)");

  auto nodes = enumerate_nodes(inst);
  // Variable layout per node: k_t allocation entries in [0,1], then one free
  // payment.
  std::map<IndexPath, int> base;
  LpProblem lp;
  std::map<IndexPath, double> reach;
  for (const auto& [h, pr] : nodes) {
    int items = inst.stages[h.size() - 1].items;
    base[h] = lp.n;
    for (int c = 0; c < items; ++c) lp.add_var(0.0, false, 1.0);
    lp.add_var(pr, true);  // maximize expected payments
    reach[h] = pr;
  }
  auto pay_var = [&](const IndexPath& h) {
    return base.at(h) + inst.stages[h.size() - 1].items;
  };

  // coef[var] accumulation for one constraint row.
  std::map<int, double> coef;
  auto add_alloc = [&](const IndexPath& h, const Vec& v, double w) {
    int b = base.at(h);
    for (size_t c = 0; c < v.size(); ++c) coef[b + static_cast<int>(c)] += w * v[c];
  };
  // Adds w * E[utility of stages after h | h] to the row.
  std::function<void(const IndexPath&, double)> add_future = [&](const IndexPath& h, double w) {
    if (static_cast<int>(h.size()) == inst.T()) return;
    const auto& st = inst.stages[h.size()];
    IndexPath child = h;
    child.push_back(0);
    for (int i = 0; i < st.size(); ++i) {
      child.back() = i;
      add_alloc(child, st.support[i], w * st.probs[i]);
      coef[pay_var(child)] += -w * st.probs[i];
      add_future(child, w * st.probs[i]);
    }
  };
  auto flush_row = [&](char rel, double rhs) {
    LinRow row;
    for (const auto& [v, c] : coef)
      if (c != 0.0) row.terms.emplace_back(v, c);
    row.rel = rel;
    row.rhs = rhs;
    lp.add_row(std::move(row));
    coef.clear();
  };

  // IC at every node: truth + continuation beats any one-stage misreport
  // followed by truthful play.
  std::vector<IndexPath> parents;
  parents.push_back({});
  for (const auto& [h, pr] : nodes)
    if (static_cast<int>(h.size()) < inst.T()) parents.push_back(h);
  for (const auto& h : parents) {
    const auto& st = inst.stages[h.size()];
    IndexPath a = h, b = h;
    a.push_back(0);
    b.push_back(0);
    for (int i = 0; i < st.size(); ++i)
      for (int j = 0; j < st.size(); ++j) {
        if (i == j) continue;
        a.back() = i;
        b.back() = j;
        add_alloc(a, st.support[i], 1.0);
        coef[pay_var(a)] += -1.0;
        add_future(a, 1.0);
        add_alloc(b, st.support[i], -1.0);
        coef[pay_var(b)] += 1.0;
        add_future(b, -1.0);
        flush_row('>', 0.0);
      }
  }
  // Ex-post IR along every full path.
  for (const auto& [n, pr] : enumerate_paths(inst)) {
    IndexPath h;
    for (size_t t = 0; t < n.size(); ++t) {
      h.push_back(n[t]);
      add_alloc(h, inst.stages[t].support[n[t]], 1.0);
      coef[pay_var(h)] += -1.0;
    }
    flush_row('>', 0.0);
  }

  LpSolution sol = solve_lp(lp);
  OptResult out;
  out.value = sol.value;
  for (const auto& [h, pr] : nodes) {
    int items = inst.stages[h.size() - 1].items;
    StageOutcome o;
    o.alloc.assign(items, 0.0);
    for (int c = 0; c < items; ++c)
      o.alloc[c] = std::clamp(sol.x[base[h] + c], 0.0, 1.0);
    o.pay = sol.x[pay_var(h)];
    out.mech.nodes[h] = o;
  }
  return out;
}

double evaluate_deviation(const DirectMechanism& m, const Instance& inst,
                          const DeviationStrategy& strat) {
  validate_instance(inst);
  if (!inst.all_discrete())
    fail("UnsupportedContinuous", "evaluate_deviation needs discrete stages");
  std::function<double(IndexPath&, IndexPath&, int)> go = [&](IndexPath& rep, IndexPath& truth,
                                                              int t) -> double {
    if (t == inst.T()) return 0.0;
    const auto& st = inst.stages[t];
    double e = 0.0;
    for (int i = 0; i < st.size(); ++i) {
      truth.push_back(i);
      int j = i;
      auto it = strat.find({rep, truth});
      if (it != strat.end()) {
        if (it->second < 0 || it->second >= st.size())
          fail("BadDeviation", "report out of range at " + path_str(truth));
        j = it->second;
      }
      rep.push_back(j);
      const StageOutcome& o = m.at(rep);
      e += st.probs[i] * (dot(o.alloc, st.support[i]) - o.pay + go(rep, truth, t + 1));
      rep.pop_back();
      truth.pop_back();
    }
    return e;
  };
  IndexPath rep, truth;
  return go(rep, truth, 0);
}

namespace {

McResult mc_run(const BankAccountMechanism& bam, const Instance& inst, uint64_t seed,
                uint64_t samples, bool parallel) {
  validate_instance(inst);
  if (bam.stages() != inst.T()) fail("BadPath", "stage count mismatch");
  if (samples == 0) fail("BadArgument", "samples must be positive");
  constexpr uint64_t kBlock = 4096;
  long long nblocks = static_cast<long long>((samples + kBlock - 1) / kBlock);
  Vec rs(nblocks, 0.0), rs2(nblocks, 0.0), us(nblocks, 0.0), us2(nblocks, 0.0);

#pragma omp parallel for schedule(static) if (parallel)
  for (long long b = 0; b < nblocks; ++b) {
    double sr = 0.0, sr2 = 0.0, su = 0.0, su2 = 0.0;
    uint64_t lo = static_cast<uint64_t>(b) * kBlock;
    uint64_t hi = std::min(samples, lo + kBlock);
    for (uint64_t idx = lo; idx < hi; ++idx) {
      SamplePath sp = sample_path(inst, seed, idx);
      double bal = 0.0, rev = 0.0, utl = 0.0;
      for (int t = 0; t < inst.T(); ++t) {
        const Vec& v = sp.values[t];
        double s = bam.spend(t, bal);
        double q = bam.charge(t, bal, v);
        rev += s + q;
        utl += dot(bam.alloc(t, bal, v), v) - q - s;
        bal += bam.deposit(t, bal, v) - s;
      }
      sr += rev;
      sr2 += rev * rev;
      su += utl;
      su2 += utl * utl;
    }
    rs[b] = sr;
    rs2[b] = sr2;
    us[b] = su;
    us2[b] = su2;
  }

  double r = 0.0, r2 = 0.0, u = 0.0, u2 = 0.0;
  for (long long b = 0; b < nblocks; ++b) {
    r += rs[b];
    r2 += rs2[b];
    u += us[b];
    u2 += us2[b];
  }
  McResult out;
  out.samples = samples;
  double n = static_cast<double>(samples);
  out.revenue_mean = r / n;
  out.utility_mean = u / n;
  if (samples > 1) {
    out.revenue_stderr = std::sqrt(std::max(0.0, (r2 - n * out.revenue_mean * out.revenue_mean) /
                                                     (n - 1)) /
                                   n);
    out.utility_stderr = std::sqrt(std::max(0.0, (u2 - n * out.utility_mean * out.utility_mean) /
                                                     (n - 1)) /
                                   n);
  }
  return out;
}

}  // namespace

McResult monte_carlo(const BankAccountMechanism& bam, const Instance& inst, uint64_t seed,
                     uint64_t samples) {
  return mc_run(bam, inst, seed, samples, true);
}

McResult monte_carlo_serial(const BankAccountMechanism& bam, const Instance& inst, uint64_t seed,
                            uint64_t samples) {
  return mc_run(bam, inst, seed, samples, false);
}

}  // namespace bamlab
