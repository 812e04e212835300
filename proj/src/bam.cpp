#include "bamlab/bam.hpp"

#include <algorithm>
#include <cmath>

#include "bamlab/report.hpp"

namespace bamlab {

double bam_stage_utility(const BankAccountMechanism& bam, int t, double bal, const Vec& report,
                         const Vec& truth) {
  return dot(bam.alloc(t, bal, report), truth) - bam.charge(t, bal, report);
}

double BamTrace::payment_total() const { return sum(charges) + sum(spends); }

BamTrace run_bam(const BankAccountMechanism& bam, const Instance& inst, const IndexPath& path) {
  int T = bam.stages();
  if (static_cast<int>(path.size()) != T || T != inst.T())
    fail("BadPath", "path length does not match the number of stages");
  BamTrace tr;
  tr.balances.assign(T + 1, 0.0);
  double bal = 0.0;
  for (int t = 0; t < T; ++t) {
    const Vec& v = inst.stages[t].support.at(path[t]);
    double s = bam.spend(t, bal);
    if (s > bal + 1e-9)
      fail("SpendExceedsBalance", "stage " + std::to_string(t) + ": spend " + std::to_string(s) +
                                      " > balance " + std::to_string(bal));
    double d = bam.deposit(t, bal, v);
    if (d < -1e-9) fail("NegativeDeposit", "stage " + std::to_string(t));
    tr.allocs.push_back(bam.alloc(t, bal, v));
    tr.charges.push_back(bam.charge(t, bal, v));
    tr.spends.push_back(s);
    tr.deposits.push_back(d);
    bal = bal - s + d;
    tr.balances[t + 1] = bal;
  }
  return tr;
}

DirectMechanism induce_direct(const BankAccountMechanism& bam, const Instance& inst) {
  if (bam.stages() != inst.T()) fail("BadPath", "stage count mismatch");
  for (const auto& st : inst.stages)
    if (!st.is_discrete())
      fail("UnsupportedContinuous", "cannot enumerate a continuous type space");
  DirectMechanism m;
  IndexPath h;
  std::function<void(int, double)> walk = [&](int t, double bal) {
    if (t == inst.T()) return;
    double s = bam.spend(t, bal);
    if (s > bal + 1e-9)
      fail("SpendExceedsBalance", "stage " + std::to_string(t) + " at history " + path_str(h));
    for (int i = 0; i < inst.stages[t].size(); ++i) {
      const Vec& v = inst.stages[t].support[i];
      double d = bam.deposit(t, bal, v);
      if (d < -1e-9) fail("NegativeDeposit", "stage " + std::to_string(t) + " type " + std::to_string(i));
      h.push_back(i);
      m.nodes[h] = {bam.alloc(t, bal, v), s + bam.charge(t, bal, v)};
      walk(t + 1, bal - s + d);
      h.pop_back();
    }
  };
  walk(0, 0.0);
  return m;
}

double bam_revenue(const BankAccountMechanism& bam, const Instance& inst) {
  return expected_totals(induce_direct(bam, inst), inst).revenue;
}

int TabularBam::balance_index(int t, double bal) const {
  const Vec& bs = policy.at(t).balances;
  if (bs.empty()) fail("BalanceNotTabulated", "stage " + std::to_string(t) + " has no table");
  auto it = std::lower_bound(bs.begin(), bs.end(), bal);
  int j = static_cast<int>(it - bs.begin());
  int best = -1;
  double best_gap = 0.0;
  for (int c : {j - 1, j}) {
    if (c < 0 || c >= static_cast<int>(bs.size())) continue;
    double gap = std::abs(bs[c] - bal);
    if (best < 0 || gap < best_gap) {
      best = c;
      best_gap = gap;
    }
  }
  if (best_gap > 1e-6 * std::max(1.0, std::abs(bal)))
    fail("BalanceNotTabulated", "stage " + std::to_string(t) + ": balance " + std::to_string(bal) +
                                    " is " + std::to_string(best_gap) + " from the nearest table row");
  return best;
}

int TabularBam::type_index(int t, const Vec& v) const {
  const auto& sup = policy.at(t).support;
  for (size_t i = 0; i < sup.size(); ++i)
    if (sup[i] == v) return static_cast<int>(i);
  for (size_t i = 0; i < sup.size(); ++i) {
    bool close = sup[i].size() == v.size();
    for (size_t j = 0; close && j < v.size(); ++j)
      close = std::abs(sup[i][j] - v[j]) <= 1e-12 * std::max(1.0, std::abs(v[j]));
    if (close) return static_cast<int>(i);
  }
  fail("ValueNotInSupport", "stage " + std::to_string(t));
}

Vec TabularBam::alloc(int t, double bal, const Vec& v) const {
  return policy[t].z[balance_index(t, bal)][type_index(t, v)];
}

double TabularBam::charge(int t, double bal, const Vec& v) const {
  return policy[t].q[balance_index(t, bal)][type_index(t, v)];
}

double TabularBam::deposit(int t, double bal, const Vec& v) const {
  return policy[t].d[balance_index(t, bal)][type_index(t, v)];
}

double TabularBam::spend(int t, double bal) const {
  return policy[t].spends[balance_index(t, bal)];
}

}  // namespace bamlab
