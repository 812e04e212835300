#pragma once

#include <functional>
#include <vector>

#include "bamlab/model.hpp"

namespace bamlab {

// A bank account mechanism is a per-stage tuple (z, q, d, s): allocation,
// charge, deposit, and spend. Every policy sees the balance as it stands at
// the *start* of the stage; the update applied after the stage is
//   bal' = bal - s(bal) + d(bal, v).
// Stage indices are 0-based throughout, matching Instance::stages.
class BankAccountMechanism {
 public:
  virtual ~BankAccountMechanism() = default;
  virtual int stages() const = 0;
  virtual Vec alloc(int t, double bal, const Vec& v) const = 0;
  virtual double charge(int t, double bal, const Vec& v) const = 0;
  virtual double deposit(int t, double bal, const Vec& v) const = 0;
  virtual double spend(int t, double bal) const = 0;
};

// Stage utility under report r when the true values are v:
// z(bal, r).v - q(bal, r).
double bam_stage_utility(const BankAccountMechanism& bam, int t, double bal, const Vec& report,
                         const Vec& truth);

struct BamTrace {
  std::vector<Vec> allocs;
  Vec charges, deposits, spends;
  Vec balances;  // size T+1; balances[0] = 0 is the opening balance
  double payment_total() const;
};

// Simulate one path of type indices through the mechanism. Throws
// SpendExceedsBalance / NegativeDeposit when a policy is infeasible.
BamTrace run_bam(const BankAccountMechanism& bam, const Instance& inst, const IndexPath& path);

// The direct mechanism a BAM induces: x = z and p = s + q node by node.
DirectMechanism induce_direct(const BankAccountMechanism& bam, const Instance& inst);

double bam_revenue(const BankAccountMechanism& bam, const Instance& inst);

// BAM given by callables; convenient for the closed-form constructions.
class LambdaBam final : public BankAccountMechanism {
 public:
  int T = 0;
  std::function<Vec(int, double, const Vec&)> alloc_f;
  std::function<double(int, double, const Vec&)> charge_f;
  std::function<double(int, double, const Vec&)> deposit_f;
  std::function<double(int, double)> spend_f;

  int stages() const override { return T; }
  Vec alloc(int t, double bal, const Vec& v) const override { return alloc_f(t, bal, v); }
  double charge(int t, double bal, const Vec& v) const override { return charge_f(t, bal, v); }
  double deposit(int t, double bal, const Vec& v) const override { return deposit_f(t, bal, v); }
  double spend(int t, double bal) const override { return spend_f(t, bal); }
};

// BAM stored as per-stage tables over (reachable balance, support value).
// Lookups snap to the nearest tabulated balance within a 1e-6 relative
// tolerance and fail loudly beyond it, so a drifting simulation cannot
// silently read a neighbouring policy.
struct StagePolicy {
  std::vector<Vec> support;            // value vectors this stage can see
  Vec balances;                        // sorted ascending, deduplicated
  Vec spends;                          // aligned with balances
  std::vector<std::vector<Vec>> z;     // [balance][type] -> allocation
  std::vector<std::vector<double>> q;  // [balance][type] -> charge
  std::vector<std::vector<double>> d;  // [balance][type] -> deposit
};

class TabularBam final : public BankAccountMechanism {
 public:
  std::vector<StagePolicy> policy;
  double promised_utility = 0.0;  // buyer utility the construction promises

  int stages() const override { return static_cast<int>(policy.size()); }
  Vec alloc(int t, double bal, const Vec& v) const override;
  double charge(int t, double bal, const Vec& v) const override;
  double deposit(int t, double bal, const Vec& v) const override;
  double spend(int t, double bal) const override;

  int balance_index(int t, double bal) const;
  int type_index(int t, const Vec& v) const;
};

}  // namespace bamlab
