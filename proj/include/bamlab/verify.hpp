#pragma once

#include <map>
#include <utility>

#include "bamlab/bam.hpp"
#include "bamlab/model.hpp"
#include "bamlab/report.hpp"

namespace bamlab {

// Incentive compatibility, checked exhaustively: at every node and for every
// misreport, truthful reporting followed by truthful play must weakly beat
// the misreport followed by truthful play, where both sides carry the exact
// expected continuation utility of the reported history. Because the
// constraint is imposed at every node (on- and off-path alike), passing it
// makes truthful play optimal against arbitrary deviation plans by backward
// induction. Verdict "ic"; each violation becomes a witness.
VerificationReport check_ic(const DirectMechanism& m, const Instance& inst, double tol = 1e-7);

enum class IrMode { ExPost, StageWise };

// Individual rationality. ExPost: total utility on every full path is
// non-negative. StageWise: every single stage nets the buyer a non-negative
// utility (strictly stronger; the report then carries both verdicts, and a
// stage-wise pass is cross-checked against the ex-post sweep it implies).
VerificationReport check_ir(const DirectMechanism& m, const Instance& inst,
                            IrMode mode = IrMode::ExPost, double tol = 1e-7);

// The balance-local conditions making a BAM incentive compatible and
// rational, checked over every balance reachable from an empty account:
//  - stage_ic: at each reachable balance the stage mechanism is single-shot
//    IC in the reported value,
//  - spend_transfer: spend differences across reachable balances of a stage
//    equal the expected truthful stage-utility differences (sufficient, not
//    necessary, for IC across balances),
//  - bam_ir: truthful stage utility covers the deposit at every balance,
//  - structural: spends stay within balances, deposits and charges are
//    non-negative.
VerificationReport check_bam_conditions(const BankAccountMechanism& bam, const Instance& inst,
                                        double tol = 1e-7);

struct OptResult {
  DirectMechanism mech;
  double value = 0.0;
};

// Exact revenue maximization over all (possibly randomized) IC, ex-post IR
// direct mechanisms, as one LP over per-node allocations and payments.
// Throws InstanceTooLarge when the history tree exceeds node_cap().
OptResult bruteforce_opt(const Instance& inst);

// Tree-size guard for bruteforce_opt: BAMLAB_NODE_CAP overrides the default
// of 5000 nodes.
long long node_cap();

// A deviation plan: keyed by (reported prefix, true prefix including the
// current stage's true type), the value is the support index to report this
// stage. Missing keys report truthfully, so {} is the truthful strategy.
using DeviationStrategy = std::map<std::pair<IndexPath, IndexPath>, int>;

// Expected buyer utility when playing `strat` against the mechanism. The
// empty strategy reproduces Utl(M) exactly; on an IC mechanism no strategy
// does better.
double evaluate_deviation(const DirectMechanism& m, const Instance& inst,
                          const DeviationStrategy& strat);

struct McResult {
  double revenue_mean = 0.0;
  double utility_mean = 0.0;
  double revenue_stderr = 0.0;
  double utility_stderr = 0.0;
  uint64_t samples = 0;
};

// Unbiased Monte Carlo estimate of a BAM's expected revenue and buyer
// utility, sampling values by inverse CDF from hash(seed, index). Samples
// are processed in fixed 4096-draw blocks whose partial sums are combined
// in block order, so the result is bit-for-bit identical for a given
// (seed, samples) regardless of thread count. The mechanism must be defined
// on every value the instance can produce. monte_carlo may run blocks on
// OpenMP threads; monte_carlo_serial is the single-threaded reference and
// returns the identical result.
McResult monte_carlo(const BankAccountMechanism& bam, const Instance& inst, uint64_t seed,
                     uint64_t samples);
McResult monte_carlo_serial(const BankAccountMechanism& bam, const Instance& inst, uint64_t seed,
                            uint64_t samples);

}  // namespace bamlab
