#pragma once

#include <map>

#include "bamlab/bam.hpp"
#include "bamlab/model.hpp"
#include "bamlab/report.hpp"

namespace bamlab {

// A promise/allocation pair on the history tree. g maps every node —
// including the empty history — to the buyer's conditional expected utility
// promised there; y maps every non-root node to the allocation made on
// arrival. Together they pin down a bank account mechanism (see
// construct_core_bam): balances are shifted promises, deposits are realized
// stage utilities, and spends close the accounting identity.
struct CoreBamSpec {
  std::map<IndexPath, double> g;
  std::map<IndexPath, Vec> y;
};

// The four conditions under which the (g, y) construction is a valid BAM:
//  - allocations lie in [0,1] and recover the slopes of g in the stage value
//    (for one item the slope equality is forced; with several items we check
//    the subgradient inequalities instead),
//  - g is consistent: g(h) - E[g(h.i)] is the same constant at every node of
//    a given depth,
//  - g is symmetric: nodes with equal promise carry identical continuation
//    promises and allocations,
//  - the implied spend is determined by the balance alone and never exceeds
//    it.
// Verdicts: complete, allocation_range, monotone_allocation, envelope (or
// subgradient), consistency, symmetry, spend_determined, spend_within_balance.
VerificationReport validate_core(const CoreBamSpec& spec, const Instance& inst);

// Builds the tabular BAM from (g, y): bal(h) = g(h) - min_h' g(h'), z = y,
// charges by the standard payment identity, deposits equal to realized stage
// utility, spends closing bal' = bal - s + d. Throws CoreBamInvalid naming
// every violated condition if validate_core does not pass.
TabularBam construct_core_bam(const CoreBamSpec& spec, const Instance& inst);

// Stage utilities each type earns under allocation table y (row per support
// type), following the payment rule that charges the full value minus the
// integral of the allocation from the origin to the type. One item: the
// usual sum of lower slopes. Several items: a path integral along the ray
// from the origin through the type's value vector, with allocation zero
// below the smallest support point on that ray.
Vec implied_stage_utilities(const std::vector<Vec>& support, const std::vector<Vec>& y);

// Rewrites payments so the buyer pays their bid in every stage but the last,
// which absorbs the difference. Per-path payment totals are unchanged, so
// IC, utility, and revenue are untouched, while every non-final stage nets
// the buyer exactly zero. Requires an ex-post IR input (throws NotExPostIR
// with the offending path otherwise) so the final stage stays rational.
DirectMechanism shift_to_stagewise_ir(const DirectMechanism& m, const Instance& inst);

// Level by level, groups histories with equal conditional utility (1e-9
// relative tolerance) and grafts onto each class the continuation of the
// member with the highest expected future revenue (ties: lexicographically
// smallest history). Buyer utility is preserved; revenue weakly increases;
// a deterministic input stays deterministic. Expects pay-your-bid payments
// in non-final stages — run shift_to_stagewise_ir first.
DirectMechanism symmetrize(const DirectMechanism& m, const Instance& inst);

// Reads (g, y) off a symmetric mechanism: g = conditional utilities,
// y = allocations. Throws NotSymmetricOrNotIC if the extracted pair fails
// validate_core.
CoreBamSpec core_bam_from_symmetric(const DirectMechanism& m, const Instance& inst);

// Full reduction: shift to stage-wise IR, symmetrize, extract (g, y),
// construct. The result is a BAM with the same buyer utility as m and at
// least its revenue.
TabularBam bam_from_direct(const DirectMechanism& m, const Instance& inst);

}  // namespace bamlab
