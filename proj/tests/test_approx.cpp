#include <cmath>

#include "bamlab/approx.hpp"
#include "bamlab/common.hpp"
#include "bamlab/verify.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bamlab;

namespace {

Instance two_uniform() {
  Instance inst;
  inst.stages.push_back(StageDistribution::one_item({1.0, 2.0}, {0.5, 0.5}));
  inst.stages.push_back(StageDistribution::one_item({1.0, 2.0}, {0.5, 0.5}));
  return inst;
}

}  // namespace

TEST_SUITE("approx") {

TEST_CASE("benchmark account: free allocation, full deposit, capped spend") {
  Instance inst = two_uniform();
  LambdaBam star = b_star(inst);
  BamTrace tr = run_bam(star, inst, {1, 0});  // v = (2, 1)
  CHECK(tr.allocs[0][0] == doctest::Approx(1.0));
  CHECK(tr.charges[0] == doctest::Approx(0.0));
  CHECK(tr.deposits[0] == doctest::Approx(2.0));
  CHECK(tr.spends[0] == doctest::Approx(0.0));          // nothing banked yet
  CHECK(tr.spends[1] == doctest::Approx(1.5));          // min(bal 2, Val 1.5)
  CHECK(tr.balances[2] == doctest::Approx(2.0 - 1.5 + 1.0));

  Vec s = spend_star_path(inst, values_on_path(inst, {1, 0}));
  REQUIRE(s.size() == 2);
  CHECK(s[0] == doctest::Approx(tr.spends[0]));
  CHECK(s[1] == doctest::Approx(tr.spends[1]));

  // E[s*_2] = E[min(v1, 1.5)] = 0.5 * 1 + 0.5 * 1.5.
  CHECK(expected_spend_star(inst) == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("no feasible deposit/spend policy beats the benchmark spend on any prefix") {
  Instance inst = two_uniform();
  Rng rng(314);
  auto paths = enumerate_paths(inst);
  for (int trial = 0; trial < 200; ++trial) {
    const IndexPath& path = paths[trial % paths.size()].first;
    auto vals = values_on_path(inst, path);
    Vec sstar = spend_star_path(inst, vals);
    double bal = 0.0, acc = 0.0, acc_star = 0.0;
    for (int t = 0; t < 2; ++t) {
      double cap = std::min(bal, inst.stages[t].val());
      double s = rng.uniform(-0.25 * inst.stages[t].val(), cap);
      double d = rng.uniform(0.0, vals[t][0]);
      bal = bal - s + d;
      acc += s;
      acc_star += sstar[t];
      CHECK(acc <= acc_star + 1e-9);
    }
  }
}

TEST_CASE("revenue upper bound on the uniform pair is exactly 3.25") {
  Instance inst = two_uniform();
  RevenueUpperBound ub = revenue_upper_bound(inst);
  CHECK(ub.msm_revenue == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ub.expected_spend_star == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(ub.total == doctest::Approx(3.25).epsilon(1e-12));

  // The tree walk behind the spend term needs discrete stages.
  CHECK_THROWS_AS(revenue_upper_bound(example1_instance(10.0)), Error);
}

TEST_CASE("the one-third account tracks the benchmark at exactly one third") {
  Instance inst = two_uniform();
  LambdaBam third = three_approx(inst);
  LambdaBam star = b_star(inst);
  for (const auto& [path, pr] : enumerate_paths(inst)) {
    (void)pr;
    BamTrace a = run_bam(third, inst, path);
    BamTrace b = run_bam(star, inst, path);
    for (int t = 0; t < 2; ++t) {
      CHECK(a.balances[t] == doctest::Approx(b.balances[t] / 3.0).epsilon(1e-12));
      CHECK(a.deposits[t] == doctest::Approx(b.deposits[t] / 3.0).epsilon(1e-12));
      CHECK(a.spends[t] == doctest::Approx(b.spends[t] / 3.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("the one-third account earns at least a third of the exact optimum") {
  Instance inst = two_uniform();
  LambdaBam third = three_approx(inst);
  double rev = bam_revenue(third, inst);
  OptResult opt = bruteforce_opt(inst);
  RevenueUpperBound ub = revenue_upper_bound(inst);
  CHECK(rev >= opt.value / 3.0 - 1e-7);
  CHECK(rev <= ub.total + 1e-9);
  CHECK(opt.value <= ub.total + 1e-9);

  CHECK(check_bam_conditions(third, inst).passed());
  DirectMechanism induced = induce_direct(third, inst);
  CHECK(check_ic(induced, inst).passed());
  CHECK(check_ir(induced, inst).passed());
}

TEST_CASE("general mixing weight: alpha = 2 tracks the benchmark at two fifths") {
  Instance inst = two_uniform();
  LambdaBam mix = corollary_alpha(inst, 2.0);
  LambdaBam star = b_star(inst);
  double wa = 2.0 / 5.0;
  for (const auto& [path, pr] : enumerate_paths(inst)) {
    (void)pr;
    BamTrace a = run_bam(mix, inst, path);
    BamTrace b = run_bam(star, inst, path);
    for (int t = 0; t < 2; ++t) {
      CHECK(a.balances[t + 1] == doctest::Approx(wa * b.balances[t + 1]).epsilon(1e-12));
      CHECK(a.spends[t] == doctest::Approx(wa * b.spends[t]).epsilon(1e-12));
    }
  }
  CHECK(check_bam_conditions(mix, inst).passed());
  CHECK_THROWS_AS(corollary_alpha(inst, 0.0), Error);
}

TEST_CASE("alpha = 1 reproduces the one-third account node by node") {
  Instance inst = two_uniform();
  DirectMechanism a = induce_direct(corollary_alpha(inst, 1.0), inst);
  DirectMechanism b = induce_direct(three_approx(inst), inst);
  for (const auto& [h, o] : a.nodes) {
    CHECK(o.pay == doctest::Approx(b.at(h).pay).epsilon(1e-12));
    CHECK(o.alloc[0] == doctest::Approx(b.at(h).alloc[0]).epsilon(1e-12));
  }
}

TEST_CASE("bit-string accounts have the frozen revenues on the uniform pair") {
  Instance inst = two_uniform();
  CHECK(bam_revenue(sigma_bam(inst, {0, 0}), inst) == doctest::Approx(0.0).scale(1.0));
  CHECK(bam_revenue(sigma_bam(inst, {0, 1}), inst) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(bam_revenue(sigma_bam(inst, {1, 0}), inst) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bam_revenue(sigma_bam(inst, {1, 1}), inst) == doctest::Approx(2.0).epsilon(1e-12));

  // Every bit-string account is deterministic and passes the BAM checks.
  DirectMechanism m = induce_direct(sigma_bam(inst, {0, 1}), inst);
  CHECK(m.deterministic());
  CHECK(check_ic(m, inst).passed());
  CHECK(check_ir(m, inst).passed());
}

TEST_CASE("best_deterministic sweeps the strings and the stage-by-stage baseline") {
  Instance inst = two_uniform();
  BestDeterministicResult r = best_deterministic(inst);
  CHECK(r.revenue == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.msm_revenue == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.sigma_revenue == doctest::Approx(2.0).epsilon(1e-12));
  CHECK((r.sigma == SigmaString{1, 1}));

  // The guarantee it is used for: at least (expected benchmark spend) / 4
  // from the strings alone, and at least a fifth of the optimum overall.
  CHECK(r.sigma_revenue >= expected_spend_star(inst) / 4.0 - 1e-9);
  CHECK(r.revenue >= bruteforce_opt(inst).value / 5.0 - 1e-9);

  Instance big;
  for (int t = 0; t < 21; ++t)
    big.stages.push_back(StageDistribution::one_item({1.0, 2.0}, {0.5, 0.5}));
  CHECK_THROWS_WITH_AS(best_deterministic(big), doctest::Contains("SigmaEnumerationTooLarge"),
                       Error);
}

TEST_CASE("the two-stage heavy-tail construction beats stage-by-stage selling") {
  double vmax = std::exp(3.0);
  CHECK(example1_revenue(vmax) == doctest::Approx(2.0 + std::log(4.0)).epsilon(1e-12));
  CHECK(example1_revenue(vmax) ==
        doctest::Approx(oracles::example1_quadrature(vmax)).epsilon(1e-8));
  // Any fixed single price earns exactly 1 per stage on this tail.
  CHECK(example1_revenue(vmax) > 2.0);

  Instance inst = example1_instance(vmax);
  REQUIRE(inst.T() == 2);
  CHECK(inst.stages[0].v_max == doctest::Approx(vmax));

  LambdaBam bam = example1_bam(vmax);
  McResult mc = monte_carlo(bam, inst, 2024, 60000);
  CHECK(std::abs(mc.revenue_mean - example1_revenue(vmax)) <=
        5.0 * mc.revenue_stderr + 1e-12);
}

}  // TEST_SUITE
