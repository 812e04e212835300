#include "bamlab/cli_run.hpp"

#include <ostream>

#include "bamlab/approx.hpp"
#include "bamlab/dp.hpp"
#include "bamlab/json_io.hpp"
#include "bamlab/report.hpp"
#include "bamlab/verify.hpp"

namespace bamlab {

namespace {

void emit(std::ostream& out, const Json& j) { out << j.dump() << '\n'; }

Json report_json(const std::string& name, const VerificationReport& r) {
  Json j;
  j["check"] = name;
  Json verdicts = Json::object();
  for (const auto& [k, ok] : r.verdicts) verdicts[k] = ok;
  j["verdicts"] = std::move(verdicts);
  j["passed"] = r.passed();
  Json ws = Json::array();
  constexpr std::size_t kMaxWitnesses = 20;
  for (std::size_t i = 0; i < r.witnesses.size() && i < kMaxWitnesses; ++i) {
    const Witness& w = r.witnesses[i];
    Json x;
    x["constraint"] = w.constraint;
    x["history"] = w.history;
    x["deviation"] = w.deviation;
    x["lhs"] = w.lhs;
    x["rhs"] = w.rhs;
    x["slack"] = w.slack;
    ws.push_back(std::move(x));
  }
  j["witnesses"] = std::move(ws);
  j["witness_count"] = r.witnesses.size();
  return j;
}

Instance need_instance(const RunConfig& cfg) {
  if (cfg.instance_path.empty()) fail("BadArgument", "--instance is required");
  return load_instance(cfg.instance_path);
}

Json need_mechanism_json(const RunConfig& cfg) {
  if (cfg.mechanism_path.empty()) fail("BadArgument", "--mechanism is required");
  return load_json(cfg.mechanism_path);
}

Json mc_json(const McResult& mc) {
  Json j;
  j["revenue_mean"] = mc.revenue_mean;
  j["revenue_stderr"] = mc.revenue_stderr;
  j["utility_mean"] = mc.utility_mean;
  j["utility_stderr"] = mc.utility_stderr;
  j["samples"] = mc.samples;
  return j;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  Instance inst = need_instance(cfg);
  DpResult dp = backward_dp(inst, cfg.epsilon);
  ExtractResult ex = extract_mechanism(inst, dp);
  DirectMechanism m = induce_direct(ex.bam, inst);
  VerificationReport ic = check_ic(m, inst);
  VerificationReport ir = check_ir(m, inst);

  Json j;
  j["command"] = "solve";
  j["epsilon"] = dp.epsilon;
  j["value_lower"] = dp.value_lower;
  j["value_upper"] = dp.value_upper;
  j["xi_star"] = dp.xi_star;
  j["delta"] = dp.delta;
  j["breakpoints"] = dp.breakpoints;
  j["lp_count"] = dp.lp_count;
  j["revenue"] = ex.revenue;
  j["ic"] = ic.passed();
  j["ir"] = ir.passed();
  emit(out, j);
  if (!ic.passed()) emit(out, report_json("ic", ic));
  if (!ir.passed()) emit(out, report_json("ir", ir));
  if (!cfg.out_path.empty()) save_json(cfg.out_path, tabular_to_json(ex.bam));
  return ic.passed() && ir.passed() ? 0 : 1;
}

int cmd_approx(const RunConfig& cfg, std::ostream& out) {
  Instance inst = need_instance(cfg);
  Json j;
  j["command"] = "approx";
  j["mech"] = cfg.mech;
  if (cfg.mech == "sigma") {
    BestDeterministicResult best = best_deterministic(inst);
    j["sigma"] = best.sigma;
    j["sigma_revenue"] = best.sigma_revenue;
    j["msm_revenue"] = best.msm_revenue;
    j["revenue"] = best.revenue;
    emit(out, j);
    return 0;
  }
  LambdaBam bam;
  if (cfg.mech == "three") {
    bam = three_approx(inst);
  } else if (cfg.mech == "alpha") {
    bam = corollary_alpha(inst, cfg.alpha);
    j["alpha"] = cfg.alpha;
  } else {
    fail("BadArgument", "--mech must be three, alpha or sigma");
  }
  if (inst.all_discrete()) {
    j["revenue"] = bam_revenue(bam, inst);
    j["revenue_kind"] = "exact";
    RevenueUpperBound ub = revenue_upper_bound(inst);
    Json b;
    b["msm_revenue"] = ub.msm_revenue;
    b["expected_spend_star"] = ub.expected_spend_star;
    b["total"] = ub.total;
    j["upper_bound"] = std::move(b);
  } else {
    McResult mc = monte_carlo(bam, inst, cfg.seed, cfg.samples);
    j["revenue"] = mc.revenue_mean;
    j["revenue_kind"] = "monte_carlo";
    j["monte_carlo"] = mc_json(mc);
  }
  emit(out, j);
  return 0;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  Instance inst = need_instance(cfg);
  Json mj = need_mechanism_json(cfg);
  bool all_ok = true;
  if (mj.contains("nodes")) {
    DirectMechanism m = mechanism_from_json(mj);
    VerificationReport ic = check_ic(m, inst);
    VerificationReport ir = check_ir(m, inst);
    emit(out, report_json("ic", ic));
    emit(out, report_json("ir", ir));
    all_ok = ic.passed() && ir.passed();
  } else if (mj.contains("stages")) {
    TabularBam bam = tabular_from_json(mj);
    VerificationReport conds = check_bam_conditions(bam, inst);
    emit(out, report_json("bam_conditions", conds));
    DirectMechanism m = induce_direct(bam, inst);
    VerificationReport ic = check_ic(m, inst);
    VerificationReport ir = check_ir(m, inst);
    emit(out, report_json("ic", ic));
    emit(out, report_json("ir", ir));
    all_ok = conds.passed() && ic.passed() && ir.passed();
  } else {
    fail("JsonShape", "mechanism file has neither \"nodes\" nor \"stages\"");
  }
  return all_ok ? 0 : 1;
}

int cmd_bound(const RunConfig& cfg, std::ostream& out) {
  Instance inst = need_instance(cfg);
  RevenueUpperBound ub = revenue_upper_bound(inst);
  Json j;
  j["command"] = "bound";
  j["msm_revenue"] = ub.msm_revenue;
  j["expected_spend_star"] = ub.expected_spend_star;
  j["total"] = ub.total;
  emit(out, j);
  return 0;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  Instance inst = need_instance(cfg);
  OptResult opt = bruteforce_opt(inst);
  Json j;
  j["command"] = "oracle";
  j["value"] = opt.value;
  emit(out, j);
  if (!cfg.out_path.empty()) save_json(cfg.out_path, mechanism_to_json(opt.mech));
  return 0;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  Instance inst = need_instance(cfg);
  Json mj = need_mechanism_json(cfg);
  if (!mj.contains("stages"))
    fail("BadArgument", "simulate expects an account mechanism file (tabular form)");
  TabularBam bam = tabular_from_json(mj);
  McResult mc = monte_carlo(bam, inst, cfg.seed, cfg.samples);
  Json j;
  j["command"] = "simulate";
  j["seed"] = cfg.seed;
  Json m = mc_json(mc);
  for (auto& [k, v] : m.items()) j[k] = v;
  emit(out, j);
  return 0;
}

int cmd_example1(const RunConfig& cfg, std::ostream& out) {
  double v = cfg.v_max;
  Instance inst = example1_instance(v);
  LambdaBam bam = example1_bam(v);
  McResult mc = monte_carlo(bam, inst, cfg.seed, cfg.samples);
  Json j;
  j["command"] = "example1";
  j["v_max"] = v;
  j["revenue"] = example1_revenue(v);
  j["stage_by_stage_revenue"] = 2.0;  // the best any per-stage design earns here
  j["monte_carlo"] = mc_json(mc);
  emit(out, j);
  return 0;
}

int dispatch(const RunConfig& cfg, std::ostream& out) {
  if (cfg.command == "solve") return cmd_solve(cfg, out);
  if (cfg.command == "approx") return cmd_approx(cfg, out);
  if (cfg.command == "check") return cmd_check(cfg, out);
  if (cfg.command == "bound") return cmd_bound(cfg, out);
  if (cfg.command == "oracle") return cmd_oracle(cfg, out);
  if (cfg.command == "simulate") return cmd_simulate(cfg, out);
  if (cfg.command == "example1") return cmd_example1(cfg, out);
  fail("BadArgument", "unknown command \"" + cfg.command + "\"");
}

}  // namespace

int run_command(const RunConfig& cfg, std::ostream& out) {
  try {
    return dispatch(cfg, out);
  } catch (const Error& e) {
    Json j;
    j["error"] = e.code();
    j["message"] = e.what();
    emit(out, j);
    return 2;
  } catch (const std::exception& e) {
    Json j;
    j["error"] = "Internal";
    j["message"] = e.what();
    emit(out, j);
    return 2;
  }
}

}  // namespace bamlab
