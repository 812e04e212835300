#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bamlab/cli_run.hpp"
#include "bamlab/common.hpp"
#include "bamlab/json_io.hpp"
#include "bamlab/verify.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bamlab;
namespace fs = std::filesystem;

namespace {

Instance two_uniform() {
  Instance inst;
  inst.stages.push_back(StageDistribution::one_item({1.0, 2.0}, {0.5, 0.5}));
  inst.stages.push_back(StageDistribution::one_item({1.0, 2.0}, {0.5, 0.5}));
  return inst;
}

std::string tmp_path(const std::string& name) {
  return (fs::temp_directory_path() / ("bamlab_cli_" + name)).string();
}

std::string write_json(const std::string& name, const Json& j) {
  std::string p = tmp_path(name);
  save_json(p, j);
  return p;
}

std::vector<Json> parse_lines(const std::string& s) {
  std::vector<Json> out;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(Json::parse(line));
  return out;
}

struct RunOutcome {
  int code = 0;
  std::string text;
  std::vector<Json> lines;
};

RunOutcome run(const RunConfig& cfg) {
  std::ostringstream out;
  RunOutcome r;
  r.code = run_command(cfg, out);
  r.text = out.str();
  r.lines = parse_lines(r.text);
  return r;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("bound command reports the frozen components") {
  std::string inst = write_json("pair.json", instance_to_json(two_uniform()));
  RunConfig cfg;
  cfg.command = "bound";
  cfg.instance_path = inst;
  RunOutcome r = run(cfg);
  REQUIRE(r.code == 0);
  REQUIRE(r.lines.size() == 1);
  const Json& j = r.lines[0];
  CHECK(j.at("command") == "bound");
  CHECK(j.at("msm_revenue").get<double>() == doctest::Approx(2.0));
  CHECK(j.at("expected_spend_star").get<double>() == doctest::Approx(1.25));
  CHECK(j.at("total").get<double>() == doctest::Approx(3.25));
}

TEST_CASE("solve emits a certified bracket, saves the account, and repeats itself") {
  std::string inst = write_json("pair.json", instance_to_json(two_uniform()));
  std::string saved = tmp_path("pair_solution.json");
  RunConfig cfg;
  cfg.command = "solve";
  cfg.instance_path = inst;
  cfg.epsilon = 0.05;
  cfg.out_path = saved;
  RunOutcome r = run(cfg);
  REQUIRE(r.code == 0);
  REQUIRE(!r.lines.empty());
  const Json& j = r.lines[0];
  CHECK(j.at("command") == "solve");
  double lo = j.at("value_lower").get<double>(), hi = j.at("value_upper").get<double>();
  CHECK(lo <= hi + 1e-12);
  CHECK(lo >= 0.95 * hi - 1e-12);
  CHECK(j.at("revenue").get<double>() >= lo - 1e-6);
  CHECK(j.at("ic") == true);
  CHECK(j.at("ir") == true);
  CHECK(j.at("lp_count").get<long long>() > 0);

  // The saved account round-trips and keeps the promise.
  TabularBam bam = tabular_from_json(load_json(saved));
  CHECK(bam.promised_utility == doctest::Approx(j.at("xi_star").get<double>()));
  CHECK(bam.stages() == 2);

  // Same inputs, byte-identical output.
  RunOutcome again = run(cfg);
  CHECK(again.code == 0);
  CHECK(again.text == r.text);
}

TEST_CASE("solve validates its inputs through exit code 2") {
  std::string inst = write_json("pair.json", instance_to_json(two_uniform()));
  RunConfig cfg;
  cfg.command = "solve";
  cfg.instance_path = inst;
  cfg.epsilon = 0.0;
  RunOutcome r = run(cfg);
  CHECK(r.code == 2);
  REQUIRE(r.lines.size() == 1);
  CHECK(r.lines[0].at("error") == "BadArgument");

  Instance er;
  er.stages.push_back(StageDistribution::equal_revenue(10.0));
  RunConfig cfg2;
  cfg2.command = "solve";
  cfg2.instance_path = write_json("er.json", instance_to_json(er));
  RunOutcome r2 = run(cfg2);
  CHECK(r2.code == 2);
  CHECK(r2.lines[0].at("error") == "UnsupportedContinuous");
}

TEST_CASE("oracle agrees with the solver bracket and exports a checkable mechanism") {
  std::string inst = write_json("pair.json", instance_to_json(two_uniform()));
  std::string saved = tmp_path("pair_oracle.json");
  RunConfig cfg;
  cfg.command = "oracle";
  cfg.instance_path = inst;
  cfg.out_path = saved;
  RunOutcome r = run(cfg);
  REQUIRE(r.code == 0);
  double value = r.lines[0].at("value").get<double>();
  CHECK(value == doctest::Approx(bruteforce_opt(two_uniform()).value).epsilon(1e-9));

  RunConfig chk;
  chk.command = "check";
  chk.instance_path = inst;
  chk.mechanism_path = saved;
  RunOutcome cr = run(chk);
  CHECK(cr.code == 0);
  REQUIRE(cr.lines.size() == 2);  // ic and ir reports
  CHECK(cr.lines[0].at("check") == "ic");
  CHECK(cr.lines[0].at("passed") == true);
  CHECK(cr.lines[1].at("check") == "ir");
  CHECK(cr.lines[1].at("passed") == true);

  Instance big;
  for (int t = 0; t < 12; ++t)
    big.stages.push_back(StageDistribution::one_item({1.0, 2.0, 3.0}, {0.3, 0.3, 0.4}));
  RunConfig huge;
  huge.command = "oracle";
  huge.instance_path = write_json("big.json", instance_to_json(big));
  RunOutcome hr = run(huge);
  CHECK(hr.code == 2);
  CHECK(hr.lines[0].at("error") == "InstanceTooLarge");
}

TEST_CASE("check fails violators with exit 1 and witnesses") {
  Instance inst = two_uniform();
  DirectMechanism bad = oracles::random_ic_ir_mechanism(inst, 77, false);
  bad.nodes.at({0, 1}).pay -= 5.0;  // low type now wants to report high
  std::string mpath = write_json("bad_mech.json", mechanism_to_json(bad));
  RunConfig cfg;
  cfg.command = "check";
  cfg.instance_path = write_json("pair.json", instance_to_json(inst));
  cfg.mechanism_path = mpath;
  RunOutcome r = run(cfg);
  CHECK(r.code == 1);
  REQUIRE(r.lines.size() == 2);
  CHECK(r.lines[0].at("check") == "ic");
  CHECK(r.lines[0].at("passed") == false);
  CHECK(r.lines[0].at("witness_count").get<int>() >= 1);
  REQUIRE(!r.lines[0].at("witnesses").empty());
  const Json& w = r.lines[0].at("witnesses").at(0);
  CHECK(w.contains("history"));
  CHECK(w.contains("deviation"));
  CHECK(w.at("slack").get<double>() < 0.0);
}

TEST_CASE("check of a saved account runs the account conditions too") {
  std::string inst = write_json("pair.json", instance_to_json(two_uniform()));
  std::string saved = tmp_path("pair_solution2.json");
  RunConfig solve;
  solve.command = "solve";
  solve.instance_path = inst;
  solve.out_path = saved;
  REQUIRE(run(solve).code == 0);

  RunConfig chk;
  chk.command = "check";
  chk.instance_path = inst;
  chk.mechanism_path = saved;
  RunOutcome r = run(chk);
  CHECK(r.code == 0);
  REQUIRE(r.lines.size() == 3);
  CHECK(r.lines[0].at("check") == "bam_conditions");
  for (const Json& line : r.lines) CHECK(line.at("passed") == true);

  // A mechanism file with neither shape is a usage error.
  RunConfig bad;
  bad.command = "check";
  bad.instance_path = inst;
  bad.mechanism_path = write_json("odd.json", Json{{"stuff", 1}});
  RunOutcome br = run(bad);
  CHECK(br.code == 2);
  CHECK(br.lines[0].at("error") == "JsonShape");
}

TEST_CASE("simulate estimates the saved account's revenue") {
  std::string inst = write_json("pair.json", instance_to_json(two_uniform()));
  std::string saved = tmp_path("pair_solution3.json");
  RunConfig solve;
  solve.command = "solve";
  solve.instance_path = inst;
  solve.out_path = saved;
  RunOutcome sr = run(solve);
  REQUIRE(sr.code == 0);
  double exact = sr.lines[0].at("revenue").get<double>();

  RunConfig sim;
  sim.command = "simulate";
  sim.instance_path = inst;
  sim.mechanism_path = saved;
  sim.samples = 20000;
  sim.seed = 5;
  RunOutcome r = run(sim);
  REQUIRE(r.code == 0);
  const Json& j = r.lines[0];
  CHECK(j.at("command") == "simulate");
  CHECK(j.at("samples").get<int>() == 20000);
  double mean = j.at("revenue_mean").get<double>();
  double se = j.at("revenue_stderr").get<double>();
  CHECK(std::abs(mean - exact) <= 5.0 * se + 1e-9);

  // Simulating a direct-mechanism file is a usage error.
  DirectMechanism m = oracles::random_ic_ir_mechanism(two_uniform(), 1, false);
  RunConfig bad = sim;
  bad.mechanism_path = write_json("direct.json", mechanism_to_json(m));
  RunOutcome br = run(bad);
  CHECK(br.code == 2);
  CHECK(br.lines[0].at("error") == "BadArgument");
}

TEST_CASE("approx commands cover the three constructions") {
  std::string inst = write_json("pair.json", instance_to_json(two_uniform()));
  RunConfig three;
  three.command = "approx";
  three.instance_path = inst;
  three.mech = "three";
  RunOutcome tr = run(three);
  REQUIRE(tr.code == 0);
  CHECK(tr.lines[0].at("revenue_kind") == "exact");
  CHECK(tr.lines[0].at("upper_bound").at("total").get<double>() == doctest::Approx(3.25));
  CHECK(tr.lines[0].at("revenue").get<double>() >=
        tr.lines[0].at("upper_bound").at("total").get<double>() / 3.0 - 1e-7);

  RunConfig alpha = three;
  alpha.mech = "alpha";
  alpha.alpha = 2.0;
  RunOutcome ar = run(alpha);
  REQUIRE(ar.code == 0);
  CHECK(ar.lines[0].at("alpha").get<double>() == doctest::Approx(2.0));

  RunConfig sigma = three;
  sigma.mech = "sigma";
  RunOutcome sr = run(sigma);
  REQUIRE(sr.code == 0);
  CHECK(sr.lines[0].at("revenue").get<double>() == doctest::Approx(2.0));
  CHECK(sr.lines[0].at("sigma").get<std::vector<int>>() == std::vector<int>{1, 1});

  RunConfig bogus = three;
  bogus.mech = "nonsense";
  RunOutcome br = run(bogus);
  CHECK(br.code == 2);
  CHECK(br.lines[0].at("error") == "BadArgument");
}

TEST_CASE("example1 reports the closed form and a matching simulation") {
  RunConfig cfg;
  cfg.command = "example1";
  cfg.v_max = std::exp(3.0);
  cfg.samples = 50000;
  cfg.seed = 11;
  RunOutcome r = run(cfg);
  REQUIRE(r.code == 0);
  const Json& j = r.lines[0];
  CHECK(j.at("revenue").get<double>() == doctest::Approx(2.0 + std::log(4.0)).epsilon(1e-12));
  CHECK(j.at("stage_by_stage_revenue").get<double>() == doctest::Approx(2.0));
  double mean = j.at("monte_carlo").at("revenue_mean").get<double>();
  double se = j.at("monte_carlo").at("revenue_stderr").get<double>();
  CHECK(std::abs(mean - j.at("revenue").get<double>()) <= 5.0 * se);
}

TEST_CASE("instance and mechanism JSON round-trip exactly") {
  Instance inst = two_uniform();
  inst.stages.push_back(StageDistribution::equal_revenue(7.5));
  Json ij = instance_to_json(inst);
  Instance back = instance_from_json(ij);
  REQUIRE(back.T() == 3);
  CHECK(back.stages[0].support[1][0] == 2.0);
  CHECK(back.stages[2].v_max == 7.5);
  CHECK(instance_to_json(back).dump() == ij.dump());

  DirectMechanism m = oracles::random_ic_ir_mechanism(two_uniform(), 9, false);
  Json mj = mechanism_to_json(m);
  DirectMechanism mb = mechanism_from_json(mj);
  CHECK(mechanism_to_json(mb).dump() == mj.dump());
  CHECK(mb.at({0, 1}).pay == m.at({0, 1}).pay);  // exact doubles, not approximations
}

TEST_CASE("malformed files fail loudly") {
  CHECK_THROWS_WITH_AS(load_json(tmp_path("does_not_exist.json")),
                       doctest::Contains("JsonRead"), Error);

  std::string garbled = tmp_path("garbled.json");
  {
    std::ofstream f(garbled);
    f << "{ not json";
  }
  CHECK_THROWS_AS(load_json(garbled), Error);

  CHECK_THROWS_WITH_AS(mechanism_from_json(Json{{"nodes", 5}}), doctest::Contains("JsonShape"),
                       Error);
  CHECK_THROWS_AS(instance_from_json(Json{{"stages", Json::array()}}), Error);

  RunConfig cfg;
  cfg.command = "definitely-not-a-command";
  RunOutcome r = run(cfg);
  CHECK(r.code == 2);
  CHECK(r.lines[0].at("error") == "BadArgument");
}

}  // TEST_SUITE
