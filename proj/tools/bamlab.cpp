#include <iostream>

#include "CLI11.hpp"

#include "bamlab/cli_run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bank-account mechanisms: solve, approximate, verify, simulate"};
  app.require_subcommand(1);
  bamlab::RunConfig cfg;

  auto* solve = app.add_subcommand("solve", "near-optimal mechanism via the promise recursion");
  solve->add_option("--instance", cfg.instance_path, "instance JSON")->required();
  solve->add_option("--epsilon", cfg.epsilon, "relative accuracy in (0,1), default 0.05");
  solve->add_option("--out", cfg.out_path, "write the account mechanism here");

  auto* approx = app.add_subcommand("approx", "closed-form approximation mechanisms");
  approx->add_option("--instance", cfg.instance_path, "instance JSON")->required();
  approx->add_option("--mech", cfg.mech, "three (default) | alpha | sigma");
  approx->add_option("--alpha", cfg.alpha, "weight parameter for --mech alpha");
  approx->add_option("--samples", cfg.samples, "Monte Carlo samples (continuous instances)");
  approx->add_option("--seed", cfg.seed, "Monte Carlo seed");

  auto* check = app.add_subcommand("check", "verify IC / IR / account conditions");
  check->add_option("--instance", cfg.instance_path, "instance JSON")->required();
  check->add_option("--mechanism", cfg.mechanism_path, "mechanism JSON (direct or account)")
      ->required();

  auto* bound = app.add_subcommand("bound", "revenue upper bound for an instance");
  bound->add_option("--instance", cfg.instance_path, "instance JSON")->required();

  auto* oracle = app.add_subcommand("oracle", "exact optimum by linear programming");
  oracle->add_option("--instance", cfg.instance_path, "instance JSON")->required();
  oracle->add_option("--out", cfg.out_path, "write the optimal direct mechanism here");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of an account mechanism");
  simulate->add_option("--instance", cfg.instance_path, "instance JSON")->required();
  simulate->add_option("--mechanism", cfg.mechanism_path, "account mechanism JSON")->required();
  simulate->add_option("--samples", cfg.samples, "sample count, default 200000");
  simulate->add_option("--seed", cfg.seed, "RNG seed, default 1");

  auto* example1 = app.add_subcommand("example1", "the two-stage equal-revenue showcase");
  example1->add_option("--v-max", cfg.v_max, "support ceiling, default e^3");
  example1->add_option("--samples", cfg.samples, "Monte Carlo samples");
  example1->add_option("--seed", cfg.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help is a success; anything else is usage
  }

  cfg.command = app.get_subcommands().front()->get_name();
  return bamlab::run_command(cfg, std::cout);
}
