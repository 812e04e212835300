#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace bamlab {

// Everything the command-line front end collects, kept as plain data so
// tests can drive commands without a process boundary.
struct RunConfig {
  std::string command;  // solve | approx | check | bound | oracle | simulate | example1
  std::string instance_path;
  std::string mechanism_path;
  std::string out_path;        // optional artifact destination
  std::string mech = "three";  // approx flavour: three | alpha | sigma
  double epsilon = 0.05;
  double alpha = 1.0;
  double v_max = 20.085536923187668;  // example1 default: e^3
  std::uint64_t samples = 200000;
  std::uint64_t seed = 1;
};

// Runs one command, writing compact JSON reports to `out`, one per line.
// Exit code: 0 clean, 1 a verification verdict failed, 2 usage or input
// error (reported as an {"error": ..., "message": ...} line).
int run_command(const RunConfig& cfg, std::ostream& out);

}  // namespace bamlab
