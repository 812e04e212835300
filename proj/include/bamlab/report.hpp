#pragma once

#include <map>
#include <string>
#include <vector>

#include "bamlab/common.hpp"

namespace bamlab {

// One concrete violation: which constraint, where, and the two sides that
// should have compared. Every failing verdict must carry at least one.
struct Witness {
  std::string constraint;
  std::string history;    // rendered index path, e.g. "(2,0)"
  std::string deviation;  // rendered misreport / balance pair / detail
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // lhs - rhs (signed; negative = violated for >= checks)
};

struct VerificationReport {
  std::map<std::string, bool> verdicts;  // named checks, true = pass
  std::vector<Witness> witnesses;

  bool passed() const {
    for (const auto& [name, ok] : verdicts)
      if (!ok) return false;
    return true;
  }
  void set(const std::string& name, bool ok) {
    auto it = verdicts.find(name);
    if (it == verdicts.end())
      verdicts[name] = ok;
    else
      it->second = it->second && ok;
  }
  void add_witness(const std::string& constraint, const std::string& history,
                   const std::string& deviation, double lhs, double rhs) {
    witnesses.push_back({constraint, history, deviation, lhs, rhs, lhs - rhs});
  }
};

inline std::string path_str(const IndexPath& h) {
  std::string s = "(";
  for (size_t i = 0; i < h.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(h[i]);
  }
  return s + ")";
}

}  // namespace bamlab
