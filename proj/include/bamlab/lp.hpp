#pragma once

#include <optional>

#include "bamlab/common.hpp"

namespace bamlab {

// Sparse linear row: sum(coef * x[var]) REL rhs, REL in {'<', '>', '='}
// ('<' and '>' mean <= and >=).
struct LinRow {
  std::vector<std::pair<int, double>> terms;
  char rel = '<';
  double rhs = 0.0;
};

// maximize objective . x  subject to rows, with per-variable domains:
// x[i] >= 0 by default, free if free_var[i], plus optional upper bounds.
struct LpProblem {
  int n = 0;
  Vec objective;                // length n
  std::vector<LinRow> rows;
  std::vector<char> free_var;   // length n or empty (all non-negative)
  std::vector<std::optional<double>> upper;  // length n or empty

  int add_var(double obj_coef, bool is_free = false, std::optional<double> ub = std::nullopt);
  void add_row(LinRow row) { rows.push_back(std::move(row)); }
};

struct LpSolution {
  Vec x;
  double value = 0.0;
};

// Dense two-phase tableau simplex. Deterministic: pivot selection breaks
// ties by (value, index) pairs, so identical inputs give identical bases.
// Throws LpInfeasible / LpUnbounded.
LpSolution solve_lp(const LpProblem& p);

}  // namespace bamlab
