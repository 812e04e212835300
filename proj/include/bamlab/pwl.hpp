#pragma once

#include <functional>

#include "bamlab/common.hpp"

namespace bamlab {

// Concave piecewise-linear function on [xs.front(), xs.back()], evaluated by
// linear interpolation. Slopes are weakly decreasing; queries outside the
// domain (beyond a small absolute slack) throw.
struct PiecewiseLinearConcave {
  Vec xs;  // strictly increasing
  Vec ys;

  double a() const { return xs.front(); }
  double b() const { return xs.back(); }
  double eval(double x) const;
  double first_slope() const;  // 0 for a single-point function
  double last_slope() const;
  int pieces() const { return static_cast<int>(xs.size()) - 1; }
  double max_value() const;
  double argmax() const;  // leftmost breakpoint attaining the max
  void shift(double dy);
  // Throws NotConcave if slopes increase by more than tol anywhere.
  void check_concave(double tol = 1e-9) const;
};

// Upper concave hull (monotone chain) of a point cloud: the least concave
// majorant of the points. Points sharing an x (within 1e-12) keep the max y.
PiecewiseLinearConcave concave_upper_hull(std::vector<std::pair<double, double>> pts);

// A concave bound for a DP value function: an explicit core on [0, B] plus
// the exact analytic tail of slope -1 beyond B (value functions here satisfy
// f(x) = f(B) - (x - B) for x >= B, so the tail costs nothing to store).
struct PwlBound {
  PiecewiseLinearConcave core;

  double B() const { return core.b(); }
  double eval(double x) const {
    return x <= core.b() ? core.eval(x) : core.ys.back() - (x - core.b());
  }
  double first_slope() const { return core.first_slope(); }
};

struct SandwichResult {
  PiecewiseLinearConcave lower;  // <= f pointwise
  PiecewiseLinearConcave upper;  // lower + delta, >= f pointwise
  int queries = 0;               // interior oracle calls made
};

// Adaptive concave sandwich: given an evaluation oracle for a concave f on
// [a, b], its exact endpoint values and valid supporting slopes at the ends,
// produce piecewise-linear bounds with pointwise gap <= delta. Runs a
// forward adaptive scan from a and the mirrored scan from b; the lower bound
// is the concave hull of all queried points (robust to small oracle noise).
// Query count is O(max(f - chord)/delta + log of the slope ratios).
SandwichResult sandwich(const std::function<double(double)>& evaluate, double a, double b,
                        double f_a, double f_b, double beta_a, double beta_b, double delta);

}  // namespace bamlab
