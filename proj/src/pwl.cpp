#include "bamlab/pwl.hpp"

#include <algorithm>
#include <cmath>

namespace bamlab {

double PiecewiseLinearConcave::eval(double x) const {
  double slack = 1e-9 * std::max({1.0, std::abs(a()), std::abs(b())});
  if (x < a() - slack || x > b() + slack)
    fail("PwlDomain", "query " + std::to_string(x) + " outside [" + std::to_string(a()) + ", " +
                          std::to_string(b()) + "]");
  x = std::clamp(x, a(), b());
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  size_t hi = it - xs.begin(), lo = hi - 1;
  double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + w * (ys[hi] - ys[lo]);
}

double PiecewiseLinearConcave::first_slope() const {
  if (xs.size() < 2) return 0.0;
  return (ys[1] - ys[0]) / (xs[1] - xs[0]);
}

double PiecewiseLinearConcave::last_slope() const {
  if (xs.size() < 2) return 0.0;
  size_t n = xs.size();
  return (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
}

double PiecewiseLinearConcave::max_value() const { return *std::max_element(ys.begin(), ys.end()); }

double PiecewiseLinearConcave::argmax() const {
  size_t best = 0;
  for (size_t i = 1; i < ys.size(); ++i)
    if (ys[i] > ys[best]) best = i;
  return xs[best];
}

void PiecewiseLinearConcave::shift(double dy) {
  for (double& y : ys) y += dy;
}

void PiecewiseLinearConcave::check_concave(double tol) const {
  for (size_t i = 2; i < xs.size(); ++i) {
    double s_prev = (ys[i - 1] - ys[i - 2]) / (xs[i - 1] - xs[i - 2]);
    double s_cur = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
    if (s_cur > s_prev + tol)
      fail("NotConcave", "slope increases at breakpoint " + std::to_string(xs[i - 1]));
  }
}

PiecewiseLinearConcave concave_upper_hull(std::vector<std::pair<double, double>> pts) {
  if (pts.empty()) fail("PwlDomain", "hull of an empty point set");
  std::sort(pts.begin(), pts.end());
  // Merge points sharing an x: keep the highest.
  std::vector<std::pair<double, double>> merged;
  for (const auto& p : pts) {
    if (!merged.empty() && p.first - merged.back().first < 1e-12)
      merged.back().second = std::max(merged.back().second, p.second);
    else
      merged.push_back(p);
  }
  std::vector<std::pair<double, double>> hull;
  for (const auto& p : merged) {
    while (hull.size() >= 2) {
      auto [x1, y1] = hull[hull.size() - 2];
      auto [x2, y2] = hull[hull.size() - 1];
      // Pop the middle point if it sits on or below the chord x1 -> p.
      if ((x2 - x1) * (p.second - y2) - (y2 - y1) * (p.first - x2) >= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  PiecewiseLinearConcave out;
  for (const auto& [x, y] : hull) {
    out.xs.push_back(x);
    out.ys.push_back(y);
  }
  return out;
}

SandwichResult sandwich(const std::function<double(double)>& evaluate, double a, double b,
                        double f_a, double f_b, double beta_a, double beta_b, double delta) {
  if (!(delta > 0.0)) fail("BadDelta", "delta must be positive");
  SandwichResult res;
  if (!(b > a)) {  // degenerate interval
    res.lower = {{a}, {f_a}};
    res.upper = {{a}, {f_a + delta}};
    return res;
  }

  double beta = (f_b - f_a) / (b - a);
  double ba = beta_a - beta;  // slope of the chord-adjusted function at a (>= 0)
  double bb = beta_b - beta;  // ... at b (<= 0)
  double slope_noise = 1e-12 * (1.0 + std::abs(beta_a) + std::abs(beta_b) + std::abs(beta));
  if (ba < -slope_noise || bb > slope_noise)
    fail("NotConcave", "end slopes do not support the chord");
  ba = std::max(ba, 0.0);
  bb = std::min(bb, 0.0);

  // The function can rise above its chord by at most the support-line
  // triangle height; if that already fits in delta, the chord is the answer.
  double height = (ba <= 0.0 || bb >= 0.0) ? 0.0 : ba * (-bb) / (ba - bb) * (b - a);
  if (height <= delta) {
    res.lower = {{a, b}, {f_a, f_b}};
    res.upper = {{a, b}, {f_a + delta, f_b + delta}};
    return res;
  }

  // All bookkeeping below is in chord-adjusted space ft(x) = f(x) - chord(x),
  // so ft(a) = ft(b) = 0 and ft >= 0 on [a, b]; points are stored unadjusted.
  std::vector<std::pair<double, double>> points = {{a, f_a}, {b, f_b}};
  auto query = [&](double x) {
    double fx = evaluate(x);
    ++res.queries;
    points.emplace_back(x, fx);
    return fx - (f_a + beta * (x - a));
  };
  const int kMaxSteps = 2'000'000;

  // Forward adaptive scan from a: step delta / (current support-slope
  // estimate); stop at b or one step past the peak.
  double peak_x = a;
  {
    double l_prev = a, y_prev = 0.0, slope = ba;
    for (int it = 0; it < kMaxSteps; ++it) {
      if (slope <= 1e-14) break;  // flat-to-the-right: chord to b covers the rest
      double l = std::min(l_prev + delta / slope, b);
      if (l >= b - 1e-13 * (b - a) || l <= l_prev) break;
      double y = query(l);
      if (y < y_prev) break;  // crossed the peak; the point is recorded
      slope = (y - y_prev) / (l - l_prev) - y / (l - b);
      l_prev = l;
      y_prev = y;
      peak_x = l;
    }
  }

  // Mirrored scan from b down to the forward peak.
  {
    double r_prev = b, y_prev = 0.0, slope = -bb;
    for (int it = 0; it < kMaxSteps && r_prev > peak_x; ++it) {
      if (slope <= 1e-14) break;
      double r = std::max(r_prev - delta / slope, a);
      if (r <= a + 1e-13 * (b - a) || r >= r_prev) break;
      double y = query(r);
      if (y < y_prev) break;
      slope = (y - y_prev) / (r_prev - r) + y / (r - a);
      r_prev = r;
      y_prev = y;
    }
  }

  res.lower = concave_upper_hull(points);
  // A queried point strictly below the hull of the others certifies that the
  // oracle is not concave (beyond noise).
  double scale = 1.0;
  for (const auto& [x, y] : points) scale = std::max(scale, std::abs(y));
  for (const auto& [x, y] : points)
    if (res.lower.eval(x) - y > 1e-9 * scale)
      fail("NotConcave", "queried value at " + std::to_string(x) + " lies below the hull");
  res.upper = res.lower;
  res.upper.shift(delta);
  return res;
}

}  // namespace bamlab
