#include "bamlab/dp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "bamlab/lp.hpp"
#include "bamlab/verify.hpp"  // node_cap

namespace bamlab {

namespace {

// Stage support with a zero-value entry prepended (probability 0) when the
// lowest value is positive: price mass at 0 is how the LP expresses giving
// the item away for free.
struct PaddedStage {
  Vec v, p;         // ascending values, probabilities
  std::size_t pad;  // 1 if the zero entry is synthetic
};

PaddedStage pad_stage(const StageDistribution& st) {
  if (!st.is_discrete())
    fail("UnsupportedContinuous", "the promise recursion needs discrete stages");
  if (st.items != 1)
    fail("UnsupportedMultiItem", "the promise recursion handles one item per stage");
  PaddedStage ps;
  ps.pad = st.support.front()[0] > 0.0 ? 1 : 0;
  if (ps.pad) {
    ps.v.push_back(0.0);
    ps.p.push_back(0.0);
  }
  for (std::size_t i = 0; i < st.support.size(); ++i) {
    ps.v.push_back(st.support[i][0]);
    ps.p.push_back(st.probs[i]);
  }
  return ps;
}

// A line m*x + q that upper-bounds cont on x >= 0: the linear piece
// containing x, extended (valid for a concave function), or the slope -1
// tail line when x is past the core or the piece has picked up enough hull
// noise to dip below -1.
std::pair<double, double> cover_line(const PwlBound& cont, double x) {
  const PiecewiseLinearConcave& c = cont.core;
  const std::pair<double, double> tail{-1.0, c.ys.back() + c.b()};
  if (c.xs.size() < 2 || x >= c.b()) return tail;
  auto it = std::upper_bound(c.xs.begin(), c.xs.end(), std::max(x, c.a()));
  std::size_t hi = static_cast<std::size_t>(it - c.xs.begin());
  hi = std::min(std::max<std::size_t>(hi, 1), c.xs.size() - 1);
  double m = (c.ys[hi] - c.ys[hi - 1]) / (c.xs[hi] - c.xs[hi - 1]);
  if (m < -1.0) return tail;
  return {m, c.ys[hi - 1] - m * c.xs[hi - 1]};
}

void add_line(std::vector<std::pair<double, double>>& lines, std::pair<double, double> line) {
  for (const auto& have : lines)
    if (std::abs(have.first - line.first) <= 1e-13 * (1.0 + std::abs(line.first)) &&
        std::abs(have.second - line.second) <= 1e-13 * (1.0 + std::abs(line.second)))
      return;
  lines.push_back(line);
}

// Initial outer approximation of cont: the tail, the first piece, and the
// pieces on both sides of the max.
std::vector<std::pair<double, double>> seed_lines(const PwlBound& cont) {
  const PiecewiseLinearConcave& c = cont.core;
  std::vector<std::pair<double, double>> lines;
  add_line(lines, {-1.0, c.ys.back() + c.b()});
  if (c.xs.size() >= 2) {
    add_line(lines, cover_line(cont, c.a()));
    double xm = c.argmax();
    add_line(lines, cover_line(cont, xm));  // piece starting at the argmax
    auto it = std::lower_bound(c.xs.begin(), c.xs.end(), xm);
    if (it != c.xs.begin()) {  // piece ending at the argmax
      std::size_t i = static_cast<std::size_t>(it - c.xs.begin());
      add_line(lines, cover_line(cont, 0.5 * (c.xs[i - 1] + c.xs[i])));
    }
  }
  return lines;
}

// Marginal revenue of a slightly larger promise, before the continuation's
// own slope: the best exchange rate between adjacent supported values when
// shifting price mass down to buy utility.
double stage_slope_bound(const PaddedStage& ps) {
  double c = 0.0;
  std::size_t prev = ps.v.size();
  for (std::size_t i = 0; i < ps.v.size(); ++i) {
    if (ps.p[i] <= 0.0) continue;
    if (prev < i) c = std::max(c, ps.p[prev] * ps.v[i] / (ps.p[i] * (ps.v[i] - ps.v[prev])));
    prev = i;
  }
  return c;
}

// Slope-oblivious fallback sandwich for ill-conditioned stages (astronomical
// slope bounds from tiny probabilities or value gaps). Uniform grid, lower =
// hull, upper bounded by extending the neighbouring chords over each gap;
// refine until the envelopes are delta-close.
SandwichResult sandwich_grid(const std::function<double(double)>& evaluate, double a, double b,
                             double f_a, double f_b, double delta) {
  SandwichResult res;
  if (!(b > a)) {
    res.lower = {{a}, {f_a}};
    res.upper = {{a}, {f_a + delta}};
    return res;
  }
  for (int m = 64; m <= 4096; m *= 2) {
    std::vector<std::pair<double, double>> pts{{a, f_a}};
    for (int i = 1; i < m; ++i) {
      double x = a + (b - a) * i / m;
      pts.emplace_back(x, evaluate(x));
      ++res.queries;
    }
    pts.emplace_back(b, f_b);
    PiecewiseLinearConcave hull = concave_upper_hull(pts);

    double gap = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      // Candidate upper lines over [x_i, x_{i+1}]: left chord extended
      // forward, right chord extended back, and the analytic slope -1 line
      // through the right endpoint of the domain.
      std::vector<std::pair<double, double>> lines;
      if (i > 0) {
        double m1 = (pts[i].second - pts[i - 1].second) / (pts[i].first - pts[i - 1].first);
        lines.push_back({m1, pts[i].second - m1 * pts[i].first});
      }
      if (i + 2 < pts.size()) {
        double m2 = (pts[i + 2].second - pts[i + 1].second) / (pts[i + 2].first - pts[i + 1].first);
        lines.push_back({m2, pts[i + 1].second - m2 * pts[i + 1].first});
      }
      lines.push_back({-1.0, f_b + b});
      auto env = [&](double x) {
        double v = lines.front().first * x + lines.front().second;
        for (const auto& [mm, qq] : lines) v = std::min(v, mm * x + qq);
        return v;
      };
      std::vector<double> cand{pts[i].first, pts[i + 1].first};
      for (std::size_t u = 0; u < lines.size(); ++u)
        for (std::size_t w = u + 1; w < lines.size(); ++w) {
          double dm = lines[u].first - lines[w].first;
          if (std::abs(dm) < 1e-15) continue;
          double x = (lines[w].second - lines[u].second) / dm;
          if (x > pts[i].first && x < pts[i + 1].first) cand.push_back(x);
        }
      for (double x : cand) gap = std::max(gap, env(x) - hull.eval(x));
    }
    if (gap <= delta) {
      res.lower = hull;
      res.upper = hull;
      res.upper.shift(delta);
      return res;
    }
  }
  fail("IllConditionedStage", "grid refinement did not reach the target accuracy");
}

}  // namespace

StageChoice stage_value(const StageDistribution& stage, double xi, const PwlBound& cont) {
  const PaddedStage ps = pad_stage(stage);
  const std::size_t K = ps.v.size();

  // suffix[j]: allocation revenue per unit of price mass at v_j.
  // ubar[j]: expected buyer utility per unit of the same mass.
  Vec suffix(K, 0.0), ubar(K, 0.0);
  for (std::size_t j = 0; j < K; ++j) {
    for (std::size_t i = j; i < K; ++i) {
      suffix[j] += ps.p[i] * ps.v[i];
      ubar[j] += ps.p[i] * (ps.v[i] - ps.v[j]);
    }
  }
  // Outgoing promise of type i: g_i = xi + sum_j gcoef(i, j) w_j.
  auto gcoef = [&](std::size_t i, std::size_t j) {
    return (j <= i ? ps.v[i] - ps.v[j] : 0.0) - ubar[j];
  };

  double cscale = 1.0;
  for (double yv : cont.core.ys) cscale = std::max(cscale, std::abs(yv));
  const double viol_tol = 1e-10 * cscale;

  std::vector<std::vector<std::pair<double, double>>> cuts(K);
  const auto seeds = seed_lines(cont);
  for (std::size_t i = 0; i < K; ++i)
    if (ps.p[i] > 0.0) cuts[i] = seeds;

  StageChoice out;
  Vec w(K, 0.0), y(K, 0.0), u(K, 0.0), g(K, 0.0);
  std::vector<int> zvar(K, -1);

  for (int round = 0;; ++round) {
    LpProblem lp;
    for (std::size_t j = 0; j < K; ++j) lp.add_var(suffix[j], false, 1.0);
    for (std::size_t i = 0; i < K; ++i)
      zvar[i] = ps.p[i] > 0.0 ? lp.add_var(ps.p[i], true) : -1;

    LinRow total;
    for (std::size_t j = 0; j < K; ++j) total.terms.push_back({static_cast<int>(j), 1.0});
    total.rel = '=';
    total.rhs = 1.0;
    lp.add_row(std::move(total));

    for (std::size_t i = 0; i < K; ++i) {  // g_i >= 0, supported or not
      LinRow row;
      for (std::size_t j = 0; j < K; ++j) {
        double cg = gcoef(i, j);
        if (cg != 0.0) row.terms.push_back({static_cast<int>(j), cg});
      }
      row.rel = '>';
      row.rhs = -xi;
      lp.add_row(std::move(row));
    }
    for (std::size_t i = 0; i < K; ++i) {
      if (zvar[i] < 0) continue;
      for (const auto& [m, q] : cuts[i]) {  // zeta_i <= m g_i + q
        LinRow row;
        row.terms.push_back({zvar[i], 1.0});
        for (std::size_t j = 0; j < K; ++j) {
          double cg = m * gcoef(i, j);
          if (cg != 0.0) row.terms.push_back({static_cast<int>(j), -cg});
        }
        row.rel = '<';
        row.rhs = q + m * xi;
        lp.add_row(std::move(row));
      }
    }

    LpSolution sol = solve_lp(lp);
    ++out.lp_solves;
    for (std::size_t j = 0; j < K; ++j) w[j] = sol.x[j];
    for (std::size_t i = 0; i < K; ++i) {
      g[i] = xi;
      for (std::size_t j = 0; j < K; ++j) g[i] += gcoef(i, j) * w[j];
    }

    bool violated = false, added = false;
    for (std::size_t i = 0; i < K; ++i) {
      if (zvar[i] < 0) continue;
      double gi = std::max(g[i], 0.0);
      if (sol.x[zvar[i]] - cont.eval(gi) <= viol_tol) continue;
      violated = true;
      std::size_t before = cuts[i].size();
      add_line(cuts[i], cover_line(cont, gi));
      added |= cuts[i].size() > before;
    }
    if (!violated || !added) break;
    if (round >= 50) fail("CutGenerationStalled", "outer linearization did not converge");
  }

  // Clean the weights and recompute everything they imply; reporting the
  // value achieved by the actual w (not the LP objective, which sits above
  // the true continuation by up to the cut tolerance) keeps lower-bound
  // passes sound.
  double sw = 0.0;
  for (double& x : w) {
    if (x < -1e-10 || x > 1.0 + 1e-10) fail("LpInaccurate", "price mass escaped [0, 1]");
    x = std::clamp(x, 0.0, 1.0);
    sw += x;
  }
  if (std::abs(sw - 1.0) > 1e-8)
    fail("LpInaccurate", "price mass sums to " + std::to_string(sw));
  for (double& x : w) x /= sw;

  double cum = 0.0, cumwv = 0.0, eu = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    cum += w[i];
    cumwv += w[i] * ps.v[i];
    y[i] = cum;
    u[i] = ps.v[i] * cum - cumwv;
    eu += ps.p[i] * u[i];
  }
  out.value = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    g[i] = xi + u[i] - eu;
    if (g[i] < -1e-9) fail("PromiseUnderflow", "type promise " + std::to_string(g[i]));
    g[i] = std::max(g[i], 0.0);
    out.value += ps.p[i] * (y[i] * ps.v[i] + cont.eval(g[i]));
  }
  out.w = std::move(w);
  out.y.assign(y.begin() + ps.pad, y.end());
  out.u.assign(u.begin() + ps.pad, u.end());
  out.g.assign(g.begin() + ps.pad, g.end());
  return out;
}

DpResult backward_dp(const Instance& inst, double epsilon) {
  validate_instance(inst);
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail("BadArgument", "epsilon must be in (0, 1)");
  const std::size_t T = inst.T();
  std::vector<PaddedStage> padded;
  padded.reserve(T);
  for (const auto& st : inst.stages) padded.push_back(pad_stage(st));

  Vec vals(T, 0.0);
  Vec B(T + 1, 0.0);  // promise domain bound entering stage t
  for (std::size_t t = 0; t < T; ++t) vals[t] = inst.stages[t].val();
  for (std::size_t t = T; t-- > 0;) B[t] = B[t + 1] + vals[t];

  // Exact value at promise 0: each stage sells at the top supported value.
  double at_zero = 0.0;
  for (const auto& ps : padded)
    for (std::size_t i = ps.v.size(); i-- > 0;)
      if (ps.p[i] > 0.0) {
        at_zero += ps.p[i] * ps.v[i];
        break;
      }

  const double scale = std::max(1.0, B[0]);
  DpResult res;
  res.epsilon = epsilon;
  double delta = epsilon * std::max(at_zero, 1e-9) / (2.0 * static_cast<double>(T));

  for (int attempt = 0;; ++attempt) {
    res.lower.assign(T + 1, PwlBound{});
    res.upper.assign(T + 1, PwlBound{});
    res.breakpoints.assign(T, 0);
    res.lower[T].core = {{0.0}, {0.0}};
    res.upper[T].core = {{0.0}, {0.0}};

    double upshift = 0.0;  // exact inflation of the upper pass at the right end
    for (std::size_t t = T; t-- > 0;) {
      const double c = stage_slope_bound(padded[t]);
      const bool tame = c <= 1e6;

      auto f_lo = [&](double x) {
        StageChoice sc = stage_value(inst.stages[t], x, res.lower[t + 1]);
        res.lp_count += sc.lp_solves;
        return sc.value;
      };
      double fa = f_lo(0.0);
      SandwichResult lo_sw =
          tame ? sandwich(f_lo, 0.0, B[t], fa, 0.0, c + res.lower[t + 1].first_slope(), -1.0,
                          delta)
               : sandwich_grid(f_lo, 0.0, B[t], fa, 0.0, delta);
      res.lower[t].core = std::move(lo_sw.lower);

      auto f_hi = [&](double x) {
        StageChoice sc = stage_value(inst.stages[t], x, res.upper[t + 1]);
        res.lp_count += sc.lp_solves;
        return sc.value;
      };
      double fa_hi = f_hi(0.0);
      SandwichResult hi_sw =
          tame ? sandwich(f_hi, 0.0, B[t], fa_hi, upshift,
                          c + res.upper[t + 1].first_slope(), -1.0, delta)
               : sandwich_grid(f_hi, 0.0, B[t], fa_hi, upshift, delta);
      res.upper[t].core = std::move(hi_sw.upper);
      upshift += delta;
      res.breakpoints[t] = static_cast<int>(res.lower[t].core.xs.size());
    }

    double lo = res.lower[0].core.max_value();
    double hi = res.upper[0].core.max_value();
    // Accept on the *guarded* bracket, so the published value_lower is
    // within epsilon of value_upper (hence of the optimum) even after the
    // fp-robustness deflation below.
    double vlo = std::max(0.0, lo - 1e-9 * scale);
    double vhi = hi + 1e-9 * scale;
    if (hi <= 1e-9 * scale || vlo >= (1.0 - epsilon) * vhi) {
      res.value_lower = vlo;
      res.value_upper = vhi;
      res.xi_star = res.lower[0].core.argmax();
      res.delta = delta;
      return res;
    }
    if (attempt >= 8) fail("ToleranceNotReached", "sandwich refinement stalled");
    delta *= 0.5;
  }
}

ExtractResult extract_mechanism(const Instance& inst, const DpResult& dp) {
  const std::size_t T = inst.T();
  if (dp.lower.size() != T + 1) fail("BadArgument", "dp result does not match the instance");
  if (inst.tree_nodes(node_cap() + 1) > node_cap())
    fail("InstanceTooLarge", "type tree exceeds the node cap");

  CoreBamSpec spec;
  spec.g[{}] = dp.xi_star;
  std::vector<std::pair<IndexPath, double>> frontier{{{}, dp.xi_star}};
  for (std::size_t t = 0; t < T; ++t) {
    // One stage solve per distinct promise level; nodes sharing a promise
    // share the solve, which keeps equal promises on identical subtrees.
    std::vector<std::size_t> order(frontier.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return frontier[a].second < frontier[b].second;
    });

    std::vector<std::pair<IndexPath, double>> next;
    std::size_t lo = 0;
    while (lo < order.size()) {
      std::size_t hi = lo + 1;
      while (hi < order.size() &&
             frontier[order[hi]].second - frontier[order[hi - 1]].second <=
                 1e-12 * std::max(1.0, std::abs(frontier[order[hi]].second)))
        ++hi;
      StageChoice sc = stage_value(inst.stages[t], frontier[order[lo]].second, dp.lower[t + 1]);
      for (std::size_t idx = lo; idx < hi; ++idx) {
        const IndexPath& h = frontier[order[idx]].first;
        for (std::size_t i = 0; i < sc.g.size(); ++i) {
          IndexPath child = h;
          child.push_back(static_cast<int>(i));
          spec.g[child] = sc.g[i];
          spec.y[child] = Vec{sc.y[i]};
          if (t + 1 < T) next.emplace_back(std::move(child), sc.g[i]);
        }
      }
      lo = hi;
    }
    frontier = std::move(next);
  }

  ExtractResult out{construct_core_bam(spec, inst), spec, 0.0};
  out.revenue = bam_revenue(out.bam, inst);
  return out;
}

}  // namespace bamlab
