#include "bamlab/lp.hpp"

#include <cmath>
#include <limits>

namespace bamlab {
namespace {

constexpr double kEps = 1e-9;

// Classic small dense simplex over the tableau
//   maximize c.x  s.t.  A.x <= b, x >= 0,
// with Bland-style (value, index) tie-breaking in both pivot choices.
class Tableau {
 public:
  Tableau(const std::vector<Vec>& A, const Vec& b, const Vec& c)
      : m_(static_cast<int>(b.size())),
        n_(static_cast<int>(c.size())),
        nonbasic_(n_ + 1),
        basic_(m_),
        D_(m_ + 2, Vec(n_ + 2)) {
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) D_[i][j] = A[i][j];
    for (int i = 0; i < m_; ++i) {
      basic_[i] = n_ + i;
      D_[i][n_] = -1.0;
      D_[i][n_ + 1] = b[i];
    }
    for (int j = 0; j < n_; ++j) {
      nonbasic_[j] = j;
      D_[m_][j] = -c[j];
    }
    nonbasic_[n_] = -1;
    D_[m_ + 1][n_] = 1.0;
  }

  // Returns optimum, or +/-inf for unbounded/infeasible.
  double solve(Vec& x) {
    int r = 0;
    for (int i = 1; i < m_; ++i)
      if (D_[i][n_ + 1] < D_[r][n_ + 1]) r = i;
    if (D_[r][n_ + 1] < -kEps) {
      pivot(r, n_);
      if (!simplex(2) || D_[m_ + 1][n_ + 1] < -kEps)
        return -std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i)
        if (basic_[i] == -1) {
          int s = 0;
          for (int j = 1; j <= n_; ++j)
            if (better(D_[i][j], nonbasic_[j], D_[i][s], nonbasic_[s])) s = j;
          pivot(i, s);
        }
    }
    bool bounded = simplex(1);
    x.assign(n_, 0.0);
    for (int i = 0; i < m_; ++i)
      if (basic_[i] < n_) x[basic_[i]] = D_[i][n_ + 1];
    return bounded ? D_[m_][n_ + 1] : std::numeric_limits<double>::infinity();
  }

 private:
  static bool better(double va, int ia, double vb, int ib) {
    return va < vb - kEps || (va < vb + kEps && ia < ib);
  }

  void pivot(int r, int s) {
    Vec& a = D_[r];
    double inv = 1.0 / a[s];
    for (int i = 0; i < m_ + 2; ++i)
      if (i != r && std::abs(D_[i][s]) > kEps) {
        Vec& row = D_[i];
        double inv2 = row[s] * inv;
        for (int j = 0; j < n_ + 2; ++j) row[j] -= a[j] * inv2;
        row[s] = a[s] * inv2;
      }
    for (int j = 0; j < n_ + 2; ++j)
      if (j != s) D_[r][j] *= inv;
    for (int i = 0; i < m_ + 2; ++i)
      if (i != r) D_[i][s] *= -inv;
    D_[r][s] = inv;
    std::swap(basic_[r], nonbasic_[s]);
  }

  bool simplex(int phase) {
    int x = m_ + phase - 1;
    for (;;) {
      int s = -1;
      for (int j = 0; j <= n_; ++j) {
        if (nonbasic_[j] == -phase) continue;
        if (s == -1 || better(D_[x][j], nonbasic_[j], D_[x][s], nonbasic_[s])) s = j;
      }
      if (D_[x][s] >= -kEps) return true;
      int r = -1;
      for (int i = 0; i < m_; ++i) {
        if (D_[i][s] <= kEps) continue;
        if (r == -1 ||
            better(D_[i][n_ + 1] / D_[i][s], basic_[i], D_[r][n_ + 1] / D_[r][s], basic_[r]))
          r = i;
      }
      if (r == -1) return false;  // unbounded in this direction
      pivot(r, s);
    }
  }

  int m_, n_;
  std::vector<int> nonbasic_, basic_;
  std::vector<Vec> D_;
};

}  // namespace

int LpProblem::add_var(double obj_coef, bool is_free, std::optional<double> ub) {
  objective.push_back(obj_coef);
  if (is_free && free_var.empty()) free_var.assign(n, 0);
  if (is_free || !free_var.empty()) free_var.push_back(is_free ? 1 : 0);
  if (ub && upper.empty()) upper.assign(n, std::nullopt);
  if (ub || !upper.empty()) upper.push_back(ub);
  return n++;
}

LpSolution solve_lp(const LpProblem& p) {
  // Map to the canonical form: free variables split into x+ - x-,
  // '>=' rows negated, '=' rows doubled, upper bounds become rows.
  int n_canon = p.n;
  std::vector<int> neg_part(p.n, -1);
  for (int i = 0; i < p.n; ++i)
    if (!p.free_var.empty() && p.free_var[i]) neg_part[i] = n_canon++;

  std::vector<LinRow> rows = p.rows;
  for (int i = 0; i < p.n; ++i)
    if (!p.upper.empty() && p.upper[i])
      rows.push_back({{{i, 1.0}}, '<', *p.upper[i]});

  std::vector<Vec> A;
  Vec b;
  auto emit = [&](const LinRow& row, double sign) {
    Vec a(n_canon, 0.0);
    for (auto [var, coef] : row.terms) {
      a[var] += sign * coef;
      if (neg_part[var] >= 0) a[neg_part[var]] -= sign * coef;
    }
    A.push_back(std::move(a));
    b.push_back(sign * row.rhs);
  };
  for (const auto& row : rows) {
    if (row.rel == '<' || row.rel == '=') emit(row, 1.0);
    if (row.rel == '>' || row.rel == '=') emit(row, -1.0);
  }

  Vec c(n_canon, 0.0);
  for (int i = 0; i < p.n; ++i) {
    c[i] = p.objective[i];
    if (neg_part[i] >= 0) c[neg_part[i]] = -p.objective[i];
  }

  Vec x_canon;
  double value = Tableau(A, b, c).solve(x_canon);
  if (value == -std::numeric_limits<double>::infinity())
    fail("LpInfeasible", "no feasible point");
  if (value == std::numeric_limits<double>::infinity())
    fail("LpUnbounded", "objective unbounded above");

  LpSolution sol;
  sol.value = value;
  sol.x.assign(p.n, 0.0);
  for (int i = 0; i < p.n; ++i)
    sol.x[i] = x_canon[i] - (neg_part[i] >= 0 ? x_canon[neg_part[i]] : 0.0);
  return sol;
}

}  // namespace bamlab
