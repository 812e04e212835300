#include "bamlab/common.hpp"
#include "bamlab/lp.hpp"
#include "doctest.h"

using namespace bamlab;

TEST_SUITE("lp") {

TEST_CASE("textbook maximum at a vertex") {
  // max 3x + 2y  s.t.  x + y <= 4,  x <= 2  =>  (2, 2), value 10.
  LpProblem p;
  int x = p.add_var(3.0), y = p.add_var(2.0);
  p.add_row({{{x, 1.0}, {y, 1.0}}, '<', 4.0});
  p.add_row({{{x, 1.0}}, '<', 2.0});
  LpSolution s = solve_lp(p);
  CHECK(s.value == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(s.x[x] == doctest::Approx(2.0));
  CHECK(s.x[y] == doctest::Approx(2.0));
}

TEST_CASE("equality rows and >= rows") {
  // max x + 2y  s.t.  x + y = 3,  y >= 1,  x >= 0, y >= 0  =>  (0, 3).
  LpProblem p;
  int x = p.add_var(1.0), y = p.add_var(2.0);
  p.add_row({{{x, 1.0}, {y, 1.0}}, '=', 3.0});
  p.add_row({{{y, 1.0}}, '>', 1.0});
  LpSolution s = solve_lp(p);
  CHECK(s.value == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(s.x[x] == doctest::Approx(0.0));
  CHECK(s.x[y] == doctest::Approx(3.0));
}

TEST_CASE("free variables can go negative") {
  // max x  s.t.  x + z = 0,  x <= 4 (bound)  =>  x = 4, z = -4.
  LpProblem p;
  int x = p.add_var(1.0, false, 4.0);
  int z = p.add_var(0.0, true);
  p.add_row({{{x, 1.0}, {z, 1.0}}, '=', 0.0});
  LpSolution s = solve_lp(p);
  CHECK(s.value == doctest::Approx(4.0));
  CHECK(s.x[z] == doctest::Approx(-4.0));
}

TEST_CASE("variable upper bounds bind") {
  LpProblem p;
  int x = p.add_var(1.0, false, 0.7);
  int y = p.add_var(1.0, false, 0.2);
  p.add_row({{{x, 1.0}, {y, 1.0}}, '<', 9.0});
  LpSolution s = solve_lp(p);
  CHECK(s.value == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(s.x[x] == doctest::Approx(0.7));
}

TEST_CASE("infeasible and unbounded are reported as such") {
  LpProblem p;
  int x = p.add_var(1.0);
  p.add_row({{{x, 1.0}}, '>', 2.0});
  p.add_row({{{x, 1.0}}, '<', 1.0});
  CHECK_THROWS_WITH_AS(solve_lp(p), doctest::Contains("LpInfeasible"), Error);

  LpProblem q;
  int u = q.add_var(1.0);
  q.add_row({{{u, 1.0}}, '>', 1.0});
  CHECK_THROWS_WITH_AS(solve_lp(q), doctest::Contains("LpUnbounded"), Error);
}

TEST_CASE("negative objective entries and zero rows are handled") {
  // max -x + y  s.t.  y <= 2  =>  x = 0, y = 2.
  LpProblem p;
  int x = p.add_var(-1.0);
  int y = p.add_var(1.0);
  p.add_row({{{y, 1.0}}, '<', 2.0});
  LpSolution s = solve_lp(p);
  CHECK(s.value == doctest::Approx(2.0));
  CHECK(s.x[x] == doctest::Approx(0.0));
}

TEST_CASE("identical inputs give bitwise identical solutions") {
  LpProblem p;
  int a = p.add_var(1.0, false, 1.0);
  int b = p.add_var(1.0, false, 1.0);
  int c = p.add_var(0.5, true);
  p.add_row({{{a, 1.0}, {b, 1.0}, {c, 1.0}}, '<', 1.5});
  p.add_row({{{c, 1.0}}, '<', 0.25});
  p.add_row({{{a, 2.0}, {c, -1.0}}, '>', 0.1});
  LpSolution s1 = solve_lp(p);
  LpSolution s2 = solve_lp(p);
  REQUIRE(s1.x.size() == s2.x.size());
  CHECK(s1.value == s2.value);  // exact, not approximate
  for (std::size_t i = 0; i < s1.x.size(); ++i) CHECK(s1.x[i] == s2.x[i]);
}

TEST_CASE("a cut-style problem: epigraph variable pinned by line rows") {
  // max t  s.t.  t <= 1 - 0.5 w,  t <= 0.2 + 0.3 w,  w in [0, 1].
  // Lines cross at w = 1, t = 0.5.
  LpProblem p;
  int t = p.add_var(1.0, true);
  int w = p.add_var(0.0, false, 1.0);
  p.add_row({{{t, 1.0}, {w, 0.5}}, '<', 1.0});
  p.add_row({{{t, 1.0}, {w, -0.3}}, '<', 0.2});
  LpSolution s = solve_lp(p);
  CHECK(s.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.x[w] == doctest::Approx(1.0));
}

}  // TEST_SUITE
