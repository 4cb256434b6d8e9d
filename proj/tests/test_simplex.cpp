// Copyright 2026 The mpqkd authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "mpqkd/simplex.hpp"

using namespace mpqkd;

namespace {

// Mirrors the generator in the reference script bit for bit.
struct Lcg {
  uint64_t state;
  explicit Lcg(uint64_t seed) : state(seed) {}
  uint64_t next_u64() {
    state = 6364136223846793005ULL * state + 1442695040888963407ULL;
    return state;
  }
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
};

double row_activity(const std::vector<double> &row, const std::vector<double> &x) {
  double s = 0.0;
  for (size_t j = 0; j < row.size(); ++j) s += row[j] * x[j];
  return s;
}

void check_primal_feasible(const LpProblem &p, const LpSolution &s, double tol) {
  for (size_t j = 0; j < p.objective.size(); ++j) {
    CHECK(s.x[j] >= p.var_lower[j] - tol);
    CHECK(s.x[j] <= p.var_upper[j] + tol);
  }
  for (size_t i = 0; i < p.rows.size(); ++i) {
    const double a = row_activity(p.rows[i], s.x);
    CHECK(a >= p.row_lower[i] - tol);
    CHECK(a <= p.row_upper[i] + tol);
  }
}

}  // namespace

TEST_CASE("simple diagonal: min -x-y over x+y <= 1") {
  LpProblem p;
  p.objective = {-1.0, -1.0};
  p.rows = {{1.0, 1.0}};
  p.row_lower = {-kLpInfinity};
  p.row_upper = {1.0};
  p.var_lower = {0.0, 0.0};
  p.var_upper = {1.0, 1.0};
  LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(s.duality_gap <= 1e-9);
  CHECK(s.duality_gap >= -1e-12);
  check_primal_feasible(p, s, 1e-9);
}

TEST_CASE("cycling-prone instance reaches the known optimum") {
  LpProblem p;
  p.objective = {-0.75, 150.0, -0.02, 6.0};
  p.rows = {{0.25, -60.0, -0.04, 9.0},
            {0.5, -90.0, -0.02, 3.0},
            {0.0, 0.0, 1.0, 0.0}};
  p.row_lower = {-kLpInfinity, -kLpInfinity, -kLpInfinity};
  p.row_upper = {0.0, 0.0, 1.0};
  p.var_lower = {0.0, 0.0, 0.0, 0.0};
  p.var_upper = {kLpInfinity, kLpInfinity, kLpInfinity, kLpInfinity};
  LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(-0.05).epsilon(1e-10));
  CHECK(s.duality_gap <= 1e-8 * (1.0 + std::fabs(s.objective)));
  check_primal_feasible(p, s, 1e-9);
}

TEST_CASE("pseudo-random two-sided instance matches the reference optimum") {
  Lcg g(12345);
  const int n = 10, m = 6;
  LpProblem p;
  p.var_lower.assign(n, 0.0);
  for (int j = 0; j < n; ++j) p.var_upper.push_back(1.0 + g.uniform());
  for (int j = 0; j < n; ++j) p.objective.push_back(2.0 * g.uniform() - 1.0);
  for (int i = 0; i < m; ++i) {
    std::vector<double> row;
    for (int j = 0; j < n; ++j) row.push_back(2.0 * g.uniform() - 1.0);
    p.rows.push_back(row);
  }
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j)
    x0[j] = p.var_lower[j] + g.uniform() * (p.var_upper[j] - p.var_lower[j]);
  for (int i = 0; i < m; ++i) {
    const double act = row_activity(p.rows[i], x0);
    p.row_lower.push_back(act - g.uniform());
    p.row_upper.push_back(act + g.uniform());
  }

  LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(-1.7242722459716224).epsilon(1e-8));
  const double x0_obj = row_activity(p.objective, x0);
  CHECK(x0_obj == doctest::Approx(-0.14895191521548556).epsilon(1e-12));
  CHECK(s.objective <= x0_obj + 1e-9);
  CHECK(s.duality_gap <= 1e-8 * (1.0 + std::fabs(s.objective)));
  check_primal_feasible(p, s, 1e-8);
}

TEST_CASE("equality row and fixed variable") {
  LpProblem eq;
  eq.objective = {1.0, -1.0};
  eq.rows = {{1.0, 1.0}};
  eq.row_lower = {1.0};
  eq.row_upper = {1.0};
  eq.var_lower = {0.0, 0.0};
  eq.var_upper = {1.0, 1.0};
  LpSolution s = solve_lp(eq);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(s.x[0] == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(s.x[1] == doctest::Approx(1.0).epsilon(1e-10));

  LpProblem fx;
  fx.objective = {1.0, 1.0};
  fx.rows = {{1.0, 1.0}};
  fx.row_lower = {1.0};
  fx.row_upper = {kLpInfinity};
  fx.var_lower = {0.5, 0.0};
  fx.var_upper = {0.5, kLpInfinity};
  s = solve_lp(fx);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.x[0] == 0.5);
}

TEST_CASE("box-only problems bypass pivoting") {
  LpProblem p;
  p.objective = {2.0, -3.0};
  p.var_lower = {1.0, 0.0};
  p.var_upper = {2.0, 4.0};
  LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(-10.0).epsilon(1e-14));
  CHECK(s.duality_gap <= 1e-12);

  // A row with no finite bound is vacuous and carries a zero multiplier.
  p.rows = {{1.0, 1.0}};
  p.row_lower = {-kLpInfinity};
  p.row_upper = {kLpInfinity};
  s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(-10.0).epsilon(1e-14));
  REQUIRE(s.dual.size() == 1);
  CHECK(s.dual[0] == 0.0);
}

TEST_CASE("infeasible problems name a constraint that cannot hold") {
  LpProblem p;
  p.objective = {0.0};
  p.rows = {{1.0}};
  p.row_lower = {2.0};
  p.row_upper = {kLpInfinity};
  p.var_lower = {0.0};
  p.var_upper = {1.0};
  LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Infeasible);
  CHECK(s.violated_row == 0);

  LpProblem q;
  q.objective = {0.0, 0.0};
  q.rows = {{1.0, 1.0}, {1.0, -1.0}};
  q.row_lower = {0.0, 5.0};
  q.row_upper = {3.0, 6.0};
  q.var_lower = {0.0, 0.0};
  q.var_upper = {1.0, 1.0};
  s = solve_lp(q);
  REQUIRE(s.status == LpStatus::Infeasible);
  CHECK(s.violated_row == 1);
}

TEST_CASE("unbounded direction is reported") {
  LpProblem p;
  p.objective = {-1.0};
  p.rows = {{0.0}};
  p.row_lower = {-1.0};
  p.row_upper = {1.0};
  p.var_lower = {0.0};
  p.var_upper = {kLpInfinity};
  LpSolution s = solve_lp(p);
  CHECK(s.status == LpStatus::Unbounded);
}

TEST_CASE("malformed input is rejected") {
  LpProblem p;
  p.objective = {1.0};
  p.var_lower = {1.0};
  p.var_upper = {0.0};
  CHECK_THROWS_AS(solve_lp(p), std::invalid_argument);

  p.var_upper = {2.0};
  p.rows = {{1.0, 2.0}};  // wrong width
  p.row_lower = {0.0};
  p.row_upper = {1.0};
  CHECK_THROWS_AS(solve_lp(p), std::invalid_argument);

  p.rows = {{1.0}};
  p.row_lower = {2.0};
  p.row_upper = {1.0};
  CHECK_THROWS_AS(solve_lp(p), std::invalid_argument);

  p.row_lower = {0.0};
  p.row_upper = {1.0};
  p.var_lower = {-kLpInfinity};
  CHECK_THROWS_AS(solve_lp(p), std::invalid_argument);

  p.var_lower = {std::nan("")};
  CHECK_THROWS_AS(solve_lp(p), std::invalid_argument);
}

TEST_CASE("fuzz: feasible-by-construction instances solve with certificates") {
  Lcg g(777);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(g.uniform() * 12);
    const int m = static_cast<int>(g.uniform() * 8);
    LpProblem p;
    std::vector<double> x0(n);
    for (int j = 0; j < n; ++j) {
      const double lo = 2.0 * g.uniform() - 1.0;
      p.var_lower.push_back(lo);
      p.var_upper.push_back(lo + g.uniform() * 2.0);
      p.objective.push_back(2.0 * g.uniform() - 1.0);
      x0[j] = p.var_lower[j] + g.uniform() * (p.var_upper[j] - p.var_lower[j]);
    }
    for (int i = 0; i < m; ++i) {
      std::vector<double> row(n);
      for (int j = 0; j < n; ++j) row[j] = 2.0 * g.uniform() - 1.0;
      const double act = row_activity(row, x0);
      const double style = g.uniform();
      p.rows.push_back(row);
      if (style < 0.2) {
        p.row_lower.push_back(act);  // pinned equality through x0
        p.row_upper.push_back(act);
      } else if (style < 0.5) {
        p.row_lower.push_back(-kLpInfinity);
        p.row_upper.push_back(act + g.uniform());
      } else if (style < 0.8) {
        p.row_lower.push_back(act - g.uniform());
        p.row_upper.push_back(kLpInfinity);
      } else {
        p.row_lower.push_back(act - g.uniform());
        p.row_upper.push_back(act + g.uniform());
      }
    }
    LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    check_primal_feasible(p, s, 1e-7);
    const double x0_obj = row_activity(p.objective, x0);
    CHECK(s.objective <= x0_obj + 1e-7 * (1.0 + std::fabs(x0_obj)));
    CHECK(s.duality_gap >= -1e-9);
    CHECK(s.duality_gap <= 1e-8 * (1.0 + std::fabs(s.objective)));
  }
}
