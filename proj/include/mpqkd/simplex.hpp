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

#ifndef MPQKD_SIMPLEX_HPP_
#define MPQKD_SIMPLEX_HPP_

#include <limits>
#include <vector>

namespace mpqkd {

inline constexpr double kLpInfinity = std::numeric_limits<double>::infinity();

// Minimize objective . x subject to
//   row_lower[i] <= rows[i] . x <= row_upper[i]   for every row i,
//   var_lower[j] <= x[j] <= var_upper[j]          for every variable j.
//
// Variable lower bounds must be finite; everything else may be infinite on
// the unconstrained side. The instances this project builds are small and
// dense (at most a few hundred variables against a couple dozen rows), which
// is what the solver is tuned for.
struct LpProblem {
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<double> row_lower;
  std::vector<double> row_upper;
  std::vector<double> var_lower;
  std::vector<double> var_upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  // One multiplier per row, valid when status is Optimal.
  std::vector<double> dual;
  // objective minus the certified lower bound implied by `dual`; a
  // nonnegative number close to zero proves optimality without trusting
  // the pivot sequence.
  double duality_gap = 0.0;
  // Index of a constraint that cannot be met when status is Infeasible,
  // -1 otherwise.
  int violated_row = -1;
};

// Two-phase primal simplex with bounded variables on a dense tableau.
// Throws std::invalid_argument on malformed input (dimension mismatch,
// inverted bounds, non-finite coefficients, infinite variable lower bound).
LpSolution solve_lp(const LpProblem &problem);

}  // namespace mpqkd

#endif  // MPQKD_SIMPLEX_HPP_
