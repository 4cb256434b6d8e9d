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

#include "mpqkd/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mpqkd {
namespace {

constexpr double kPivotEps = 1e-10;
constexpr double kDegenerateStep = 1e-11;
constexpr int kRefactorEvery = 64;
constexpr int kBlandAfter = 48;

enum class VarStatus { Basic, AtLower, AtUpper };

// Internal working form. The original rows become equalities
// rows[i] . x - s_i = 0 with the slack s_i bounded by the row bounds; one
// artificial per row carries the phase-1 infeasibility. Column layout:
// [0, n_struct) structural, then n_rows slacks, then n_rows artificials.
struct Tableau {
  const LpProblem *lp = nullptr;
  int n_struct = 0;
  int n_rows = 0;
  std::vector<int> row_map;  // kept row -> original row index
  std::vector<double> lo, up;
  std::vector<double> cost;
  std::vector<VarStatus> status;
  std::vector<double> value;  // nonbasic resting value
  std::vector<int> basis;
  std::vector<double> xb;
  std::vector<double> binv;  // n_rows x n_rows, row-major
  std::vector<double> art_sign;

  int total_cols() const { return n_struct + 2 * n_rows; }
  bool is_artificial(int j) const { return j >= n_struct + n_rows; }

  void fill_column(int j, std::vector<double> &out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (j < n_struct) {
      for (int i = 0; i < n_rows; ++i) out[i] = lp->rows[row_map[i]][j];
    } else if (j < n_struct + n_rows) {
      out[j - n_struct] = -1.0;
    } else {
      out[j - n_struct - n_rows] = art_sign[j - n_struct - n_rows];
    }
  }
};

void validate(const LpProblem &p) {
  const size_t n = p.objective.size();
  if (p.var_lower.size() != n || p.var_upper.size() != n)
    throw std::invalid_argument("variable bound arrays must match objective size");
  const size_t m = p.rows.size();
  if (p.row_lower.size() != m || p.row_upper.size() != m)
    throw std::invalid_argument("row bound arrays must match row count");
  for (double c : p.objective)
    if (!std::isfinite(c)) throw std::invalid_argument("objective must be finite");
  for (size_t j = 0; j < n; ++j) {
    if (!std::isfinite(p.var_lower[j]))
      throw std::invalid_argument("variable lower bounds must be finite");
    if (std::isnan(p.var_upper[j]) || p.var_upper[j] < p.var_lower[j])
      throw std::invalid_argument("variable bounds are inverted");
  }
  for (size_t i = 0; i < m; ++i) {
    if (p.rows[i].size() != n)
      throw std::invalid_argument("row length must match objective size");
    for (double a : p.rows[i])
      if (!std::isfinite(a)) throw std::invalid_argument("row coefficients must be finite");
    if (std::isnan(p.row_lower[i]) || std::isnan(p.row_upper[i]) ||
        p.row_lower[i] > p.row_upper[i])
      throw std::invalid_argument("row bounds are inverted");
  }
}

// Rebuilds binv from the current basis by Gauss-Jordan elimination with
// partial pivoting. The basis matrix is always square and invertible; a
// near-zero pivot means the tableau has decayed numerically.
void refactorize(Tableau &t) {
  const int m = t.n_rows;
  if (m == 0) return;
  std::vector<double> mat(static_cast<size_t>(m) * 2 * m, 0.0);
  std::vector<double> col(m);
  for (int k = 0; k < m; ++k) {
    t.fill_column(t.basis[k], col);
    for (int i = 0; i < m; ++i) mat[i * 2 * m + k] = col[i];
  }
  for (int i = 0; i < m; ++i) mat[i * 2 * m + m + i] = 1.0;
  for (int c = 0; c < m; ++c) {
    int piv = c;
    for (int i = c + 1; i < m; ++i)
      if (std::fabs(mat[i * 2 * m + c]) > std::fabs(mat[piv * 2 * m + c])) piv = i;
    if (std::fabs(mat[piv * 2 * m + c]) < 1e-12)
      throw std::runtime_error("lp basis became singular");
    if (piv != c)
      for (int k = 0; k < 2 * m; ++k) std::swap(mat[piv * 2 * m + k], mat[c * 2 * m + k]);
    const double inv = 1.0 / mat[c * 2 * m + c];
    for (int k = 0; k < 2 * m; ++k) mat[c * 2 * m + k] *= inv;
    for (int i = 0; i < m; ++i) {
      if (i == c) continue;
      const double f = mat[i * 2 * m + c];
      if (f == 0.0) continue;
      for (int k = 0; k < 2 * m; ++k) mat[i * 2 * m + k] -= f * mat[c * 2 * m + k];
    }
  }
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) t.binv[i * m + k] = mat[i * 2 * m + m + k];
}

// Recomputes basic values from the nonbasic resting values. The equality
// right-hand side is zero, so x_B = -binv * (sum of nonbasic columns times
// their values).
void recompute_basics(Tableau &t) {
  const int m = t.n_rows;
  std::vector<double> rhs(m, 0.0);
  std::vector<double> col(m);
  for (int j = 0; j < t.total_cols(); ++j) {
    if (t.status[j] == VarStatus::Basic || t.value[j] == 0.0) continue;
    t.fill_column(j, col);
    for (int i = 0; i < m; ++i) rhs[i] -= col[i] * t.value[j];
  }
  for (int i = 0; i < m; ++i) {
    double v = 0.0;
    for (int k = 0; k < m; ++k) v += t.binv[i * m + k] * rhs[k];
    t.xb[i] = v;
  }
}

struct PivotOutcome {
  bool optimal = false;
  bool unbounded = false;
};

// Runs bounded-variable primal simplex until the phase objective is optimal.
PivotOutcome run_phase(Tableau &t) {
  const int m = t.n_rows;
  const int cols = t.total_cols();
  double cost_scale = 1.0;
  for (int j = 0; j < cols; ++j) cost_scale = std::max(cost_scale, std::fabs(t.cost[j]));
  const double dual_tol = 1e-9 * cost_scale;

  std::vector<double> y(m), col(m), w(m);
  int since_refactor = 0;
  int degenerate_streak = 0;
  const long iter_cap = 10000 + 200L * cols;

  for (long iter = 0; iter < iter_cap; ++iter) {
    if (since_refactor++ >= kRefactorEvery) {
      refactorize(t);
      recompute_basics(t);
      since_refactor = 0;
    }

    // Row multipliers y = c_B binv.
    for (int k = 0; k < m; ++k) {
      double v = 0.0;
      for (int i = 0; i < m; ++i) v += t.cost[t.basis[i]] * t.binv[i * m + k];
      y[k] = v;
    }

    // Pricing: Dantzig rule normally, Bland's rule after a degenerate run.
    const bool bland = degenerate_streak > kBlandAfter;
    int enter = -1;
    double best = dual_tol;
    double enter_d = 0.0;
    for (int j = 0; j < cols; ++j) {
      if (t.status[j] == VarStatus::Basic) continue;
      if (t.up[j] - t.lo[j] <= 0.0) continue;  // fixed, cannot move
      double d = t.cost[j];
      if (j < t.n_struct) {
        for (int i = 0; i < m; ++i) d -= y[i] * t.lp->rows[t.row_map[i]][j];
      } else if (j < t.n_struct + m) {
        d += y[j - t.n_struct];
      } else {
        d -= y[j - t.n_struct - m] * t.art_sign[j - t.n_struct - m];
      }
      const bool improving = (t.status[j] == VarStatus::AtLower) ? d < -dual_tol
                                                                 : d > dual_tol;
      if (!improving) continue;
      if (bland) {
        enter = j;
        enter_d = d;
        break;
      }
      if (std::fabs(d) > best) {
        best = std::fabs(d);
        enter = j;
        enter_d = d;
      }
    }
    if (enter < 0) return {true, false};

    const double dir = (t.status[enter] == VarStatus::AtLower) ? 1.0 : -1.0;
    t.fill_column(enter, col);
    for (int i = 0; i < m; ++i) {
      double v = 0.0;
      for (int k = 0; k < m; ++k) v += t.binv[i * m + k] * col[k];
      w[i] = v;
    }

    // Ratio test: the entering variable moves by step >= 0, basics move by
    // -dir * w * step, and the first bound hit wins.
    double step = t.up[enter] - t.lo[enter];  // own-range flip distance
    int leave = -1;
    double leave_pivot = 0.0;
    for (int i = 0; i < m; ++i) {
      const double g = dir * w[i];
      double limit;
      if (g > kPivotEps) {
        limit = (t.xb[i] - t.lo[t.basis[i]]) / g;
      } else if (g < -kPivotEps) {
        limit = (t.up[t.basis[i]] - t.xb[i]) / -g;
      } else {
        continue;
      }
      limit = std::max(limit, 0.0);
      if (limit < step - 1e-13 ||
          (leave >= 0 && limit < step + 1e-13 && std::fabs(w[i]) > std::fabs(leave_pivot))) {
        step = limit;
        leave = i;
        leave_pivot = w[i];
      }
    }

    if (!std::isfinite(step)) {
      // Phase 1 minimizes a sum of nonnegative variables and cannot be
      // unbounded, so an infinite step only makes sense in phase 2.
      return {false, true};
    }
    degenerate_streak = (step <= kDegenerateStep) ? degenerate_streak + 1 : 0;

    if (leave < 0) {
      // Bound flip: the entering variable crosses its whole range.
      t.value[enter] = (dir > 0.0) ? t.up[enter] : t.lo[enter];
      t.status[enter] =
          (dir > 0.0) ? VarStatus::AtUpper : VarStatus::AtLower;
      for (int i = 0; i < m; ++i) t.xb[i] -= dir * step * w[i];
      continue;
    }

    // Basis change.
    const double enter_value = t.value[enter] + dir * step;
    for (int i = 0; i < m; ++i) t.xb[i] -= dir * step * w[i];
    const int out_var = t.basis[leave];
    const double g = dir * w[leave];
    t.status[out_var] = (g > 0.0) ? VarStatus::AtLower : VarStatus::AtUpper;
    t.value[out_var] = (g > 0.0) ? t.lo[out_var] : t.up[out_var];
    t.basis[leave] = enter;
    t.status[enter] = VarStatus::Basic;
    t.xb[leave] = enter_value;

    const double piv = w[leave];
    for (int k = 0; k < m; ++k) t.binv[leave * m + k] /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == leave) continue;
      const double f = w[i];
      if (f == 0.0) continue;
      for (int k = 0; k < m; ++k) t.binv[i * m + k] -= f * t.binv[leave * m + k];
    }
    (void)enter_d;
  }
  throw std::runtime_error("lp iteration cap exceeded");
}

// Lagrangian bound for the multipliers y: relaxing the equality rows and
// minimizing the box terms exactly gives a lower bound on the optimum for
// any y, which certifies the reported objective.
double certified_bound(const Tableau &t, const std::vector<double> &y) {
  double total = 0.0;
  for (int j = 0; j < t.n_struct + t.n_rows; ++j) {
    double d = t.cost[j];
    if (j < t.n_struct) {
      for (int i = 0; i < t.n_rows; ++i) d -= y[i] * t.lp->rows[t.row_map[i]][j];
    } else {
      d += y[j - t.n_struct];
    }
    const double at = (d >= 0.0) ? t.lo[j] : t.up[j];
    if (!std::isfinite(at)) {
      if (std::fabs(d) < 1e-9) continue;
      return -kLpInfinity;
    }
    total += d * at;
  }
  return total;
}

}  // namespace

LpSolution solve_lp(const LpProblem &problem) {
  validate(problem);
  const int n = static_cast<int>(problem.objective.size());
  const int m_all = static_cast<int>(problem.rows.size());

  Tableau t;
  t.lp = &problem;
  t.n_struct = n;
  for (int i = 0; i < m_all; ++i) {
    if (std::isinf(problem.row_lower[i]) && std::isinf(problem.row_upper[i])) continue;
    t.row_map.push_back(i);
  }
  t.n_rows = static_cast<int>(t.row_map.size());
  const int m = t.n_rows;

  const int cols = n + 2 * m;
  t.lo.assign(cols, 0.0);
  t.up.assign(cols, 0.0);
  t.cost.assign(cols, 0.0);
  t.status.assign(cols, VarStatus::AtLower);
  t.value.assign(cols, 0.0);
  t.art_sign.assign(m, 1.0);
  t.basis.resize(m);
  t.xb.assign(m, 0.0);
  t.binv.assign(static_cast<size_t>(m) * m, 0.0);

  for (int j = 0; j < n; ++j) {
    t.lo[j] = problem.var_lower[j];
    t.up[j] = problem.var_upper[j];
    t.value[j] = t.lo[j];
    t.status[j] = VarStatus::AtLower;
  }
  for (int i = 0; i < m; ++i) {
    t.lo[n + i] = problem.row_lower[t.row_map[i]];
    t.up[n + i] = problem.row_upper[t.row_map[i]];
    t.lo[n + m + i] = 0.0;
    t.up[n + m + i] = kLpInfinity;
  }

  // Slacks start at whichever bound is closest to the initial row activity;
  // artificials absorb the remaining residual so the start point is basic.
  for (int i = 0; i < m; ++i) {
    double activity = 0.0;
    for (int j = 0; j < n; ++j) activity += problem.rows[t.row_map[i]][j] * t.value[j];
    const double lo = t.lo[n + i], up = t.up[n + i];
    double s;
    VarStatus st;
    if (!std::isfinite(lo)) {
      s = up;
      st = VarStatus::AtUpper;
    } else if (!std::isfinite(up)) {
      s = lo;
      st = VarStatus::AtLower;
    } else if (std::fabs(activity - lo) <= std::fabs(activity - up)) {
      s = lo;
      st = VarStatus::AtLower;
    } else {
      s = up;
      st = VarStatus::AtUpper;
    }
    t.value[n + i] = s;
    t.status[n + i] = st;
    const double residual = activity - s;
    t.art_sign[i] = (residual < 0.0) ? 1.0 : -1.0;
    t.basis[i] = n + m + i;
    t.status[n + m + i] = VarStatus::Basic;
    t.xb[i] = std::fabs(residual);
    t.binv[i * static_cast<size_t>(m) + i] = 1.0 / t.art_sign[i];
  }

  LpSolution out;

  // Phase 1: drive the artificials to zero.
  for (int i = 0; i < m; ++i) t.cost[n + m + i] = 1.0;
  run_phase(t);
  refactorize(t);
  recompute_basics(t);

  for (int i = 0; i < m; ++i) {
    const int b = t.basis[i];
    if (!t.is_artificial(b)) continue;
    const int row = b - n - m;
    double scale = 1.0 + std::fabs(t.value[n + row]);
    for (int j = 0; j < n; ++j)
      scale += std::fabs(problem.rows[t.row_map[row]][j]) *
               std::max(std::fabs(t.lo[j]), std::isfinite(t.up[j]) ? std::fabs(t.up[j]) : 0.0);
    if (t.xb[i] > 1e-9 * scale) {
      out.status = LpStatus::Infeasible;
      out.violated_row = t.row_map[row];
      return out;
    }
  }

  // Phase 2: real objective with artificials pinned at zero.
  std::fill(t.cost.begin(), t.cost.end(), 0.0);
  for (int j = 0; j < n; ++j) t.cost[j] = problem.objective[j];
  for (int i = 0; i < m; ++i) {
    t.up[n + m + i] = 0.0;
    if (t.status[n + m + i] != VarStatus::Basic) t.value[n + m + i] = 0.0;
  }
  PivotOutcome ph2 = run_phase(t);
  if (ph2.unbounded) {
    out.status = LpStatus::Unbounded;
    out.objective = -kLpInfinity;
    return out;
  }
  refactorize(t);
  recompute_basics(t);

  out.status = LpStatus::Optimal;
  out.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j) out.x[j] = t.value[j];
  for (int i = 0; i < m; ++i)
    if (t.basis[i] < n) out.x[t.basis[i]] = t.xb[i];
  out.objective = 0.0;
  for (int j = 0; j < n; ++j) out.objective += problem.objective[j] * out.x[j];

  std::vector<double> y(m, 0.0);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i) y[k] += t.cost[t.basis[i]] * t.binv[i * static_cast<size_t>(m) + k];
  out.dual.assign(m_all, 0.0);
  for (int i = 0; i < m; ++i) out.dual[t.row_map[i]] = y[i];
  out.duality_gap = out.objective - certified_bound(t, y);
  return out;
}

}  // namespace mpqkd
