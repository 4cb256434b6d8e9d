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

#include "mpqkd/decoy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpqkd/keyrate.hpp"
#include "mpqkd/simplex.hpp"

namespace mpqkd {
namespace {

[[noreturn]] void fail(const std::string &what) {
  throw std::invalid_argument("invalid " + what);
}

double poisson_pmf(int k, double mean) {
  if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
  double term = std::exp(-mean);
  for (int j = 1; j <= k; ++j) term *= mean / j;
  return term;
}

// P(X > k) by summing the pmf upward. The complement 1 - cdf loses the tail
// to rounding once it falls under the double epsilon of 1, and the adaptive
// cutoff search needs tails far smaller than that.
double poisson_tail_above(double mean, int k) {
  if (mean == 0.0) return 0.0;
  double term = poisson_pmf(k + 1, mean);
  double sum = 0.0;
  for (int j = k + 1; j < k + 600; ++j) {
    sum += term;
    term *= mean / (j + 1);
    if (term < sum * 1e-18 && j > mean) break;
  }
  return sum;
}

// Exactly-one-click probability of a round whose two pulses sum to intensity
// x, and the photon-caused part of it.
double click_sum(double x, double eta, double pd) {
  return 1.0 - (1.0 - 2.0 * pd) * std::exp(-eta * x);
}
double click_sum_photon(double x, double eta) { return 1.0 - std::exp(-eta * x); }

struct CellRef {
  int a = 0;
  int b = 0;
};

const char *basis_name(PairBasis basis) {
  switch (basis) {
    case PairBasis::Z: return "Z";
    case PairBasis::X: return "X";
    default: return "?";
  }
}

void check_estimation_basis(PairBasis basis) {
  if (basis != PairBasis::Z && basis != PairBasis::X) {
    fail("basis (estimation handles Z and X tallies)");
  }
}

// Pr(cell | k) for all nine cells at once; returns false when no cell of the
// basis can produce k, which pins the corresponding count to zero.
bool posterior_row(PairBasis basis, int k_a, int k_b, const SourceModel &src,
                   double out[3][3]) {
  double total = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double pa = src.class_prior(basis, a) *
                      poisson_pmf(k_a, src.class_sum(basis, a));
    for (int b = 0; b < 3; ++b) {
      const double pb = src.class_prior(basis, b) *
                        poisson_pmf(k_b, src.class_sum(basis, b));
      out[a][b] = pa * pb;
      total += out[a][b];
    }
  }
  if (total <= 0.0) return false;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) out[a][b] /= total;
  }
  return true;
}

struct TruncationPick {
  int k_max = 0;
  double allowance = 0.0;
};

// Smallest per-party cutoff with Poisson tail below 1e-10, then grown until
// the worst-case truncated mass is negligible next to the smallest populated
// cell, so the slack never drowns an informative constraint.
TruncationPick pick_truncation(double mean_max, double total, double population,
                               double min_positive_cell) {
  TruncationPick pick;
  int k = 1;
  while (k < 80 && poisson_tail_above(mean_max, k) >= 1e-10) ++k;
  double tail = poisson_tail_above(mean_max, k);
  double allow = 2.0 * tail * (total + population);
  const double target = 1e-12 * (1.0 + min_positive_cell);
  while (allow > target && k < 80) {
    ++k;
    tail = poisson_tail_above(mean_max, k);
    allow = 2.0 * tail * (total + population);
  }
  pick.k_max = k;
  pick.allowance = allow;
  return pick;
}

DecoyLpResult solve_cell_lp(const BasisTally &tally, const SourceModel &source,
                            const EstimationMode &mode,
                            const DecoyLpOptions &options, bool use_errors,
                            bool maximize) {
  source.validate();
  mode.validate();
  check_estimation_basis(tally.basis);

  double counts[3][3];
  double total = 0.0;
  double min_positive = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const double m = tally.m[a][b];
      const double e = tally.e[a][b];
      if (!(m >= 0.0) || !(e >= 0.0)) fail("tally cell (negative count)");
      if (e > m * (1.0 + 1e-12) + 1e-9) fail("tally cell (errors exceed clicks)");
      counts[a][b] = use_errors ? e : m;
      total += counts[a][b];
      if (counts[a][b] > 0.0 &&
          (min_positive == 0.0 || counts[a][b] < min_positive)) {
        min_positive = counts[a][b];
      }
    }
  }
  if (tally.population < 0.0) fail("tally population");

  int k_max = options.k_max;
  double allowance = options.tail_allowance;
  const double mean_max = source.class_sum(tally.basis, 2);
  if (k_max <= 0) {
    const TruncationPick pick =
        pick_truncation(mean_max, total, tally.population, min_positive);
    k_max = pick.k_max;
    if (allowance < 0.0) allowance = pick.allowance;
  } else if (allowance < 0.0) {
    allowance = 2.0 * poisson_tail_above(mean_max, k_max) *
                (total + tally.population);
  }

  const int grid = k_max + 1;
  const int n_vars = grid * grid;
  const int idx11 = 1 * grid + 1;
  const double var_scale = std::max(total, 1.0);

  LpProblem lp;
  lp.objective.assign(n_vars, 0.0);
  lp.objective[idx11] = maximize ? -var_scale : var_scale;
  lp.var_lower.assign(n_vars, 0.0);
  lp.var_upper.assign(n_vars, total / var_scale);

  // Column coefficients, gathered row-wise afterwards. Photon pairs no cell
  // can produce have zero prior mass, so their counts are pinned to zero.
  std::vector<double> post(static_cast<size_t>(n_vars) * 9, 0.0);
  for (int ka = 0; ka < grid; ++ka) {
    for (int kb = 0; kb < grid; ++kb) {
      const int v = ka * grid + kb;
      double cell[3][3];
      if (!posterior_row(tally.basis, ka, kb, source, cell)) {
        lp.var_upper[v] = 0.0;
        continue;
      }
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          post[static_cast<size_t>(v) * 9 + a * 3 + b] = cell[a][b];
        }
      }
    }
  }

  std::vector<CellRef> row_cells;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (!options.use_row[a][b]) continue;
      const ChernoffBounds eb = chernoff_expectation_bounds(counts[a][b], mode);
      const double lo = std::max(0.0, eb.lower - allowance);
      const double hi = eb.upper + allowance;
      const double row_scale = hi > 0.0 ? hi : 1.0;
      std::vector<double> coeff(n_vars, 0.0);
      for (int v = 0; v < n_vars; ++v) {
        coeff[v] =
            post[static_cast<size_t>(v) * 9 + a * 3 + b] * var_scale / row_scale;
      }
      lp.rows.push_back(std::move(coeff));
      lp.row_lower.push_back(lo / row_scale);
      lp.row_upper.push_back(hi / row_scale);
      row_cells.push_back({a, b});
    }
  }

  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::Infeasible) {
    std::ostringstream msg;
    msg << "single-photon estimation failed: ";
    if (sol.violated_row >= 0 &&
        sol.violated_row < static_cast<int>(row_cells.size())) {
      const CellRef cell = row_cells[sol.violated_row];
      msg << "the " << basis_name(tally.basis) << " tally cell (mu_a="
          << source.class_sum(tally.basis, cell.a)
          << ", mu_b=" << source.class_sum(tally.basis, cell.b) << ") ";
    } else {
      msg << "a " << basis_name(tally.basis) << " tally cell ";
    }
    msg << "conflicts with the others beyond the allowed statistical slack";
    throw std::runtime_error(msg.str());
  }
  if (sol.status != LpStatus::Optimal) {
    throw std::runtime_error("single-photon estimation failed: solver did not "
                             "reach an optimum on a bounded program");
  }

  DecoyLpResult result;
  result.optimum = std::max(0.0, maximize ? -sol.objective : sol.objective);
  result.duality_gap = std::abs(sol.duality_gap);
  result.k_max = k_max;
  result.tail_allowance = allowance;
  return result;
}

}  // namespace

void SourceModel::validate() const {
  if (!(mu > 0.0) || !(mu < 10.0)) fail("SourceModel.mu");
  if (!(nu > 0.0) || !(nu < mu)) fail("SourceModel.nu");
  if (!(s_0 >= 0.0) || !(s_0 <= 1.0)) fail("SourceModel.s_0");
  if (!(s_nu >= 0.0) || !(s_nu <= 1.0)) fail("SourceModel.s_nu");
  if (!(s_mu >= 0.0) || !(s_mu <= 1.0)) fail("SourceModel.s_mu");
  if (std::abs(s_0 + s_nu + s_mu - 1.0) > 1e-12) {
    fail("SourceModel.s_0 + s_nu + s_mu");
  }
}

double SourceModel::class_prior(PairBasis basis, int cls) const {
  if (cls < 0 || cls > 2) fail("intensity class");
  const double s[3] = {s_0, s_nu, s_mu};
  if (basis == PairBasis::Z) {
    return cls == 0 ? s_0 * s_0 : 2.0 * s_0 * s[cls];
  }
  if (basis == PairBasis::X) return s[cls] * s[cls];
  fail("basis (estimation handles Z and X tallies)");
}

double SourceModel::class_sum(PairBasis basis, int cls) const {
  if (cls < 0 || cls > 2) fail("intensity class");
  const double v[3] = {0.0, nu, mu};
  if (basis == PairBasis::Z) return v[cls];
  if (basis == PairBasis::X) return 2.0 * v[cls];
  fail("basis (estimation handles Z and X tallies)");
}

SourceModel SourceModel::from_protocol(const ProtocolParams &params) {
  SourceModel src;
  src.mu = params.mu;
  src.nu = params.nu;
  src.s_0 = params.s_0;
  src.s_nu = params.s_nu;
  src.s_mu = params.s_mu;
  return src;
}

void EstimationMode::validate() const {
  if (asymptotic) return;
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) fail("EstimationMode.epsilon");
}

double BasisTally::m_total() const {
  double sum = 0.0;
  for (const auto &row : m) {
    for (double v : row) sum += v;
  }
  return sum;
}

double BasisTally::e_total() const {
  double sum = 0.0;
  for (const auto &row : e) {
    for (double v : row) sum += v;
  }
  return sum;
}

BasisTally basis_tally(const TallyTable &tally, PairBasis basis) {
  check_estimation_basis(basis);
  BasisTally out;
  out.basis = basis;
  const auto &cells = basis == PairBasis::Z ? tally.z : tally.x;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      out.m[a][b] = static_cast<double>(cells[a][b].clicks);
      out.e[a][b] = static_cast<double>(cells[a][b].errors);
    }
  }
  out.population = static_cast<double>(tally.pairs_total);
  return out;
}

double expected_click_prob(const SourceModel &source,
                           const ChannelParams &channel) {
  source.validate();
  validate(channel);
  const double eta = derive_transmittance(channel);
  const double pd = channel.dark_count_prob;
  const double s[3] = {source.s_0, source.s_nu, source.s_mu};
  const double v[3] = {0.0, source.nu, source.mu};
  double p = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      p += s[i] * s[j] * click_sum(v[i] + v[j], eta, pd);
    }
  }
  return p;
}

BasisTally expected_basis_tally(PairBasis basis, const SourceModel &source,
                                const ChannelParams &channel,
                                int phase_slices, double n_pairs) {
  source.validate();
  validate(channel);
  check_estimation_basis(basis);
  if (phase_slices < 2) fail("phase_slices");
  if (!(n_pairs >= 0.0)) fail("n_pairs");

  const double eta = derive_transmittance(channel);
  const double pd = channel.dark_count_prob;
  const double ed = channel.misalignment;
  const double p_bar = expected_click_prob(source, channel);
  const double cond = n_pairs / (p_bar * p_bar);
  const double v[3] = {0.0, source.nu, source.mu};

  BasisTally out;
  out.basis = basis;
  out.population = n_pairs;
  for (int a = 0; a < 3; ++a) {
    const double pa = source.class_prior(basis, a);
    for (int b = 0; b < 3; ++b) {
      const double w = pa * source.class_prior(basis, b) * cond;
      if (basis == PairBasis::Z) {
        // Anti-aligned arrangements put one pulse in each round; aligned ones
        // concentrate both in one round and need a dark count in the other,
        // which is also what flips the positional bits into disagreement.
        const double sig = click_sum(v[a], eta, pd) * click_sum(v[b], eta, pd);
        const double err =
            click_sum(0.0, eta, pd) * click_sum(v[a] + v[b], eta, pd);
        out.m[a][b] = w * 0.5 * (sig + err);
        out.e[a][b] = (a == 0 || b == 0) ? 0.5 * out.m[a][b] : w * 0.5 * err;
      } else {
        // Both rounds carry the same per-round sum. Alignment sifting keeps
        // 2/D of the pairs; misalignment applies when both clicks are photon
        // caused, otherwise the bit is a coin flip.
        const double s_round = v[a] + v[b];
        const double keep = 2.0 / phase_slices;
        const double c = click_sum(s_round, eta, pd);
        const double g = click_sum_photon(s_round, eta);
        out.m[a][b] = w * keep * c * c;
        out.e[a][b] = w * keep * (ed * g * g + 0.5 * (c * c - g * g));
      }
    }
  }
  return out;
}

double photon_pair_prob(int k_a, int k_b, double mu_a, double mu_b) {
  if (k_a < 0 || k_b < 0) fail("photon number");
  if (!(mu_a >= 0.0) || !(mu_b >= 0.0)) fail("intensity");
  return poisson_pmf(k_a, mu_a) * poisson_pmf(k_b, mu_b);
}

double intensity_posterior(PairBasis basis, int cell_a, int cell_b, int k_a,
                           int k_b, const SourceModel &source) {
  source.validate();
  check_estimation_basis(basis);
  if (cell_a < 0 || cell_a > 2 || cell_b < 0 || cell_b > 2) {
    fail("intensity class");
  }
  if (k_a < 0 || k_b < 0) fail("photon number");
  double cells[3][3];
  if (!posterior_row(basis, k_a, k_b, source, cells)) {
    throw std::domain_error(
        "intensity posterior undefined: no cell of this basis can produce "
        "the photon pair");
  }
  return cells[cell_a][cell_b];
}

ChernoffBounds chernoff_expectation_bounds(double observed,
                                           const EstimationMode &mode) {
  mode.validate();
  if (!(observed >= 0.0)) fail("observed count");
  if (mode.asymptotic) return {observed, observed};
  const double big = std::log(1.0 / mode.epsilon);

  ChernoffBounds out;
  // Upper: largest m with m - sqrt(2 m L) = observed, a quadratic in sqrt(m).
  const double root = (std::sqrt(2.0 * big) +
                       std::sqrt(2.0 * big + 4.0 * observed)) / 2.0;
  out.upper = root * root;

  // Lower: largest m below observed with m (1 + d(m)) = observed where
  // m d(m)^2 = L (2 + d(m)). The left side grows monotonically from L at
  // m -> 0, so anything at or below L rounds down to an empty bound.
  if (observed <= big) {
    out.lower = 0.0;
    return out;
  }
  const auto grown = [big](double m) {
    const double d = (big + std::sqrt(big * big + 8.0 * big * m)) / (2.0 * m);
    return m * (1.0 + d);
  };
  double lo = std::numeric_limits<double>::min();
  double hi = observed;
  for (int it = 0; it < 200 && (hi - lo) > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (grown(mid) < observed ? lo : hi) = mid;
  }
  out.lower = 0.5 * (lo + hi);
  return out;
}

double chernoff_realization_lower(double mean, const EstimationMode &mode) {
  mode.validate();
  if (!(mean >= 0.0)) fail("mean");
  if (mode.asymptotic) return mean;
  const double big = std::log(1.0 / mode.epsilon);
  return std::max(0.0, mean - std::sqrt(2.0 * mean * big));
}

double chernoff_realization_upper(double mean, const EstimationMode &mode) {
  mode.validate();
  if (!(mean >= 0.0)) fail("mean");
  if (mode.asymptotic) return mean;
  const double big = std::log(1.0 / mode.epsilon);
  return mean + (big + std::sqrt(big * big + 8.0 * big * mean)) / 2.0;
}

double serfling_deviation(double n_target, double n_sample, double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0)) fail("epsilon");
  if (!(n_target > 0.0) || !(n_sample > 0.0)) {
    return std::numeric_limits<double>::infinity();
  }
  const double big = std::log(1.0 / epsilon);
  return std::sqrt(0.5 * big * (1.0 / n_target + 1.0 / n_sample));
}

DecoyLpResult solve_lp_min_M11(const BasisTally &tally,
                               const SourceModel &source,
                               const EstimationMode &mode,
                               const DecoyLpOptions &options) {
  return solve_cell_lp(tally, source, mode, options, false, false);
}

DecoyLpResult solve_lp_max_E11(const BasisTally &tally,
                               const SourceModel &source,
                               const EstimationMode &mode,
                               const DecoyLpOptions &options) {
  return solve_cell_lp(tally, source, mode, options, true, true);
}

GainYield gains_yield_transform(const BasisTally &tally,
                                const SourceModel &source, double n_pairs) {
  source.validate();
  check_estimation_basis(tally.basis);
  if (!(n_pairs > 0.0)) fail("n_pairs");
  GainYield out;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const double q = source.class_prior(tally.basis, a) *
                       source.class_prior(tally.basis, b);
      out.prior[a][b] = q;
      if (q == 0.0) {
        if (tally.m[a][b] > 0.0 || tally.e[a][b] > 0.0) {
          fail("tally (populated cell with zero sending probability)");
        }
        continue;
      }
      out.gain[a][b] = tally.m[a][b] / (q * n_pairs);
      out.err_gain[a][b] = tally.e[a][b] / (q * n_pairs);
    }
  }
  return out;
}

double finite_key_length(double m_cell, double e_z_rate,
                         const YieldBounds &bounds, double f) {
  if (!(m_cell >= 0.0)) fail("m_cell");
  if (!(e_z_rate >= 0.0) || !(e_z_rate <= 1.0)) fail("e_z_rate");
  if (!(f >= 1.0)) fail("error correction factor");
  if (bounds.m11_lower <= 0.0) return 0.0;
  // Above one half the privacy term has no content; capping there keeps the
  // bracket nonpositive instead of letting the symmetry of H turn an
  // overwhelming phase-error bound back into key.
  const double e_ph = std::clamp(bounds.e11_ph_upper, 0.0, 0.5);
  const double key = bounds.m11_lower * (1.0 - binary_entropy(e_ph)) -
                     f * m_cell * binary_entropy(e_z_rate);
  return std::max(0.0, key);
}

DecoyReport run_decoy_pipeline(const BasisTally &z_tally,
                               const BasisTally &x_tally,
                               const SourceModel &source,
                               const EstimationMode &mode, double f) {
  source.validate();
  mode.validate();
  if (z_tally.basis != PairBasis::Z) fail("z_tally basis");
  if (x_tally.basis != PairBasis::X) fail("x_tally basis");

  DecoyReport report;
  report.bounds.mode = mode;

  const DecoyLpResult z_min = solve_lp_min_M11(z_tally, source, mode);
  const DecoyLpResult x_min = solve_lp_min_M11(x_tally, source, mode);
  const DecoyLpResult e_max = solve_lp_max_E11(x_tally, source, mode);
  report.m11_z_total_lower = z_min.optimum;
  report.m11_x_lower = x_min.optimum;
  report.e11_x_upper = e_max.optimum;
  report.duality_gap_max =
      std::max({z_min.duality_gap, x_min.duality_gap, e_max.duality_gap});
  report.k_max_z = z_min.k_max;
  report.k_max_x = std::max(x_min.k_max, e_max.k_max);
  report.tail_allowance_z = z_min.tail_allowance;
  report.tail_allowance_x = std::max(x_min.tail_allowance, e_max.tail_allowance);

  // Of the single-photon pairs in the Z class, a fixed posterior share sits
  // in the (mu,mu) cell; in finite mode the realized share gets its own
  // deviation bound.
  report.posterior_mu_mu = intensity_posterior(PairBasis::Z, 2, 2, 1, 1, source);
  const double cell_mean = report.posterior_mu_mu * z_min.optimum;
  const double m11_cell =
      mode.asymptotic ? cell_mean : chernoff_realization_lower(cell_mean, mode);

  report.m_z_cell = z_tally.m[2][2];
  report.e_z_cell = z_tally.e[2][2];
  if (report.e_z_cell > report.m_z_cell) fail("Z tally (errors exceed clicks)");
  report.e_z_rate =
      report.m_z_cell > 0.0 ? report.e_z_cell / report.m_z_cell : 0.0;

  YieldBounds &bounds = report.bounds;
  bounds.m11_lower = m11_cell;
  bounds.e11_upper = e_max.optimum;
  bounds.q11_lower = report.m_z_cell > 0.0 ? m11_cell / report.m_z_cell : 0.0;
  bounds.vacuous = !(m11_cell > 0.0) || !(x_min.optimum > 0.0);
  if (bounds.vacuous) {
    bounds.e11_ph_upper = 0.5;
    report.serfling_gamma = 0.0;
  } else {
    const double e_rate = e_max.optimum / x_min.optimum;
    report.serfling_gamma =
        mode.asymptotic
            ? 0.0
            : serfling_deviation(m11_cell, x_min.optimum, mode.epsilon);
    bounds.e11_ph_upper = std::min(1.0, e_rate + report.serfling_gamma);
  }

  report.key_bits = finite_key_length(report.m_z_cell, report.e_z_rate,
                                      bounds, f);
  return report;
}

}  // namespace mpqkd
