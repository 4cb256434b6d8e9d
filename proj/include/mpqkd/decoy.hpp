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

#ifndef MPQKD_DECOY_HPP_
#define MPQKD_DECOY_HPP_

#include "mpqkd/channel.hpp"
#include "mpqkd/montecarlo.hpp"

namespace mpqkd {

// Three-intensity source description used by the estimation layer. The
// per-basis class priors follow from the sending probabilities: a party is
// in Z class c when exactly one of its two slots carries intensity c != 0
// (two arrangements), in X class c when both slots carry c, and class 0
// (both slots vacuum) belongs to both tables.
struct SourceModel {
  double mu = 0.5;
  double nu = 0.01;
  double s_0 = 0.495;
  double s_nu = 0.01;
  double s_mu = 0.495;

  void validate() const;  // throws std::invalid_argument naming the field

  // Unnormalized probability that one party lands in tally class cls of the
  // given basis, and that class's per-party intensity sum. basis must be Z
  // or X.
  double class_prior(PairBasis basis, int cls) const;
  double class_sum(PairBasis basis, int cls) const;

  static SourceModel from_protocol(const ProtocolParams &params);
};

// Asymptotic mode treats observed counts as exact expectations; finite mode
// surrounds them with Chernoff deviations at failure probability epsilon per
// bound and transfers phase errors with a Serfling-style correction.
struct EstimationMode {
  bool asymptotic = true;
  double epsilon = 1e-7;

  static EstimationMode Asymptotic() { return {true, 1e-7}; }
  static EstimationMode Finite(double eps = 1e-7) { return {false, eps}; }

  void validate() const;
};

// Per-basis tally with real-valued cells so both integer Monte Carlo counts
// and fractional model expectations fit. population is the number of pairs
// of this run that could have contributed (clicked or not); it only feeds
// the truncation-tail allowance, and 0 means unknown.
struct BasisTally {
  PairBasis basis = PairBasis::Z;
  double m[3][3] = {};
  double e[3][3] = {};
  double population = 0.0;

  double m_total() const;
  double e_total() const;
};

// Extracts one basis from a Monte Carlo tally. population defaults to the
// tally's total pair count.
BasisTally basis_tally(const TallyTable &tally, PairBasis basis);

// Model-expected fractional tally under the photon-number detection model:
// cell probabilities conditioned on both rounds of the pair having clicked,
// scaled by n_pairs. X cells include the alignment-survival factor 2/D.
BasisTally expected_basis_tally(PairBasis basis, const SourceModel &source,
                                const ChannelParams &channel,
                                int phase_slices, double n_pairs);

// Per-round success probability under the same model, averaged over the
// nine intensity combinations. Feeds the pairing rate when deriving pair
// counts from round counts.
double expected_click_prob(const SourceModel &source,
                           const ChannelParams &channel);

// Pr(k | mu) as a product of two Poisson distributions over the per-party
// intensity sums. Throws std::invalid_argument on negative input.
double photon_pair_prob(int k_a, int k_b, double mu_a, double mu_b);

// Bayes posterior Pr(cell | k) of the intensity cell within one basis given
// the pair photon numbers. Throws std::domain_error when no cell of the
// basis can produce k.
double intensity_posterior(PairBasis basis, int cell_a, int cell_b, int k_a,
                           int k_b, const SourceModel &source);

struct ChernoffBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Two-sided interval for the expectation behind an observed count, from the
// inverted multiplicative Chernoff tails. Asymptotic mode returns
// (observed, observed).
ChernoffBounds chernoff_expectation_bounds(double observed,
                                           const EstimationMode &mode);

// One-sided bounds for the realization of a sum of independent indicators
// with known expectation. Asymptotic mode returns the mean unchanged.
double chernoff_realization_lower(double mean, const EstimationMode &mode);
double chernoff_realization_upper(double mean, const EstimationMode &mode);

// Serfling-style deviation for transferring an error rate measured on
// n_sample tested positions to n_target untested ones. Returns +infinity
// when either count is nonpositive.
double serfling_deviation(double n_target, double n_sample, double epsilon);

struct DecoyLpOptions {
  // 0 picks the smallest per-party photon cutoff whose Poisson tail at the
  // basis's largest intensity is below 1e-10, then grows it until the tail
  // allowance is negligible next to the smallest populated cell.
  int k_max = 0;
  // Derived from the tail and the population when negative.
  double tail_allowance = -1.0;
  // Row mask over tally cells, for ablating intensities.
  bool use_row[3][3] = {{true, true, true},
                        {true, true, true},
                        {true, true, true}};
};

struct DecoyLpResult {
  double optimum = 0.0;
  double duality_gap = 0.0;  // absolute, solver-certified
  int k_max = 0;
  double tail_allowance = 0.0;
};

// Truncated linear programs over per-photon-number pair counts M_k (or error
// counts E_k), constrained per intensity cell by
//   E_L[M^cell] - allow <= sum_k Pr(cell|k) M_k <= E_U[M^cell] + allow.
// min_M11 minimizes M_(1,1) for a valid lower bound; max_E11 maximizes
// E_(1,1) for a valid upper bound. Throws std::runtime_error naming the
// violated cell when the observations are inconsistent beyond the slack.
DecoyLpResult solve_lp_min_M11(const BasisTally &tally,
                               const SourceModel &source,
                               const EstimationMode &mode,
                               const DecoyLpOptions &options = {});
DecoyLpResult solve_lp_max_E11(const BasisTally &tally,
                               const SourceModel &source,
                               const EstimationMode &mode,
                               const DecoyLpOptions &options = {});

// Gain view of a tally: Q^cell = M^cell / (q^cell N_p). Scaling N_p rescales
// gains without moving the count-space LP bounds. Throws
// std::invalid_argument when a populated cell has zero prior.
struct GainYield {
  double prior[3][3] = {};
  double gain[3][3] = {};
  double err_gain[3][3] = {};
};
GainYield gains_yield_transform(const BasisTally &tally,
                                const SourceModel &source, double n_pairs);

struct YieldBounds {
  // Z-basis (mu,mu)-cell single-photon pairs, after the posterior split and
  // (finite mode) the realization bound.
  double m11_lower = 0.0;
  // X-basis single-photon-pair error count upper bound, whole basis.
  double e11_upper = 0.0;
  double q11_lower = 0.0;     // m11_lower / M^(mu,mu),Z
  double e11_ph_upper = 1.0;  // phase-error rate bound for the key cell
  bool vacuous = true;        // no usable single-photon information
  EstimationMode mode;
};

// Finite key length
//   M_R = M11_lower (1 - H(e11_ph)) - f M_cell H(e_z_rate),
// clamped at zero. e_z_rate is the observed error rate of the Z (mu,mu)
// cell.
double finite_key_length(double m_cell, double e_z_rate,
                         const YieldBounds &bounds, double f);

// Everything the estimation produced, for reports and the CLI.
struct DecoyReport {
  YieldBounds bounds;
  double m11_z_total_lower = 0.0;
  double m11_x_lower = 0.0;
  double e11_x_upper = 0.0;
  double posterior_mu_mu = 0.0;  // Pr((mu,mu) | k=(1,1)) in the Z basis
  double serfling_gamma = 0.0;
  double m_z_cell = 0.0;
  double e_z_cell = 0.0;
  double e_z_rate = 0.0;
  double duality_gap_max = 0.0;
  int k_max_z = 0;
  int k_max_x = 0;
  double tail_allowance_z = 0.0;
  double tail_allowance_x = 0.0;
  double key_bits = 0.0;
};

// Full estimation chain: Z and X linear programs, posterior split of the
// single-photon population into the (mu,mu) cell, phase-error transfer, and
// the key length at error-correction efficiency f.
DecoyReport run_decoy_pipeline(const BasisTally &z_tally,
                               const BasisTally &x_tally,
                               const SourceModel &source,
                               const EstimationMode &mode, double f);

}  // namespace mpqkd

#endif  // MPQKD_DECOY_HPP_
