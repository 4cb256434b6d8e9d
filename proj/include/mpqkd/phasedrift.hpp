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

#ifndef MPQKD_PHASEDRIFT_HPP_
#define MPQKD_PHASEDRIFT_HPP_

#include <cstdint>
#include <vector>

#include "mpqkd/channel.hpp"

namespace mpqkd {

// Linear model of the frequency difference between the two lasers:
// omega_delta(t) = slope * t + omega0, plus a slow phase noise realized as a
// Gaussian random walk with per-pulse step slow_noise_std.
struct DriftModel {
  double slope = 0.0;           // rad/s^2
  double omega0 = 0.0;          // rad/s
  double slow_noise_std = 0.0;  // rad per pulse
  double rep_rate = 625e6;      // Hz
  double duration = 1e-4;       // s

  void validate() const;  // throws std::invalid_argument naming the field
};

// One recorded interference event at the measurement site. Pulses with no
// click are not recorded; Both marks a double click, which carries no phase
// information and is skipped by pairing.
struct InterferenceRecord {
  std::int64_t index = 0;
  Outcome outcome = Outcome::None;
};

// Deterministic part of the relative phase accumulated between two emission
// times: slope * (t_j^2 - t_i^2) / 2 + omega0 * (t_j - t_i), reduced to
// [0, 2 pi). The slow-noise difference is a property of a realized run, not
// of the model, so it enters through the simulator only.
double relative_phase(double t_i, double t_j, const DriftModel &model);

// Simulates the reference-pulse interference run: both sides send unmodulated
// pulses whose relative phase follows the drift model, and the site detects
// them with the same interference law as the protocol simulator. The
// intensity is the per-side value arriving at the site. Returns the clicked
// pulses in increasing index order.
std::vector<InterferenceRecord> simulate_reference_clicks(
    const DriftModel &model, double intensity_at_site,
    double dark_count_prob = 0.0, std::uint64_t seed = 1);

struct DriftEstimatorOptions {
  std::int64_t window_begin = 0;  // first pulse index considered
  std::int64_t window_end = -1;   // one past the last; -1 means all records
  // Prior bound on omega0. Defaults to the Nyquist rate pi * rep_rate; a
  // larger bound cannot be resolved from the click grid and flags the
  // estimate as ambiguous.
  double omega_max = -1.0;
  int min_clicks = 100;
};

struct DriftEstimate {
  double slope = 0.0;   // rad/s^2
  double omega0 = 0.0;  // rad/s, folded into [0, pi * rep_rate]
  // 1 - 2 |matched filter| / clicks: 0 for a perfect fit of fully modulated
  // clicks, near 1 for an uninformative one.
  double residual = 1.0;
  // Set when more than one alias of the fitted frequency lies inside the
  // prior bound, i.e. the click grid cannot distinguish the candidates.
  bool ambiguous = false;
  std::int64_t clicks_used = 0;
};

// Fits (slope, omega0) to the L/R click pattern: a coarse periodogram of the
// signed click sequence picks the beat frequency, then alternating line
// searches refine frequency and chirp on the matched filter. Reliable while
// the chirp sweeps at most a few dozen resolution bins over the window.
// Throws std::runtime_error when the window holds fewer than min_clicks
// usable clicks.
DriftEstimate estimate_drift(const std::vector<InterferenceRecord> &records,
                             double rep_rate,
                             const DriftEstimatorOptions &options = {});

struct IntervalErrorRow {
  std::int64_t l_lo = 0;  // inclusive
  std::int64_t l_hi = 0;  // exclusive
  std::int64_t pairs = 0;
  std::int64_t errors = 0;
  double rate = 0.0;
};

// For each pairing-length bin, greedily pairs single clicks whose index gap
// falls in the bin, predicts the pair's relative phase from the fitted model,
// keeps pairs predicted within half a slice of 0 or pi, and scores them:
// near 0 the two clicks should land on the same detector, near pi on
// opposite ones. Returns one row per bin; an empty record list yields an
// empty table.
std::vector<IntervalErrorRow> error_vs_interval(
    const std::vector<InterferenceRecord> &records, const DriftModel &fitted,
    double slice_width, const std::vector<std::int64_t> &bin_edges);

}  // namespace mpqkd

#endif  // MPQKD_PHASEDRIFT_HPP_
