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

#ifndef MPQKD_CHANNEL_HPP
#define MPQKD_CHANNEL_HPP

#include <cstdint>

#include "mpqkd/rng.hpp"

namespace mpqkd {

// Symmetric lossy channel between the two senders and the middle measurement
// node, plus the detector pair at that node. Distances are end to end; each
// sender sits total_distance_km / 2 from the detectors.
struct ChannelParams {
  double fiber_loss_db_per_km = 0.2;
  double total_distance_km = 100.0;
  double detector_efficiency = 0.56;
  double dark_count_prob = 1e-8;
  double misalignment = 0.02;
  double error_correction_f = 1.1;
};

// Throws std::invalid_argument naming the offending field.
void validate(const ChannelParams &params);

// Single-side transmittance eta_s: detector efficiency times the fiber
// transmittance over half the total distance.
double derive_transmittance(const ChannelParams &params);

// Detector click outcomes for one round. Exactly one click (L or R) counts as
// a successful round; None and Both do not.
enum class Outcome : uint8_t { None = 0, L = 1, R = 2, Both = 3 };

inline bool is_click(Outcome o) { return o == Outcome::L || o == Outcome::R; }

// Probability of exactly-one-click when the senders emit intensities
// z_a * mu and z_b * mu with independently randomized phases, to first order
// in the dark count rate:
//   1 - (1 - 2 p_d) exp(-eta_s mu (z_a + z_b)).
double click_prob_given_intensity(int z_a, int z_b, double mu,
                                  const ChannelParams &params);

// Same probability conditioned on total emitted photon numbers (n_a, n_b):
//   1 - (1 - 2 p_d) (1 - eta_s)^(n_a + n_b).
double click_prob_given_photons(int n_a, int n_b, const ChannelParams &params);

// Average of click_prob_given_intensity over the four equiprobable intensity
// settings {0, mu} x {0, mu}. This is the per-round success probability that
// feeds the pairing rate.
double avg_click_prob(double mu, const ChannelParams &params);

// Exact exactly-one-click probability when both senders emit phase-randomized
// coherent pulses of intensities mu_a and mu_b:
//   2 (1 - p_d) e^(-x/2) I0(y) - 2 (1 - p_d)^2 e^(-x),
// with x = eta_s (mu_a + mu_b) and y = eta_s sqrt(mu_a mu_b). This averages
// the interference law below over the uniform relative phase, with no
// small-parameter approximation.
double exact_click_prob_phase_averaged(double mu_a, double mu_b,
                                       const ChannelParams &params);

// Samples one round of interference detection. The two pulses of intensity
// mu_a and mu_b (already at the senders, before channel loss) meet on the
// balanced beam splitter with relative phase delta_phi; the detector arm
// intensities are
//   I_L = eta_s (mu_a + mu_b + 2 sqrt(mu_a mu_b) cos(delta_phi)) / 2,
//   I_R = eta_s (mu_a + mu_b - 2 sqrt(mu_a mu_b) cos(delta_phi)) / 2,
// and each arm clicks independently with probability 1 - (1 - p_d) e^(-I).
// Consumes exactly two uniform draws from rng.
Outcome detect_round(double mu_a, double mu_b, double delta_phi,
                     const ChannelParams &params, Rng &rng);

// Modified Bessel function I0 via its power series. Accurate to full double
// precision for the argument range used here (|x| up to ~30).
double bessel_i0(double x);

}  // namespace mpqkd

#endif  // MPQKD_CHANNEL_HPP
