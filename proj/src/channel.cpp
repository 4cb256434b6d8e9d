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

#include "mpqkd/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mpqkd {

void validate(const ChannelParams &params) {
  if (!(params.fiber_loss_db_per_km >= 0.0))
    throw std::invalid_argument("channel: fiber_loss_db_per_km must be >= 0");
  if (!(params.total_distance_km >= 0.0))
    throw std::invalid_argument("channel: total_distance_km must be >= 0");
  if (!(params.detector_efficiency > 0.0 && params.detector_efficiency <= 1.0))
    throw std::invalid_argument("channel: detector_efficiency must be in (0, 1]");
  if (!(params.dark_count_prob >= 0.0 && params.dark_count_prob < 0.5))
    throw std::invalid_argument("channel: dark_count_prob must be in [0, 0.5)");
  if (!(params.misalignment >= 0.0 && params.misalignment <= 0.5))
    throw std::invalid_argument("channel: misalignment must be in [0, 0.5]");
  if (!(params.error_correction_f >= 1.0))
    throw std::invalid_argument("channel: error_correction_f must be >= 1");
}

double derive_transmittance(const ChannelParams &params) {
  double half_loss_db =
      params.fiber_loss_db_per_km * (params.total_distance_km / 2.0);
  return params.detector_efficiency * std::pow(10.0, -half_loss_db / 10.0);
}

double click_prob_given_intensity(int z_a, int z_b, double mu,
                                  const ChannelParams &params) {
  if (z_a != 0 && z_a != 1)
    throw std::invalid_argument("channel: z_a must be 0 or 1");
  if (z_b != 0 && z_b != 1)
    throw std::invalid_argument("channel: z_b must be 0 or 1");
  if (!(mu >= 0.0)) throw std::invalid_argument("channel: mu must be >= 0");
  double eta_s = derive_transmittance(params);
  double pd = params.dark_count_prob;
  return 1.0 - (1.0 - 2.0 * pd) * std::exp(-eta_s * mu * (z_a + z_b));
}

double click_prob_given_photons(int n_a, int n_b, const ChannelParams &params) {
  if (n_a < 0 || n_b < 0)
    throw std::invalid_argument("channel: photon numbers must be >= 0");
  double eta_s = derive_transmittance(params);
  double pd = params.dark_count_prob;
  return 1.0 - (1.0 - 2.0 * pd) * std::pow(1.0 - eta_s, n_a + n_b);
}

double avg_click_prob(double mu, const ChannelParams &params) {
  return 0.25 * (click_prob_given_intensity(0, 0, mu, params) +
                 click_prob_given_intensity(0, 1, mu, params) +
                 click_prob_given_intensity(1, 0, mu, params) +
                 click_prob_given_intensity(1, 1, mu, params));
}

double bessel_i0(double x) {
  // I0(x) = sum_k (x^2/4)^k / (k!)^2. Terms are positive, so the series is
  // numerically benign; it converges to double precision in < 40 terms for
  // |x| <= 30.
  double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 200; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

double exact_click_prob_phase_averaged(double mu_a, double mu_b,
                                       const ChannelParams &params) {
  if (!(mu_a >= 0.0) || !(mu_b >= 0.0))
    throw std::invalid_argument("channel: intensities must be >= 0");
  double eta_s = derive_transmittance(params);
  double pd = params.dark_count_prob;
  double x = eta_s * (mu_a + mu_b);
  double y = eta_s * std::sqrt(mu_a * mu_b);
  double one_minus_pd = 1.0 - pd;
  return 2.0 * one_minus_pd * std::exp(-0.5 * x) * bessel_i0(y) -
         2.0 * one_minus_pd * one_minus_pd * std::exp(-x);
}

Outcome detect_round(double mu_a, double mu_b, double delta_phi,
                     const ChannelParams &params, Rng &rng) {
  double eta_s = derive_transmittance(params);
  double pd = params.dark_count_prob;
  double cross = 2.0 * std::sqrt(mu_a * mu_b) * std::cos(delta_phi);
  double i_l = eta_s * (mu_a + mu_b + cross) / 2.0;
  double i_r = eta_s * (mu_a + mu_b - cross) / 2.0;
  // Interference can only redistribute intensity, never create it; clamp the
  // tiny negative values that cos() rounding can produce.
  if (i_l < 0.0) i_l = 0.0;
  if (i_r < 0.0) i_r = 0.0;
  double p_l = 1.0 - (1.0 - pd) * std::exp(-i_l);
  double p_r = 1.0 - (1.0 - pd) * std::exp(-i_r);
  bool l = rng.bernoulli(p_l);
  bool r = rng.bernoulli(p_r);
  if (l && r) return Outcome::Both;
  if (l) return Outcome::L;
  if (r) return Outcome::R;
  return Outcome::None;
}

}  // namespace mpqkd
