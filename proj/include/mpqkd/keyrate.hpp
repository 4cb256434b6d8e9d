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

#ifndef MPQKD_KEYRATE_HPP
#define MPQKD_KEYRATE_HPP

#include <cstdint>
#include <string_view>
#include <vector>

#include "mpqkd/channel.hpp"

namespace mpqkd {

// Asymptotic per-round key rates for the paired-mode protocol and the
// comparison schemes, plus the repeaterless bound. Transmittance conventions
// differ by scheme and are deliberate:
//   - mp/mdi formulas work directly with the per-side transmittance eta_s;
//   - bb84 uses the end-to-end eta = eta_s^2;
//   - pm/sns use the single-arm eta = eta_s (these schemes detect at the
//     midpoint, which is what gives them O(sqrt(eta)) scaling);
//   - the PLOB bound takes the end-to-end eta = eta_s^2.

enum class Scheme { MP, MDI, BB84, PM, SNS, PLOB };

const char *scheme_name(Scheme scheme);
bool scheme_from_name(std::string_view name, Scheme &out);

// Number of discrete phase slices in the PM comparison scheme's error model.
constexpr int kPmPhaseSlices = 16;

// Rate plus the intermediates it was assembled from. Fields that do not
// apply to a scheme stay NaN; CSV output renders NaN as an empty cell.
struct RateBreakdown {
  Scheme scheme = Scheme::MP;
  double mu = 0.0;       // intensity used (mu_z for sns)
  double p_z0 = 0.0;     // sns only: vacuum-sending probability
  double p = 0.0;        // per-round click probability (mp only)
  double r_p = 0.0;      // pairs per round (mp only)
  double r_s = 0.0;      // signal-pair fraction among clicked pairs (mp only)
  double gain = 0.0;     // mdi: Q_mumu, bb84/pm: Q_mu, sns: S_z
  double q11_bar = 0.0;  // single-photon(-pair) fraction; q_1 for bb84/pm
  double e11_x = 0.0;    // single-photon phase/X error; E_mu^X for pm
  double e_z = 0.0;      // Z-basis QBER (best slice for pm)
  double rate_raw = 0.0; // before clamping; negative when errors dominate
  double rate = 0.0;     // clamped at 0
};

// Binary entropy in bits; throws std::invalid_argument outside [0, 1].
double binary_entropy(double x);

// Repeaterless secret-key capacity bound -log2(1 - eta) for end-to-end
// transmittance eta in [0, 1).
double plob_bound(double eta);

RateBreakdown mp_rate(double mu, int64_t max_gap, const ChannelParams &params);
RateBreakdown mdi_rate(double mu, const ChannelParams &params);
RateBreakdown bb84_rate(double mu, const ChannelParams &params);
RateBreakdown pm_rate(double mu, const ChannelParams &params);
RateBreakdown sns_rate(double mu_z, double p_z0, const ChannelParams &params);

struct OptimizeResult {
  bool found = false;     // false when the rate is zero across the bracket
  double mu_star = 0.0;   // NaN when !found
  double p_z0_star = 0.0; // sns only, NaN otherwise
  double rate_star = 0.0;
};

// Golden-section search for the intensity on (0, 1.5], refined to
// |delta mu| <= 1e-4. sns nests a second golden-section over p_z0. The
// surfaces are smooth and unimodal over this bracket for physical parameter
// sets; a coarse pre-scan picks the bracket so a secondary local bump at the
// edge cannot trap the refinement.
OptimizeResult optimize_intensity(Scheme scheme, int64_t max_gap,
                                  const ChannelParams &params);

struct SweepOptions {
  std::vector<Scheme> schemes;
  std::vector<double> distances_km;      // must be nondecreasing
  std::vector<int64_t> max_gaps = {0};   // mp rows only; 0 = no limit
  double mu = 0.5;                       // fixed intensity when !optimize
  bool optimize = false;
};

struct SweepRow {
  Scheme scheme;
  int64_t max_gap;     // mp rows; kNoGapLimit for unlimited; -1 for others
  double distance_km;
  double loss_db;      // fiber loss over the full distance, excludes eta_d
  RateBreakdown rb;
};

// One row per (scheme, gap, distance), distances in input order. PLOB rows
// carry only the bound in rb.rate.
std::vector<SweepRow> sweep(const SweepOptions &options,
                            const ChannelParams &base);

}  // namespace mpqkd

#endif  // MPQKD_KEYRATE_HPP
