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

#ifndef MPQKD_MONTECARLO_HPP_
#define MPQKD_MONTECARLO_HPP_

#include <cstdint>
#include <vector>

#include "mpqkd/channel.hpp"
#include "mpqkd/pairing.hpp"

namespace mpqkd {

// Interference resolves clicks from the actual beam-splitter intensities and
// relative phase. PhotonNumber replaces the wave picture with per-party
// photon draws and tags every click as photon-caused or dark; its statistics
// reproduce the analytic yield formulas exactly, which is what the decoy
// estimation layer is validated against.
enum class DetectionModel { Interference, PhotonNumber };

struct ProtocolParams {
  double mu = 0.5;
  double nu = 0.01;
  double s_0 = 0.495;
  double s_nu = 0.01;
  double s_mu = 0.495;
  int phase_slices = 16;  // D
  int64_t max_gap = 2000;  // pairing interval l; 0 means unlimited
  int64_t rounds = 0;
  uint64_t seed = 1;
  DetectionModel detection = DetectionModel::Interference;
  // Announce the Table-style decomposition (theta announced directly, key
  // carried by extra pi-shift bits) instead of the original split of the
  // phase difference. Requires an even number of phase slices.
  bool table_one_x_sift = false;

  void validate() const;  // throws std::invalid_argument naming the field
  double intensity_value(int cls) const;  // 0 -> 0, 1 -> nu, 2 -> mu
};

// One emission round. Intensities are stored as class indices into {0, nu,
// mu} to keep the record compact; phase indices address the D slices. The
// physical modulated phase is always phase_* even when the Table-style
// announcement is active, because the pi-shift bits only relabel what is
// announced, never what is sent.
struct RoundRecord {
  int8_t class_a = 0;
  int8_t class_b = 0;
  int8_t phase_a = 0;
  int8_t phase_b = 0;
  Outcome outcome = Outcome::None;
  int8_t z2_a = 0;  // Table-style extra pi-shift bits
  int8_t z2_b = 0;
  bool click_from_photons = false;  // PhotonNumber model tag
  int16_t photons_a = -1;           // PhotonNumber model tags, else -1
  int16_t photons_b = -1;
  float noise_u = 0.0f;  // per-round lottery for pair-level misalignment

  bool clicked() const { return outcome == Outcome::L || outcome == Outcome::R; }
};

enum class PairBasis { Z, X, Zero, Discard };

struct SiftedPair {
  int64_t i = 0;  // 1-based round indices, i < j
  int64_t j = 0;
  PairBasis basis = PairBasis::Discard;
  int class_a = -1;  // tally class per party: 0 vacuum, 1 weak, 2 signal
  int class_b = -1;
  int cls_ia = 0, cls_ja = 0, cls_ib = 0, cls_jb = 0;  // per-round classes
  double sum_a = 0.0;  // per-party intensity sums
  double sum_b = 0.0;
  int phase_ia = 0, phase_ja = 0, phase_ib = 0, phase_jb = 0;
  int z2_ia = 0, z2_ja = 0, z2_ib = 0, z2_jb = 0;
  Outcome outcome_i = Outcome::None;
  Outcome outcome_j = Outcome::None;
  int photons_a = -1;  // per-party totals across the pair, PhotonNumber model
  int photons_b = -1;
  bool clicks_photon_caused = false;
  double noise_u = 0.0;

  // Filled by map_keys.
  int kappa_a = -1;
  int kappa_b = -1;
  double theta_a = 0.0;
  double theta_b = 0.0;
  bool kept = false;  // X pairs survive only on matching alignment angles
};

struct TallyCell {
  int64_t clicks = 0;  // M
  int64_t errors = 0;  // E
};

// Cells are indexed by per-party class. In the Z table a class-c party
// contributed one slot of intensity {0, nu, mu}[c]; in the X table both
// slots, so the per-party sum is {0, 2nu, 2mu}[c]. Pairs with both parties
// in class 0 measure the vacuum yield and enter both tables.
struct TallyTable {
  TallyCell z[3][3];
  TallyCell x[3][3];
  int64_t pairs_total = 0;     // everything the pairing step produced
  int64_t pairs_discarded = 0;

  int64_t z_clicks() const;
  int64_t x_clicks() const;
  bool operator==(const TallyTable &other) const;
};

// Compact per-pair view used by the estimation layer to recover ground
// truth from the photon tags.
struct PairSummary {
  PairBasis basis = PairBasis::Discard;
  int8_t class_a = -1;
  int8_t class_b = -1;
  int16_t photons_a = -1;
  int16_t photons_b = -1;
  bool error = false;
  bool kept = false;
};

// Runs N rounds of the protocol. The stream is partitioned into fixed-size
// blocks, each with its own RNG streams derived from (seed, block), so the
// result is byte-identical for any thread count. threads = 0 reads
// MPQKD_THREADS from the environment, defaulting to 1.
std::vector<RoundRecord> simulate_rounds(const ProtocolParams &protocol,
                                         const ChannelParams &channel,
                                         int threads = 0);

int resolve_thread_count(int requested);

// Basis assignment for already-paired rounds. Kappa and theta stay unfilled.
std::vector<SiftedPair> sift_pairs(const std::vector<RoundRecord> &records,
                                   const PairList &pairs,
                                   const ProtocolParams &protocol);

// Fills kappa/theta/kept. Only Z and X pairs are a valid input; the
// vacuum-vacuum and discard bases have no key mapping.
SiftedPair map_keys(const SiftedPair &pair, const ProtocolParams &protocol,
                    const ChannelParams &channel);

// sift_pairs followed by key mapping for every non-discard pair, including
// the vacuum-vacuum ones that tally() accounts under class (0,0).
std::vector<SiftedPair> sift_and_map(const std::vector<RoundRecord> &records,
                                     const PairList &pairs,
                                     const ProtocolParams &protocol,
                                     const ChannelParams &channel);

TallyTable tally(const std::vector<SiftedPair> &pairs);

std::vector<PairSummary> summarize(const std::vector<SiftedPair> &pairs);

}  // namespace mpqkd

#endif  // MPQKD_MONTECARLO_HPP_
