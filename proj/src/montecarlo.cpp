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

#include "mpqkd/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

namespace mpqkd {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Rounds per RNG block. Every block draws from two private streams (signal
// choices and detection on one, announcement noise on the other), so records
// do not depend on how blocks are scheduled across threads.
constexpr int64_t kBlockRounds = 65536;

void fail(const std::string &field) {
  throw std::invalid_argument("invalid " + field);
}

int draw_class(Rng &rng, const ProtocolParams &p) {
  const double u = rng.uniform();
  if (u < p.s_0) return 0;
  if (u < p.s_0 + p.s_nu) return 1;
  return 2;
}

void simulate_block(const ProtocolParams &p, const ChannelParams &ch,
                    double eta, int64_t block,
                    std::vector<RoundRecord> &records) {
  Rng primary = Rng::for_block(p.seed, 2 * static_cast<uint64_t>(block));
  Rng aux = Rng::for_block(p.seed, 2 * static_cast<uint64_t>(block) + 1);
  const int64_t begin = block * kBlockRounds;
  const int64_t end = std::min(begin + kBlockRounds, p.rounds);
  const int d = p.phase_slices;
  const double dark2 = 2.0 * ch.dark_count_prob;
  for (int64_t t = begin; t < end; ++t) {
    RoundRecord rec;
    rec.class_a = static_cast<int8_t>(draw_class(primary, p));
    rec.phase_a = static_cast<int8_t>(primary.uniform_index(d));
    rec.class_b = static_cast<int8_t>(draw_class(primary, p));
    rec.phase_b = static_cast<int8_t>(primary.uniform_index(d));
    const double mu_a = p.intensity_value(rec.class_a);
    const double mu_b = p.intensity_value(rec.class_b);
    if (p.detection == DetectionModel::Interference) {
      const int ds = (rec.phase_a - rec.phase_b + d) % d;
      const double delta_phi = 2.0 * kPi * ds / d;
      rec.outcome = detect_round(mu_a, mu_b, delta_phi, ch, primary);
    } else {
      // The three uniforms are drawn even when an earlier one already decided
      // the round, so the draw pattern depends only on the intensity classes.
      const int n_a = primary.poisson(mu_a);
      const int n_b = primary.poisson(mu_b);
      const double u_photon = primary.uniform();
      const double u_dark = primary.uniform();
      const double u_arm = primary.uniform();
      const int n = n_a + n_b;
      const double p_photon = n == 0 ? 0.0 : 1.0 - std::pow(1.0 - eta, n);
      bool click = false;
      if (u_photon < p_photon) {
        click = true;
        rec.click_from_photons = true;
      } else if (u_dark < dark2) {
        click = true;
      }
      rec.outcome = click ? (u_arm < 0.5 ? Outcome::L : Outcome::R)
                          : Outcome::None;
      rec.photons_a = static_cast<int16_t>(n_a);
      rec.photons_b = static_cast<int16_t>(n_b);
    }
    rec.noise_u = static_cast<float>(aux.uniform());
    rec.z2_a = aux.uniform() < 0.5 ? 1 : 0;
    rec.z2_b = aux.uniform() < 0.5 ? 1 : 0;
    records[t] = rec;
  }
}

// Per-party role: 0 both slots vacuum, 1 one vacuum one pulse (Z), 2 equal
// nonzero pair (X), -1 unequal nonzero (dropped).
int party_mode(int cls_i, int cls_j) {
  if (cls_i == 0 && cls_j == 0) return 0;
  if (cls_i == 0 || cls_j == 0) return 1;
  return cls_i == cls_j ? 2 : -1;
}

int tally_class(int cls_i, int cls_j, int mode) {
  switch (mode) {
    case 0: return 0;
    case 1: return std::max(cls_i, cls_j);
    case 2: return cls_i;
    default: return -1;
  }
}

PairBasis joint_basis(int mode_a, int mode_b) {
  if (mode_a < 0 || mode_b < 0) return PairBasis::Discard;
  if ((mode_a == 1 && mode_b == 2) || (mode_a == 2 && mode_b == 1)) {
    return PairBasis::Discard;
  }
  if (mode_a == 0 && mode_b == 0) return PairBasis::Zero;
  if (mode_a == 2 || mode_b == 2) return PairBasis::X;
  return PairBasis::Z;
}

int slice_delta(int phase_j, int phase_i, int d) {
  return (phase_j - phase_i + d) % d;
}

int x_kappa(int delta, int d) { return 2 * delta >= d ? 1 : 0; }

double x_theta(int delta, int d) {
  return 2.0 * kPi * delta / d - kPi * x_kappa(delta, d);
}

bool x_keep(int delta_a, int delta_b, int d) {
  return (2 * slice_delta(delta_a, delta_b, d)) % d == 0;
}

// Key mapping shared by X pairs and vacuum-vacuum pairs (whose bits are pure
// noise but still feed the class-(0,0) tallies).
void map_x_like(SiftedPair &sp, const ProtocolParams &p,
                const ChannelParams &ch) {
  const int d = p.phase_slices;
  const int delta_a = slice_delta(sp.phase_ja, sp.phase_ia, d);
  const int delta_b = slice_delta(sp.phase_jb, sp.phase_ib, d);
  const bool flip = sp.outcome_i != sp.outcome_j;
  if (p.detection == DetectionModel::PhotonNumber) {
    // Alignment angles carry no information in this model, so the error is
    // drawn directly: misalignment odds when both clicks were photon-caused,
    // a fair coin when a dark count intruded.
    const double p_err = sp.clicks_photon_caused ? ch.misalignment : 0.5;
    sp.kappa_a = x_kappa(delta_a, d);
    sp.kappa_b = sp.kappa_a ^ (sp.noise_u < p_err ? 1 : 0);
    sp.kept = x_keep(delta_a, delta_b, d);
    return;
  }
  const int misalign = sp.noise_u < ch.misalignment ? 1 : 0;
  if (p.table_one_x_sift) {
    const int half = d / 2;
    const int t_delta_a = (delta_a + (sp.z2_ia ^ sp.z2_ja) * half) % d;
    const int t_delta_b = (delta_b + (sp.z2_ib ^ sp.z2_jb) * half) % d;
    const int s_delta = slice_delta(t_delta_a, t_delta_b, d);
    sp.kept = s_delta == 0 || s_delta == half;
    const int s = s_delta == half ? 1 : 0;
    sp.kappa_a = sp.z2_ia ^ sp.z2_ja;
    sp.kappa_b = (sp.z2_ib ^ sp.z2_jb) ^ (flip ? 1 : 0) ^ s ^ misalign;
    return;
  }
  sp.kappa_a = x_kappa(delta_a, d);
  sp.kappa_b = x_kappa(delta_b, d) ^ (flip ? 1 : 0) ^ misalign;
  sp.kept = x_keep(delta_a, delta_b, d);
}

SiftedPair map_keys_any(const SiftedPair &pair, const ProtocolParams &p,
                        const ChannelParams &ch) {
  SiftedPair sp = pair;
  const int d = p.phase_slices;
  sp.theta_a = x_theta(slice_delta(sp.phase_ja, sp.phase_ia, d), d);
  sp.theta_b = x_theta(slice_delta(sp.phase_jb, sp.phase_ib, d), d);
  switch (sp.basis) {
    case PairBasis::Z: {
      // A pulse-position party reads the bit off which slot held the pulse;
      // Alice counts the early slot as 0, Bob the late slot, so matching
      // arrangements agree. A both-vacuum party contributes a noise bit from
      // its own phase record.
      if (sp.cls_ia == 0 && sp.cls_ja == 0) {
        sp.kappa_a = x_kappa(slice_delta(sp.phase_ja, sp.phase_ia, d), d);
      } else {
        sp.kappa_a = sp.cls_ia == 0 ? 0 : 1;
      }
      if (sp.cls_ib == 0 && sp.cls_jb == 0) {
        sp.kappa_b = x_kappa(slice_delta(sp.phase_jb, sp.phase_ib, d), d);
      } else {
        sp.kappa_b = sp.cls_jb == 0 ? 0 : 1;
      }
      sp.kept = true;
      break;
    }
    case PairBasis::X:
    case PairBasis::Zero:
      map_x_like(sp, p, ch);
      break;
    default:
      break;
  }
  return sp;
}

}  // namespace

void ProtocolParams::validate() const {
  if (!(mu > 0.0) || !(mu < 1.0)) fail("ProtocolParams.mu");
  if (!(nu > 0.0) || !(nu < mu)) fail("ProtocolParams.nu");
  if (!(s_0 >= 0.0) || !(s_0 <= 1.0)) fail("ProtocolParams.s_0");
  if (!(s_nu >= 0.0) || !(s_nu <= 1.0)) fail("ProtocolParams.s_nu");
  if (!(s_mu >= 0.0) || !(s_mu <= 1.0)) fail("ProtocolParams.s_mu");
  if (std::abs(s_0 + s_nu + s_mu - 1.0) > 1e-12) {
    fail("ProtocolParams.s_0 + s_nu + s_mu");
  }
  if (phase_slices < 2 || phase_slices > 120) fail("ProtocolParams.phase_slices");
  if (table_one_x_sift && phase_slices % 2 != 0) {
    fail("ProtocolParams.table_one_x_sift (needs even phase_slices)");
  }
  if (max_gap < 0) fail("ProtocolParams.max_gap");
  if (rounds < 0) fail("ProtocolParams.rounds");
}

double ProtocolParams::intensity_value(int cls) const {
  switch (cls) {
    case 0: return 0.0;
    case 1: return nu;
    case 2: return mu;
    default: fail("intensity class");
  }
  return 0.0;
}

int resolve_thread_count(int requested) {
  int n = requested;
  if (n <= 0) {
    const char *env = std::getenv("MPQKD_THREADS");
    n = 1;
    if (env != nullptr) {
      char *tail = nullptr;
      const long parsed = std::strtol(env, &tail, 10);
      if (tail != env && parsed > 0) n = static_cast<int>(parsed);
    }
  }
  return std::clamp(n, 1, 64);
}

std::vector<RoundRecord> simulate_rounds(const ProtocolParams &protocol,
                                         const ChannelParams &channel,
                                         int threads) {
  protocol.validate();
  validate(channel);
  std::vector<RoundRecord> records(protocol.rounds);
  if (protocol.rounds == 0) return records;
  const double eta = derive_transmittance(channel);
  const int64_t blocks = (protocol.rounds + kBlockRounds - 1) / kBlockRounds;
  const int workers =
      static_cast<int>(std::min<int64_t>(resolve_thread_count(threads), blocks));
  if (workers == 1) {
    for (int64_t b = 0; b < blocks; ++b) {
      simulate_block(protocol, channel, eta, b, records);
    }
    return records;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int64_t b = w; b < blocks; b += workers) {
        simulate_block(protocol, channel, eta, b, records);
      }
    });
  }
  for (auto &t : pool) t.join();
  return records;
}

std::vector<SiftedPair> sift_pairs(const std::vector<RoundRecord> &records,
                                   const PairList &pairs,
                                   const ProtocolParams &protocol) {
  protocol.validate();
  const int64_t n = static_cast<int64_t>(records.size());
  std::vector<SiftedPair> out;
  out.reserve(pairs.size());
  for (const auto &[i, j] : pairs) {
    if (i < 1 || j <= i || j > n) fail("pair index");
    const RoundRecord &ri = records[i - 1];
    const RoundRecord &rj = records[j - 1];
    SiftedPair sp;
    sp.i = i;
    sp.j = j;
    sp.cls_ia = ri.class_a;
    sp.cls_ja = rj.class_a;
    sp.cls_ib = ri.class_b;
    sp.cls_jb = rj.class_b;
    const int mode_a = party_mode(sp.cls_ia, sp.cls_ja);
    const int mode_b = party_mode(sp.cls_ib, sp.cls_jb);
    sp.basis = joint_basis(mode_a, mode_b);
    sp.class_a = tally_class(sp.cls_ia, sp.cls_ja, mode_a);
    sp.class_b = tally_class(sp.cls_ib, sp.cls_jb, mode_b);
    sp.sum_a = protocol.intensity_value(sp.cls_ia) +
               protocol.intensity_value(sp.cls_ja);
    sp.sum_b = protocol.intensity_value(sp.cls_ib) +
               protocol.intensity_value(sp.cls_jb);
    sp.phase_ia = ri.phase_a;
    sp.phase_ja = rj.phase_a;
    sp.phase_ib = ri.phase_b;
    sp.phase_jb = rj.phase_b;
    sp.z2_ia = ri.z2_a;
    sp.z2_ja = rj.z2_a;
    sp.z2_ib = ri.z2_b;
    sp.z2_jb = rj.z2_b;
    sp.outcome_i = ri.outcome;
    sp.outcome_j = rj.outcome;
    if (ri.photons_a >= 0 && rj.photons_a >= 0) {
      sp.photons_a = ri.photons_a + rj.photons_a;
      sp.photons_b = ri.photons_b + rj.photons_b;
    }
    sp.clicks_photon_caused = ri.click_from_photons && rj.click_from_photons;
    sp.noise_u = ri.noise_u;
    out.push_back(sp);
  }
  return out;
}

SiftedPair map_keys(const SiftedPair &pair, const ProtocolParams &protocol,
                    const ChannelParams &channel) {
  protocol.validate();
  if (pair.basis != PairBasis::Z && pair.basis != PairBasis::X) {
    fail("map_keys basis (must be Z or X)");
  }
  return map_keys_any(pair, protocol, channel);
}

std::vector<SiftedPair> sift_and_map(const std::vector<RoundRecord> &records,
                                     const PairList &pairs,
                                     const ProtocolParams &protocol,
                                     const ChannelParams &channel) {
  std::vector<SiftedPair> sifted = sift_pairs(records, pairs, protocol);
  for (SiftedPair &sp : sifted) {
    if (sp.basis != PairBasis::Discard) {
      sp = map_keys_any(sp, protocol, channel);
    }
  }
  return sifted;
}

TallyTable tally(const std::vector<SiftedPair> &pairs) {
  TallyTable table;
  for (const SiftedPair &sp : pairs) {
    ++table.pairs_total;
    if (sp.basis == PairBasis::Discard) {
      ++table.pairs_discarded;
      continue;
    }
    const bool error = sp.kappa_a != sp.kappa_b;
    if (sp.basis == PairBasis::Z || sp.basis == PairBasis::Zero) {
      TallyCell &cell = table.z[sp.class_a][sp.class_b];
      ++cell.clicks;
      cell.errors += error ? 1 : 0;
    }
    if ((sp.basis == PairBasis::X || sp.basis == PairBasis::Zero) && sp.kept) {
      TallyCell &cell = table.x[sp.class_a][sp.class_b];
      ++cell.clicks;
      cell.errors += error ? 1 : 0;
    }
  }
  return table;
}

int64_t TallyTable::z_clicks() const {
  int64_t sum = 0;
  for (const auto &row : z) {
    for (const TallyCell &cell : row) sum += cell.clicks;
  }
  return sum;
}

int64_t TallyTable::x_clicks() const {
  int64_t sum = 0;
  for (const auto &row : x) {
    for (const TallyCell &cell : row) sum += cell.clicks;
  }
  return sum;
}

bool TallyTable::operator==(const TallyTable &other) const {
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (z[a][b].clicks != other.z[a][b].clicks) return false;
      if (z[a][b].errors != other.z[a][b].errors) return false;
      if (x[a][b].clicks != other.x[a][b].clicks) return false;
      if (x[a][b].errors != other.x[a][b].errors) return false;
    }
  }
  return pairs_total == other.pairs_total &&
         pairs_discarded == other.pairs_discarded;
}

std::vector<PairSummary> summarize(const std::vector<SiftedPair> &pairs) {
  std::vector<PairSummary> out;
  out.reserve(pairs.size());
  for (const SiftedPair &sp : pairs) {
    PairSummary s;
    s.basis = sp.basis;
    s.class_a = static_cast<int8_t>(sp.class_a);
    s.class_b = static_cast<int8_t>(sp.class_b);
    s.photons_a = static_cast<int16_t>(sp.photons_a);
    s.photons_b = static_cast<int16_t>(sp.photons_b);
    s.error = sp.kappa_a >= 0 && sp.kappa_a != sp.kappa_b;
    s.kept = sp.kept;
    out.push_back(s);
  }
  return out;
}

}  // namespace mpqkd
