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

#include "mpqkd/phasedrift.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mpqkd/rng.hpp"

namespace mpqkd {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void fail(const std::string &msg) {
  throw std::invalid_argument(msg);
}

double wrap_phase(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

double gaussian(Rng &rng) {
  double u1 = rng.uniform();
  double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(kTwoPi * u2);
}

void fft_inplace(std::vector<std::complex<double>> &a) {
  std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = -kTwoPi / static_cast<double>(len);
    std::complex<double> step(std::cos(ang), std::sin(ang));
    for (std::size_t base = 0; base < n; base += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[base + j];
        std::complex<double> v = a[base + j + len / 2] * w;
        a[base + j] = u + v;
        a[base + j + len / 2] = u - v;
        w *= step;
      }
    }
  }
}

// Magnitude of the matched filter sum_i s_i exp(i (w t_i + k t_i^2 / 2))
// over window-centered click times.
double filter_magnitude(const std::vector<double> &t,
                        const std::vector<double> &s, double w, double k) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double ph = w * t[i] + 0.5 * k * t[i] * t[i];
    re += s[i] * std::cos(ph);
    im += s[i] * std::sin(ph);
  }
  return std::hypot(re, im);
}

template <typename F>
double golden_max(F f, double lo, double hi, int iters) {
  const double inv_phi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

// The matched-filter magnitude has sidelobes, so a bracket-only line search
// can walk away from the main lobe. Scan a grid fine enough to land inside
// the lobe, then polish where the function is locally unimodal.
template <typename F>
double grid_then_golden(F f, double lo, double hi, double step) {
  double best_x = lo;
  double best_f = f(lo);
  for (double x = lo + step; x <= hi + 0.5 * step; x += step) {
    double v = f(x);
    if (v > best_f) {
      best_f = v;
      best_x = x;
    }
  }
  return golden_max(f, std::max(lo, best_x - step),
                    std::min(hi, best_x + step), 40);
}

void check_record_order(const std::vector<InterferenceRecord> &records) {
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].index <= records[i - 1].index) {
      fail("interference records must have strictly increasing indices");
    }
  }
}

}  // namespace

void DriftModel::validate() const {
  if (!(rep_rate > 0.0) || !std::isfinite(rep_rate)) {
    fail("drift model invalid: rep_rate must be positive and finite");
  }
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    fail("drift model invalid: duration must be nonnegative and finite");
  }
  if (!(slow_noise_std >= 0.0) || !std::isfinite(slow_noise_std)) {
    fail("drift model invalid: slow_noise_std must be nonnegative and finite");
  }
  if (!std::isfinite(slope) || !std::isfinite(omega0)) {
    fail("drift model invalid: slope and omega0 must be finite");
  }
}

double relative_phase(double t_i, double t_j, const DriftModel &model) {
  model.validate();
  double linear = model.omega0 * (t_j - t_i);
  double chirp = 0.5 * model.slope * (t_j * t_j - t_i * t_i);
  return wrap_phase(linear + chirp);
}

std::vector<InterferenceRecord> simulate_reference_clicks(
    const DriftModel &model, double intensity_at_site, double dark_count_prob,
    std::uint64_t seed) {
  model.validate();
  if (!(intensity_at_site >= 0.0) || !std::isfinite(intensity_at_site)) {
    fail("reference run: intensity must be nonnegative and finite");
  }
  if (!(dark_count_prob >= 0.0) || dark_count_prob >= 1.0) {
    fail("reference run: dark count probability must lie in [0, 1)");
  }
  std::int64_t pulses = std::llround(model.duration * model.rep_rate);

  ChannelParams site;
  site.fiber_loss_db_per_km = 0.0;
  site.total_distance_km = 0.0;
  site.detector_efficiency = 1.0;
  site.dark_count_prob = dark_count_prob;
  site.misalignment = 0.0;

  Rng rng(seed);
  std::vector<InterferenceRecord> records;
  double psi = 0.0;
  for (std::int64_t i = 0; i < pulses; ++i) {
    double t = static_cast<double>(i) / model.rep_rate;
    if (model.slow_noise_std > 0.0) {
      psi += model.slow_noise_std * gaussian(rng);
    }
    double delta_phi = model.omega0 * t + 0.5 * model.slope * t * t + psi;
    Outcome out =
        detect_round(intensity_at_site, intensity_at_site, delta_phi, site, rng);
    if (out != Outcome::None) records.push_back({i, out});
  }
  return records;
}

DriftEstimate estimate_drift(const std::vector<InterferenceRecord> &records,
                             double rep_rate,
                             const DriftEstimatorOptions &options) {
  if (!(rep_rate > 0.0) || !std::isfinite(rep_rate)) {
    fail("drift estimator: rep_rate must be positive and finite");
  }
  if (options.min_clicks < 2) {
    fail("drift estimator: min_clicks must be at least 2");
  }
  check_record_order(records);

  std::int64_t begin = options.window_begin;
  std::int64_t end = options.window_end;
  if (end < 0) {
    end = records.empty() ? begin : records.back().index + 1;
  }
  if (end < begin) fail("drift estimator: window end precedes its begin");

  std::vector<std::int64_t> offsets;
  std::vector<double> sign;
  for (const auto &r : records) {
    if (r.index < begin || r.index >= end) continue;
    if (r.outcome == Outcome::L) {
      offsets.push_back(r.index - begin);
      sign.push_back(1.0);
    } else if (r.outcome == Outcome::R) {
      offsets.push_back(r.index - begin);
      sign.push_back(-1.0);
    }
  }
  std::int64_t n_clicks = static_cast<std::int64_t>(offsets.size());
  if (n_clicks < options.min_clicks) {
    throw std::runtime_error(
        "drift estimation unavailable: " + std::to_string(n_clicks) +
        " usable clicks in the window, need at least " +
        std::to_string(options.min_clicks));
  }

  std::int64_t span = std::max<std::int64_t>(end - begin, 1);
  double window_s = static_cast<double>(span) / rep_rate;
  double nyquist = std::numbers::pi * rep_rate;
  double cap = nyquist;
  if (options.omega_max > 0.0) cap = std::min(cap, options.omega_max);

  // Coarse periodogram of the signed click sequence on the pulse grid.
  std::size_t m = 1;
  while (m < static_cast<std::size_t>(span)) m <<= 1;
  std::vector<std::complex<double>> spectrum(m, 0.0);
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    spectrum[static_cast<std::size_t>(offsets[i])] += sign[i];
  }
  fft_inplace(spectrum);
  double bin_rad = kTwoPi * rep_rate / static_cast<double>(m);
  std::size_t f_cap = std::min<std::size_t>(
      m / 2, static_cast<std::size_t>(cap / bin_rad) + 1);
  std::size_t f_peak = 0;
  double best = -1.0;
  for (std::size_t f = 0; f <= f_cap; ++f) {
    double mag = std::abs(spectrum[f]);
    if (mag > best) {
      best = mag;
      f_peak = f;
    }
  }

  // Refine frequency and chirp on window-centered click times, shrinking the
  // brackets between rounds. Centering decouples the two coordinates.
  std::vector<double> t_center(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    t_center[i] =
        (static_cast<double>(offsets[i]) - 0.5 * static_cast<double>(span)) /
        rep_rate;
  }
  double d_omega = kTwoPi / window_s;
  double d_k = std::numbers::pi / (window_s * window_s);
  double w = static_cast<double>(f_peak) * bin_rad;
  double k = 0.0;
  auto at_w = [&](double x) { return filter_magnitude(t_center, sign, x, k); };
  auto at_k = [&](double x) { return filter_magnitude(t_center, sign, w, x); };
  w = grid_then_golden(at_w, std::max(0.0, w - 16.0 * d_omega),
                       std::min(nyquist + d_omega, w + 16.0 * d_omega),
                       0.25 * d_omega);
  k = grid_then_golden(at_k, -64.0 * d_k, 64.0 * d_k, d_k / 3.0);
  w = grid_then_golden(at_w, std::max(0.0, w - 2.0 * d_omega),
                       std::min(nyquist + d_omega, w + 2.0 * d_omega),
                       0.125 * d_omega);
  k = grid_then_golden(at_k, k - 2.0 * d_k, k + 2.0 * d_k, 0.125 * d_k);
  w = golden_max(at_w, std::max(0.0, w - 0.125 * d_omega), w + 0.125 * d_omega,
                 40);
  k = golden_max(at_k, k - 0.125 * d_k, k + 0.125 * d_k, 40);
  double peak = filter_magnitude(t_center, sign, w, k);

  DriftEstimate fit;
  fit.clicks_used = n_clicks;
  fit.residual = std::clamp(
      1.0 - 2.0 * peak / static_cast<double>(n_clicks), 0.0, 1.0);

  // Map the centered frequency back to t = 0 and fold into the base band.
  // Reflection conjugates the signal, so the chirp sign flips with it.
  double t_mid =
      (static_cast<double>(begin) + 0.5 * static_cast<double>(span)) /
      rep_rate;
  double omega_abs = w - k * t_mid;
  double period = kTwoPi * rep_rate;
  double folded = std::fmod(omega_abs, period);
  if (folded < 0.0) folded += period;
  if (folded > nyquist) {
    folded = period - folded;
    k = -k;
  }
  fit.slope = k;
  fit.omega0 = folded;

  // Count the aliases of the folded frequency inside the prior bound.
  double prior = options.omega_max > 0.0 ? options.omega_max : nyquist;
  double tol = 1e-9 * period;
  int candidates = 0;
  for (double x = folded; x <= prior + tol; x += period) ++candidates;
  if (folded > tol && nyquist - folded > tol) {
    for (double x = period - folded; x <= prior + tol; x += period) {
      ++candidates;
    }
  }
  fit.ambiguous = candidates > 1;
  return fit;
}

std::vector<IntervalErrorRow> error_vs_interval(
    const std::vector<InterferenceRecord> &records, const DriftModel &fitted,
    double slice_width, const std::vector<std::int64_t> &bin_edges) {
  fitted.validate();
  if (!(slice_width > 0.0) || slice_width > std::numbers::pi) {
    fail("interval scan: slice width must lie in (0, pi]");
  }
  if (bin_edges.size() < 2) {
    fail("interval scan: need at least two bin edges");
  }
  for (std::size_t i = 0; i < bin_edges.size(); ++i) {
    if (bin_edges[i] < 0 || (i > 0 && bin_edges[i] <= bin_edges[i - 1])) {
      fail("interval scan: bin edges must be nonnegative and increasing");
    }
  }
  check_record_order(records);
  if (records.empty()) return {};

  std::vector<std::int64_t> idx;
  std::vector<bool> is_l;
  for (const auto &r : records) {
    if (r.outcome == Outcome::L || r.outcome == Outcome::R) {
      idx.push_back(r.index);
      is_l.push_back(r.outcome == Outcome::L);
    }
  }

  std::vector<IntervalErrorRow> table;
  std::vector<bool> used(idx.size());
  double half = 0.5 * slice_width;
  for (std::size_t b = 0; b + 1 < bin_edges.size(); ++b) {
    IntervalErrorRow row;
    row.l_lo = bin_edges[b];
    row.l_hi = bin_edges[b + 1];
    std::fill(used.begin(), used.end(), false);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (used[i]) continue;
      auto it = std::lower_bound(idx.begin() + i + 1, idx.end(),
                                 idx[i] + row.l_lo);
      std::size_t j = static_cast<std::size_t>(it - idx.begin());
      while (j < idx.size() && idx[j] < idx[i] + row.l_hi && used[j]) ++j;
      if (j >= idx.size() || idx[j] >= idx[i] + row.l_hi) continue;
      used[i] = true;
      used[j] = true;
      double t_i = static_cast<double>(idx[i]) / fitted.rep_rate;
      double t_j = static_cast<double>(idx[j]) / fitted.rep_rate;
      double theta = relative_phase(t_i, t_j, fitted);
      double to_zero = std::min(theta, kTwoPi - theta);
      double to_pi = std::abs(theta - std::numbers::pi);
      if (to_zero < half) {
        ++row.pairs;
        if (is_l[i] != is_l[j]) ++row.errors;
      } else if (to_pi < half) {
        ++row.pairs;
        if (is_l[i] == is_l[j]) ++row.errors;
      }
    }
    row.rate = row.pairs > 0
                   ? static_cast<double>(row.errors) /
                         static_cast<double>(row.pairs)
                   : 0.0;
    table.push_back(row);
  }
  return table;
}

}  // namespace mpqkd
