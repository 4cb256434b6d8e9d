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

#include "mpqkd/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mpqkd/pairing.hpp"

namespace mpqkd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = 3.14159265358979323846;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

double poisson_pmf(double mean, int k) {
  if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
}

// Single-photon-pair yield and X-basis error of the midpoint-measurement
// schemes, for symmetric arms eta_a = eta_b = eta_s.
void single_photon_pair(double eta_s, double pd, double ed, double &y11,
                        double &e11x) {
  double eta = eta_s;
  y11 = (1.0 - pd) * (1.0 - pd) *
        (eta * eta / 2.0 + (2.0 * eta + 2.0 * eta - 3.0 * eta * eta) * pd +
         4.0 * (1.0 - eta) * (1.0 - eta) * pd * pd);
  if (y11 <= 0.0) {
    e11x = 0.5;
    return;
  }
  double e0 = 0.5;
  e11x = clamp01(
      (e0 * y11 - (e0 - ed) * (1.0 - pd * pd) * eta * eta / 2.0) / y11);
}

// Shared effective-pair statistics of the paired schemes: the sum of
// Pr(C|z_i) Pr(C|z_j) over the four effective configurations, the Err-config
// part of that sum, and the single-photon-pair gain numerator.
struct PairConfigSums {
  double effective;   // sum over {[00,11],[01,10],[10,01],[11,00]}
  double erroneous;   // sum over {[00,11],[11,00]}
  double single_photon;  // same sum with photon-number click probabilities
};

PairConfigSums pair_config_sums(double mu, const ChannelParams &params) {
  double prc00 = click_prob_given_intensity(0, 0, mu, params);
  double prc01 = click_prob_given_intensity(0, 1, mu, params);
  double prc10 = click_prob_given_intensity(1, 0, mu, params);
  double prc11 = click_prob_given_intensity(1, 1, mu, params);
  double y0 = click_prob_given_photons(0, 0, params);
  double y1 = click_prob_given_photons(0, 1, params);
  double y2 = click_prob_given_photons(1, 1, params);
  PairConfigSums s;
  s.effective = 2.0 * prc00 * prc11 + 2.0 * prc01 * prc10;
  s.erroneous = 2.0 * prc00 * prc11;
  s.single_photon = 2.0 * y1 * y1 + 2.0 * y0 * y2;
  return s;
}

}  // namespace

const char *scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::MP: return "mp";
    case Scheme::MDI: return "mdi";
    case Scheme::BB84: return "bb84";
    case Scheme::PM: return "pm";
    case Scheme::SNS: return "sns";
    case Scheme::PLOB: return "plob";
  }
  return "?";
}

bool scheme_from_name(std::string_view name, Scheme &out) {
  for (Scheme s : {Scheme::MP, Scheme::MDI, Scheme::BB84, Scheme::PM,
                   Scheme::SNS, Scheme::PLOB}) {
    if (name == scheme_name(s)) {
      out = s;
      return true;
    }
  }
  return false;
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::invalid_argument("binary_entropy: argument must be in [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double plob_bound(double eta) {
  if (!(eta >= 0.0 && eta < 1.0))
    throw std::invalid_argument("plob_bound: eta must be in [0, 1)");
  return -std::log1p(-eta) / std::log(2.0);
}

RateBreakdown mp_rate(double mu, int64_t max_gap, const ChannelParams &params) {
  if (!(mu > 0.0)) throw std::invalid_argument("mp_rate: mu must be > 0");
  validate(params);
  RateBreakdown rb;
  rb.scheme = Scheme::MP;
  rb.mu = mu;
  rb.p_z0 = kNaN;
  rb.gain = kNaN;

  double eta_s = derive_transmittance(params);
  double pd = params.dark_count_prob;
  rb.p = avg_click_prob(mu, params);
  PairConfigSums sums = pair_config_sums(mu, params);
  if (rb.p <= 0.0 || sums.effective <= 0.0) {
    // Dead channel: no clicks at all (pd = 0 and eta_s mu = 0).
    rb.r_p = rb.r_s = rb.q11_bar = rb.e_z = 0.0;
    rb.e11_x = 0.5;
    rb.rate_raw = 0.0;
    return rb;
  }
  rb.r_p = pairing_rate_analytic(rb.p, max_gap);
  rb.r_s = sums.effective / (16.0 * rb.p * rb.p);
  rb.e_z = sums.erroneous / sums.effective;
  double p1 = mu * std::exp(-mu);
  rb.q11_bar = p1 * p1 * sums.single_photon / sums.effective;
  double y11;
  single_photon_pair(eta_s, pd, params.misalignment, y11, rb.e11_x);
  rb.rate_raw = rb.r_p * rb.r_s *
                (rb.q11_bar * (1.0 - binary_entropy(rb.e11_x)) -
                 params.error_correction_f * binary_entropy(rb.e_z));
  rb.rate = std::max(0.0, rb.rate_raw);
  return rb;
}

RateBreakdown mdi_rate(double mu, const ChannelParams &params) {
  if (!(mu > 0.0)) throw std::invalid_argument("mdi_rate: mu must be > 0");
  validate(params);
  RateBreakdown rb;
  rb.scheme = Scheme::MDI;
  rb.mu = mu;
  rb.p_z0 = kNaN;
  rb.p = rb.r_p = rb.r_s = kNaN;

  double eta_s = derive_transmittance(params);
  double pd = params.dark_count_prob;
  PairConfigSums sums = pair_config_sums(mu, params);
  rb.gain = sums.effective / 4.0;
  if (rb.gain <= 0.0) {
    rb.q11_bar = rb.e_z = 0.0;
    rb.e11_x = 0.5;
    rb.rate_raw = 0.0;
    return rb;
  }
  rb.e_z = sums.erroneous / sums.effective;
  double p1 = mu * std::exp(-mu);
  rb.q11_bar = p1 * p1 * sums.single_photon / sums.effective;
  double y11;
  single_photon_pair(eta_s, pd, params.misalignment, y11, rb.e11_x);
  rb.rate_raw = 0.5 * rb.gain *
                (rb.q11_bar * (1.0 - binary_entropy(rb.e11_x)) -
                 params.error_correction_f * binary_entropy(rb.e_z));
  rb.rate = std::max(0.0, rb.rate_raw);
  return rb;
}

RateBreakdown bb84_rate(double mu, const ChannelParams &params) {
  if (!(mu > 0.0)) throw std::invalid_argument("bb84_rate: mu must be > 0");
  validate(params);
  RateBreakdown rb;
  rb.scheme = Scheme::BB84;
  rb.mu = mu;
  rb.p_z0 = kNaN;
  rb.p = rb.r_p = rb.r_s = kNaN;

  double eta_s = derive_transmittance(params);
  double eta = eta_s * eta_s;
  double pd = params.dark_count_prob;
  double ed = params.misalignment;
  double y0 = 2.0 * pd;
  rb.gain = 1.0 - (1.0 - y0) * std::exp(-eta * mu);
  if (rb.gain <= 0.0) {
    rb.q11_bar = rb.e_z = 0.0;
    rb.e11_x = 0.5;
    rb.rate_raw = 0.0;
    return rb;
  }
  double e_mu = clamp01(ed * y0 / rb.gain);
  double y1 = 1.0 - (1.0 - y0) * (1.0 - eta);
  double e1 = y1 > 0.0 ? clamp01(ed + (0.5 - ed) * y0 / y1) : 0.5;
  double q1 = y1 * mu * std::exp(-mu) / rb.gain;
  rb.e_z = e_mu;
  rb.e11_x = e1;
  rb.q11_bar = q1;
  rb.rate_raw = 0.5 * rb.gain *
                (-params.error_correction_f * binary_entropy(e_mu) +
                 q1 * (1.0 - binary_entropy(e1)));
  rb.rate = std::max(0.0, rb.rate_raw);
  return rb;
}

RateBreakdown pm_rate(double mu, const ChannelParams &params) {
  if (!(mu > 0.0)) throw std::invalid_argument("pm_rate: mu must be > 0");
  validate(params);
  RateBreakdown rb;
  rb.scheme = Scheme::PM;
  rb.mu = mu;
  rb.p_z0 = kNaN;
  rb.p = rb.r_p = rb.r_s = kNaN;

  double eta = derive_transmittance(params);  // single-arm transmittance
  double pd = params.dark_count_prob;
  double ed = params.misalignment;
  rb.gain = 1.0 - (1.0 - 2.0 * pd) * std::exp(-eta * mu);
  if (rb.gain <= 0.0) {
    rb.q11_bar = rb.e_z = 0.0;
    rb.e11_x = 0.5;
    rb.rate_raw = 0.0;
    return rb;
  }
  // X error: one minus the total odd-photon fraction among clicks. The
  // Poisson tail above the cutoff is < 1e-12 for mu <= 1.5.
  double odd = 0.0;
  for (int k = 1; k <= 61; k += 2) {
    double yk = 1.0 - (1.0 - 2.0 * pd) * std::pow(1.0 - eta, k);
    odd += yk * poisson_pmf(mu, k) / rb.gain;
  }
  double ex = clamp01(1.0 - odd);
  rb.e11_x = ex;
  double y1 = 1.0 - (1.0 - 2.0 * pd) * (1.0 - eta);
  rb.q11_bar = y1 * poisson_pmf(mu, 1) / rb.gain;

  // Sum over the D/2 distinct mod-pi phase-offset groups, each occurring
  // with probability 2/D; negative groups contribute nothing.
  const int d = kPmPhaseSlices;
  double total = 0.0;
  for (int j = 0; j < d / 2; ++j) {
    double edj = std::sin(kPi / 4.0 - std::fabs(kPi / 4.0 - kPi * j / d));
    edj *= edj;
    double ezj =
        clamp01((pd + eta * mu * (edj + ed)) * std::exp(-eta * mu) / rb.gain);
    if (j == 0) rb.e_z = ezj;
    double term = 1.0 - binary_entropy(ex) -
                  params.error_correction_f * binary_entropy(ezj);
    total += std::max(0.0, term);
  }
  rb.rate_raw = 2.0 * rb.gain / d * total;
  rb.rate = std::max(0.0, rb.rate_raw);
  return rb;
}

RateBreakdown sns_rate(double mu_z, double p_z0, const ChannelParams &params) {
  if (!(mu_z > 0.0)) throw std::invalid_argument("sns_rate: mu_z must be > 0");
  if (!(p_z0 > 0.0 && p_z0 < 1.0))
    throw std::invalid_argument("sns_rate: p_z0 must be in (0, 1)");
  validate(params);
  RateBreakdown rb;
  rb.scheme = Scheme::SNS;
  rb.mu = mu_z;
  rb.p_z0 = p_z0;
  rb.p = rb.r_p = rb.r_s = rb.q11_bar = kNaN;

  double eta = derive_transmittance(params);  // single-arm transmittance
  double pd = params.dark_count_prob;
  double ed = params.misalignment;
  double s1 = (1.0 - eta) * 2.0 * pd * (1.0 - pd) + eta * (1.0 - pd);
  double dark_frac = s1 > 0.0 ? (1.0 - eta) * pd * (1.0 - pd) / s1 : 1.0;
  double e1ph = clamp01((1.0 - ed) * dark_frac + ed * (1.0 - dark_frac));
  double one_m = 1.0 - pd;
  double s00 = 2.0 * pd * one_m;
  double s02 =
      2.0 * (one_m * std::exp(-eta * mu_z / 2.0) - one_m * one_m * std::exp(-eta * mu_z));
  double s22 = 2.0 * (one_m * std::exp(-eta * mu_z) * bessel_i0(eta * mu_z) -
                      one_m * one_m * std::exp(-2.0 * eta * mu_z));
  double sz = p_z0 * p_z0 * s00 + (1.0 - p_z0) * (1.0 - p_z0) * s22 +
              2.0 * p_z0 * (1.0 - p_z0) * s02;
  rb.gain = sz;
  rb.e11_x = e1ph;
  if (sz <= 0.0) {
    rb.e_z = 0.0;
    rb.rate_raw = 2.0 * p_z0 * (1.0 - p_z0) * mu_z * std::exp(-mu_z) * s1 *
                  (1.0 - binary_entropy(e1ph));
    rb.rate = std::max(0.0, rb.rate_raw);
    return rb;
  }
  rb.e_z = clamp01((p_z0 * p_z0 * s00 + (1.0 - p_z0) * (1.0 - p_z0) * s22) / sz);
  rb.rate_raw = 2.0 * p_z0 * (1.0 - p_z0) * mu_z * std::exp(-mu_z) * s1 *
                    (1.0 - binary_entropy(e1ph)) -
                params.error_correction_f * sz * binary_entropy(rb.e_z);
  rb.rate = std::max(0.0, rb.rate_raw);
  return rb;
}

namespace {

// Golden-section maximization on [lo, hi] assuming unimodality; returns the
// midpoint of the final bracket.
template <typename F>
double golden_max(F f, double lo, double hi, double tol) {
  const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

// Coarse scan then golden refinement of a rate curve over mu in (0, 1.5].
template <typename F>
OptimizeResult maximize_mu(F rate_at) {
  const double hi = 1.5;
  const int coarse = 64;
  double best_mu = 0.0, best_rate = 0.0;
  for (int i = 1; i <= coarse; ++i) {
    double mu = hi * i / coarse;
    double r = rate_at(mu);
    if (r > best_rate) {
      best_rate = r;
      best_mu = mu;
    }
  }
  // A curve positive only at very small mu would be missed by the uniform
  // grid; probe a few extra points near zero.
  for (double mu : {1e-3, 5e-3, 1e-2}) {
    double r = rate_at(mu);
    if (r > best_rate) {
      best_rate = r;
      best_mu = mu;
    }
  }
  OptimizeResult res;
  if (best_rate <= 0.0) {
    res.mu_star = kNaN;
    res.p_z0_star = kNaN;
    return res;
  }
  double step = hi / coarse;
  double lo_b = std::max(1e-6, best_mu - step);
  double hi_b = std::min(hi, best_mu + step);
  res.mu_star = golden_max(rate_at, lo_b, hi_b, 1e-4);
  res.rate_star = rate_at(res.mu_star);
  res.p_z0_star = kNaN;
  res.found = true;
  return res;
}

}  // namespace

OptimizeResult optimize_intensity(Scheme scheme, int64_t max_gap,
                                  const ChannelParams &params) {
  switch (scheme) {
    case Scheme::MP:
      return maximize_mu(
          [&](double mu) { return mp_rate(mu, max_gap, params).rate; });
    case Scheme::MDI:
      return maximize_mu([&](double mu) { return mdi_rate(mu, params).rate; });
    case Scheme::BB84:
      return maximize_mu([&](double mu) { return bb84_rate(mu, params).rate; });
    case Scheme::PM:
      return maximize_mu([&](double mu) { return pm_rate(mu, params).rate; });
    case Scheme::SNS: {
      auto best_over_mu = [&](double p_z0) {
        return maximize_mu(
            [&](double mu) { return sns_rate(mu, p_z0, params).rate; });
      };
      // Outer coarse scan over the vacuum-sending probability.
      double best_p = 0.0, best_rate = 0.0;
      for (int i = 1; i <= 24; ++i) {
        double p_z0 = i / 25.0;
        OptimizeResult inner = best_over_mu(p_z0);
        if (inner.found && inner.rate_star > best_rate) {
          best_rate = inner.rate_star;
          best_p = p_z0;
        }
      }
      OptimizeResult res;
      if (best_rate <= 0.0) {
        res.mu_star = kNaN;
        res.p_z0_star = kNaN;
        return res;
      }
      double lo = std::max(0.005, best_p - 0.04);
      double hi = std::min(0.995, best_p + 0.04);
      double p_star = golden_max(
          [&](double p_z0) {
            OptimizeResult inner = best_over_mu(p_z0);
            return inner.found ? inner.rate_star : 0.0;
          },
          lo, hi, 1e-4);
      OptimizeResult inner = best_over_mu(p_star);
      res.found = true;
      res.p_z0_star = p_star;
      res.mu_star = inner.mu_star;
      res.rate_star = inner.rate_star;
      return res;
    }
    case Scheme::PLOB:
      throw std::invalid_argument("optimize_intensity: plob has no intensity");
  }
  throw std::invalid_argument("optimize_intensity: unknown scheme");
}

std::vector<SweepRow> sweep(const SweepOptions &options,
                            const ChannelParams &base) {
  std::vector<SweepRow> rows;
  for (double d : options.distances_km) {
    ChannelParams params = base;
    params.total_distance_km = d;
    double eta_s = derive_transmittance(params);
    for (Scheme scheme : options.schemes) {
      if (scheme == Scheme::PLOB) {
        SweepRow row;
        row.scheme = scheme;
        row.max_gap = -1;
        row.distance_km = d;
        row.loss_db = base.fiber_loss_db_per_km * d;
        row.rb = RateBreakdown{};
        row.rb.scheme = scheme;
        row.rb.mu = kNaN;
        row.rb.p_z0 = kNaN;
        row.rb.p = row.rb.r_p = row.rb.r_s = row.rb.gain = kNaN;
        row.rb.q11_bar = row.rb.e11_x = row.rb.e_z = kNaN;
        row.rb.rate_raw = row.rb.rate = plob_bound(eta_s * eta_s);
        rows.push_back(row);
        continue;
      }
      std::vector<int64_t> gaps =
          scheme == Scheme::MP ? options.max_gaps : std::vector<int64_t>{-1};
      for (int64_t gap : gaps) {
        SweepRow row;
        row.scheme = scheme;
        row.max_gap = gap;
        row.distance_km = d;
        row.loss_db = base.fiber_loss_db_per_km * d;
        if (options.optimize) {
          OptimizeResult opt = optimize_intensity(
              scheme, scheme == Scheme::MP ? gap : kNoGapLimit, params);
          if (!opt.found) {
            // Evaluate at the fallback intensity so the row still reports a
            // full (zero-rate) breakdown.
            row.rb = scheme == Scheme::MP ? mp_rate(options.mu, gap, params)
                     : scheme == Scheme::MDI ? mdi_rate(options.mu, params)
                     : scheme == Scheme::BB84 ? bb84_rate(options.mu, params)
                     : scheme == Scheme::PM
                         ? pm_rate(options.mu, params)
                         : sns_rate(options.mu, 0.5, params);
            row.rb.mu = kNaN;
          } else {
            row.rb = scheme == Scheme::MP ? mp_rate(opt.mu_star, gap, params)
                     : scheme == Scheme::MDI ? mdi_rate(opt.mu_star, params)
                     : scheme == Scheme::BB84 ? bb84_rate(opt.mu_star, params)
                     : scheme == Scheme::PM
                         ? pm_rate(opt.mu_star, params)
                         : sns_rate(opt.mu_star, opt.p_z0_star, params);
          }
        } else {
          row.rb = scheme == Scheme::MP ? mp_rate(options.mu, gap, params)
                   : scheme == Scheme::MDI ? mdi_rate(options.mu, params)
                   : scheme == Scheme::BB84 ? bb84_rate(options.mu, params)
                   : scheme == Scheme::PM ? pm_rate(options.mu, params)
                                          : sns_rate(options.mu, 0.5, params);
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

}  // namespace mpqkd
