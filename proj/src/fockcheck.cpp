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

#include "mpqkd/fockcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mpqkd {
namespace {

[[noreturn]] void fail(const std::string &msg) {
  throw std::invalid_argument(msg);
}

double poisson_pmf(double mean, int n) {
  if (mean <= 0.0) return n == 0 ? 1.0 : 0.0;
  double log_p = -mean + n * std::log(mean) - std::lgamma(n + 1.0);
  return std::exp(log_p);
}

// Upper tail beyond n, summed upward so that values far below the 1 - cdf
// resolution stay meaningful.
double poisson_tail_above(double mean, int n) {
  double term = poisson_pmf(mean, n + 1);
  double sum = 0.0;
  for (int j = n + 1; j < n + 800; ++j) {
    sum += term;
    term *= mean / (j + 1);
    if (term < sum * 1e-18 && j > mean) break;
  }
  return sum;
}

std::complex<double> phase(double angle) { return std::polar(1.0, angle); }

// Row of beam-splitter amplitudes for |n,0>: out[r] = sqrt(C(n,r)/2^n).
std::vector<double> split_row(int n) {
  std::vector<double> row(n + 1);
  row[0] = std::pow(0.5, 0.5 * n);
  for (int r = 1; r <= n; ++r) {
    row[r] = row[r - 1] * std::sqrt(static_cast<double>(n - r + 1) / r);
  }
  return row;
}

}  // namespace

void PseudoFockSpec::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    fail("pseudo-Fock spec invalid: mu must be positive and finite");
  }
  if (d < 1) fail("pseudo-Fock spec invalid: d must be at least 1");
  if (k < 0 || k >= d) fail("pseudo-Fock spec invalid: k must lie in [0, d)");
}

double FockVector::norm() const {
  double sum = 0.0;
  for (const auto &a : amplitudes) sum += std::norm(a);
  return std::sqrt(sum);
}

std::complex<double> &FockVector::at(int n) {
  if (modes != 1) fail("Fock vector access: single-mode index on a two-mode vector");
  return amplitudes[static_cast<std::size_t>(n)];
}

const std::complex<double> &FockVector::at(int n) const {
  return const_cast<FockVector *>(this)->at(n);
}

std::complex<double> &FockVector::at(int n1, int n2) {
  if (modes != 2) fail("Fock vector access: two-mode index on a single-mode vector");
  return amplitudes[static_cast<std::size_t>(n1) * (n_trunc + 1) + n2];
}

const std::complex<double> &FockVector::at(int n1, int n2) const {
  return const_cast<FockVector *>(this)->at(n1, n2);
}

std::complex<double> inner_product(const FockVector &a, const FockVector &b) {
  if (a.modes != b.modes || a.amplitudes.size() != b.amplitudes.size()) {
    fail("Fock inner product requires vectors of the same shape");
  }
  std::complex<double> sum = 0.0;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) {
    sum += std::conj(a.amplitudes[i]) * b.amplitudes[i];
  }
  return sum;
}

double pseudo_poisson(const PseudoFockSpec &spec) {
  spec.validate();
  double term = std::exp(-spec.mu);
  for (int i = 1; i <= spec.k; ++i) term *= spec.mu / i;
  double sum = 0.0;
  int n = spec.k;
  for (int m = 0; m < 100000; ++m) {
    sum += term;
    for (int i = 1; i <= spec.d; ++i) term *= spec.mu / (n + i);
    n += spec.d;
    if (term < 1e-16 * sum) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

FockVector coherent_state(std::complex<double> alpha, int n_trunc) {
  if (n_trunc < 0) fail("coherent state: truncation must be nonnegative");
  FockVector v;
  v.n_trunc = n_trunc;
  v.modes = 1;
  v.amplitudes.assign(static_cast<std::size_t>(n_trunc) + 1, 0.0);
  std::complex<double> c = std::exp(-0.5 * std::norm(alpha));
  double kept = 0.0;
  for (int n = 0; n <= n_trunc; ++n) {
    v.amplitudes[n] = c;
    kept += std::norm(c);
    c *= alpha / std::sqrt(n + 1.0);
  }
  v.tail_mass = std::max(0.0, 1.0 - kept);
  return v;
}

int default_truncation(double intensity) {
  if (!(intensity >= 0.0) || !std::isfinite(intensity)) {
    fail("truncation rule: intensity must be nonnegative and finite");
  }
  int n = static_cast<int>(intensity);
  while (poisson_tail_above(intensity, n) >= 1e-12) ++n;
  return n;
}

FockVector pseudo_fock_state(const PseudoFockSpec &spec, int n_trunc) {
  spec.validate();
  double p = pseudo_poisson(spec);
  if (p <= 0.0) fail("pseudo-Fock state: residue weight underflowed to zero");
  FockVector v = coherent_state(std::sqrt(spec.mu), n_trunc);
  double scale = 1.0 / std::sqrt(p);
  double kept = 0.0;
  for (int n = 0; n <= n_trunc; ++n) {
    if (n % spec.d == spec.k) {
      v.amplitudes[n] *= scale;
      kept += std::norm(v.amplitudes[n]);
    } else {
      v.amplitudes[n] = 0.0;
    }
  }
  v.tail_mass = std::max(0.0, 1.0 - kept);
  return v;
}

FockVector two_mode_conditional_state(const PseudoFockSpec &spec, int j_theta,
                                      int n_trunc) {
  spec.validate();
  if (n_trunc < 0) fail("conditional state: truncation must be nonnegative");
  double p = pseudo_poisson(spec);
  if (p <= 0.0) fail("conditional state: residue weight underflowed to zero");
  int jt = ((j_theta % spec.d) + spec.d) % spec.d;
  double theta = 2.0 * std::numbers::pi * jt / spec.d;
  FockVector input = coherent_state(std::sqrt(spec.mu), n_trunc);

  FockVector v;
  v.n_trunc = n_trunc;
  v.modes = 2;
  v.amplitudes.assign((static_cast<std::size_t>(n_trunc) + 1) *
                          (static_cast<std::size_t>(n_trunc) + 1),
                      0.0);
  double kept = 0.0;
  double scale = 1.0 / std::sqrt(p);
  for (int n = spec.k; n <= n_trunc; n += spec.d) {
    std::complex<double> c = input.amplitudes[n] * scale;
    kept += std::norm(c);
    std::vector<double> row = split_row(n);
    for (int r = 0; r <= n; ++r) {
      v.at(r, n - r) = c * row[r] * phase(theta * r);
    }
  }
  v.tail_mass = std::max(0.0, 1.0 - kept);
  return v;
}

SingleModeReport verify_single_mode_decomposition(double mu, int d,
                                                  int n_trunc) {
  PseudoFockSpec probe{mu, d, 0};
  probe.validate();
  if (n_trunc < 0) fail("decomposition check: truncation must be nonnegative");
  SingleModeReport report;
  std::size_t levels = static_cast<std::size_t>(n_trunc) + 1;

  // Left side: equal superposition of tagged coherent states.
  std::vector<std::complex<double>> lhs(d * levels, 0.0);
  double root_d = std::sqrt(static_cast<double>(d));
  for (int j = 0; j < d; ++j) {
    double phi = 2.0 * std::numbers::pi * j / d;
    FockVector coh = coherent_state(std::polar(std::sqrt(mu), phi), n_trunc);
    report.tail_mass = coh.tail_mass;
    for (int n = 0; n <= n_trunc; ++n) {
      lhs[j * levels + n] = coh.amplitudes[n] / root_d;
    }
  }

  // Right side: Fourier-tagged pseudo-Fock states weighted by their
  // residue probabilities.
  std::vector<std::complex<double>> rhs(d * levels, 0.0);
  for (int k = 0; k < d; ++k) {
    PseudoFockSpec spec{mu, d, k};
    double w = std::sqrt(pseudo_poisson(spec));
    FockVector lambda = pseudo_fock_state(spec, n_trunc);
    for (int j = 0; j < d; ++j) {
      std::complex<double> tag =
          phase(2.0 * std::numbers::pi * j * k / d) / root_d;
      for (int n = 0; n <= n_trunc; ++n) {
        rhs[j * levels + n] += w * tag * lambda.amplitudes[n];
      }
    }
  }

  for (std::size_t i = 0; i < lhs.size(); ++i) {
    report.max_deviation =
        std::max(report.max_deviation, std::abs(lhs[i] - rhs[i]));
  }

  // Unitarity defect of the Fourier tag basis.
  for (int k = 0; k < d; ++k) {
    for (int k2 = 0; k2 < d; ++k2) {
      std::complex<double> g = 0.0;
      for (int j = 0; j < d; ++j) {
        g += std::conj(phase(2.0 * std::numbers::pi * j * k / d)) *
             phase(2.0 * std::numbers::pi * j * k2 / d);
      }
      g /= d;
      std::complex<double> expect = (k == k2) ? 1.0 : 0.0;
      report.gram_deviation =
          std::max(report.gram_deviation, std::abs(g - expect));
    }
  }
  return report;
}

TwoModeReport verify_two_mode_decomposition(double mu, int d, int n_trunc) {
  PseudoFockSpec probe{mu, d, 0};
  probe.validate();
  if (n_trunc < 0) fail("decomposition check: truncation must be nonnegative");
  TwoModeReport report;
  std::size_t levels = static_cast<std::size_t>(n_trunc) + 1;

  // The right side is built from the total intensity. Reject truncations
  // whose input tail would dominate the comparison.
  FockVector pooled = coherent_state(std::sqrt(2.0 * mu), n_trunc);
  if (pooled.tail_mass > 1e-8) {
    fail("decomposition check: truncation tail mass " +
         std::to_string(pooled.tail_mass) +
         " at intensity " + std::to_string(2.0 * mu) +
         " exceeds 1e-8; raise n_trunc");
  }

  FockVector per_mode = coherent_state(std::sqrt(mu), n_trunc);
  double kept = 0.0;
  for (int n1 = 0; n1 <= n_trunc; ++n1) {
    for (int n2 = 0; n1 + n2 <= n_trunc; ++n2) {
      kept += std::norm(per_mode.amplitudes[n1]) *
              std::norm(per_mode.amplitudes[n2]);
    }
  }
  report.tail_mass = std::max(0.0, 1.0 - kept);

  // Conditional states for every residue and relative-phase index.
  std::vector<FockVector> cond(static_cast<std::size_t>(d) * d);
  std::vector<double> weight(d);
  for (int k = 0; k < d; ++k) {
    PseudoFockSpec spec{2.0 * mu, d, k};
    weight[k] = std::sqrt(pseudo_poisson(spec));
    for (int jt = 0; jt < d; ++jt) {
      cond[k * d + jt] = two_mode_conditional_state(spec, jt, n_trunc);
    }
  }

  // Componentwise identity over qudit tags (j1, j2) and photon numbers with
  // total at most n_trunc.
  std::size_t grid = levels * levels;
  std::vector<std::complex<double>> rhs(grid);
  for (int j1 = 0; j1 < d; ++j1) {
    double phi1 = 2.0 * std::numbers::pi * j1 / d;
    for (int j2 = 0; j2 < d; ++j2) {
      double phi2 = 2.0 * std::numbers::pi * j2 / d;
      int jt = ((j1 - j2) % d + d) % d;
      std::fill(rhs.begin(), rhs.end(), std::complex<double>(0.0));
      for (int k = 0; k < d; ++k) {
        std::complex<double> tag =
            weight[k] * phase(2.0 * std::numbers::pi * j2 * k / d) /
            static_cast<double>(d);
        const FockVector &v = cond[k * d + jt];
        for (std::size_t i = 0; i < grid; ++i) rhs[i] += tag * v.amplitudes[i];
      }
      for (int n1 = 0; n1 <= n_trunc; ++n1) {
        for (int n2 = 0; n1 + n2 <= n_trunc; ++n2) {
          std::complex<double> lhs = per_mode.amplitudes[n1] *
                                     per_mode.amplitudes[n2] *
                                     phase(phi1 * n1 + phi2 * n2) /
                                     static_cast<double>(d);
          report.max_deviation = std::max(
              report.max_deviation,
              std::abs(lhs - rhs[static_cast<std::size_t>(n1) * levels + n2]));
        }
      }
    }
  }

  // Conditional states with different residues occupy disjoint total photon
  // numbers, so their overlaps must vanish for any pair of phase indices.
  // Phase pairs are sampled along the diagonal and against index zero.
  for (int k = 0; k < d; ++k) {
    for (int k2 = k + 1; k2 < d; ++k2) {
      for (int jt = 0; jt < d; ++jt) {
        double diag =
            std::abs(inner_product(cond[k * d + jt], cond[k2 * d + jt]));
        double off = std::abs(inner_product(cond[k * d], cond[k2 * d + jt]));
        report.cross_overlap_max =
            std::max({report.cross_overlap_max, diag, off});
      }
    }
  }

  // Beam-splitter rows must carry unit norm at every photon number.
  for (int n = 0; n <= n_trunc; ++n) {
    std::vector<double> row = split_row(n);
    double sum = 0.0;
    for (double b : row) sum += b * b;
    report.bs_norm_deviation =
        std::max(report.bs_norm_deviation, std::abs(sum - 1.0));
  }

  // Residue one should reproduce the one-photon relative-phase qubit.
  if (d >= 2 && n_trunc >= 1) {
    for (int jt = 0; jt < d; ++jt) {
      double theta = 2.0 * std::numbers::pi * jt / d;
      const FockVector &v = cond[1 * d + jt];
      std::complex<double> overlap =
          (v.at(0, 1) + std::conj(phase(theta)) * v.at(1, 0)) / std::sqrt(2.0);
      report.qubit_fidelity_min =
          std::min(report.qubit_fidelity_min, std::norm(overlap));
    }
  }
  return report;
}

}  // namespace mpqkd
