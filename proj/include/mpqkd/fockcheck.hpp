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

#ifndef MPQKD_FOCKCHECK_HPP_
#define MPQKD_FOCKCHECK_HPP_

#include <complex>
#include <vector>

namespace mpqkd {

// A discretely phase-randomized coherent state of intensity mu, observed in
// the photon-number residue k modulo the number of phase slices d.
struct PseudoFockSpec {
  double mu = 0.5;
  int d = 16;
  int k = 0;

  void validate() const;  // throws std::invalid_argument naming the field
};

// Photon-number amplitudes on a truncated Fock space, one or two modes.
// Two-mode amplitudes are stored row-major over (n1, n2) with each mode
// truncated at n_trunc. tail_mass is the probability the untruncated state
// puts beyond the stored levels.
struct FockVector {
  int n_trunc = 0;
  int modes = 1;
  std::vector<std::complex<double>> amplitudes;
  double tail_mass = 0.0;

  double norm() const;
  std::complex<double> &at(int n);
  const std::complex<double> &at(int n) const;
  std::complex<double> &at(int n1, int n2);
  const std::complex<double> &at(int n1, int n2) const;
};

std::complex<double> inner_product(const FockVector &a, const FockVector &b);

// Probability that a Poisson(mu) photon number lands in residue k mod d:
//   P_k = e^(-mu) sum_m mu^(m d + k) / (m d + k)!.
// The series is summed until a term falls below 1e-16 of the partial sum.
double pseudo_poisson(const PseudoFockSpec &spec);

// Coherent state |alpha> truncated at n_trunc photons.
FockVector coherent_state(std::complex<double> alpha, int n_trunc);

// Smallest truncation whose coherent-state tail mass at this intensity is
// below 1e-12.
int default_truncation(double intensity);

// Normalized projection of the phase-randomized coherent state onto the
// residue-k photon numbers: amplitudes proportional to sqrt(mu)^n/sqrt(n!)
// on levels n = k, k+d, k+2d, ... and exactly zero elsewhere.
FockVector pseudo_fock_state(const PseudoFockSpec &spec, int n_trunc);

// The conditional two-mode state of a coherent pair with total intensity
// spec.mu, total photon residue spec.k and relative phase 2 pi j_theta / d:
// a phase gate on mode one after a balanced beam splitter acting on
// (pseudo-Fock, vacuum). The beam splitter maps |n,0> to binomial amplitudes
// sqrt(C(n,r))/sqrt(2^n) over (r, n-r), exactly per level.
FockVector two_mode_conditional_state(const PseudoFockSpec &spec, int j_theta,
                                      int n_trunc);

// Both sides of the single-mode purification identity, built independently:
// the qudit-tagged coherent superposition against the Fourier-basis mixture
// of pseudo-Fock states. gram_deviation is the unitarity defect of the
// Fourier basis used on the right-hand side.
struct SingleModeReport {
  double max_deviation = 0.0;
  double tail_mass = 0.0;
  double gram_deviation = 0.0;
};
SingleModeReport verify_single_mode_decomposition(double mu, int d,
                                                  int n_trunc);

// Two-mode version: two independently phase-randomized coherent states of
// intensity mu each against the partial-Fourier mixture of the conditional
// states with total intensity 2 mu. Components with total photon number
// beyond n_trunc are accounted in tail_mass, not in the deviation. Also
// checks cross-residue orthogonality of the conditional states, the
// beam-splitter row norms, and (for k = 1) the overlap with the one-photon
// qubit states (|01> + e^(i theta) |10>)/sqrt(2).
struct TwoModeReport {
  double max_deviation = 0.0;
  double tail_mass = 0.0;
  double cross_overlap_max = 0.0;
  double qubit_fidelity_min = 1.0;
  double bs_norm_deviation = 0.0;
};
// Throws std::invalid_argument when the input tail mass at intensity 2 mu
// exceeds 1e-8, since the comparison would then be dominated by truncation.
TwoModeReport verify_two_mode_decomposition(double mu, int d, int n_trunc);

}  // namespace mpqkd

#endif  // MPQKD_FOCKCHECK_HPP_
