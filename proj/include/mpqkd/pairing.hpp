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

#ifndef MPQKD_PAIRING_HPP
#define MPQKD_PAIRING_HPP

#include <cstdint>
#include <utility>
#include <vector>

namespace mpqkd {

// Pairs of 1-based round indices (i, j) with i < j.
using PairList = std::vector<std::pair<int64_t, int64_t>>;

// max_gap value meaning "no limit". Zero is not a usable gap (a pair needs
// j > i), so it is free to serve as the sentinel.
constexpr int64_t kNoGapLimit = 0;

// Greedy left-to-right pairing of clicked rounds. A clicked round opens a
// pending pair; the next clicked round closes it. A pending round is
// abandoned at the first unclicked round i with i - pending >= max_gap, so a
// closing click can sit at most max_gap rounds after the opening one.
// clicks[t] nonzero means round t+1 clicked. Leftover clicks at the end of
// the block stay unpaired.
PairList pair_adjacent(const std::vector<uint8_t> &clicks, int64_t max_gap);

// Expected pairs per round for i.i.d. click probability p:
//   r_p(p, l) = 1 / (1 / (p (1 - (1-p)^l)) + 1 / p).
// Tends to p/2 as l grows and to p^2/(1+p) at l = 1.
double pairing_rate_analytic(double p, int64_t max_gap);

// Expected number of rounds from an opening click to the click that finally
// closes a pair, counting rounds spent on abandoned openings:
//   E[H] = 1 / (p (1 - (1-p)^l)).
// The expected rounds consumed per pair is then E[H] + 1/p.
double expected_intra_gap(double p, int64_t max_gap);

}  // namespace mpqkd

#endif  // MPQKD_PAIRING_HPP
