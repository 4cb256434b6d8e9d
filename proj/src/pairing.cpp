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

#include "mpqkd/pairing.hpp"

#include <cmath>
#include <stdexcept>

namespace mpqkd {

PairList pair_adjacent(const std::vector<uint8_t> &clicks, int64_t max_gap) {
  if (max_gap < 0)
    throw std::invalid_argument("pairing: max_gap must be >= 0 (0 = no limit)");
  PairList pairs;
  int64_t pending = 0;  // 1-based opening index, 0 = none
  for (int64_t t = 1; t <= static_cast<int64_t>(clicks.size()); ++t) {
    if (clicks[static_cast<size_t>(t - 1)]) {
      if (pending == 0) {
        pending = t;
      } else {
        pairs.emplace_back(pending, t);
        pending = 0;
      }
    } else if (pending != 0 && max_gap != kNoGapLimit &&
               t - pending >= max_gap) {
      pending = 0;
    }
  }
  return pairs;
}

namespace {

// 1 - (1-p)^l, computed without cancellation for small p.
double close_prob_within_gap(double p, int64_t max_gap) {
  if (max_gap == kNoGapLimit) return 1.0;
  if (p >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(max_gap) * std::log1p(-p));
}

void check_click_prob(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("pairing: click probability must be in [0, 1]");
}

}  // namespace

double pairing_rate_analytic(double p, int64_t max_gap) {
  check_click_prob(p);
  if (max_gap < 0)
    throw std::invalid_argument("pairing: max_gap must be >= 0 (0 = no limit)");
  if (p == 0.0) return 0.0;
  double q = close_prob_within_gap(p, max_gap);
  return 1.0 / (1.0 / (p * q) + 1.0 / p);
}

double expected_intra_gap(double p, int64_t max_gap) {
  check_click_prob(p);
  if (max_gap < 0)
    throw std::invalid_argument("pairing: max_gap must be >= 0 (0 = no limit)");
  if (p == 0.0)
    throw std::invalid_argument("pairing: expected gap diverges at p = 0");
  return 1.0 / (p * close_prob_within_gap(p, max_gap));
}

}  // namespace mpqkd
