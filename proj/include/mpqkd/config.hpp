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

#ifndef MPQKD_CONFIG_HPP_
#define MPQKD_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mpqkd/channel.hpp"
#include "mpqkd/decoy.hpp"
#include "mpqkd/keyrate.hpp"
#include "mpqkd/montecarlo.hpp"

namespace mpqkd {

// [decoy] section: how the estimation layer treats observed counts.
struct DecoySettings {
  bool asymptotic = true;
  double epsilon = 1e-7;
  int k_max = 0;  // 0 lets the estimator pick the photon cutoff

  EstimationMode mode() const;
  void validate() const;  // throws std::invalid_argument naming the field
};

// [sweep] section: the grid the sweep subcommand walks.
struct SweepSettings {
  std::vector<Scheme> schemes = {Scheme::MP, Scheme::PLOB};
  std::vector<double> distances_km = {0,   50,  100, 150, 200, 250,
                                      300, 350, 400, 450, 500};
  std::vector<std::int64_t> l_values = {1, 1000000};
  double mu = 0.5;
  bool optimize = false;

  void validate() const;
};

// [output] section: default artifact paths; --out flags override them.
struct OutputSettings {
  std::string rates_csv = "rates.csv";
  std::string tally_csv = "tally.csv";
  std::string report_json = "report.json";
  std::string drift_csv = "drift.csv";
};

struct RunConfig {
  ChannelParams channel;
  ProtocolParams protocol;
  DecoySettings decoy;
  SweepSettings sweep;
  OutputSettings output;

  // Runs every module-level validator; throws std::invalid_argument naming
  // the offending field.
  void validate() const;

  SweepOptions sweep_options() const;
  SourceModel source_model() const;
};

// Pairing-interval text: "inf" (or 0) means no limit and maps to
// kNoGapLimit; anything else must be a nonnegative integer. Throws
// std::invalid_argument.
std::int64_t parse_max_gap(std::string_view text);

// Parses the key = value section format:
//
//   # comment
//   [channel]
//   total_distance_km = 400
//
// Sections: channel, protocol, decoy, sweep, output. Unknown sections or
// keys, duplicate keys, keys outside any section, and unparseable values
// all throw std::invalid_argument naming the key and line; origin labels
// the messages. Values the file does not mention keep their defaults.
RunConfig parse_config(std::string_view text, std::string_view origin);

// Reads and parses a config file; missing or unreadable paths throw
// std::invalid_argument.
RunConfig load_config(const std::string &path);

}  // namespace mpqkd

#endif  // MPQKD_CONFIG_HPP_
