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

#ifndef MPQKD_IO_HPP_
#define MPQKD_IO_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mpqkd/decoy.hpp"
#include "mpqkd/keyrate.hpp"
#include "mpqkd/montecarlo.hpp"
#include "mpqkd/phasedrift.hpp"

namespace mpqkd {

// Stamped into every CSV comment header and JSON report so downstream
// readers can detect layout changes.
constexpr int kSchemaVersion = 1;

// Canonical text for one floating-point field: nine significant digits, so
// golden files do not depend on shortest-round-trip printing. Integral
// values come out without a decimal point.
std::string format_double(double value);

// Flat JSON builder with insertion-ordered keys. Values are rendered at
// insertion time (doubles through format_double, NaN as null), so the
// output bytes are a pure function of the calls made. Child objects print
// compact on one line; arrays print one compact element per line.
class JsonObject {
 public:
  JsonObject &add(std::string_view key, double value);
  JsonObject &add(std::string_view key, int value);
  JsonObject &add(std::string_view key, std::int64_t value);
  JsonObject &add(std::string_view key, std::uint64_t value);
  JsonObject &add(std::string_view key, bool value);
  JsonObject &add(std::string_view key, const char *value);
  JsonObject &add(std::string_view key, std::string_view value);
  JsonObject &add(std::string_view key, const JsonObject &child);
  JsonObject &add(std::string_view key, const std::vector<JsonObject> &items);

  // Two-space-indented block form, no trailing newline.
  std::string str() const;
  // Single-line form used for nested values.
  std::string compact() const;

 private:
  struct Field {
    std::string key;
    std::string value;  // rendered JSON fragment
    std::vector<std::string> items;
    bool is_array = false;
  };
  std::vector<Field> fields_;
};

// Sweep results in the plot-ready layout
//   scheme,l,distance_km,loss_db,mu,p,r_p,r_s,q11,e11x,ez,rate
// NaN fields render as empty cells; an unlimited pairing interval renders
// as "inf" and schemes without one leave the cell empty.
void write_sweep_csv(std::ostream &out, const std::vector<SweepRow> &rows);

// Tally tables as basis,mu_a,mu_b,M,E rows, Z block then X block, class 0
// through 2 per party. mu_a and mu_b carry the per-slot intensity setting
// of the class, so the reader can map values back through the source model.
void write_tally_csv(std::ostream &out, const BasisTally &z,
                     const BasisTally &x, const SourceModel &source);

struct TallyCsv {
  BasisTally z;
  BasisTally x;
};

// Parses what write_tally_csv emits: rows in any order, missing rows count
// zero, a "# population N" comment feeds both tables. Throws
// std::invalid_argument naming the offending line for unknown headers,
// unknown bases, intensities outside the source model, duplicate rows,
// negative counts, or E exceeding M.
TallyCsv read_tally_csv(std::istream &in, const SourceModel &source);

// Interval error scan rows: l_bin_lo,l_bin_hi,pairs,errors,rate.
void write_interval_csv(std::ostream &out,
                        const std::vector<IntervalErrorRow> &rows);

// Per-round dump: index,int_a,phase_a,int_b,phase_b,outcome with 1-based
// indices and outcome letters N, L, R, D.
void write_round_log_csv(std::ostream &out,
                         const std::vector<RoundRecord> &records,
                         const ProtocolParams &protocol);

// Click string for the pair subcommand: '0' and '1' with whitespace
// ignored. Throws std::invalid_argument naming the first bad character.
std::vector<std::uint8_t> parse_click_string(std::string_view text);

// Full estimation report, leading with the contract keys M11_lower,
// E11_upper, q11_lower, e11_ph_upper.
JsonObject decoy_report_json(const DecoyReport &report);

}  // namespace mpqkd

#endif  // MPQKD_IO_HPP_
