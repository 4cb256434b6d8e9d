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

#include "mpqkd/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mpqkd {

namespace {

[[noreturn]] void fail(const std::string &message) {
  throw std::invalid_argument(message);
}

// Empty cell for fields that do not apply to a row.
std::string csv_cell(double value) {
  if (std::isnan(value)) return "";
  return format_double(value);
}

std::string gap_cell(std::int64_t max_gap) {
  if (max_gap < 0) return "";
  if (max_gap == kNoGapLimit) return "inf";
  return std::to_string(max_gap);
}

std::string json_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 2);
  out.push_back('"');
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
  return out;
}

std::string json_number(double value) {
  if (std::isnan(value)) return "null";
  if (std::isinf(value)) return value > 0 ? "1e999" : "-1e999";
  return format_double(value);
}

struct Splitter {
  std::string_view line;
  std::size_t pos = 0;
  bool done = false;

  bool next(std::string_view &field) {
    if (done) return false;
    std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      field = line.substr(pos);
      done = true;
    } else {
      field = line.substr(pos, comma - pos);
      pos = comma + 1;
    }
    return true;
  }
};

double parse_number(std::string_view field, int line_no, const char *what) {
  std::string text(field);
  if (text.empty())
    fail("tally line " + std::to_string(line_no) + ": empty " +
         std::string(what) + " field");
  char *end = nullptr;
  double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || !std::isfinite(value))
    fail("tally line " + std::to_string(line_no) + ": " + std::string(what) +
         " is not a finite number: '" + text + "'");
  return value;
}

// Maps an intensity value back to its class index in {0, nu, mu}.
int intensity_class(double value, const SourceModel &source, int line_no) {
  const double levels[3] = {0.0, source.nu, source.mu};
  for (int cls = 0; cls < 3; ++cls) {
    double scale = std::max(1.0, std::fabs(levels[cls]));
    if (std::fabs(value - levels[cls]) <= 1e-9 * scale) return cls;
  }
  fail("tally line " + std::to_string(line_no) + ": intensity " +
       format_double(value) + " is none of 0, " + format_double(source.nu) +
       ", " + format_double(source.mu));
}

void write_tally_block(std::ostream &out, const BasisTally &tally,
                       const SourceModel &source, const char *basis) {
  const double levels[3] = {0.0, source.nu, source.mu};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      out << basis << ',' << format_double(levels[a]) << ','
          << format_double(levels[b]) << ',' << format_double(tally.m[a][b])
          << ',' << format_double(tally.e[a][b]) << '\n';
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

JsonObject &JsonObject::add(std::string_view key, double value) {
  fields_.push_back({std::string(key), json_number(value), {}, false});
  return *this;
}

JsonObject &JsonObject::add(std::string_view key, int value) {
  return add(key, static_cast<std::int64_t>(value));
}

JsonObject &JsonObject::add(std::string_view key, std::int64_t value) {
  fields_.push_back({std::string(key), std::to_string(value), {}, false});
  return *this;
}

JsonObject &JsonObject::add(std::string_view key, std::uint64_t value) {
  fields_.push_back({std::string(key), std::to_string(value), {}, false});
  return *this;
}

JsonObject &JsonObject::add(std::string_view key, bool value) {
  fields_.push_back({std::string(key), value ? "true" : "false", {}, false});
  return *this;
}

JsonObject &JsonObject::add(std::string_view key, const char *value) {
  return add(key, std::string_view(value));
}

JsonObject &JsonObject::add(std::string_view key, std::string_view value) {
  fields_.push_back({std::string(key), json_escape(value), {}, false});
  return *this;
}

JsonObject &JsonObject::add(std::string_view key, const JsonObject &child) {
  fields_.push_back({std::string(key), child.compact(), {}, false});
  return *this;
}

JsonObject &JsonObject::add(std::string_view key,
                            const std::vector<JsonObject> &items) {
  Field field;
  field.key = std::string(key);
  field.is_array = true;
  for (const JsonObject &item : items) field.items.push_back(item.compact());
  fields_.push_back(std::move(field));
  return *this;
}

std::string JsonObject::str() const {
  std::string out = "{";
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    const Field &f = fields_[i];
    out += "\n  ";
    out += json_escape(f.key);
    out += ": ";
    if (f.is_array) {
      if (f.items.empty()) {
        out += "[]";
      } else {
        out += "[";
        for (std::size_t j = 0; j < f.items.size(); ++j) {
          out += "\n    ";
          out += f.items[j];
          if (j + 1 < f.items.size()) out += ",";
        }
        out += "\n  ]";
      }
    } else {
      out += f.value;
    }
    if (i + 1 < fields_.size()) out += ",";
  }
  out += fields_.empty() ? "}" : "\n}";
  return out;
}

std::string JsonObject::compact() const {
  std::string out = "{";
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    const Field &f = fields_[i];
    if (i > 0) out += ", ";
    out += json_escape(f.key);
    out += ": ";
    if (f.is_array) {
      out += "[";
      for (std::size_t j = 0; j < f.items.size(); ++j) {
        if (j > 0) out += ", ";
        out += f.items[j];
      }
      out += "]";
    } else {
      out += f.value;
    }
  }
  out += "}";
  return out;
}

void write_sweep_csv(std::ostream &out, const std::vector<SweepRow> &rows) {
  out << "# schema_version " << kSchemaVersion << '\n';
  out << "scheme,l,distance_km,loss_db,mu,p,r_p,r_s,q11,e11x,ez,rate\n";
  for (const SweepRow &row : rows) {
    const RateBreakdown &rb = row.rb;
    out << scheme_name(row.scheme) << ',' << gap_cell(row.max_gap) << ','
        << csv_cell(row.distance_km) << ',' << csv_cell(row.loss_db) << ','
        << csv_cell(rb.mu) << ',' << csv_cell(rb.p) << ',' << csv_cell(rb.r_p)
        << ',' << csv_cell(rb.r_s) << ',' << csv_cell(rb.q11_bar) << ','
        << csv_cell(rb.e11_x) << ',' << csv_cell(rb.e_z) << ','
        << csv_cell(rb.rate) << '\n';
  }
}

void write_tally_csv(std::ostream &out, const BasisTally &z,
                     const BasisTally &x, const SourceModel &source) {
  out << "# schema_version " << kSchemaVersion << '\n';
  out << "# population " << format_double(z.population) << '\n';
  out << "basis,mu_a,mu_b,M,E\n";
  write_tally_block(out, z, source, "Z");
  write_tally_block(out, x, source, "X");
}

TallyCsv read_tally_csv(std::istream &in, const SourceModel &source) {
  source.validate();
  TallyCsv result;
  result.z.basis = PairBasis::Z;
  result.x.basis = PairBasis::X;
  bool seen[2][3][3] = {};
  bool header_seen = false;
  double population = 0.0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    if (line[start] == '#') {
      std::istringstream comment(line.substr(start + 1));
      std::string tag;
      comment >> tag;
      if (tag == "population") {
        if (!(comment >> population) || population < 0.0)
          fail("tally line " + std::to_string(line_no) +
               ": population must be a nonnegative number");
      } else if (tag == "schema_version") {
        int version = 0;
        if (!(comment >> version) || version != kSchemaVersion)
          fail("tally line " + std::to_string(line_no) +
               ": unsupported schema_version");
      }
      continue;
    }
    if (!header_seen) {
      if (line.substr(start) != "basis,mu_a,mu_b,M,E")
        fail("tally line " + std::to_string(line_no) +
             ": expected header 'basis,mu_a,mu_b,M,E'");
      header_seen = true;
      continue;
    }
    std::string payload = line.substr(start);
    Splitter split{payload};
    std::string_view f_basis, f_mu_a, f_mu_b, f_m, f_e, extra;
    if (!split.next(f_basis) || !split.next(f_mu_a) || !split.next(f_mu_b) ||
        !split.next(f_m) || !split.next(f_e) || split.next(extra))
      fail("tally line " + std::to_string(line_no) +
           ": expected exactly 5 fields");
    int table;
    if (f_basis == "Z") {
      table = 0;
    } else if (f_basis == "X") {
      table = 1;
    } else {
      fail("tally line " + std::to_string(line_no) + ": basis must be Z or X");
    }
    int cls_a =
        intensity_class(parse_number(f_mu_a, line_no, "mu_a"), source, line_no);
    int cls_b =
        intensity_class(parse_number(f_mu_b, line_no, "mu_b"), source, line_no);
    double m = parse_number(f_m, line_no, "M");
    double e = parse_number(f_e, line_no, "E");
    if (m < 0.0 || e < 0.0)
      fail("tally line " + std::to_string(line_no) +
           ": counts must be nonnegative");
    if (e > m * (1.0 + 1e-9) + 1e-9)
      fail("tally line " + std::to_string(line_no) + ": E exceeds M");
    if (seen[table][cls_a][cls_b])
      fail("tally line " + std::to_string(line_no) + ": duplicate cell");
    seen[table][cls_a][cls_b] = true;
    BasisTally &tally = table == 0 ? result.z : result.x;
    tally.m[cls_a][cls_b] = m;
    tally.e[cls_a][cls_b] = e;
  }
  if (!header_seen) fail("tally file: missing header 'basis,mu_a,mu_b,M,E'");
  result.z.population = population;
  result.x.population = population;
  return result;
}

void write_interval_csv(std::ostream &out,
                        const std::vector<IntervalErrorRow> &rows) {
  out << "# schema_version " << kSchemaVersion << '\n';
  out << "l_bin_lo,l_bin_hi,pairs,errors,rate\n";
  for (const IntervalErrorRow &row : rows)
    out << row.l_lo << ',' << row.l_hi << ',' << row.pairs << ',' << row.errors
        << ',' << format_double(row.rate) << '\n';
}

void write_round_log_csv(std::ostream &out,
                         const std::vector<RoundRecord> &records,
                         const ProtocolParams &protocol) {
  out << "# schema_version " << kSchemaVersion << '\n';
  out << "index,int_a,phase_a,int_b,phase_b,outcome\n";
  const char letters[4] = {'N', 'L', 'R', 'D'};
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RoundRecord &r = records[i];
    out << (i + 1) << ','
        << format_double(protocol.intensity_value(r.class_a)) << ','
        << int(r.phase_a) << ','
        << format_double(protocol.intensity_value(r.class_b)) << ','
        << int(r.phase_b) << ','
        << letters[static_cast<int>(r.outcome) & 3] << '\n';
  }
}

std::vector<std::uint8_t> parse_click_string(std::string_view text) {
  std::vector<std::uint8_t> clicks;
  clicks.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '0') {
      clicks.push_back(0);
    } else if (c == '1') {
      clicks.push_back(1);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      continue;
    } else {
      fail("click string: unexpected character '" + std::string(1, c) +
           "' at position " + std::to_string(i + 1));
    }
  }
  return clicks;
}

JsonObject decoy_report_json(const DecoyReport &report) {
  const EstimationMode &mode = report.bounds.mode;
  JsonObject json;
  json.add("schema_version", kSchemaVersion)
      .add("mode", mode.asymptotic ? "asymptotic" : "finite")
      .add("epsilon", mode.epsilon)
      .add("M11_lower", report.bounds.m11_lower)
      .add("E11_upper", report.bounds.e11_upper)
      .add("q11_lower", report.bounds.q11_lower)
      .add("e11_ph_upper", report.bounds.e11_ph_upper)
      .add("vacuous", report.bounds.vacuous)
      .add("m11_z_total_lower", report.m11_z_total_lower)
      .add("m11_x_lower", report.m11_x_lower)
      .add("e11_x_upper", report.e11_x_upper)
      .add("posterior_mu_mu", report.posterior_mu_mu)
      .add("serfling_gamma", report.serfling_gamma)
      .add("m_z_cell", report.m_z_cell)
      .add("e_z_cell", report.e_z_cell)
      .add("e_z_rate", report.e_z_rate)
      .add("duality_gap_max", report.duality_gap_max)
      .add("k_max_z", report.k_max_z)
      .add("k_max_x", report.k_max_x)
      .add("tail_allowance_z", report.tail_allowance_z)
      .add("tail_allowance_x", report.tail_allowance_x)
      .add("key_bits", report.key_bits);
  return json;
}

}  // namespace mpqkd
