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

#include "mpqkd/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mpqkd {

namespace {

[[noreturn]] void fail(const std::string &message) {
  throw std::invalid_argument(message);
}

std::string_view trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// One key = value assignment with enough position information for error
// messages.
struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

std::string where(std::string_view origin, const Entry &entry) {
  std::ostringstream out;
  out << origin << ':' << entry.line << ": " << entry.section << '.'
      << entry.key;
  return out.str();
}

std::vector<Entry> tokenize(std::string_view text, std::string_view origin) {
  static const std::set<std::string, std::less<>> known_sections = {
      "channel", "protocol", "decoy", "sweep", "output"};
  std::vector<Entry> entries;
  std::set<std::string> seen;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view raw = eol == std::string_view::npos
                               ? text.substr(pos)
                               : text.substr(pos, eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    std::size_t hash = raw.find('#');
    if (hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(std::string(origin) + ':' + std::to_string(line_no) +
             ": unterminated section header '" + std::string(line) + "'");
      std::string_view name = trim(line.substr(1, line.size() - 2));
      if (!known_sections.count(name))
        fail(std::string(origin) + ':' + std::to_string(line_no) +
             ": unknown section '[" + std::string(name) + "]'");
      section = std::string(name);
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(std::string(origin) + ':' + std::to_string(line_no) +
           ": expected 'key = value', got '" + std::string(line) + "'");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty())
      fail(std::string(origin) + ':' + std::to_string(line_no) +
           ": empty key");
    if (section.empty())
      fail(std::string(origin) + ':' + std::to_string(line_no) + ": key '" +
           key + "' appears before any [section] header");
    if (value.empty())
      fail(std::string(origin) + ':' + std::to_string(line_no) + ": key '" +
           section + '.' + key + "' has no value");
    std::string full = section + '.' + key;
    if (!seen.insert(full).second)
      fail(std::string(origin) + ':' + std::to_string(line_no) +
           ": duplicate key '" + full + "'");
    entries.push_back({section, key, value, line_no});
  }
  return entries;
}

double parse_double(const Entry &entry, std::string_view origin) {
  char *end = nullptr;
  double value = std::strtod(entry.value.c_str(), &end);
  if (end != entry.value.c_str() + entry.value.size() || !std::isfinite(value))
    fail(where(origin, entry) + ": expected a finite number, got '" +
         entry.value + "'");
  return value;
}

std::int64_t parse_int(const Entry &entry, std::string_view origin) {
  char *end = nullptr;
  long long value = std::strtoll(entry.value.c_str(), &end, 10);
  if (end != entry.value.c_str() + entry.value.size())
    fail(where(origin, entry) + ": expected an integer, got '" + entry.value +
         "'");
  return value;
}

std::uint64_t parse_uint(const Entry &entry, std::string_view origin) {
  if (!entry.value.empty() && entry.value[0] == '-')
    fail(where(origin, entry) + ": expected a nonnegative integer, got '" +
         entry.value + "'");
  char *end = nullptr;
  unsigned long long value = std::strtoull(entry.value.c_str(), &end, 10);
  if (end != entry.value.c_str() + entry.value.size())
    fail(where(origin, entry) + ": expected an integer, got '" + entry.value +
         "'");
  return value;
}

bool parse_bool(const Entry &entry, std::string_view origin) {
  if (entry.value == "true") return true;
  if (entry.value == "false") return false;
  fail(where(origin, entry) + ": expected true or false, got '" + entry.value +
       "'");
}

std::vector<std::string> split_list(const Entry &entry,
                                    std::string_view origin) {
  std::vector<std::string> items;
  std::string_view rest = entry.value;
  while (true) {
    std::size_t comma = rest.find(',');
    std::string_view item = trim(rest.substr(0, comma));
    if (item.empty())
      fail(where(origin, entry) + ": empty list item in '" + entry.value +
           "'");
    items.emplace_back(item);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return items;
}

std::vector<double> parse_double_list(const Entry &entry,
                                      std::string_view origin) {
  std::vector<double> values;
  for (const std::string &item : split_list(entry, origin)) {
    Entry sub = entry;
    sub.value = item;
    values.push_back(parse_double(sub, origin));
  }
  return values;
}

std::int64_t parse_gap(const Entry &entry, std::string_view origin) {
  if (entry.value == "inf") return kNoGapLimit;
  std::int64_t value = parse_int(entry, origin);
  if (value < 0)
    fail(where(origin, entry) +
         ": pairing interval must be 'inf' or a nonnegative integer");
  return value;
}

std::vector<std::int64_t> parse_gap_list(const Entry &entry,
                                         std::string_view origin) {
  std::vector<std::int64_t> values;
  for (const std::string &item : split_list(entry, origin)) {
    Entry sub = entry;
    sub.value = item;
    values.push_back(parse_gap(sub, origin));
  }
  return values;
}

std::vector<Scheme> parse_schemes(const Entry &entry,
                                  std::string_view origin) {
  std::vector<Scheme> schemes;
  for (const std::string &item : split_list(entry, origin)) {
    Scheme scheme;
    if (!scheme_from_name(item, scheme))
      fail(where(origin, entry) + ": unknown scheme '" + item +
           "' (known: mp, mdi, bb84, pm, sns, plob)");
    schemes.push_back(scheme);
  }
  return schemes;
}

DetectionModel parse_detection(const Entry &entry, std::string_view origin) {
  if (entry.value == "interference") return DetectionModel::Interference;
  if (entry.value == "photon_number") return DetectionModel::PhotonNumber;
  fail(where(origin, entry) +
       ": expected interference or photon_number, got '" + entry.value + "'");
}

void apply_channel(ChannelParams &channel, const Entry &e,
                   std::string_view origin) {
  if (e.key == "fiber_loss_db_per_km")
    channel.fiber_loss_db_per_km = parse_double(e, origin);
  else if (e.key == "total_distance_km")
    channel.total_distance_km = parse_double(e, origin);
  else if (e.key == "detector_efficiency")
    channel.detector_efficiency = parse_double(e, origin);
  else if (e.key == "dark_count_prob")
    channel.dark_count_prob = parse_double(e, origin);
  else if (e.key == "misalignment")
    channel.misalignment = parse_double(e, origin);
  else if (e.key == "error_correction_f")
    channel.error_correction_f = parse_double(e, origin);
  else
    fail(where(origin, e) + ": unknown key");
}

void apply_protocol(ProtocolParams &protocol, const Entry &e,
                    std::string_view origin) {
  if (e.key == "mu")
    protocol.mu = parse_double(e, origin);
  else if (e.key == "nu")
    protocol.nu = parse_double(e, origin);
  else if (e.key == "s_0")
    protocol.s_0 = parse_double(e, origin);
  else if (e.key == "s_nu")
    protocol.s_nu = parse_double(e, origin);
  else if (e.key == "s_mu")
    protocol.s_mu = parse_double(e, origin);
  else if (e.key == "phase_slices")
    protocol.phase_slices = static_cast<int>(parse_int(e, origin));
  else if (e.key == "l")
    protocol.max_gap = parse_gap(e, origin);
  else if (e.key == "rounds")
    protocol.rounds = parse_int(e, origin);
  else if (e.key == "seed")
    protocol.seed = parse_uint(e, origin);
  else if (e.key == "detection")
    protocol.detection = parse_detection(e, origin);
  else if (e.key == "table_one_x_sift")
    protocol.table_one_x_sift = parse_bool(e, origin);
  else
    fail(where(origin, e) + ": unknown key");
}

void apply_decoy(DecoySettings &decoy, const Entry &e,
                 std::string_view origin) {
  if (e.key == "mode") {
    if (e.value == "asymptotic")
      decoy.asymptotic = true;
    else if (e.value == "finite")
      decoy.asymptotic = false;
    else
      fail(where(origin, e) + ": expected asymptotic or finite, got '" +
           e.value + "'");
  } else if (e.key == "epsilon") {
    decoy.epsilon = parse_double(e, origin);
  } else if (e.key == "k_max") {
    decoy.k_max = static_cast<int>(parse_int(e, origin));
  } else {
    fail(where(origin, e) + ": unknown key");
  }
}

void apply_sweep(SweepSettings &sweep, const Entry &e,
                 std::string_view origin) {
  if (e.key == "schemes")
    sweep.schemes = parse_schemes(e, origin);
  else if (e.key == "distances_km")
    sweep.distances_km = parse_double_list(e, origin);
  else if (e.key == "l_values")
    sweep.l_values = parse_gap_list(e, origin);
  else if (e.key == "mu")
    sweep.mu = parse_double(e, origin);
  else if (e.key == "optimize")
    sweep.optimize = parse_bool(e, origin);
  else
    fail(where(origin, e) + ": unknown key");
}

void apply_output(OutputSettings &output, const Entry &e,
                  std::string_view origin) {
  if (e.key == "rates_csv")
    output.rates_csv = e.value;
  else if (e.key == "tally_csv")
    output.tally_csv = e.value;
  else if (e.key == "report_json")
    output.report_json = e.value;
  else if (e.key == "drift_csv")
    output.drift_csv = e.value;
  else
    fail(where(origin, e) + ": unknown key");
}

}  // namespace

EstimationMode DecoySettings::mode() const {
  EstimationMode mode;
  mode.asymptotic = asymptotic;
  mode.epsilon = epsilon;
  return mode;
}

void DecoySettings::validate() const {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    fail("decoy.epsilon must be in (0, 1)");
  mode().validate();
  if (k_max < 0 || k_max > 200)
    fail("decoy.k_max must be in [0, 200], got " + std::to_string(k_max));
}

void SweepSettings::validate() const {
  if (schemes.empty()) fail("sweep.schemes must not be empty");
  if (distances_km.empty()) fail("sweep.distances_km must not be empty");
  for (std::size_t i = 0; i < distances_km.size(); ++i) {
    if (!(distances_km[i] >= 0.0) || !std::isfinite(distances_km[i]))
      fail("sweep.distances_km entries must be finite and nonnegative");
    if (i > 0 && distances_km[i] < distances_km[i - 1])
      fail("sweep.distances_km must be nondecreasing");
  }
  if (l_values.empty()) fail("sweep.l_values must not be empty");
  for (std::int64_t l : l_values)
    if (l < 0) fail("sweep.l_values entries must be nonnegative");
  if (!(mu > 0.0) || !std::isfinite(mu))
    fail("sweep.mu must be positive and finite");
}

void RunConfig::validate() const {
  mpqkd::validate(channel);
  protocol.validate();
  decoy.validate();
  sweep.validate();
}

SweepOptions RunConfig::sweep_options() const {
  SweepOptions options;
  options.schemes = sweep.schemes;
  options.distances_km = sweep.distances_km;
  options.max_gaps = sweep.l_values;
  options.mu = sweep.mu;
  options.optimize = sweep.optimize;
  return options;
}

SourceModel RunConfig::source_model() const {
  return SourceModel::from_protocol(protocol);
}

std::int64_t parse_max_gap(std::string_view text) {
  Entry entry;
  entry.section = "cli";
  entry.key = "l";
  entry.value = std::string(trim(text));
  entry.line = 0;
  return parse_gap(entry, "argument");
}

RunConfig parse_config(std::string_view text, std::string_view origin) {
  RunConfig config;
  for (const Entry &e : tokenize(text, origin)) {
    if (e.section == "channel")
      apply_channel(config.channel, e, origin);
    else if (e.section == "protocol")
      apply_protocol(config.protocol, e, origin);
    else if (e.section == "decoy")
      apply_decoy(config.decoy, e, origin);
    else if (e.section == "sweep")
      apply_sweep(config.sweep, e, origin);
    else
      apply_output(config.output, e, origin);
  }
  return config;
}

RunConfig load_config(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) fail("cannot read config file '" + path + "'");
  return parse_config(buffer.str(), path);
}

}  // namespace mpqkd
