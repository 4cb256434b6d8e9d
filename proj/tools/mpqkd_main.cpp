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

// Command-line surface. Exit codes: 0 success, 1 validation error (bad
// flags, malformed config or input files), 2 estimation failure (infeasible
// estimation programs, too few clicks to fit, identity checks out of
// tolerance).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mpqkd/channel.hpp"
#include "mpqkd/config.hpp"
#include "mpqkd/decoy.hpp"
#include "mpqkd/fockcheck.hpp"
#include "mpqkd/io.hpp"
#include "mpqkd/keyrate.hpp"
#include "mpqkd/montecarlo.hpp"
#include "mpqkd/pairing.hpp"
#include "mpqkd/phasedrift.hpp"

namespace {

using namespace mpqkd;

constexpr double kTwoPi = 6.283185307179586476925286766559;

void write_file(const std::string &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
}

RunConfig load_or_default(const std::string &path) {
  return path.empty() ? RunConfig{} : load_config(path);
}

// ---------------------------------------------------------------- sweep --

struct SweepArgs {
  std::string config;
  std::string out;
};

void run_sweep(const SweepArgs &args) {
  RunConfig config = load_or_default(args.config);
  config.validate();
  std::vector<SweepRow> rows = sweep(config.sweep_options(), config.channel);
  std::ostringstream body;
  write_sweep_csv(body, rows);
  std::string path = args.out.empty() ? config.output.rates_csv : args.out;
  write_file(path, body.str());
  std::cout << "wrote " << rows.size() << " rows to " << path << '\n';
}

// ----------------------------------------------------------------- pair --

struct PairArgs {
  std::string l;
};

void run_pair(const PairArgs &args) {
  std::int64_t max_gap = parse_max_gap(args.l);
  std::ostringstream input;
  input << std::cin.rdbuf();
  PairList pairs = pair_adjacent(parse_click_string(input.str()), max_gap);
  for (const auto &[i, j] : pairs) std::cout << i << ',' << j << '\n';
}

// ------------------------------------------------------------- simulate --

struct SimulateArgs {
  std::string config;
  std::string out;
  std::string json;
  std::string round_log;
  std::int64_t rounds = -1;
  std::int64_t seed = -1;
  double distance_km = -1.0;
  bool expected = false;
};

void run_simulate(const SimulateArgs &args) {
  RunConfig config = load_or_default(args.config);
  if (args.rounds >= 0) config.protocol.rounds = args.rounds;
  if (args.seed >= 0) config.protocol.seed = static_cast<std::uint64_t>(args.seed);
  if (args.distance_km >= 0.0) config.channel.total_distance_km = args.distance_km;
  config.validate();
  if (config.protocol.rounds <= 0)
    throw std::invalid_argument("simulate: rounds must be positive");

  const SourceModel source = config.source_model();
  std::string tally_path = args.out.empty() ? config.output.tally_csv : args.out;

  if (args.expected) {
    // Closed-form expectations instead of sampling: the tally the Monte
    // Carlo run converges to, useful as a deterministic estimation input.
    double p_click = expected_click_prob(source, config.channel);
    double r_pair = pairing_rate_analytic(p_click, config.protocol.max_gap);
    double n_pairs = static_cast<double>(config.protocol.rounds) * r_pair;
    BasisTally z = expected_basis_tally(PairBasis::Z, source, config.channel,
                                        config.protocol.phase_slices, n_pairs);
    BasisTally x = expected_basis_tally(PairBasis::X, source, config.channel,
                                        config.protocol.phase_slices, n_pairs);
    std::ostringstream body;
    write_tally_csv(body, z, x, source);
    write_file(tally_path, body.str());
    if (!args.json.empty()) {
      JsonObject report;
      report.add("schema_version", kSchemaVersion)
          .add("mode", "expected")
          .add("rounds", config.protocol.rounds)
          .add("distance_km", config.channel.total_distance_km)
          .add("click_prob", p_click)
          .add("pairing_rate", r_pair)
          .add("pairs_expected", n_pairs);
      write_file(args.json, report.str() + "\n");
    }
    std::cout << "wrote expected tally to " << tally_path << '\n';
    return;
  }

  std::vector<RoundRecord> records = simulate_rounds(config.protocol, config.channel);
  std::vector<std::uint8_t> clicks(records.size(), 0);
  std::int64_t clicked = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    clicks[i] = records[i].clicked() ? 1 : 0;
    clicked += clicks[i];
  }
  PairList pairs = pair_adjacent(clicks, config.protocol.max_gap);
  std::vector<SiftedPair> sifted =
      sift_and_map(records, pairs, config.protocol, config.channel);
  TallyTable table = tally(sifted);

  std::ostringstream body;
  write_tally_csv(body, basis_tally(table, PairBasis::Z),
                  basis_tally(table, PairBasis::X), source);
  write_file(tally_path, body.str());

  if (!args.round_log.empty()) {
    std::ostringstream log;
    write_round_log_csv(log, records, config.protocol);
    write_file(args.round_log, log.str());
  }

  if (!args.json.empty()) {
    const TallyCell &cell = table.z[2][2];
    JsonObject report;
    report.add("schema_version", kSchemaVersion)
        .add("mode", "simulated")
        .add("detection", config.protocol.detection == DetectionModel::Interference
                              ? "interference"
                              : "photon_number")
        .add("rounds", config.protocol.rounds)
        .add("seed", config.protocol.seed)
        .add("distance_km", config.channel.total_distance_km)
        .add("clicked_rounds", clicked)
        .add("click_fraction",
             static_cast<double>(clicked) / static_cast<double>(records.size()))
        .add("pairs", table.pairs_total)
        .add("pairs_discarded", table.pairs_discarded)
        .add("z_pairs", table.z_clicks())
        .add("x_pairs", table.x_clicks())
        .add("z_mu_mu_m", cell.clicks)
        .add("z_mu_mu_e", cell.errors)
        .add("z_mu_mu_error_rate",
             cell.clicks > 0 ? static_cast<double>(cell.errors) /
                                   static_cast<double>(cell.clicks)
                             : 0.0);
    write_file(args.json, report.str() + "\n");
  }
  std::cout << "wrote tally (" << table.pairs_total << " pairs) to "
            << tally_path << '\n';
}

// ---------------------------------------------------------------- decoy --

struct DecoyArgs {
  std::string tally;
  std::string config;
  std::string mode;
  std::string out;
  double epsilon = -1.0;
};

void run_decoy(const DecoyArgs &args) {
  RunConfig config = load_or_default(args.config);
  if (!args.mode.empty()) {
    if (args.mode == "asymptotic")
      config.decoy.asymptotic = true;
    else if (args.mode == "finite")
      config.decoy.asymptotic = false;
    else
      throw std::invalid_argument(
          "--mode: expected asymptotic or finite, got '" + args.mode + "'");
  }
  if (args.epsilon > 0.0) config.decoy.epsilon = args.epsilon;
  config.validate();

  SourceModel source = config.source_model();
  std::ifstream in(args.tally, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open tally file '" + args.tally + "'");
  TallyCsv tallies = read_tally_csv(in, source);

  DecoyReport report =
      run_decoy_pipeline(tallies.z, tallies.x, source, config.decoy.mode(),
                         config.channel.error_correction_f);
  std::string text = decoy_report_json(report).str() + "\n";
  if (args.out.empty())
    std::cout << text;
  else
    write_file(args.out, text);
}

// ------------------------------------------------------------- optimize --

struct OptimizeArgs {
  std::string config;
  std::string scheme = "mp";
  std::string l;
  std::string out;
  double distance_km = -1.0;
};

void run_optimize(const OptimizeArgs &args) {
  RunConfig config = load_or_default(args.config);
  if (args.distance_km >= 0.0) config.channel.total_distance_km = args.distance_km;
  config.validate();
  Scheme scheme;
  if (!scheme_from_name(args.scheme, scheme))
    throw std::invalid_argument("--scheme: unknown scheme '" + args.scheme +
                                "' (known: mp, mdi, bb84, pm, sns, plob)");
  std::int64_t max_gap =
      args.l.empty() ? config.protocol.max_gap : parse_max_gap(args.l);
  OptimizeResult result = optimize_intensity(scheme, max_gap, config.channel);
  JsonObject json;
  json.add("schema_version", kSchemaVersion)
      .add("scheme", scheme_name(scheme))
      .add("l", scheme == Scheme::MP && max_gap == kNoGapLimit
                    ? std::string("inf")
                    : std::to_string(max_gap))
      .add("distance_km", config.channel.total_distance_km)
      .add("found", result.found)
      .add("mu_star", result.mu_star)
      .add("p_z0_star", result.p_z0_star)
      .add("rate_star", result.rate_star);
  std::string text = json.str() + "\n";
  if (args.out.empty())
    std::cout << text;
  else
    write_file(args.out, text);
}

// ------------------------------------------------------------ verify-fock --

struct FockArgs {
  double mu = 0.5;
  int slices = 16;
  int trunc = 0;
  std::string out;
};

// Distance between the residue-weight distribution and the Poisson photon
// distribution: the residues fold every level k + m d onto k, so the gap is
// the Poisson mass above d redistributed.
double tv_to_poisson(double mu, int d) {
  std::vector<double> poisson(static_cast<std::size_t>(d), 0.0);
  double term = std::exp(-mu);
  double tail = 1.0;
  for (int k = 0; k < d; ++k) {
    poisson[static_cast<std::size_t>(k)] = term;
    tail -= term;
    term *= mu / (k + 1);
  }
  double tv = std::max(0.0, tail);
  for (int k = 0; k < d; ++k) {
    PseudoFockSpec spec{mu, d, k};
    tv += std::fabs(pseudo_poisson(spec) - poisson[static_cast<std::size_t>(k)]);
  }
  return 0.5 * tv;
}

void run_verify_fock(const FockArgs &args) {
  PseudoFockSpec spec{args.mu, args.slices, 0};
  spec.validate();
  int n_trunc = args.trunc > 0 ? args.trunc
                               : default_truncation(2.0 * args.mu) + 10;

  double weight_sum = 0.0;
  for (int k = 0; k < args.slices; ++k)
    weight_sum += pseudo_poisson({args.mu, args.slices, k});
  double norm_dev = std::fabs(weight_sum - 1.0);
  double tv = tv_to_poisson(args.mu, args.slices);

  SingleModeReport single =
      verify_single_mode_decomposition(args.mu, args.slices, n_trunc);
  TwoModeReport two =
      verify_two_mode_decomposition(args.mu, args.slices, n_trunc);

  std::vector<int> sweep_d = {4, 8, 16};
  if (args.slices > 1 &&
      std::find(sweep_d.begin(), sweep_d.end(), args.slices) == sweep_d.end())
    sweep_d.push_back(args.slices);
  std::vector<JsonObject> sweep_json;
  for (int d : sweep_d) {
    TwoModeReport r = verify_two_mode_decomposition(args.mu, d, n_trunc);
    JsonObject item;
    item.add("slices", d).add("qubit_infidelity", 1.0 - r.qubit_fidelity_min);
    sweep_json.push_back(item);
  }

  std::string failure;
  auto gate = [&failure](const char *name, double value, double limit) {
    if (!(value <= limit) && failure.empty()) {
      failure = std::string(name) + " = " + format_double(value) +
                " exceeds " + format_double(limit);
    }
  };
  gate("weight_normalization_deviation", norm_dev, 1e-12);
  gate("single_mode.max_deviation", single.max_deviation, 1e-9);
  gate("single_mode.gram_deviation", single.gram_deviation, 1e-9);
  gate("two_mode.max_deviation", two.max_deviation, 1e-9);
  gate("two_mode.cross_overlap_max", two.cross_overlap_max, 1e-9);
  gate("two_mode.bs_norm_deviation", two.bs_norm_deviation, 1e-9);
  // The residue weights approach the Poisson levels only once the slice
  // count clears the distribution's support, so the distance gate applies
  // from sixteen slices up.
  if (args.slices >= 16) gate("tv_distance_to_poisson", tv, 1e-6);

  JsonObject single_json;
  single_json.add("max_deviation", single.max_deviation)
      .add("gram_deviation", single.gram_deviation)
      .add("tail_mass", single.tail_mass);
  JsonObject two_json;
  two_json.add("max_deviation", two.max_deviation)
      .add("cross_overlap_max", two.cross_overlap_max)
      .add("bs_norm_deviation", two.bs_norm_deviation)
      .add("qubit_fidelity_min", two.qubit_fidelity_min)
      .add("tail_mass", two.tail_mass);
  JsonObject json;
  json.add("schema_version", kSchemaVersion)
      .add("mu", args.mu)
      .add("slices", args.slices)
      .add("n_trunc", n_trunc)
      .add("weight_normalization_deviation", norm_dev)
      .add("tv_distance_to_poisson", tv)
      .add("single_mode", single_json)
      .add("two_mode", two_json)
      .add("qubit_infidelity_sweep", sweep_json)
      .add("pass", failure.empty());
  std::string text = json.str() + "\n";
  if (args.out.empty())
    std::cout << text;
  else
    write_file(args.out, text);
  if (!failure.empty())
    throw std::runtime_error("fock verification failed: " + failure);
}

// ------------------------------------------------------------ phase-drift --

struct DriftArgs {
  double omega0 = kTwoPi * 30e6;
  double slope = 0.0;
  double noise = 0.0;
  double rep_rate = 625e6;
  double duration = 1e-4;
  double intensity = 0.05;
  double dark = 0.0;
  double slice = -1.0;
  double omega_max = -1.0;
  std::int64_t seed = 1;
  std::int64_t l_max = 10000;
  int l_bins = 10;
  bool truth = false;
  std::string out;
  std::string config;
};

void run_phase_drift(const DriftArgs &args) {
  DriftModel model;
  model.omega0 = args.omega0;
  model.slope = args.slope;
  model.slow_noise_std = args.noise;
  model.rep_rate = args.rep_rate;
  model.duration = args.duration;
  model.validate();
  if (args.intensity < 0.0 || !std::isfinite(args.intensity))
    throw std::invalid_argument("--intensity must be nonnegative");
  if (args.l_max < 1) throw std::invalid_argument("--l-max must be positive");
  if (args.l_bins < 1) throw std::invalid_argument("--l-bins must be positive");
  double slice = args.slice > 0.0 ? args.slice : kTwoPi / 32.0;

  std::vector<InterferenceRecord> records = simulate_reference_clicks(
      model, args.intensity, args.dark, static_cast<std::uint64_t>(args.seed));

  DriftModel fitted = model;
  JsonObject json;
  json.add("schema_version", kSchemaVersion)
      .add("pulses", static_cast<std::int64_t>(
                         std::llround(model.duration * model.rep_rate)))
      .add("records", static_cast<std::int64_t>(records.size()));
  if (args.truth) {
    json.add("scored_with", "true model");
  } else {
    DriftEstimatorOptions options;
    options.omega_max = args.omega_max;
    DriftEstimate estimate = estimate_drift(records, model.rep_rate, options);
    fitted.slope = estimate.slope;
    fitted.omega0 = estimate.omega0;
    fitted.slow_noise_std = 0.0;
    JsonObject fit;
    fit.add("omega0", estimate.omega0)
        .add("slope", estimate.slope)
        .add("residual", estimate.residual)
        .add("ambiguous", estimate.ambiguous)
        .add("clicks_used", estimate.clicks_used);
    json.add("scored_with", "fitted model").add("estimate", fit);
  }

  std::vector<std::int64_t> edges;
  std::int64_t step =
      std::max<std::int64_t>(1, args.l_max / std::max(1, args.l_bins));
  for (std::int64_t edge = 1; edge <= args.l_max; edge += step)
    edges.push_back(edge);
  edges.push_back(args.l_max + 1);
  std::vector<IntervalErrorRow> rows =
      error_vs_interval(records, fitted, slice, edges);

  RunConfig config = load_or_default(args.config);
  std::string path = args.out.empty() ? config.output.drift_csv : args.out;
  std::ostringstream body;
  write_interval_csv(body, rows);
  write_file(path, body.str());
  json.add("csv", path);
  std::cout << json.str() << '\n';
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"desk-scale laboratory for mode-paired quantum key distribution"};
  app.require_subcommand(1);

  SweepArgs sweep_args;
  CLI::App *cmd_sweep =
      app.add_subcommand("sweep", "rate-versus-distance table for the configured schemes");
  cmd_sweep->add_option("--config", sweep_args.config, "config file");
  cmd_sweep->add_option("--out", sweep_args.out, "output CSV path");

  PairArgs pair_args;
  CLI::App *cmd_pair =
      app.add_subcommand("pair", "pair a 0/1 click string from stdin");
  cmd_pair->add_option("--l", pair_args.l, "pairing interval (integer or inf)")
      ->required();

  SimulateArgs sim_args;
  CLI::App *cmd_sim =
      app.add_subcommand("simulate", "Monte Carlo protocol run producing a tally");
  cmd_sim->add_option("--config", sim_args.config, "config file");
  cmd_sim->add_option("--out", sim_args.out, "tally CSV path");
  cmd_sim->add_option("--json", sim_args.json, "summary JSON path");
  cmd_sim->add_option("--round-log", sim_args.round_log, "per-round CSV dump path");
  cmd_sim->add_option("--rounds", sim_args.rounds, "override round count");
  cmd_sim->add_option("--seed", sim_args.seed, "override RNG seed");
  cmd_sim->add_option("--distance-km", sim_args.distance_km, "override distance");
  cmd_sim->add_flag("--expected", sim_args.expected,
                    "write the closed-form expected tally instead of sampling");

  DecoyArgs decoy_args;
  CLI::App *cmd_decoy =
      app.add_subcommand("decoy", "single-photon-pair bounds from a tally file");
  cmd_decoy->add_option("--tally", decoy_args.tally, "tally CSV path")->required();
  cmd_decoy->add_option("--config", decoy_args.config, "config file");
  cmd_decoy->add_option("--mode", decoy_args.mode, "asymptotic or finite");
  cmd_decoy->add_option("--epsilon", decoy_args.epsilon, "finite-mode failure probability");
  cmd_decoy->add_option("--out", decoy_args.out, "report JSON path (default stdout)");

  OptimizeArgs opt_args;
  CLI::App *cmd_opt =
      app.add_subcommand("optimize", "intensity search for one scheme");
  cmd_opt->add_option("--config", opt_args.config, "config file");
  cmd_opt->add_option("--scheme", opt_args.scheme, "mp, mdi, bb84, pm or sns");
  cmd_opt->add_option("--l", opt_args.l, "pairing interval (integer or inf)");
  cmd_opt->add_option("--distance-km", opt_args.distance_km, "override distance");
  cmd_opt->add_option("--out", opt_args.out, "result JSON path (default stdout)");

  FockArgs fock_args;
  CLI::App *cmd_fock =
      app.add_subcommand("verify-fock", "check the discrete-randomization identities");
  cmd_fock->add_option("--mu", fock_args.mu, "intensity");
  cmd_fock->add_option("--slices", fock_args.slices, "phase slice count D");
  cmd_fock->add_option("--trunc", fock_args.trunc, "photon-number truncation");
  cmd_fock->add_option("--out", fock_args.out, "report JSON path (default stdout)");

  DriftArgs drift_args;
  CLI::App *cmd_drift =
      app.add_subcommand("phase-drift", "reference-pulse drift fit and interval error scan");
  cmd_drift->add_option("--omega0", drift_args.omega0, "beat frequency, rad/s");
  cmd_drift->add_option("--slope", drift_args.slope, "chirp, rad/s^2");
  cmd_drift->add_option("--noise", drift_args.noise, "slow phase noise, rad/pulse");
  cmd_drift->add_option("--rep-rate", drift_args.rep_rate, "pulse rate, Hz");
  cmd_drift->add_option("--duration", drift_args.duration, "run length, s");
  cmd_drift->add_option("--intensity", drift_args.intensity, "reference intensity at the node");
  cmd_drift->add_option("--dark", drift_args.dark, "dark count probability");
  cmd_drift->add_option("--slice", drift_args.slice, "phase slice width, rad");
  cmd_drift->add_option("--omega-max", drift_args.omega_max, "prior bound on omega0");
  cmd_drift->add_option("--seed", drift_args.seed, "RNG seed");
  cmd_drift->add_option("--l-max", drift_args.l_max, "largest pairing interval scanned");
  cmd_drift->add_option("--l-bins", drift_args.l_bins, "interval bin count");
  cmd_drift->add_flag("--truth", drift_args.truth,
                      "score with the true model instead of fitting");
  cmd_drift->add_option("--out", drift_args.out, "interval CSV path");
  cmd_drift->add_option("--config", drift_args.config, "config file (for output paths)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 1;
  }

  try {
    if (cmd_sweep->parsed()) run_sweep(sweep_args);
    else if (cmd_pair->parsed()) run_pair(pair_args);
    else if (cmd_sim->parsed()) run_simulate(sim_args);
    else if (cmd_decoy->parsed()) run_decoy(decoy_args);
    else if (cmd_opt->parsed()) run_optimize(opt_args);
    else if (cmd_fock->parsed()) run_verify_fock(fock_args);
    else if (cmd_drift->parsed()) run_phase_drift(drift_args);
    return 0;
  } catch (const std::logic_error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::runtime_error &e) {
    std::cerr << "estimation error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
