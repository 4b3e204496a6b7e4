// cogcap: effective capacity / primary success-rate experiments for the
// DPL and TPL secondary access schemes.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cogcap/chain.hpp"
#include "cogcap/ec.hpp"
#include "cogcap/experiment.hpp"
#include "cogcap/outage.hpp"
#include "cogcap/params.hpp"
#include "cogcap/sim.hpp"
#include "cogcap/specfun.hpp"

using namespace cogcap;

namespace {

SystemParams load_or_default(const std::string& config) {
  return config.empty() ? default_params() : load_config(config);
}

SensingProbs sensing_for(const ValidatedParams& params, bool perfect) {
  if (perfect) return perfect_sensing_override(params);
  const auto samples = detector_samples(params);
  if (samples.rounded)
    std::cerr << "warning: N*B is not an integer, using " << samples.count
              << " detector samples\n";
  return sensing_probs(params);
}

RateRange parse_range(const std::string& text) {
  RateRange r;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> r.min >> c1 >> r.max >> c2 >> r.step) || c1 != ':' || c2 != ':' || !in.eof())
    throw std::invalid_argument("rate range must look like MIN:MAX:STEP, got '" + text + "'");
  return r;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Effective capacity of a cognitive secondary link with erroneous primary feedback"};
  app.require_subcommand(1);

  // list / describe
  auto* list_cmd = app.add_subcommand("list", "List experiment presets");
  auto* describe_cmd = app.add_subcommand("describe", "Describe an experiment preset");
  std::string describe_name;
  describe_cmd->add_option("preset", describe_name, "Preset name")->required();

  // run
  auto* run_cmd = app.add_subcommand("run", "Run a preset or custom sweep and write CSV/SVG");
  std::string config, preset, sweep, out_dir = "results", schemes_arg, sensing_arg;
  std::uint64_t seed = 0x5eed, slots = 10'000, trajectories = 100;
  bool no_sim = false, symbol_sensing = false;
  run_cmd->add_option("--config", config, "Parameter file (JSON); built-in defaults if omitted");
  run_cmd->add_option("--preset", preset, "Preset name (see `list`)");
  run_cmd->add_option("--sweep", sweep, "Sweep override VAR:START:STOP:COUNT, VAR in p0|epsilon|theta|lambda");
  run_cmd->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
  run_cmd->add_option("--seed", seed, "Simulation seed")->capture_default_str();
  run_cmd->add_option("--slots", slots, "Simulated slots per trajectory")->capture_default_str();
  run_cmd->add_option("--trajectories", trajectories, "Simulated trajectories per sweep point")
      ->capture_default_str();
  run_cmd->add_option("--schemes", schemes_arg, "Comma list of schemes (DPL,TPL)");
  run_cmd->add_option("--sensing", sensing_arg, "Comma list of sensing modes (model,perfect)");
  run_cmd->add_flag("--no-sim", no_sim, "Analytical columns only");
  run_cmd->add_flag("--symbol-sensing", symbol_sensing,
                    "Simulate the energy detector sample by sample instead of Bernoulli P_f/P_d");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Analytical EC and PU success for one config");
  std::string analyze_config, analyze_scheme = "TPL", chain_csv;
  bool analyze_perfect = false, analyze_boundary = false;
  analyze_cmd->add_option("--config", analyze_config, "Parameter file (JSON)");
  analyze_cmd->add_option("--scheme", analyze_scheme, "DPL or TPL")->capture_default_str();
  analyze_cmd->add_flag("--perfect-sensing", analyze_perfect, "Use P_f = 0, P_d = 1");
  analyze_cmd->add_flag("--allow-p0-equal-p1", analyze_boundary, "Accept P0 = P1");
  analyze_cmd->add_option("--dump-chain", chain_csv, "Write R, pi and beta as CSV");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo run for one config");
  std::string sim_config, sim_scheme = "TPL", sim_mode = "protocol", sim_csv;
  std::uint64_t sim_seed = 0x5eed, sim_slots = 1'000'000, sim_traj = 1;
  bool sim_perfect = false, sim_symbol = false;
  sim_cmd->add_option("--config", sim_config, "Parameter file (JSON)");
  sim_cmd->add_option("--scheme", sim_scheme, "DPL or TPL")->capture_default_str();
  sim_cmd->add_option("--mode", sim_mode, "chain or protocol")->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed, "Seed")->capture_default_str();
  sim_cmd->add_option("--slots", sim_slots, "Slots per trajectory")->capture_default_str();
  sim_cmd->add_option("--trajectories", sim_traj, "Trajectories")->capture_default_str();
  sim_cmd->add_flag("--perfect-sensing", sim_perfect, "Use P_f = 0, P_d = 1");
  sim_cmd->add_flag("--symbol-sensing", sim_symbol, "Sample-level energy detection (protocol mode)");
  sim_cmd->add_option("--csv", sim_csv, "Write the report as CSV");

  // optimize
  auto* opt_cmd = app.add_subcommand("optimize", "Grid search of (r0, r1, r2) maximizing EC");
  std::string opt_config, opt_scheme = "TPL", opt_r0, opt_r1, opt_r2, opt_surface;
  opt_cmd->add_option("--config", opt_config, "Parameter file (JSON)");
  opt_cmd->add_option("--scheme", opt_scheme, "DPL or TPL")->capture_default_str();
  opt_cmd->add_option("--r0", opt_r0, "MIN:MAX:STEP in bits/s")->required();
  opt_cmd->add_option("--r1", opt_r1, "MIN:MAX:STEP in bits/s")->required();
  opt_cmd->add_option("--r2", opt_r2, "MIN:MAX:STEP in bits/s")->required();
  opt_cmd->add_option("--surface", opt_surface, "Write every grid point as CSV");

  // write-config
  auto* write_cmd = app.add_subcommand("write-config", "Write the default parameter file");
  std::string write_path;
  write_cmd->add_option("path", write_path, "Destination")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list_cmd) {
      for (const auto& name : list_presets()) std::cout << name << "\n";
    } else if (*describe_cmd) {
      std::cout << describe_preset(describe_name);
    } else if (*write_cmd) {
      save_config(default_params(), write_path);
    } else if (*run_cmd) {
      const SystemParams base = load_or_default(config);
      validate(base);
      Experiment exp;
      if (!preset.empty()) {
        exp = make_preset(preset, base);
      } else {
        if (sweep.empty()) throw std::invalid_argument("run needs --preset or --sweep");
        exp.base = base;
        exp.title = "custom sweep";
      }
      if (!sweep.empty()) {
        auto [var, grid] = parse_sweep(sweep);
        exp.sweep = var;
        exp.grid = std::move(grid);
        if (preset.empty()) exp.name = "sweep_" + std::string(to_string(var));
      }
      if (!schemes_arg.empty()) {
        exp.schemes.clear();
        for (const auto& s : split_list(schemes_arg)) exp.schemes.push_back(parse_scheme(s));
      }
      if (!sensing_arg.empty()) {
        exp.sensing.clear();
        for (const auto& s : split_list(sensing_arg)) exp.sensing.push_back(parse_sensing_mode(s));
      }
      exp.simulate = !no_sim;
      exp.sim.seed = seed;
      exp.sim.slots = slots;
      exp.sim.trajectories = trajectories;
      exp.sim.sensing_model = symbol_sensing ? SensingModel::symbol_level : SensingModel::bernoulli;
      exp.out_dir = out_dir;
      const auto outs = run_experiment(exp);
      std::cout << "wrote " << outs.csv.string() << "\n"
                << "wrote " << outs.plot.string() << "\n"
                << "wrote " << outs.report.string() << "\n";
    } else if (*analyze_cmd) {
      const auto params = validate(load_or_default(analyze_config),
                                   {.allow_p0_equal_p1 = analyze_boundary});
      const Scheme scheme = parse_scheme(analyze_scheme);
      const auto probs = sensing_for(params, analyze_perfect);
      const auto chain = build_chain(params, scheme, probs);
      const auto steady = steady_state(chain);
      const auto ec = effective_capacity(params, chain, params->qos_exponent);
      fmt::print("scheme: {}\n", to_string(scheme));
      fmt::print("P_f: {:.12g}  P_d: {:.12g}\n", probs.p_false_alarm, probs.p_detection);
      const auto outage = outage_triple(params);
      fmt::print("PU outage by SU level: P0 {:.12g}  P1 {:.12g}  P2 {:.12g}\n", outage.pr_nack[0],
                 outage.pr_nack[1], outage.pr_nack[2]);
      fmt::print("pi:");
      for (int i = 0; i < kStateCount; ++i) fmt::print(" {:.6g}", steady.pi(i));
      fmt::print("\nspectral radius: {:.15g}\n", ec.spectral_radius);
      fmt::print("EC: {:.12g} bits/slot, {:.12g} bits/s (theta = {})\n", ec.ec_bits_per_slot,
                 ec.ec_bits_per_sec, ec.theta);
      if (steady.pu_active_mass > 0.0)
        fmt::print("PU success rate: {:.12g}\n", pu_success_rate(params, chain, steady));
      else
        fmt::print("PU success rate: undefined (PU never active)\n");
      if (!chain_csv.empty()) {
        std::ofstream f(chain_csv);
        if (!f) throw std::runtime_error(chain_csv + ": cannot open for writing");
        write_chain_csv(f, chain, steady);
      }
    } else if (*sim_cmd) {
      const auto params = validate(load_or_default(sim_config));
      const Scheme scheme = parse_scheme(sim_scheme);
      const auto probs = sensing_for(params, sim_perfect);
      SimConfig cfg;
      cfg.seed = sim_seed;
      cfg.slots = sim_slots;
      cfg.trajectories = sim_traj;
      cfg.sensing_model = sim_symbol ? SensingModel::symbol_level : SensingModel::bernoulli;
      SimReport report;
      const auto chain = build_chain(params, scheme, probs);
      if (sim_mode == "chain") {
        cfg.mode = SimMode::chain_sampling;
        report = estimate_ec(chain, params, cfg);
      } else if (sim_mode == "protocol") {
        cfg.mode = SimMode::protocol;
        report = simulate_protocol(params, scheme, probs, cfg);
      } else {
        throw std::invalid_argument("--mode must be chain or protocol");
      }
      std::cout << report_summary(report);
      const auto ec = effective_capacity(params, chain, params->qos_exponent);
      fmt::print("analytical EC: {:.12g} bits/slot\n", ec.ec_bits_per_slot);
      if (report.mode == SimMode::protocol && report.success_per_transmission.defined())
        fmt::print("analytical PU success: {:.12g} (fidelity gap {:.3e})\n",
                   pu_success_rate(params, chain, steady_state(chain)),
                   pu_success_rate(params, chain, steady_state(chain)) -
                       report.success_per_transmission.value);
      if (!sim_csv.empty()) {
        std::ofstream f(sim_csv);
        if (!f) throw std::runtime_error(sim_csv + ": cannot open for writing");
        write_report_csv(f, report);
      }
    } else if (*opt_cmd) {
      const auto params = validate(load_or_default(opt_config));
      const Scheme scheme = parse_scheme(opt_scheme);
      const auto probs = sensing_for(params, false);
      const RateGrid grid{parse_range(opt_r0), parse_range(opt_r1), parse_range(opt_r2)};
      const auto best = optimize_rates(params, scheme, probs, grid, !opt_surface.empty());
      fmt::print("best rates: r0 {:.12g}  r1 {:.12g}  r2 {:.12g}\n", best.best.rates_used[0],
                 best.best.rates_used[1], best.best.rates_used[2]);
      fmt::print("EC: {:.12g} bits/slot, {:.12g} bits/s\n", best.best.ec_bits_per_slot,
                 best.best.ec_bits_per_sec);
      if (!opt_surface.empty()) {
        std::ofstream f(opt_surface);
        if (!f) throw std::runtime_error(opt_surface + ": cannot open for writing");
        fmt::print(f, "r0,r1,r2,ec_bits_per_slot\n");
        for (const auto& pt : best.surface)
          fmt::print(f, "{:.12g},{:.12g},{:.12g},{:.12g}\n", pt.rates[0], pt.rates[1], pt.rates[2],
                     pt.ec_bits_per_slot);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_FAILURE;
  }
  return EXIT_SUCCESS;
}
