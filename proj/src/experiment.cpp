#include "cogcap/experiment.hpp"

#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cogcap/chain.hpp"
#include "cogcap/ec.hpp"
#include "cogcap/plot.hpp"
#include "cogcap/rng.hpp"
#include "cogcap/specfun.hpp"

namespace cogcap {

namespace {

constexpr int kP0GridPoints = 21;

struct Preset {
  std::string_view name;
  std::string_view title;
  std::string_view deltas;
  double feedback_miss_prob;
  std::vector<SensingMode> sensing;
  Metric metric;
};

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = {
      {"fig2", "Secondary user EC, error-free feedback access",
       "feedback_miss_prob = 0; r0 = r1; sweep P0/B over 21 points in [0, P1/B]; DPL and TPL; "
       "energy-detector sensing",
       0.0, {SensingMode::model}, Metric::effective_capacity},
      {"fig3", "PU success rate, error-free feedback access",
       "feedback_miss_prob = 0; r0 = r1; sweep P0/B over 21 points in [0, P1/B]; DPL and TPL; "
       "energy-detector and perfect sensing",
       0.0, {SensingMode::model, SensingMode::perfect}, Metric::success_rate},
      {"fig4", "PU success rate, erroneous feedback access",
       "feedback_miss_prob = 0.3; r0 = r1; sweep P0/B over 21 points in [0, P1/B]; DPL and TPL; "
       "energy-detector and perfect sensing",
       0.3, {SensingMode::model, SensingMode::perfect}, Metric::success_rate},
      {"fig5", "Secondary user EC, erroneous feedback access",
       "feedback_miss_prob = 0.3; r0 = r1; sweep P0/B over 21 points in [0, P1/B]; DPL and TPL; "
       "energy-detector sensing",
       0.3, {SensingMode::model}, Metric::effective_capacity},
  };
  return all;
}

const Preset& find_preset(std::string_view name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  std::string known;
  for (const auto& p : presets()) known += (known.empty() ? "" : ", ") + std::string(p.name);
  throw std::invalid_argument("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("cannot parse " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

std::string num(double v) { return fmt::format("{:.12g}", v); }

std::string_view metric_label(Metric m) {
  return m == Metric::effective_capacity ? "EC (bits/s)" : "PU success rate";
}

std::string sweep_label(SweepVariable v) {
  switch (v) {
    case SweepVariable::p0: return "P0/B (W/Hz)";
    case SweepVariable::epsilon: return "feedback miss probability";
    case SweepVariable::theta: return "QoS exponent theta (1/bit)";
    case SweepVariable::lambda: return "detector threshold";
  }
  return "";
}

}  // namespace

std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::p0: return "p0";
    case SweepVariable::epsilon: return "epsilon";
    case SweepVariable::theta: return "theta";
    case SweepVariable::lambda: return "lambda";
  }
  return "?";
}

std::string_view to_string(SensingMode m) { return m == SensingMode::model ? "model" : "perfect"; }

SweepVariable parse_sweep_variable(std::string_view name) {
  if (name == "p0" || name == "P0") return SweepVariable::p0;
  if (name == "epsilon" || name == "eps") return SweepVariable::epsilon;
  if (name == "theta") return SweepVariable::theta;
  if (name == "lambda") return SweepVariable::lambda;
  throw std::invalid_argument("unknown sweep variable '" + std::string(name) +
                              "' (expected p0, epsilon, theta or lambda)");
}

SensingMode parse_sensing_mode(std::string_view name) {
  if (name == "model") return SensingMode::model;
  if (name == "perfect") return SensingMode::perfect;
  throw std::invalid_argument("unknown sensing mode '" + std::string(name) +
                              "' (expected model or perfect)");
}

std::vector<double> linear_grid(double start, double stop, int count) {
  if (count < 1) throw std::invalid_argument("grid needs at least one point");
  if (count == 1) return {start};
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    g[static_cast<std::size_t>(i)] = start + (stop - start) * i / (count - 1);
  g.back() = stop;
  return g;
}

std::pair<SweepVariable, std::vector<double>> parse_sweep(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ':') {
      parts.push_back(text.substr(begin, i - begin));
      begin = i + 1;
    }
  }
  if (parts.size() != 4)
    throw std::invalid_argument("sweep must look like VAR:START:STOP:COUNT, got '" +
                                std::string(text) + "'");
  const double start = parse_double(parts[1], "sweep start");
  const double stop = parse_double(parts[2], "sweep stop");
  const double count = parse_double(parts[3], "sweep count");
  if (count < 1 || count != std::floor(count))
    throw std::invalid_argument("sweep count must be a positive integer");
  return {parse_sweep_variable(parts[0]), linear_grid(start, stop, static_cast<int>(count))};
}

std::vector<std::string> list_presets() {
  std::vector<std::string> out;
  for (const auto& p : presets()) out.emplace_back(p.name);
  return out;
}

std::string describe_preset(std::string_view name) {
  const auto& p = find_preset(name);
  return fmt::format("{}: {}\n  deltas from base config: {}\n  plotted metric: {}\n", p.name,
                     p.title, p.deltas, metric_label(p.metric));
}

Experiment make_preset(std::string_view name, const SystemParams& base) {
  const auto& p = find_preset(name);
  Experiment e;
  e.name = std::string(p.name);
  e.title = std::string(p.title);
  e.base = base;
  e.base.feedback_miss_prob = p.feedback_miss_prob;
  // NACK slots keep rate r1 so that P0 = P1 reproduces DPL exactly
  e.base.su_rates_bps[0] = e.base.su_rates_bps[1];
  e.sweep = SweepVariable::p0;
  e.grid = linear_grid(0.0, base.su_power_psd[1], kP0GridPoints);
  e.sensing = p.sensing;
  e.plot_metric = p.metric;
  return e;
}

void check_experiment(const Experiment& exp) {
  if (exp.grid.empty()) throw std::invalid_argument("experiment '" + exp.name + "': empty grid");
  for (std::size_t i = 1; i < exp.grid.size(); ++i)
    if (!(exp.grid[i] > exp.grid[i - 1]))
      throw std::invalid_argument("experiment '" + exp.name + "': grid must be strictly increasing");
  if (exp.sweep == SweepVariable::p0 &&
      (exp.grid.front() < 0.0 || exp.grid.back() > exp.base.su_power_psd[1]))
    throw std::invalid_argument("experiment '" + exp.name + "': P0 grid must lie in [0, P1]");
  if (exp.schemes.empty() || exp.sensing.empty())
    throw std::invalid_argument("experiment '" + exp.name + "': no schemes or sensing modes");
  if (exp.simulate) check_config(exp.sim);
}

ValidatedParams params_at(const Experiment& exp, double value) {
  SystemParams p = exp.base;
  switch (exp.sweep) {
    case SweepVariable::p0: p.su_power_psd[0] = value; break;
    case SweepVariable::epsilon: p.feedback_miss_prob = value; break;
    case SweepVariable::theta: p.qos_exponent = value; break;
    case SweepVariable::lambda: p.detector_threshold = value; break;
  }
  return validate(p, {.allow_p0_equal_p1 = exp.sweep == SweepVariable::p0});
}

double ExperimentRow::fidelity_gap() const {
  if (!sim || !sim->success_per_transmission.defined())
    return std::numeric_limits<double>::quiet_NaN();
  return success_rate - sim->success_per_transmission.value;
}

std::vector<ExperimentRow> evaluate_experiment(const Experiment& exp) {
  check_experiment(exp);
  std::vector<ExperimentRow> rows;
  for (Scheme scheme : exp.schemes)
    for (SensingMode sensing : exp.sensing)
      for (double v : exp.grid) rows.push_back({scheme, sensing, v, 0.0, 0.0, std::nullopt});

  std::vector<std::exception_ptr> errors(rows.size());
  const auto n = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    try {
      const auto params = params_at(exp, row.sweep_value);
      const SensingProbs probs = row.sensing == SensingMode::perfect
                                     ? perfect_sensing_override(params)
                                     : sensing_probs(params);
      const auto chain = build_chain(params, row.scheme, probs);
      const auto steady = steady_state(chain);
      row.ec_bps = effective_capacity(params, chain, params->qos_exponent).ec_bits_per_sec;
      row.success_rate = steady.pu_active_mass > 0.0
                             ? pu_success_rate(params, chain, steady)
                             : std::numeric_limits<double>::quiet_NaN();
      if (exp.simulate) {
        SimConfig cfg = exp.sim;
        cfg.mode = SimMode::protocol;
        cfg.seed = mix_seed(exp.sim.seed, static_cast<std::uint64_t>(i));
        row.sim = simulate_protocol(params, row.scheme, probs, cfg);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

void write_experiment_csv(std::ostream& out, const Experiment& exp,
                          const std::vector<ExperimentRow>& rows) {
  fmt::print(out, "scheme,sensing,{},ec_analytical_bps,success_rate_analytical", to_string(exp.sweep));
  if (exp.simulate)
    fmt::print(out,
               ",ec_sim_bps,ec_sim_hw_bps,success_sim_per_tx,success_sim_per_tx_hw,"
               "success_sim_per_packet,success_sim_per_packet_hw,sim_reliable,fidelity_gap");
  fmt::print(out, "\n");
  for (const auto& r : rows) {
    fmt::print(out, "{},{},{},{},{}", to_string(r.scheme), to_string(r.sensing), num(r.sweep_value),
               num(r.ec_bps), num(r.success_rate));
    if (exp.simulate && r.sim) {
      const auto& s = *r.sim;
      const double slot = exp.base.frame_duration_s;
      const bool reliable = s.ec_bits_per_slot.reliable && s.success_per_transmission.reliable &&
                            s.success_per_packet.reliable;
      fmt::print(out, ",{},{},{},{},{},{},{},{}", num(s.ec_bits_per_slot.value / slot),
                 num(s.ec_bits_per_slot.half_width / slot), num(s.success_per_transmission.value),
                 num(s.success_per_transmission.half_width), num(s.success_per_packet.value),
                 num(s.success_per_packet.half_width), reliable ? 1 : 0, num(r.fidelity_gap()));
    }
    fmt::print(out, "\n");
  }
}

void write_experiment_plot(std::ostream& out, const Experiment& exp,
                           const std::vector<ExperimentRow>& rows) {
  PlotSpec spec;
  spec.title = exp.title.empty() ? exp.name : exp.title;
  spec.x_label = sweep_label(exp.sweep);
  spec.y_label = std::string(metric_label(exp.plot_metric));
  std::map<std::pair<int, int>, std::size_t> index;
  for (const auto& r : rows) {
    const auto key = std::make_pair(static_cast<int>(r.scheme), static_cast<int>(r.sensing));
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, spec.series.size()).first;
      spec.series.push_back({fmt::format("{} ({})", to_string(r.scheme), to_string(r.sensing)), {}, {}});
    }
    auto& s = spec.series[it->second];
    s.x.push_back(r.sweep_value);
    s.y.push_back(exp.plot_metric == Metric::effective_capacity ? r.ec_bps : r.success_rate);
  }
  write_svg_plot(out, spec);
}

void write_experiment_report(std::ostream& out, const Experiment& exp,
                             const std::vector<ExperimentRow>& rows) {
  fmt::print(out, "experiment: {}\n", exp.name);
  if (!exp.title.empty()) fmt::print(out, "title: {}\n", exp.title);
  fmt::print(out, "sweep: {} over {} points [{}, {}]\n", to_string(exp.sweep), exp.grid.size(),
             num(exp.grid.front()), num(exp.grid.back()));
  fmt::print(out, "feedback_miss_prob: {}  qos_exponent: {}\n", num(exp.base.feedback_miss_prob),
             num(exp.base.qos_exponent));
  if (!exp.simulate) {
    fmt::print(out, "simulation: disabled\n");
    return;
  }
  fmt::print(out, "simulation: protocol mode, {} trajectories x {} slots, {} sensing, seed {}\n",
             exp.sim.trajectories, exp.sim.slots, to_string(exp.sim.sensing_model), exp.sim.seed);
  fmt::print(out,
             "fidelity gap = analytical success - simulated per-transmission success "
             "(chain maps missed NACKs to prior-rho states; the protocol retransmits)\n");
  fmt::print(out, "{:<6} {:<8} {:>12} {:>14} {:>14} {:>12} {:>10}\n", "scheme", "sensing",
             to_string(exp.sweep), "analytical", "simulated", "gap", "gap/hw");
  for (const auto& r : rows) {
    if (!r.sim) continue;
    const auto& e = r.sim->success_per_transmission;
    const double gap = r.fidelity_gap();
    fmt::print(out, "{:<6} {:<8} {:>12.6g} {:>14.9f} {:>14.9f} {:>12.3e} {:>10.2f}{}\n",
               to_string(r.scheme), to_string(r.sensing), r.sweep_value, r.success_rate, e.value,
               gap, gap / e.half_width, e.reliable ? "" : " [wide]");
  }
}

ExperimentOutputs run_experiment(const Experiment& exp) {
  ExperimentOutputs outs;
  outs.rows = evaluate_experiment(exp);
  std::filesystem::create_directories(exp.out_dir);
  outs.csv = exp.out_dir / (exp.name + ".csv");
  outs.plot = exp.out_dir / (exp.name + ".svg");
  outs.report = exp.out_dir / (exp.name + "_report.txt");

  auto open = [](const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error(path.string() + ": cannot open for writing");
    return f;
  };
  {
    auto f = open(outs.csv);
    write_experiment_csv(f, exp, outs.rows);
  }
  {
    auto f = open(outs.plot);
    write_experiment_plot(f, exp, outs.rows);
  }
  {
    auto f = open(outs.report);
    write_experiment_report(f, exp, outs.rows);
  }
  return outs;
}

}  // namespace cogcap
