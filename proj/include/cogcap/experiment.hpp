#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cogcap/params.hpp"
#include "cogcap/sim.hpp"

namespace cogcap {

enum class SweepVariable { p0, epsilon, theta, lambda };
enum class SensingMode { model, perfect };
enum class Metric { effective_capacity, success_rate };

std::string_view to_string(SweepVariable v);
std::string_view to_string(SensingMode m);
SweepVariable parse_sweep_variable(std::string_view name);
SensingMode parse_sensing_mode(std::string_view name);

struct Experiment {
  std::string name;
  std::string title;
  SystemParams base;
  SweepVariable sweep = SweepVariable::p0;
  std::vector<double> grid;
  std::vector<Scheme> schemes{Scheme::dpl, Scheme::tpl};
  std::vector<SensingMode> sensing{SensingMode::model};
  Metric plot_metric = Metric::effective_capacity;
  bool simulate = true;
  SimConfig sim{SimMode::protocol, 10'000, 100, 0x5eed, SensingModel::bernoulli};
  std::filesystem::path out_dir = ".";
};

/// `count` evenly spaced points from start to stop inclusive.
std::vector<double> linear_grid(double start, double stop, int count);

/// Parses "VAR:START:STOP:COUNT", e.g. "epsilon:0:0.5:11".
std::pair<SweepVariable, std::vector<double>> parse_sweep(std::string_view text);

std::vector<std::string> list_presets();

/// Human-readable preset summary, including its deltas from the base
/// config. Throws std::invalid_argument for an unknown name.
std::string describe_preset(std::string_view name);

/// Applies the preset's deltas to `base` and fills the sweep, schemes and
/// sensing modes.
Experiment make_preset(std::string_view name, const SystemParams& base);

/// Grid nonempty and strictly increasing; P0 grids inside [0, P1].
void check_experiment(const Experiment& exp);

/// Base parameters with the sweep variable set to `value`, validated.
ValidatedParams params_at(const Experiment& exp, double value);

struct ExperimentRow {
  Scheme scheme = Scheme::tpl;
  SensingMode sensing = SensingMode::model;
  double sweep_value = 0.0;
  double ec_bps = 0.0;
  double success_rate = 0.0;  // NaN when the PU is never active
  std::optional<SimReport> sim;

  /// Analytical minus simulated per-transmission success, NaN without sim.
  double fidelity_gap() const;
};

std::vector<ExperimentRow> evaluate_experiment(const Experiment& exp);

void write_experiment_csv(std::ostream& out, const Experiment& exp,
                          const std::vector<ExperimentRow>& rows);
void write_experiment_plot(std::ostream& out, const Experiment& exp,
                           const std::vector<ExperimentRow>& rows);
void write_experiment_report(std::ostream& out, const Experiment& exp,
                             const std::vector<ExperimentRow>& rows);

struct ExperimentOutputs {
  std::filesystem::path csv;
  std::filesystem::path plot;
  std::filesystem::path report;
  std::vector<ExperimentRow> rows;
};

/// Evaluates the experiment and writes <name>.csv, <name>.svg and
/// <name>_report.txt into exp.out_dir.
ExperimentOutputs run_experiment(const Experiment& exp);

}  // namespace cogcap
