#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "driftlab/dynamics.hpp"
#include "driftlab/invasion.hpp"
#include "driftlab_cli/config.hpp"

namespace driftlab::cli {

// Each command returns the text it would print; file outputs are written
// directly and their paths returned.

std::string topology_dump(const RunConfig& cfg);
std::string eigen_command(const RunConfig& cfg);
std::string equilibrium_command(const RunConfig& cfg);
std::string critical_q_command(const RunConfig& cfg);
std::string classify_command(const RunConfig& cfg);
std::string probe_command(const RunConfig& cfg);

struct SimulationOutput {
  std::string csv;
  std::string meta;  // JSON describing the run
};
SimulationOutput simulate_command(const RunConfig& cfg);

struct SweepCell {
  double d2 = 0.0;
  double q2 = 0.0;
  std::optional<InvasionReport> report;
  std::optional<ProbeResult> probe;
  std::string error;
};

struct SweepResult {
  std::vector<double> d_axis;
  std::vector<double> q_axis;
  std::vector<SweepCell> cells;  // d-major: cells[i * q_axis.size() + j]
};

SweepResult run_sweep(const RunConfig& cfg);
std::string sweep_csv(const SweepResult& result);

const std::vector<std::string>& figure_recipes();
std::vector<std::filesystem::path> run_figure_recipe(const std::string& name,
                                                     const std::filesystem::path& out_dir,
                                                     int threads = 1);

/// Parses argv and dispatches; returns the process exit code
/// (0 success, 1 computational failure, 2 usage or validation error).
int run(int argc, char** argv);

}  // namespace driftlab::cli
