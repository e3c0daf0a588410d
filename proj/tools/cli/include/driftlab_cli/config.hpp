#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftlab/dynamics.hpp"
#include "driftlab/equilibrium.hpp"
#include "driftlab/ode.hpp"
#include "driftlab/topology.hpp"

namespace driftlab::cli {

using KeyValues = std::map<std::string, std::string>;

/// Bad or missing input; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  bool logarithmic = true;

  std::vector<double> values() const;
};

struct RunConfig {
  std::optional<BoundaryCase> boundary;
  std::optional<int> n;
  std::optional<std::vector<double>> r;  // one value broadcasts to every patch

  std::optional<double> d;
  std::optional<double> q;
  std::optional<SpeciesParams> resident;
  std::optional<SpeciesParams> invader;

  std::optional<std::vector<double>> u0;
  std::optional<std::vector<double>> v0;
  double t_end = 200.0;
  int samples = 201;

  std::optional<GridSpec> d_grid;
  std::optional<GridSpec> q_grid;
  bool simulate_cells = false;

  std::optional<double> rtol;
  std::optional<double> atol;
  double horizon = 2000.0;
  double max_horizon = 64000.0;
  double extinction_threshold = 1e-6;
  double coexistence_floor = 1e-3;

  std::optional<std::filesystem::path> out;
  std::filesystem::path out_dir = ".";
  std::optional<std::string> figure;
  int threads = 1;

  StreamTopology topology() const;
  GrowthProfile profile() const;
  SpeciesParams single() const;
  SpeciesParams p1() const;
  SpeciesParams p2() const;
  IntegratorOptions simulation_integrator() const;
  OutcomeRunOptions outcome_options() const;
};

/// Keys accepted both as `--key` flags and in `key = value` files.
const std::vector<std::string>& known_keys();

/// Reads a flat key=value file; '#' starts a comment.
KeyValues read_config_file(const std::filesystem::path& path);

/// Merges file values with flag values (flags win), then parses and range
/// checks every present key. Missing keys are reported later by the
/// accessors on RunConfig, once the subcommand knows what it needs.
RunConfig parse_config(const KeyValues& file_values, const KeyValues& flag_values);

std::vector<double> parse_list(const std::string& field, const std::string& text);
GridSpec parse_grid(const std::string& field, const std::string& text, bool default_log);

}  // namespace driftlab::cli
