#include <json.hpp>

#include <sstream>

#include "driftlab_cli/commands.hpp"
#include "driftlab_cli/output.hpp"

namespace driftlab::cli {

namespace {

constexpr int kPatches = 4;
constexpr double kGrowth = 2.0;

struct Writer {
  std::filesystem::path dir;
  std::vector<std::filesystem::path> written;

  void file(const std::string& name, const std::string& text) {
    written.push_back(dir / name);
    emit(written.back(), text);
  }
};

nlohmann::json curve_file(Writer& w, const std::string& name, BoundaryCase boundary,
                          SpeciesParams p1, int threads) {
  const StreamTopology topo{kPatches, boundary};
  const GrowthProfile r = Vector::Constant(kPatches, kGrowth);
  CurveOptions opts;
  opts.threads = threads;
  const auto grid = log_grid(0.01, 20.0, 200);
  const auto curve = trace_invasion_curve(topo, r, p1, grid, opts);
  std::ostringstream csv;
  write_curve_csv(csv, curve, true);
  w.file(name, csv.str());
  nlohmann::json entry = {{"file", name}, {"d1", p1.d}, {"q1", p1.q}};
  entry["d_cutoff"] = curve.d_cutoff ? nlohmann::json(*curve.d_cutoff) : nlohmann::json(nullptr);
  return entry;
}

nlohmann::json series_file(Writer& w, const std::string& name, BoundaryCase boundary,
                           SpeciesParams p1, SpeciesParams p2, double u0, double v0,
                           double t_end) {
  const CompetitionScenario scenario{{kPatches, boundary}, Vector::Constant(kPatches, kGrowth), p1,
                                     p2};
  const auto traj = simulate(scenario, Vector::Constant(kPatches, u0),
                             Vector::Constant(kPatches, v0), uniform_times(t_end, 400));
  std::ostringstream csv;
  write_trajectory_csv(csv, traj, kPatches, true);
  w.file(name, csv.str());
  return {{"file", name}, {"d1", p1.d}, {"q1", p1.q}, {"d2", p2.d}, {"q2", p2.q},
          {"u0", u0},     {"v0", v0},   {"t_end", t_end}};
}

}  // namespace

const std::vector<std::string>& figure_recipes() {
  static const std::vector<std::string> names{"fig3a", "fig4", "fig5", "fig6", "fig7"};
  return names;
}

std::vector<std::filesystem::path> run_figure_recipe(const std::string& name,
                                                     const std::filesystem::path& out_dir,
                                                     int threads) {
  Writer w{out_dir, {}};
  nlohmann::json meta = {{"recipe", name}, {"n", kPatches}, {"r", kGrowth}};
  nlohmann::json& parts = meta["parts"] = nlohmann::json::array();
  const auto a = BoundaryCase::StreamToLake;
  const auto b = BoundaryCase::StreamToOcean;

  if (name == "fig3a") {
    meta["case"] = "a";
    parts.push_back(curve_file(w, "fig3a_curve.csv", a, {1.0, 0.5}, threads));
  } else if (name == "fig4") {
    meta["case"] = "a";
    parts.push_back(series_file(w, "fig4_invader_favoured.csv", a, {1.0, 0.5}, {0.08, 0.44}, 0.1,
                                2.0, 2000.0));
    parts.push_back(series_file(w, "fig4_resident_favoured.csv", a, {1.0, 0.5}, {0.08, 0.44},
                                5.0, 1.0, 2000.0));
  } else if (name == "fig5") {
    meta["case"] = "b";
    parts.push_back(curve_file(w, "fig5_q1_0.5.csv", b, {1.0, 0.5}, threads));
    parts.push_back(curve_file(w, "fig5_q1_3.csv", b, {1.0, 3.0}, threads));
  } else if (name == "fig6") {
    meta["case"] = "b";
    parts.push_back(series_file(w, "fig6_coexistence.csv", b, {1.0, 0.5}, {0.05, 0.555}, 0.1,
                                2.0, 2000.0));
  } else if (name == "fig7") {
    meta["case"] = "b";
    parts.push_back(curve_file(w, "fig7_d1_0.5.csv", b, {0.5, 2.0}, threads));
    parts.push_back(curve_file(w, "fig7_d1_2.csv", b, {2.0, 2.0}, threads));
  } else {
    throw ConfigError("name", "unknown figure recipe '" + name + "'");
  }
  w.file(name + "_meta.json", meta.dump(2) + "\n");
  return w.written;
}

}  // namespace driftlab::cli
