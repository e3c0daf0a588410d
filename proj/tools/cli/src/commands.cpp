#include "driftlab_cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>

#include "driftlab/error.hpp"
#include "driftlab/spectral.hpp"
#include "driftlab_cli/output.hpp"

namespace driftlab::cli {

using nlohmann::json;

namespace {

Vector initial_state(const std::optional<std::vector<double>>& values, int n, double fallback) {
  if (!values) return Vector::Constant(n, fallback);
  if (values->size() == 1) return Vector::Constant(n, values->front());
  return Eigen::Map<const Vector>(values->data(), n);
}

json vector_json(const Vector& v) { return std::vector<double>(v.begin(), v.end()); }

json outcome_json(const Outcome& o, int n) {
  return {{"outcome", to_string(o.tag)},
          {"horizon", o.horizon},
          {"u", vector_json(o.terminal_state.head(n))},
          {"v", vector_json(o.terminal_state.tail(n))}};
}

}  // namespace

std::string topology_dump(const RunConfig& cfg) {
  const auto mats = build_matrices(cfg.topology());
  std::ostringstream out;
  write_matrix_block(out, "D", mats.diffusion);
  out << '\n';
  write_matrix_block(out, "Q", mats.advection);
  return out.str();
}

std::string eigen_command(const RunConfig& cfg) {
  const auto sp = cfg.single();
  const auto eig = principal_eigenpair(cfg.topology(), sp.d, sp.q, cfg.profile());
  return "lambda," + num(eig.lambda) + "\nphi," + join(eig.phi) + "\n";
}

std::string equilibrium_command(const RunConfig& cfg) {
  const auto eq = single_species_equilibrium(cfg.topology(), cfg.single(), cfg.profile());
  std::ostringstream out;
  out << "status," << (eq.positive() ? "Positive" : "Extinction") << '\n'
      << "lambda1," << num(eq.lambda1) << '\n'
      << "residual," << num(eq.residual) << '\n'
      << "u," << join(eq.u) << '\n';
  return out.str();
}

std::string critical_q_command(const RunConfig& cfg) {
  const auto topo = cfg.topology();
  const auto r = cfg.profile();
  const auto grid = cfg.d_grid.value_or(GridSpec{0.01, 20.0, 200, true}).values();
  CurveOptions opts;
  opts.threads = cfg.threads;
  std::ostringstream out;
  if (cfg.resident) {
    write_curve_csv(out, trace_invasion_curve(topo, r, *cfg.resident, grid, opts), true);
  } else {
    opts.derivative = false;
    write_curve_csv(out, trace_persistence_curve(topo, r, grid, opts), false);
  }
  return out.str();
}

std::string classify_command(const RunConfig& cfg) {
  const auto rep = classify_point(cfg.topology(), cfg.profile(), cfg.p1(), cfg.p2());
  const json j = {{"region", to_string(rep.region)},
                  {"e1", to_string(rep.e1)},
                  {"e2", to_string(rep.e2)},
                  {"predicted", to_string(rep.predicted)}};
  return j.dump(2) + "\n";
}

std::string probe_command(const RunConfig& cfg) {
  const CompetitionScenario scenario{cfg.topology(), cfg.profile(), cfg.p1(), cfg.p2()};
  const auto probe = bistability_probe(scenario, cfg.outcome_options());
  const int n = scenario.topo.n;
  json j = {{"invader_favoured", outcome_json(probe.invader_favoured, n)},
            {"resident_favoured", outcome_json(probe.resident_favoured, n)},
            {"bistable", probe.bistable()}};
  j["invader_favoured"]["u0"] = 0.1;
  j["invader_favoured"]["v0"] = 2.0;
  j["resident_favoured"]["u0"] = 5.0;
  j["resident_favoured"]["v0"] = 1.0;
  return j.dump(2) + "\n";
}

SimulationOutput simulate_command(const RunConfig& cfg) {
  const auto topo = cfg.topology();
  const auto r = cfg.profile();
  const auto times = uniform_times(cfg.t_end, cfg.samples - 1);
  const auto integrator = cfg.simulation_integrator();
  const bool competition = cfg.invader.has_value();
  const Vector u0 = initial_state(cfg.u0, topo.n, 1.0);

  json meta = {{"method", "Dormand-Prince 5(4), adaptive"},
               {"rtol", integrator.rtol},
               {"atol", integrator.atol},
               {"clamp", "negative components set to 0 after each step"},
               {"t_end", cfg.t_end},
               {"samples", cfg.samples},
               {"case", std::string(1, case_letter(topo.boundary))},
               {"n", topo.n},
               {"r", vector_json(r)}};
  Trajectory traj;
  if (competition) {
    const CompetitionScenario scenario{topo, r, cfg.p1(), cfg.p2()};
    const Vector v0 = initial_state(cfg.v0, topo.n, 1.0);
    traj = simulate(scenario, u0, v0, times, integrator);
    meta["d1"] = scenario.resident.d;
    meta["q1"] = scenario.resident.q;
    meta["d2"] = scenario.invader.d;
    meta["q2"] = scenario.invader.q;
    meta["u0"] = vector_json(u0);
    meta["v0"] = vector_json(v0);
  } else {
    const auto sp = cfg.resident.value_or(cfg.single());
    traj = simulate_single(topo, sp, r, u0, times, integrator);
    meta["d"] = sp.d;
    meta["q"] = sp.q;
    meta["u0"] = vector_json(u0);
  }
  meta["accepted_steps"] = traj.steps;
  meta["terminal_rhs_norm"] = traj.terminal_rhs_norm;

  std::ostringstream csv;
  write_trajectory_csv(csv, traj, topo.n, competition);
  return {csv.str(), meta.dump(2) + "\n"};
}

namespace {

struct Registered {
  CLI::App* app;
  std::map<std::string, std::string> values;
  std::string config_file;
};

std::string describe(const std::string& key) {
  static const std::map<std::string, std::string> help{
      {"case", "boundary regime: a (stream to lake), b (stream to ocean), c (inland stream)"},
      {"n", "patch count, >= 2"},
      {"r", "growth rates r1,...,rn; a single value is used for every patch"},
      {"d", "diffusion rate, > 0"},
      {"q", "advection rate, >= 0 (default 0)"},
      {"d1", "resident diffusion rate"},
      {"q1", "resident advection rate"},
      {"d2", "invader diffusion rate"},
      {"q2", "invader advection rate"},
      {"resident", "resident parameters D1,Q1; adds dq_star_dd and lambda1_star columns"},
      {"u0", "initial u, one value per patch or a single value (default 1)"},
      {"v0", "initial v, one value per patch or a single value (default 1)"},
      {"t-end", "final time (default 200)"},
      {"samples", "number of output times including t=0 (default 201)"},
      {"d-grid", "LO:HI:COUNT[:log|lin], log spacing by default (default 0.01:20:200)"},
      {"q-grid", "LO:HI:COUNT[:log|lin], linear spacing by default"},
      {"simulate", "also run the two-start probe in every sweep cell (default false)"},
      {"rtol", "integrator relative tolerance (simulate 1e-8, outcome runs 1e-10)"},
      {"atol", "integrator absolute tolerance (simulate 1e-10, outcome runs 1e-12)"},
      {"horizon", "first outcome horizon (default 2000)"},
      {"max-horizon", "largest outcome horizon after doubling (default 64000)"},
      {"extinction", "extinction threshold on the max-norm (default 1e-6)"},
      {"coexistence-floor", "peak density both species must exceed (default 1e-3)"},
      {"out", "output file (default stdout)"},
      {"out-dir", "directory for figure CSVs (default .)"},
      {"name", "figure recipe: fig3a, fig4, fig5, fig6, fig7"},
      {"threads", "worker threads (default 1; DRIFTLAB_THREADS overrides)"}};
  const auto it = help.find(key);
  return it == help.end() ? key : it->second;
}

void add_keys(Registered& reg, std::initializer_list<const char*> keys) {
  reg.app->add_option("--config", reg.config_file, "key = value file; flags override it");
  for (const char* key : keys) {
    reg.app->add_option(std::string("--") + key, reg.values[key], describe(key));
  }
}

RunConfig collect(const Registered& reg) {
  KeyValues flags;
  for (const auto& [key, value] : reg.values) {
    if (reg.app->count("--" + key) > 0) flags[key] = value;
  }
  const KeyValues file =
      reg.config_file.empty() ? KeyValues{} : read_config_file(reg.config_file);
  RunConfig cfg = parse_config(file, flags);
  if (const char* env = std::getenv("DRIFTLAB_THREADS"); env && *env) {
    cfg.threads = parse_config({}, {{"threads", env}}).threads;
  }
  return cfg;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Patch-network dispersal analysis: eigenvalues, critical curves, invasion, dynamics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "driftlab 0.1.0");

  auto* topology = app.add_subcommand("topology", "Movement matrices");
  topology->require_subcommand(1);
  Registered dump{topology->add_subcommand("dump", "Print D and Q as CSV blocks"), {}, {}};
  add_keys(dump, {"case", "n"});

  Registered eigen{app.add_subcommand("eigen", "Principal eigenpair of dD + qQ + diag(r)"), {}, {}};
  add_keys(eigen, {"case", "n", "d", "q", "r"});

  Registered equilibrium{app.add_subcommand("equilibrium", "Single-species equilibrium"), {}, {}};
  add_keys(equilibrium, {"case", "n", "d", "q", "r"});

  Registered critical{app.add_subcommand("critical-q", "Critical advection curve over a d grid"),
                      {}, {}};
  add_keys(critical, {"case", "n", "r", "d-grid", "resident", "threads", "out"});

  Registered classify{app.add_subcommand("classify", "Region and stability verdicts at (d2, q2)"),
                      {}, {}};
  add_keys(classify, {"case", "n", "r", "d1", "q1", "d2", "q2"});

  Registered sim{app.add_subcommand("simulate", "Integrate the one- or two-species model"), {}, {}};
  add_keys(sim, {"case", "n", "r", "d", "q", "d1", "q1", "d2", "q2", "u0", "v0", "t-end",
                 "samples", "rtol", "atol", "out"});

  Registered probe{app.add_subcommand("probe", "Run the two canonical initial data to an outcome"),
                   {}, {}};
  add_keys(probe, {"case", "n", "r", "d1", "q1", "d2", "q2", "rtol", "atol", "horizon",
                   "max-horizon", "extinction", "coexistence-floor"});

  Registered sweep{app.add_subcommand("sweep", "Classify every (d2, q2) cell of a grid"), {}, {}};
  add_keys(sweep, {"case", "n", "r", "d1", "q1", "d-grid", "q-grid", "simulate", "rtol", "atol",
                   "horizon", "max-horizon", "extinction", "coexistence-floor", "threads",
                   "out"});

  Registered figure{app.add_subcommand("figure", "Write the CSV inputs for a figure recipe"),
                    {}, {}};
  add_keys(figure, {"name", "out-dir", "threads"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (dump.app->parsed()) {
      emit(std::nullopt, topology_dump(collect(dump)));
    } else if (eigen.app->parsed()) {
      emit(std::nullopt, eigen_command(collect(eigen)));
    } else if (equilibrium.app->parsed()) {
      emit(std::nullopt, equilibrium_command(collect(equilibrium)));
    } else if (critical.app->parsed()) {
      const auto cfg = collect(critical);
      emit(cfg.out, critical_q_command(cfg));
    } else if (classify.app->parsed()) {
      emit(std::nullopt, classify_command(collect(classify)));
    } else if (sim.app->parsed()) {
      const auto cfg = collect(sim);
      const auto result = simulate_command(cfg);
      emit(cfg.out, result.csv);
      if (cfg.out) emit(std::filesystem::path(cfg.out->string() + ".meta.json"), result.meta);
    } else if (probe.app->parsed()) {
      emit(std::nullopt, probe_command(collect(probe)));
    } else if (sweep.app->parsed()) {
      const auto cfg = collect(sweep);
      emit(cfg.out, sweep_csv(run_sweep(cfg)));
    } else if (figure.app->parsed()) {
      const auto cfg = collect(figure);
      if (!cfg.figure) throw ConfigError("name", "required but not given");
      for (const auto& path : run_figure_recipe(*cfg.figure, cfg.out_dir, cfg.threads)) {
        std::cout << path.string() << '\n';
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidArgument ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace driftlab::cli
