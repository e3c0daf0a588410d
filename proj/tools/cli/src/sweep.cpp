#include <sstream>

#include "driftlab/parallel.hpp"
#include "driftlab_cli/commands.hpp"
#include "driftlab_cli/output.hpp"

namespace driftlab::cli {

SweepResult run_sweep(const RunConfig& cfg) {
  if (!cfg.d_grid) throw ConfigError("d-grid", "required but not given");
  if (!cfg.q_grid) throw ConfigError("q-grid", "required but not given");
  const auto topo = cfg.topology();
  const auto r = cfg.profile();
  const auto p1 = cfg.p1();
  const auto outcome_opts = cfg.outcome_options();

  SweepResult result;
  result.d_axis = cfg.d_grid->values();
  result.q_axis = cfg.q_grid->values();
  const std::size_t nq = result.q_axis.size();
  result.cells.resize(result.d_axis.size() * nq);
  for (std::size_t i = 0; i < result.d_axis.size(); ++i) {
    for (std::size_t j = 0; j < nq; ++j) {
      result.cells[i * nq + j].d2 = result.d_axis[i];
      result.cells[i * nq + j].q2 = result.q_axis[j];
    }
  }

  parallel_for(result.cells.size(), cfg.threads, [&](std::size_t k) {
    auto& cell = result.cells[k];
    try {
      const SpeciesParams p2{cell.d2, cell.q2};
      cell.report = classify_point(topo, r, p1, p2);
      if (cfg.simulate_cells) {
        cell.probe = bistability_probe(CompetitionScenario{topo, r, p1, p2}, outcome_opts);
      }
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "d2,q2,region,e1,e2,predicted,lambda_e1,lambda_e2,q_curve,"
         "probe_invader_favoured,probe_resident_favoured,error\n";
  for (const auto& cell : result.cells) {
    out << num(cell.d2) << ',' << num(cell.q2) << ',';
    if (cell.report) {
      const auto& rep = *cell.report;
      out << to_string(rep.region) << ',' << to_string(rep.e1) << ',' << to_string(rep.e2) << ','
          << to_string(rep.predicted) << ',' << num(rep.lambda_e1) << ',' << num(rep.lambda_e2)
          << ',' << num(rep.q_curve) << ',';
    } else {
      out << ",,,,,,,";
    }
    if (cell.probe) {
      out << to_string(cell.probe->invader_favoured.tag) << ','
          << to_string(cell.probe->resident_favoured.tag) << ',';
    } else {
      out << ",,";
    }
    // Messages are free text; keep the row parseable.
    std::string message = cell.error;
    for (char& c : message) {
      if (c == ',' || c == '\n' || c == '"') c = ';';
    }
    out << message << '\n';
  }
  return out.str();
}

}  // namespace driftlab::cli
