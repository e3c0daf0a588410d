#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "driftlab/invasion.hpp"
#include "driftlab_cli/commands.hpp"
#include "driftlab_cli/config.hpp"

using namespace driftlab;
using namespace driftlab::cli;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int exit_code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + DRIFTLAB_EXE + " " + args + " 2>/dev/null";
  CliRun result;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return result;
  char buffer[4096];
  size_t got = 0;
  while ((got = fread(buffer, 1, sizeof buffer, pipe)) > 0) result.out.append(buffer, got);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("driftlab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig lake_resident_config() {
  return parse_config({}, {{"case", "a"}, {"n", "4"}, {"r", "2"}, {"d1", "1"}, {"q1", "0.5"}});
}

}  // namespace

TEST(Config, FlagsOnly) {
  const auto cfg = lake_resident_config();
  EXPECT_EQ(cfg.topology().boundary, BoundaryCase::StreamToLake);
  EXPECT_EQ(cfg.profile(), Vector::Constant(4, 2.0));
  EXPECT_EQ(cfg.p1().d, 1.0);
  EXPECT_EQ(cfg.p1().q, 0.5);
}

TEST(Config, FileValidationNamesTheField) {
  const fs::path dir = scratch_dir("config");
  std::ofstream(dir / "bad.cfg") << "# one patch\ncase = a\nn = 1\n";
  try {
    parse_config(read_config_file(dir / "bad.cfg"), {});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "n");
  }
}

TEST(Config, FlagsOverrideFile) {
  const auto cfg = parse_config({{"case", "b"}, {"n", "3"}, {"r", "1"}}, {{"n", "5"}});
  EXPECT_EQ(*cfg.n, 5);
  EXPECT_EQ(*cfg.boundary, BoundaryCase::StreamToOcean);
}

TEST(Config, Rejections) {
  auto field_of = [](const KeyValues& kv) -> std::string {
    try {
      parse_config({}, kv);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return "";
  };
  EXPECT_EQ(field_of({{"colour", "red"}}), "colour");
  EXPECT_EQ(field_of({{"case", "x"}}), "case");
  EXPECT_EQ(field_of({{"n", "4"}, {"r", "1,2"}}), "r");
  EXPECT_EQ(field_of({{"d", "0"}}), "d");
  EXPECT_EQ(field_of({{"q", "-1"}}), "q");
  EXPECT_EQ(field_of({{"d1", "1"}}), "q1");
  EXPECT_EQ(field_of({{"d-grid", "1:2"}}), "d-grid");
  EXPECT_EQ(field_of({{"threads", "0"}}), "threads");
  EXPECT_EQ(field_of({{"n", "abc"}}), "n");
  EXPECT_EQ(field_of({{"u0", "-1"}}), "u0");
  EXPECT_THROW(parse_config({}, {}).topology(), ConfigError);
}

TEST(Config, Grids) {
  const auto log = parse_grid("g", "0.1:10:3", true);
  EXPECT_TRUE(log.logarithmic);
  EXPECT_NEAR(log.values()[1], 1.0, 1e-14);
  const auto lin = parse_grid("g", "0:1:3:lin", true);
  EXPECT_EQ(lin.values(), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_THROW(parse_grid("g", "0:1:3:log", true), ConfigError);
  EXPECT_THROW(parse_grid("g", "1:0:3", false), ConfigError);
}

TEST(Sweep, RegionsFollowTheCurve) {
  auto cfg = lake_resident_config();
  cfg.d_grid = GridSpec{0.3, 3.0, 10, true};
  cfg.q_grid = GridSpec{0.2, 0.8, 10, false};
  const auto result = run_sweep(cfg);
  ASSERT_EQ(result.cells.size(), 100u);
  EXPECT_EQ(lines(sweep_csv(result)).size(), 101u);

  const StreamTopology topo{4, BoundaryCase::StreamToLake};
  const Vector r = Vector::Constant(4, 2.0);
  const auto res = establish_resident(topo, r, {1.0, 0.5});
  for (const auto& cell : result.cells) {
    ASSERT_TRUE(cell.report.has_value()) << cell.error;
    const double curve = q_star(topo, cell.d2, res.profile);
    const auto region = cell.report->region;
    if (region == RegionLabel::S1only) EXPECT_GT(cell.q2, curve);
    if (region == RegionLabel::S2only) EXPECT_LT(cell.q2, curve);
    // the curve lies inside the cone between the ray and q = q1
    const double ray = 0.5 * cell.d2;
    if (cell.d2 > 1.0) EXPECT_TRUE(curve > 0.5 && curve < ray);
    if (cell.d2 < 1.0) EXPECT_TRUE(curve < 0.5 && curve > ray);
  }
}

TEST(Sweep, GSetsAroundTheRay) {
  auto cfg = lake_resident_config();
  cfg.d_grid = GridSpec{0.25, 2.5, 7, false};
  cfg.q_grid = GridSpec{0.1, 1.3, 7, false};
  for (const auto& cell : run_sweep(cfg).cells) {
    const auto region = cell.report->region;
    const bool above_left = cell.d2 < 2.0 * cell.q2 && cell.q2 > 0.5;
    const bool below_right = cell.d2 > 2.0 * cell.q2 && cell.q2 < 0.5;
    if (above_left) EXPECT_EQ(region, RegionLabel::G1) << cell.d2 << "," << cell.q2;
    if (below_right) EXPECT_EQ(region, RegionLabel::G2) << cell.d2 << "," << cell.q2;
    if (region == RegionLabel::G1) EXPECT_EQ(cell.report->predicted, Prediction::E1GloballyStable);
    if (region == RegionLabel::G2) EXPECT_EQ(cell.report->predicted, Prediction::E2GloballyStable);
  }
}

TEST(Sweep, EmptyGridGivesHeaderOnly) {
  auto cfg = lake_resident_config();
  cfg.d_grid = GridSpec{0.3, 3.0, 0, true};
  cfg.q_grid = GridSpec{0.2, 0.8, 10, false};
  const auto text = sweep_csv(run_sweep(cfg));
  ASSERT_EQ(lines(text).size(), 1u);
  EXPECT_EQ(cells(lines(text)[0]).back(), "error");
}

TEST(Sweep, CellErrorsAreRecorded) {
  auto cfg = parse_config({}, {{"case", "a"}, {"n", "4"}, {"r", "2"}, {"d1", "1"}, {"q1", "9"}});
  cfg.d_grid = GridSpec{0.5, 1.0, 2, true};
  cfg.q_grid = GridSpec{0.2, 0.8, 2, false};
  const auto result = run_sweep(cfg);
  ASSERT_EQ(result.cells.size(), 4u);
  for (const auto& cell : result.cells) {
    EXPECT_FALSE(cell.report.has_value());
    EXPECT_NE(cell.error.find("ResidentNotEstablished"), std::string::npos) << cell.error;
  }
}

TEST(Sweep, SimulatedCells) {
  auto cfg = lake_resident_config();
  cfg.d_grid = GridSpec{2.0, 2.0, 1, true};
  cfg.q_grid = GridSpec{0.3, 0.3, 1, false};
  cfg.simulate_cells = true;
  const auto result = run_sweep(cfg);
  ASSERT_TRUE(result.cells[0].probe.has_value());
  EXPECT_EQ(result.cells[0].probe->invader_favoured.tag, OutcomeTag::E2Wins);
  const auto row = cells(lines(sweep_csv(result))[1]);
  EXPECT_EQ(row[9], "E2Wins");
  EXPECT_EQ(row[10], "E2Wins");
}

TEST(Cli, TopologyDump) {
  const auto run = run_cli("topology dump --case a --n 3");
  EXPECT_EQ(run.exit_code, 0);
  const auto out = lines(run.out);
  ASSERT_GE(out.size(), 5u);
  EXPECT_EQ(out[0], "matrix,D");
  EXPECT_EQ(out[1], "i,j=1,j=2,j=3");
  EXPECT_EQ(out[2], "1,-1,1,0");
}

TEST(Cli, Eigen) {
  const auto run = run_cli("eigen --case a --n 2 --d 1 --q 0.5 --r 2,2");
  EXPECT_EQ(run.exit_code, 0);
  const auto out = lines(run.out);
  ASSERT_EQ(out.size(), 2u);
  const auto lambda = cells(out[0]);
  EXPECT_EQ(lambda[0], "lambda");
  EXPECT_NEAR(std::stod(lambda[1]), 0.5 + std::sqrt(1.5), 1e-12);
  EXPECT_EQ(cells(out[1]).size(), 3u);
}

TEST(Cli, Equilibrium) {
  const auto run = run_cli("equilibrium --case a --n 4 --d 1 --q 0.5 --r 2");
  EXPECT_EQ(run.exit_code, 0);
  EXPECT_EQ(lines(run.out)[0], "status,Positive");
  EXPECT_EQ(cells(lines(run.out)[3]).size(), 5u);
}

TEST(Cli, CriticalQColumns) {
  const auto plain = run_cli("critical-q --case a --n 4 --r 2 --d-grid 0.1:10:5");
  EXPECT_EQ(plain.exit_code, 0);
  EXPECT_EQ(lines(plain.out)[0], "d,q_star");
  EXPECT_EQ(lines(plain.out).size(), 6u);
  const auto full = run_cli("critical-q --case a --n 4 --r 2 --d-grid 0.1:10:5 --resident 1,0.5");
  EXPECT_EQ(lines(full.out)[0], "d,q_star,dq_star_dd,lambda1_star");
  EXPECT_EQ(cells(lines(full.out)[1]).size(), 4u);
}

TEST(Cli, ClassifyJson) {
  const auto run =
      run_cli("classify --case a --n 4 --r 2 --d1 1 --q1 0.5 --d2 0.08 --q2 0.44");
  EXPECT_EQ(run.exit_code, 0);
  const auto j = nlohmann::json::parse(run.out);
  EXPECT_EQ(j.size(), 4u);
  EXPECT_EQ(j.at("region"), "S1only");
  EXPECT_EQ(j.at("e1"), "Stable");
  EXPECT_EQ(j.at("e2"), "Stable");
  EXPECT_EQ(j.at("predicted"), "Bistable");
}

TEST(Cli, SimulateWritesCsvAndMetadata) {
  const fs::path dir = scratch_dir("simulate");
  const fs::path out = dir / "run.csv";
  const auto run = run_cli(
      "simulate --case a --n 4 --r 2 --d1 1 --q1 0.5 --d2 0.08 --q2 0.44 --u0 0.1 --v0 2 "
      "--t-end 50 --samples 11 --out " + out.string());
  EXPECT_EQ(run.exit_code, 0);
  std::ifstream in(out);
  std::stringstream text;
  text << in.rdbuf();
  const auto rows = lines(text.str());
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0], "t,u1,u2,u3,u4,v1,v2,v3,v4");
  EXPECT_EQ(cells(rows[11])[0], "50");
  std::ifstream meta_in(out.string() + ".meta.json");
  const auto meta = nlohmann::json::parse(meta_in);
  EXPECT_EQ(meta.at("rtol"), 1e-8);
  EXPECT_EQ(meta.at("atol"), 1e-10);
}

TEST(Cli, ProbeJson) {
  const auto run = run_cli("probe --case a --n 4 --r 2 --d1 1 --q1 0.5 --d2 2 --q2 0.5");
  EXPECT_EQ(run.exit_code, 0);
  const auto j = nlohmann::json::parse(run.out);
  EXPECT_EQ(j.at("invader_favoured").at("outcome"), "E2Wins");
  EXPECT_EQ(j.at("resident_favoured").at("outcome"), "E2Wins");
  EXPECT_EQ(j.at("bistable"), false);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("eigen --n 2 --d 1 --r 2").exit_code, 2);
  EXPECT_EQ(run_cli("eigen --case a --n 2 --d 1 --r 2 --bogus 1").exit_code, 2);
  EXPECT_EQ(run_cli("").exit_code, 2);
  EXPECT_EQ(run_cli("--help").exit_code, 0);
  EXPECT_EQ(run_cli("classify --case a --n 4 --r 2 --d1 1 --q1 9 --d2 1 --q2 0.1").exit_code, 1);
  EXPECT_EQ(run_cli("figure --name fig9 --out-dir /tmp").exit_code, 2);
}

TEST(Cli, ConfigFileAndOverride) {
  const fs::path dir = scratch_dir("cfgfile");
  std::ofstream(dir / "run.cfg") << "case = a\nn = 2\nr = 2\nd = 1\nq = 3\n";
  const auto run = run_cli("eigen --config " + (dir / "run.cfg").string() + " --q 0.5");
  EXPECT_EQ(run.exit_code, 0);
  EXPECT_NEAR(std::stod(cells(lines(run.out)[0])[1]), 0.5 + std::sqrt(1.5), 1e-12);
  std::ofstream(dir / "bad.cfg") << "case = a\nn = 1\n";
  EXPECT_EQ(run_cli("topology dump --config " + (dir / "bad.cfg").string()).exit_code, 2);
}

TEST(Cli, DeterministicAcrossRunsAndThreads) {
  const std::string args =
      "sweep --case b --n 4 --r 2 --d1 1 --q1 0.5 --d-grid 0.05:3:6 --q-grid 0.1:1:5";
  const auto first = run_cli(args);
  const auto second = run_cli(args);
  const auto threaded = run_cli(args, "DRIFTLAB_THREADS=3");
  EXPECT_EQ(first.exit_code, 0);
  EXPECT_EQ(first.out, second.out);
  EXPECT_EQ(first.out, threaded.out);
  EXPECT_EQ(lines(first.out).size(), 31u);
}

TEST(Figures, RecipesWriteTheirCsvs) {
  const fs::path dir = scratch_dir("figures");
  for (const auto& name : figure_recipes()) {
    const auto files = run_figure_recipe(name, dir, 2);
    ASSERT_FALSE(files.empty()) << name;
    for (const auto& f : files) {
      ASSERT_TRUE(fs::exists(f)) << f;
      EXPECT_GT(fs::file_size(f), 0u) << f;
      std::ifstream in(f);
      std::string header;
      std::getline(in, header);
      if (f.extension() == ".csv") {
        EXPECT_TRUE(header == "d,q_star,dq_star_dd,lambda1_star" ||
                    header == "t,u1,u2,u3,u4,v1,v2,v3,v4")
            << f << ": " << header;
      }
    }
  }
  EXPECT_TRUE(fs::exists(dir / "fig4_invader_favoured.csv"));
  EXPECT_TRUE(fs::exists(dir / "fig4_resident_favoured.csv"));
  EXPECT_TRUE(fs::exists(dir / "fig6_coexistence.csv"));
  std::ifstream meta_in(dir / "fig3a_meta.json");
  const auto meta = nlohmann::json::parse(meta_in);
  EXPECT_EQ(meta.at("parts")[0].at("d1"), 1.0);
  EXPECT_EQ(meta.at("parts")[0].at("q1"), 0.5);
}
