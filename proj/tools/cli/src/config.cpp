#include "driftlab_cli/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "driftlab/error.hpp"
#include "driftlab/invasion.hpp"

namespace driftlab::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(value)) {
    throw ConfigError(field, "expected a finite number, got '" + text + "'");
  }
  return value;
}

int parse_int(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigError(field, "expected an integer, got '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ConfigError(field, "expected true or false, got '" + text + "'");
}

SpeciesParams parse_pair(const std::string& field, const std::string& text) {
  const auto values = parse_list(field, text);
  if (values.size() != 2) throw ConfigError(field, "expected D,Q");
  return {values[0], values[1]};
}

void check_species(const std::string& field, const SpeciesParams& p) {
  if (!(p.d > 0.0)) throw ConfigError(field, "diffusion rate must be > 0");
  if (!(p.q >= 0.0)) throw ConfigError(field, "advection rate must be >= 0");
}

double positive(const std::string& field, double value) {
  if (!(value > 0.0)) throw ConfigError(field, "must be > 0");
  return value;
}

void check_length(const std::string& field, const std::optional<std::vector<double>>& v, int n,
                  bool allow_broadcast) {
  if (!v) return;
  const auto size = static_cast<int>(v->size());
  if (size == n || (allow_broadcast && size == 1)) return;
  throw ConfigError(field, "expected " + std::to_string(n) + " values, got " + std::to_string(size));
}

template <typename T>
const T& need(const std::optional<T>& value, const char* field) {
  if (!value) throw ConfigError(field, "required but not given");
  return *value;
}

}  // namespace

std::vector<double> GridSpec::values() const {
  return logarithmic ? log_grid(lo, hi, count) : linear_grid(lo, hi, count);
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "case", "n",       "r",          "d",      "q",       "d1",          "q1",
      "d2",   "q2",      "resident",   "u0",     "v0",      "t-end",       "samples",
      "d-grid", "q-grid", "simulate",  "rtol",   "atol",    "horizon",     "max-horizon",
      "extinction", "coexistence-floor", "out",  "out-dir", "name",        "threads"};
  return keys;
}

std::vector<double> parse_list(const std::string& field, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(field, item));
  if (out.empty()) throw ConfigError(field, "expected a comma-separated list of numbers");
  return out;
}

GridSpec parse_grid(const std::string& field, const std::string& text, bool default_log) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(trim(item));
  if (parts.size() != 3 && parts.size() != 4) {
    throw ConfigError(field, "expected LO:HI:COUNT or LO:HI:COUNT:log|lin");
  }
  GridSpec grid;
  grid.lo = parse_double(field, parts[0]);
  grid.hi = parse_double(field, parts[1]);
  grid.count = parse_int(field, parts[2]);
  grid.logarithmic = default_log;
  if (parts.size() == 4) {
    if (parts[3] == "log") {
      grid.logarithmic = true;
    } else if (parts[3] == "lin") {
      grid.logarithmic = false;
    } else {
      throw ConfigError(field, "grid spacing must be 'log' or 'lin'");
    }
  }
  if (grid.count < 0) throw ConfigError(field, "count must be >= 0");
  if (grid.hi < grid.lo) throw ConfigError(field, "HI must be >= LO");
  if (grid.logarithmic && !(grid.lo > 0.0)) throw ConfigError(field, "log grid needs LO > 0");
  return grid;
}

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  KeyValues values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config", path.string() + ":" + std::to_string(line_no) +
                                      ": expected key = value");
    }
    values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return values;
}

RunConfig parse_config(const KeyValues& file_values, const KeyValues& flag_values) {
  KeyValues kv = file_values;
  for (const auto& [k, v] : flag_values) kv[k] = v;
  const auto& keys = known_keys();
  for (const auto& [k, v] : kv) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw ConfigError(k, "unknown key");
    }
  }
  auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  RunConfig cfg;
  if (const auto* s = get("case")) {
    try {
      cfg.boundary = parse_boundary_case(trim(*s));
    } catch (const Error&) {
      throw ConfigError("case", "expected a, b or c, got '" + *s + "'");
    }
  }
  if (const auto* s = get("n")) {
    cfg.n = parse_int("n", *s);
    if (*cfg.n < 2) throw ConfigError("n", "patch count must be >= 2");
  }
  if (const auto* s = get("r")) cfg.r = parse_list("r", *s);
  if (const auto* s = get("d")) cfg.d = positive("d", parse_double("d", *s));
  if (const auto* s = get("q")) {
    cfg.q = parse_double("q", *s);
    if (*cfg.q < 0.0) throw ConfigError("q", "advection rate must be >= 0");
  }

  auto species = [&](const char* d_key, const char* q_key) -> std::optional<SpeciesParams> {
    const auto* ds = get(d_key);
    const auto* qs = get(q_key);
    if (!ds && !qs) return std::nullopt;
    if (!ds) throw ConfigError(d_key, std::string("required together with ") + q_key);
    if (!qs) throw ConfigError(q_key, std::string("required together with ") + d_key);
    SpeciesParams p{parse_double(d_key, *ds), parse_double(q_key, *qs)};
    if (!(p.d > 0.0)) throw ConfigError(d_key, "diffusion rate must be > 0");
    if (!(p.q >= 0.0)) throw ConfigError(q_key, "advection rate must be >= 0");
    return p;
  };
  cfg.resident = species("d1", "q1");
  cfg.invader = species("d2", "q2");
  if (const auto* s = get("resident")) {
    cfg.resident = parse_pair("resident", *s);
    check_species("resident", *cfg.resident);
  }

  if (const auto* s = get("u0")) cfg.u0 = parse_list("u0", *s);
  if (const auto* s = get("v0")) cfg.v0 = parse_list("v0", *s);
  for (const auto* field : {"u0", "v0"}) {
    const auto& v = std::string(field) == "u0" ? cfg.u0 : cfg.v0;
    if (v && std::any_of(v->begin(), v->end(), [](double x) { return x < 0.0; })) {
      throw ConfigError(field, "initial densities must be >= 0");
    }
  }
  if (const auto* s = get("t-end")) cfg.t_end = positive("t-end", parse_double("t-end", *s));
  if (const auto* s = get("samples")) {
    cfg.samples = parse_int("samples", *s);
    if (cfg.samples < 2) throw ConfigError("samples", "must be >= 2");
  }
  if (const auto* s = get("d-grid")) cfg.d_grid = parse_grid("d-grid", *s, true);
  if (const auto* s = get("q-grid")) cfg.q_grid = parse_grid("q-grid", *s, false);
  if (const auto* s = get("simulate")) cfg.simulate_cells = parse_bool("simulate", *s);
  if (const auto* s = get("rtol")) cfg.rtol = positive("rtol", parse_double("rtol", *s));
  if (const auto* s = get("atol")) cfg.atol = positive("atol", parse_double("atol", *s));
  if (const auto* s = get("horizon")) {
    cfg.horizon = positive("horizon", parse_double("horizon", *s));
  }
  if (const auto* s = get("max-horizon")) {
    cfg.max_horizon = positive("max-horizon", parse_double("max-horizon", *s));
  }
  if (cfg.max_horizon < cfg.horizon) throw ConfigError("max-horizon", "must be >= horizon");
  if (const auto* s = get("extinction")) {
    cfg.extinction_threshold = positive("extinction", parse_double("extinction", *s));
  }
  if (const auto* s = get("coexistence-floor")) {
    cfg.coexistence_floor = positive("coexistence-floor", parse_double("coexistence-floor", *s));
  }
  if (const auto* s = get("out"); s && !s->empty()) cfg.out = *s;
  if (const auto* s = get("out-dir")) cfg.out_dir = *s;
  if (const auto* s = get("name")) cfg.figure = trim(*s);
  if (const auto* s = get("threads")) {
    cfg.threads = parse_int("threads", *s);
    if (cfg.threads < 1) throw ConfigError("threads", "must be >= 1");
  }

  if (cfg.n) {
    check_length("r", cfg.r, *cfg.n, true);
    check_length("u0", cfg.u0, *cfg.n, true);
    check_length("v0", cfg.v0, *cfg.n, true);
  }
  return cfg;
}

StreamTopology RunConfig::topology() const {
  return {need(n, "n"), need(boundary, "case")};
}

GrowthProfile RunConfig::profile() const {
  const int size = need(n, "n");
  const auto& values = need(r, "r");
  if (values.size() == 1) return Vector::Constant(size, values[0]);
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

SpeciesParams RunConfig::single() const { return {need(d, "d"), q.value_or(0.0)}; }
SpeciesParams RunConfig::p1() const { return need(resident, "d1/q1"); }
SpeciesParams RunConfig::p2() const { return need(invader, "d2/q2"); }

IntegratorOptions RunConfig::simulation_integrator() const {
  IntegratorOptions o;
  if (rtol) o.rtol = *rtol;
  if (atol) o.atol = *atol;
  return o;
}

OutcomeRunOptions RunConfig::outcome_options() const {
  OutcomeRunOptions o;
  o.horizon = horizon;
  o.max_horizon = max_horizon;
  o.thresholds.extinction = extinction_threshold;
  o.thresholds.coexistence_floor = coexistence_floor;
  if (rtol) o.integrator.rtol = *rtol;
  if (atol) o.integrator.atol = *atol;
  return o;
}

}  // namespace driftlab::cli
