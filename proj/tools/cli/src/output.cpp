#include "driftlab_cli/output.hpp"

#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "driftlab_cli/config.hpp"

namespace driftlab::cli {

std::string num(double value) { return fmt::format("{:.17g}", value); }

std::string num(const std::optional<double>& value) { return value ? num(*value) : std::string{}; }

std::string join(const Vector& values) {
  std::string out;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += num(values[i]);
  }
  return out;
}

void write_matrix_block(std::ostream& out, const std::string& name, const Matrix& m) {
  out << "matrix," << name << '\n' << 'i';
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << ",j=" << j + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << i + 1 << ',' << join(m.row(i).transpose()) << '\n';
  }
}

void write_curve_csv(std::ostream& out, const CriticalCurve& curve, bool with_resident_columns) {
  out << (with_resident_columns ? "d,q_star,dq_star_dd,lambda1_star\n" : "d,q_star\n");
  for (const auto& s : curve.samples) {
    out << num(s.d) << ',' << num(s.q_star);
    if (with_resident_columns) out << ',' << num(s.derivative) << ',' << num(s.lambda1_star);
    out << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, int n, bool competition) {
  out << 't';
  for (int i = 1; i <= n; ++i) out << ",u" << i;
  if (competition) {
    for (int i = 1; i <= n; ++i) out << ",v" << i;
  }
  out << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << num(traj.times[k]) << ',' << join(traj.states[k]) << '\n';
  }
}

void emit(const std::optional<std::filesystem::path>& path, const std::string& text) {
  if (!path) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  if (path->has_parent_path()) std::filesystem::create_directories(path->parent_path());
  std::ofstream file(*path, std::ios::binary);
  if (!file) throw ConfigError("out", "cannot write " + path->string());
  file << text;
}

}  // namespace driftlab::cli
