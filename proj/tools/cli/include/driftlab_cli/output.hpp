#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "driftlab/dynamics.hpp"
#include "driftlab/invasion.hpp"

namespace driftlab::cli {

/// Shortest round-trip text with 17 significant digits.
std::string num(double value);
std::string num(const std::optional<double>& value);  // empty cell when absent

std::string join(const Vector& values);

void write_matrix_block(std::ostream& out, const std::string& name, const Matrix& m);
void write_curve_csv(std::ostream& out, const CriticalCurve& curve, bool with_resident_columns);
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, int n, bool competition);

/// Writes text to `path`, or to stdout when path is empty.
void emit(const std::optional<std::filesystem::path>& path, const std::string& text);

}  // namespace driftlab::cli
