#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace driftlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Behaviour of the downstream end of the stream (patch n).
enum class BoundaryCase {
  StreamToLake,   ///< case a: free flow, diffusive flux into the lake balances
  StreamToOcean,  ///< case b: hostile end, D_nn = -2
  InlandStream,   ///< case c: no flux, Q_nn = 0
};

/// Parses "a"/"b"/"c" (also the long names). Throws InvalidArgument.
BoundaryCase parse_boundary_case(std::string_view text);
char case_letter(BoundaryCase boundary);

struct StreamTopology {
  int n = 2;
  BoundaryCase boundary = BoundaryCase::StreamToLake;
};

/// Dense diffusion (D) and advection (Q) patterns. Patch 1 is upstream.
struct MovementMatrices {
  Matrix diffusion;
  Matrix advection;
};

MovementMatrices build_matrices(const StreamTopology& topo);

/// L = d D + q Q. Requires d > 0 and q >= 0.
Matrix build_connection(const StreamTopology& topo, double d, double q);

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const;
  /// nullptr when no check with that name was run.
  const ValidationCheck* find(std::string_view name) const;
};

/// Checks every structural invariant of the movement matrices for the given
/// boundary case. Never throws for well-shaped input; failures are reported.
///
/// Check names: "shape", "essentially_nonnegative_D",
/// "essentially_nonnegative_Q", "irreducible_D", "tridiagonal_D",
/// "lower_bidiagonal_Q", "column_sums_D", "column_sums_Q".
ValidationReport validate(const MovementMatrices& mats, const StreamTopology& topo);

/// Strong connectivity of the directed graph with an edge j -> i whenever
/// A(i, j) != 0 for i != j.
bool is_irreducible(const Matrix& a);

/// True when every off-diagonal entry is >= 0.
bool is_essentially_nonnegative(const Matrix& a);

}  // namespace driftlab
