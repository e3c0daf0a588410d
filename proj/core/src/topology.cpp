#include "driftlab/topology.hpp"

#include <cmath>
#include <string>

#include "driftlab/error.hpp"

namespace driftlab {

namespace {

void require_valid(const StreamTopology& topo) {
  if (topo.n < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "patch count n must be >= 2 (got " + std::to_string(topo.n) + ")");
  }
}

// Visits every node reachable from `start` following edges j -> i with
// a(i, j) != 0 (forward) or the reverse direction.
std::vector<bool> reachable(const Matrix& a, bool forward) {
  const auto n = a.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<Eigen::Index> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const auto j = stack.back();
    stack.pop_back();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j || seen[static_cast<std::size_t>(i)]) continue;
      const double entry = forward ? a(i, j) : a(j, i);
      if (entry != 0.0) {
        seen[static_cast<std::size_t>(i)] = true;
        stack.push_back(i);
      }
    }
  }
  return seen;
}

bool all_true(const std::vector<bool>& v) {
  for (bool b : v) {
    if (!b) return false;
  }
  return true;
}

}  // namespace

BoundaryCase parse_boundary_case(std::string_view text) {
  if (text == "a" || text == "lake" || text == "stream-to-lake") return BoundaryCase::StreamToLake;
  if (text == "b" || text == "ocean" || text == "stream-to-ocean") return BoundaryCase::StreamToOcean;
  if (text == "c" || text == "inland" || text == "inland-stream") return BoundaryCase::InlandStream;
  throw Error(ErrorCode::InvalidArgument, "unknown boundary case '" + std::string(text) +
                                              "' (expected a, b or c)");
}

char case_letter(BoundaryCase boundary) {
  switch (boundary) {
    case BoundaryCase::StreamToLake: return 'a';
    case BoundaryCase::StreamToOcean: return 'b';
    case BoundaryCase::InlandStream: return 'c';
  }
  return '?';
}

MovementMatrices build_matrices(const StreamTopology& topo) {
  require_valid(topo);
  const int n = topo.n;
  Matrix d = Matrix::Zero(n, n);
  Matrix q = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = (i == 0 || i == n - 1) ? -1.0 : -2.0;
    if (i > 0) d(i, i - 1) = 1.0;
    if (i + 1 < n) d(i, i + 1) = 1.0;
    q(i, i) = -1.0;
    if (i > 0) q(i, i - 1) = 1.0;
  }
  if (topo.boundary == BoundaryCase::StreamToOcean) d(n - 1, n - 1) = -2.0;
  if (topo.boundary == BoundaryCase::InlandStream) q(n - 1, n - 1) = 0.0;
  return {std::move(d), std::move(q)};
}

Matrix build_connection(const StreamTopology& topo, double d, double q) {
  if (!(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "diffusion rate d must be > 0");
  if (!(q >= 0.0)) throw Error(ErrorCode::InvalidArgument, "advection rate q must be >= 0");
  const auto mats = build_matrices(topo);
  return d * mats.diffusion + q * mats.advection;
}

bool ValidationReport::ok() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

const ValidationCheck* ValidationReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool is_essentially_nonnegative(const Matrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j && a(i, j) < 0.0) return false;
    }
  }
  return true;
}

bool is_irreducible(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) return false;
  if (a.rows() == 1) return true;
  return all_true(reachable(a, true)) && all_true(reachable(a, false));
}

ValidationReport validate(const MovementMatrices& mats, const StreamTopology& topo) {
  ValidationReport report;
  const auto n = static_cast<Eigen::Index>(topo.n);
  const auto& d = mats.diffusion;
  const auto& q = mats.advection;

  const bool shaped = d.rows() == n && d.cols() == n && q.rows() == n && q.cols() == n;
  report.checks.push_back({"shape", shaped, shaped ? "" : "matrices are not n x n"});
  if (!shaped) return report;

  report.checks.push_back({"essentially_nonnegative_D", is_essentially_nonnegative(d), ""});
  report.checks.push_back({"essentially_nonnegative_Q", is_essentially_nonnegative(q), ""});
  report.checks.push_back({"irreducible_D", is_irreducible(d), ""});

  bool tri = true;
  bool bidiag = true;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(i - j) > 1 && d(i, j) != 0.0) tri = false;
      if ((i < j || i > j + 1) && q(i, j) != 0.0) bidiag = false;
    }
  }
  report.checks.push_back({"tridiagonal_D", tri, ""});
  report.checks.push_back({"lower_bidiagonal_Q", bidiag, ""});

  const double last_d = topo.boundary == BoundaryCase::StreamToOcean ? -1.0 : 0.0;
  const double last_q = topo.boundary == BoundaryCase::InlandStream ? 0.0 : -1.0;
  auto check_columns = [&](const Matrix& m, double last_expected, const char* name) {
    ValidationCheck check{name, true, ""};
    for (Eigen::Index j = 0; j < n; ++j) {
      const double expected = (j == n - 1) ? last_expected : 0.0;
      const double sum = m.col(j).sum();
      if (std::abs(sum - expected) > 1e-12) {
        check.passed = false;
        check.detail += "column " + std::to_string(j + 1) + " sums to " + std::to_string(sum) +
                        " (expected " + std::to_string(expected) + "); ";
      }
    }
    report.checks.push_back(std::move(check));
  };
  check_columns(d, last_d, "column_sums_D");
  check_columns(q, last_q, "column_sums_Q");
  return report;
}

}  // namespace driftlab
