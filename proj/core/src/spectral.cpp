#include "driftlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftlab/error.hpp"

namespace driftlab {

namespace {

void require_square(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, "spectral bound needs a non-empty square matrix");
  }
}

void require_profile(const StreamTopology& topo, const GrowthProfile& r) {
  if (r.size() != topo.n) {
    throw Error(ErrorCode::InvalidArgument, "growth profile has " + std::to_string(r.size()) +
                                                " entries but the stream has " +
                                                std::to_string(topo.n) + " patches");
  }
}

}  // namespace

EigenResult power_iteration(const Matrix& a, const PowerIterationOptions& options) {
  require_square(a);
  const auto n = a.rows();
  const double sigma = 1.0 + a.diagonal().cwiseAbs().maxCoeff();
  Matrix b = a;
  b.diagonal().array() += sigma;

  Vector phi = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector y(n);
  for (int it = 1; it <= options.max_iterations; ++it) {
    y.noalias() = b * phi;
    // sum(phi) == 1, so this is the Collatz-Wielandt style estimate of rho(B).
    const double rho = y.sum();
    const double residual = (y - rho * phi).lpNorm<Eigen::Infinity>();
    if (residual <= options.tolerance * (1.0 + std::abs(rho))) {
      return {rho - sigma, phi, residual, it, EigenMethod::PowerIteration};
    }
    phi = y / rho;
  }
  throw Error(ErrorCode::NonConvergence,
              "power iteration did not converge in " + std::to_string(options.max_iterations) +
                  " iterations");
}

EigenResult dense_principal_eigenpair(const Matrix& a) {
  require_square(a);
  const auto n = a.rows();
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::SolverFailure, "dense eigensolver failed");
  }
  const double lambda = solver.eigenvalues().real().maxCoeff();

  // Just right of s(A), mu I - A is a nonsingular M-matrix whose inverse is
  // entrywise positive, so inverse iteration keeps the iterate positive.
  const double scale = 1.0 + a.lpNorm<Eigen::Infinity>();
  const double mu = lambda + 1e-9 * scale;
  Matrix shifted = a;
  shifted.diagonal().array() -= mu;
  Eigen::PartialPivLU<Matrix> lu(shifted);

  Vector phi = Vector::Constant(n, 1.0 / static_cast<double>(n));
  int iterations = 0;
  for (; iterations < 8; ++iterations) {
    Vector x = lu.solve(phi);
    x /= x.sum();
    const double change = (x - phi).lpNorm<Eigen::Infinity>();
    phi = x;
    if (change <= 1e-15) break;
  }
  phi = phi.cwiseMax(0.0);
  phi /= phi.sum();
  const double residual = (a * phi - lambda * phi).lpNorm<Eigen::Infinity>();
  return {lambda, phi, residual, iterations + 1, EigenMethod::DenseFallback};
}

EigenResult spectral_bound(const Matrix& a, const PowerIterationOptions& options) {
  require_square(a);
  if (!is_essentially_nonnegative(a)) {
    throw Error(ErrorCode::InvalidArgument, "matrix has a negative off-diagonal entry");
  }
  if (!is_irreducible(a)) {
    throw Error(ErrorCode::NotIrreducible, "matrix graph is not strongly connected");
  }
  try {
    return power_iteration(a, options);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonConvergence) throw;
  }
  return dense_principal_eigenpair(a);
}

Matrix growth_operator(const StreamTopology& topo, double d, double q, const GrowthProfile& r) {
  require_profile(topo, r);
  Matrix a = build_connection(topo, d, q);
  a.diagonal() += r;
  return a;
}

EigenResult principal_eigenpair(const StreamTopology& topo, double d, double q,
                                const GrowthProfile& r) {
  return spectral_bound(growth_operator(topo, d, q, r));
}

double lambda1(const StreamTopology& topo, double d, double q, const GrowthProfile& r) {
  return principal_eigenpair(topo, d, q, r).lambda;
}

Vector geometric_weights(int n, double d, double q) {
  Vector beta(n);
  const double ratio = d / (d + q);
  beta(0) = 1.0;
  for (int i = 1; i < n; ++i) beta(i) = beta(i - 1) * ratio;
  return beta;
}

double weighted_form(const Matrix& m, const Vector& beta, const Vector& phi) {
  return beta.cwiseProduct(phi).dot(m * phi);
}

double dlambda1_dq(const StreamTopology& topo, double d, double q, const GrowthProfile& r) {
  const auto eig = principal_eigenpair(topo, d, q, r);
  const auto mats = build_matrices(topo);
  const Vector beta = geometric_weights(topo.n, d, q);
  // Denominator >= beta_n * min(phi)^2 > 0.
  return weighted_form(mats.advection, beta, eig.phi) /
         beta.dot(eig.phi.cwiseProduct(eig.phi));
}

double dlambda1_dd(const StreamTopology& topo, double d, double q, const GrowthProfile& r) {
  const auto eig = principal_eigenpair(topo, d, q, r);
  const auto mats = build_matrices(topo);
  const Vector beta = geometric_weights(topo.n, d, q);
  return weighted_form(mats.diffusion, beta, eig.phi) /
         beta.dot(eig.phi.cwiseProduct(eig.phi));
}

LimitValue large_diffusion_limit(const StreamTopology& topo, double q, const GrowthProfile& r) {
  require_profile(topo, r);
  if (!(q >= 0.0)) throw Error(ErrorCode::InvalidArgument, "advection rate q must be >= 0");
  const double n = static_cast<double>(topo.n);
  switch (topo.boundary) {
    case BoundaryCase::StreamToLake: return (r.sum() - q) / n;
    case BoundaryCase::StreamToOcean: return MinusInfinity{};
    case BoundaryCase::InlandStream: return r.sum() / n;
  }
  return MinusInfinity{};
}

double small_diffusion_limit(const StreamTopology& topo, double q, const GrowthProfile& r) {
  require_profile(topo, r);
  if (!(q >= 0.0)) throw Error(ErrorCode::InvalidArgument, "advection rate q must be >= 0");
  // q Q + diag(r) is lower triangular; its eigenvalues are its diagonal.
  const auto mats = build_matrices(topo);
  return (r + q * mats.advection.diagonal()).maxCoeff();
}

}  // namespace driftlab
