#pragma once

#include <variant>

#include "driftlab/topology.hpp"

namespace driftlab {

/// Intrinsic growth rate per patch; length must equal the patch count.
using GrowthProfile = Vector;

enum class EigenMethod { PowerIteration, DenseFallback };

/// Principal eigenpair of an irreducible essentially nonnegative matrix.
/// phi is strictly positive and normalised so that its entries sum to 1.
struct EigenResult {
  double lambda = 0.0;
  Vector phi;
  double residual = 0.0;  ///< ||A phi - lambda phi||_inf
  int iterations = 0;
  EigenMethod method = EigenMethod::PowerIteration;
};

struct PowerIterationOptions {
  double tolerance = 1e-13;  ///< relative to 1 + |rho|
  int max_iterations = 200000;
};

/// Shifted power iteration on B = A + sigma I, sigma = 1 + max_i |A_ii|.
/// B is nonnegative with a positive diagonal, hence primitive when A is
/// irreducible, so the iteration converges to the Perron vector from the
/// uniform start. Throws NonConvergence once the budget is spent.
EigenResult power_iteration(const Matrix& a, const PowerIterationOptions& options = {});

/// Full dense spectrum, rightmost real part, then inverse iteration just to
/// the right of it for the positive eigenvector.
EigenResult dense_principal_eigenpair(const Matrix& a);

/// Spectral bound s(A) with its positive eigenvector. Uses power iteration
/// and falls back to the dense route when that stalls.
/// Throws NotIrreducible, or InvalidArgument for a negative off-diagonal.
EigenResult spectral_bound(const Matrix& a, const PowerIterationOptions& options = {});

/// d D + q Q + diag(r).
Matrix growth_operator(const StreamTopology& topo, double d, double q, const GrowthProfile& r);

EigenResult principal_eigenpair(const StreamTopology& topo, double d, double q,
                                const GrowthProfile& r);

/// Principal eigenvalue of d D + q Q + diag(r).
double lambda1(const StreamTopology& topo, double d, double q, const GrowthProfile& r);

/// beta_i = (d / (d + q))^(i - 1). Left-multiplying the connection matrix by
/// diag(beta) makes it symmetric, so beta o phi is the left eigenvector.
Vector geometric_weights(int n, double d, double q);

/// sum_ij beta_i M_ij phi_i phi_j
double weighted_form(const Matrix& m, const Vector& beta, const Vector& phi);

/// Exact derivative of lambda1 in q:
///   (sum_ij beta_i Q_ij phi_i phi_j) / (sum_i beta_i phi_i^2).
double dlambda1_dq(const StreamTopology& topo, double d, double q, const GrowthProfile& r);

/// Same construction with D in place of Q.
double dlambda1_dd(const StreamTopology& topo, double d, double q, const GrowthProfile& r);

struct MinusInfinity {
  friend bool operator==(MinusInfinity, MinusInfinity) { return true; }
};

/// Either a finite limit or the explicit -infinity marker.
using LimitValue = std::variant<double, MinusInfinity>;

/// lim_{d -> infinity} lambda1(d, q, r). Case a: (sum r - q) / n. Case b:
/// MinusInfinity. Case c: mean(r), since every column of Q sums to 0.
LimitValue large_diffusion_limit(const StreamTopology& topo, double q, const GrowthProfile& r);

/// lim_{d -> 0} lambda1(d, q, r), the largest diagonal entry of q Q + diag(r).
/// Cases a and b give max r - q.
double small_diffusion_limit(const StreamTopology& topo, double q, const GrowthProfile& r);

}  // namespace driftlab
