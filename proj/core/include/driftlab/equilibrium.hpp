#pragma once

#include <span>
#include <utility>

#include "driftlab/spectral.hpp"

namespace driftlab {

/// Movement rates of one species.
struct SpeciesParams {
  double d = 1.0;  ///< diffusion rate, > 0
  double q = 0.0;  ///< advection rate, >= 0
};

/// Throws InvalidArgument unless d > 0 and q >= 0.
void validate(const SpeciesParams& params);

enum class EquilibriumStatus { Positive, Extinction };

struct EquilibriumResult {
  EquilibriumStatus status = EquilibriumStatus::Extinction;
  Vector u;               ///< zero vector on Extinction
  double residual = 0.0;  ///< ||L u + u o (r - u)||_inf
  double lambda1 = 0.0;   ///< principal eigenvalue at u = 0
  bool near_threshold = false;

  bool positive() const { return status == EquilibriumStatus::Positive; }
};

struct EquilibriumOptions {
  double extinction_band = 1e-10;     ///< lambda1 <= band means Extinction
  double seed_rhs_tolerance = 1e-8;   ///< stop the seeding integration here
  double newton_tolerance = 1e-12;    ///< relative to 1 + ||u||_inf
  double max_seed_time = 1e5;
  int max_newton_iterations = 60;
};

/// L u + u o (r - u) for L = d D + q Q.
double equilibrium_residual(const StreamTopology& topo, const SpeciesParams& params,
                            const GrowthProfile& r, const Vector& u);

/// Unique positive steady state of the single-species patch model when
/// lambda1(d, q, r) > 0, otherwise Extinction.
///
/// The solve integrates the ODE from half the scaled principal eigenvector
/// until the right-hand side falls below `seed_rhs_tolerance`, then polishes
/// with Newton on the Jacobian L + diag(r - 2u). Global stability of the
/// positive state puts the seed in Newton's basin. Throws SolverFailure if
/// the polish cannot reach tolerance.
EquilibriumResult single_species_equilibrium(const StreamTopology& topo,
                                             const SpeciesParams& params, const GrowthProfile& r,
                                             const EquilibriumOptions& options = {});

struct OrderingReport {
  bool positive = false;    ///< 0 << u
  bool bounded = false;     ///< u << r
  bool increasing = false;  ///< u_1 < ... < u_n
  /// Monotonicity is only a theorem for the stream-to-lake case.
  bool monotonicity_asserted = false;

  bool holds() const { return positive && bounded && (!monotonicity_asserted || increasing); }
};

/// Ordering facts for a single-species equilibrium under constant growth r.
OrderingReport check_ordering(const Vector& u, const StreamTopology& topo, double r);

enum class SearchStatus { Found, NotFound };

struct CoexistenceSearchResult {
  SearchStatus status = SearchStatus::NotFound;
  Vector u;
  Vector v;
  double residual = 0.0;
  int seed_index = -1;  ///< which seed converged; one past the seeds means the flow-advanced retry

  bool found() const { return status == SearchStatus::Found; }
};

using StatePair = std::pair<Vector, Vector>;

/// Newton search for a positive two-species steady state. Default seeds are
/// (u*/2, v*/2), (3u*/4, v*/4) and (u*/4, 3v*/4), followed by `extra_seeds`.
/// NotFound only means no seed converged to a positive root; it is not a
/// proof that none exists.
CoexistenceSearchResult two_species_equilibrium_search(const StreamTopology& topo,
                                                       const GrowthProfile& r,
                                                       const SpeciesParams& resident,
                                                       const SpeciesParams& invader,
                                                       std::span<const StatePair> extra_seeds = {});

}  // namespace driftlab
