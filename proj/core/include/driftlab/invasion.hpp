#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "driftlab/equilibrium.hpp"

namespace driftlab {

struct RootOptions {
  double tolerance = 1e-10;  ///< final bracket width
  int max_expansions = 60;   ///< bracket doublings before giving up
};

/// Diffusion rate where lambda1(d, 0, r) crosses zero. Returns nullopt
/// (not applicable) when lambda1(d, 0, r) stays positive for every d, which
/// happens with zero column sums and sum(r) > 0. Throws NoRoot when no sign
/// change can be bracketed.
std::optional<double> d_star(const StreamTopology& topo, const GrowthProfile& r,
                             const RootOptions& options = {});

/// Critical advection q*_r(d): the unique root in q of lambda1(d, q, r) = 0.
/// Throws NotPersistentAtZeroAdvection when lambda1(d, 0, r) <= 0.
double q_star(const StreamTopology& topo, double d, const GrowthProfile& r,
              const RootOptions& options = {});

/// Derivative of d -> q*_profile(d) from the weighted eigenvector forms:
///   -(sum beta_i D_ij phi_i phi_j) / (sum beta_i Q_ij phi_i phi_j)
/// at the eigenvector of (d, q*(d)) with beta built from q*(d).
double q_star_derivative(const StreamTopology& topo, double d, const GrowthProfile& profile);

/// The established resident u and the reduced profile r - u* felt by a rare
/// invader.
struct Resident {
  SpeciesParams params;
  Vector u_star;
  Vector profile;                   ///< r - u*
  std::optional<double> d_cutoff;   ///< d** for the ocean case
};

/// Throws ResidentNotEstablished unless lambda1(d1, q1, r) > 0, and
/// UnsupportedCase for the inland stream.
Resident establish_resident(const StreamTopology& topo, const GrowthProfile& r,
                            const SpeciesParams& resident);

enum class CurveProfile { Growth, ResidentReduced };

struct CurveSample {
  double d = 0.0;
  double q_star = 0.0;
  std::optional<double> derivative;
  std::optional<double> lambda1_star;
};

struct CriticalCurve {
  CurveProfile profile_tag = CurveProfile::Growth;
  Vector profile;
  std::optional<double> d_cutoff;  ///< grid points at or past this were dropped
  std::vector<CurveSample> samples;
};

struct CurveOptions {
  bool derivative = true;
  bool lambda1_star = true;  ///< only meaningful for the invasion curve
  int threads = 1;
};

/// q*_r(d) over the grid. In the ocean case the grid is clamped below d*.
CriticalCurve trace_persistence_curve(const StreamTopology& topo, const GrowthProfile& r,
                                      std::span<const double> d_grid,
                                      const CurveOptions& options = {});

/// q*_{r-u*}(d) over the grid, computing u* once. In the ocean case the grid
/// is clamped to (0, d** - 1e-6).
CriticalCurve trace_invasion_curve(const StreamTopology& topo, const GrowthProfile& r,
                                   const SpeciesParams& resident, std::span<const double> d_grid,
                                   const CurveOptions& options = {});

enum class Stability { Stable, Unstable, Marginal, NotExists };

/// Negative => Stable, positive => Unstable, |lambda| <= band => Marginal.
Stability stability_from_eigenvalue(double lambda, double band = 1e-10);

/// Linear stability of (u*, 0) against invader p2: sign of
/// lambda1(d2, q2, r - u*).
Stability e1_stability(const StreamTopology& topo, const GrowthProfile& r,
                       const SpeciesParams& resident, const SpeciesParams& invader);

/// q2*(d2): the q2 at which (0, v*(d2, q2)) changes stability, i.e. the root
/// of lambda1(d1, q1, r - v*(d2, q2)) = 0. Stream-to-lake only.
/// Throws OutOfRange when the bracket [0, q*_r(d2)] shows no sign change.
double q2_star(const StreamTopology& topo, const GrowthProfile& r, const SpeciesParams& resident,
               double d2, const RootOptions& options = {});

/// lambda1(d1, q1, r - v*(d2, q*_{r-u*}(d2))). Its sign orders q2*(d2)
/// against the invasion curve. Throws InvaderNotEstablished when v* does not
/// exist at that point.
double lambda1_star(const StreamTopology& topo, const GrowthProfile& r,
                    const SpeciesParams& resident, double d2);

enum class RegionLabel { G1, G2, S1only, S2only, Boundary, G1star, G2star, S1star, S2star };

enum class Prediction { E1GloballyStable, E2GloballyStable, Coexist, Bistable, Undetermined };

struct InvasionReport {
  RegionLabel region = RegionLabel::Boundary;
  Stability e1 = Stability::Marginal;
  Stability e2 = Stability::NotExists;
  Prediction predicted = Prediction::Undetermined;
  std::optional<double> q_curve;  ///< q*_{r-u*}(d2) when defined
  double lambda_e1 = 0.0;         ///< lambda1(d2, q2, r - u*)
  std::optional<double> lambda_e2;
};

struct ClassifyOptions {
  double region_band = 1e-8;     ///< q-distance to the curve labelled Boundary
  double stability_band = 1e-10;
};

/// Places (d2, q2) in the region picture around the resident (d1, q1) and
/// predicts the competition outcome. Requires q1 > 0 and an established
/// resident.
InvasionReport classify_point(const StreamTopology& topo, const GrowthProfile& r,
                              const SpeciesParams& resident, const SpeciesParams& invader,
                              const ClassifyOptions& options = {});

std::string_view to_string(RegionLabel label);
std::string_view to_string(Stability stability);
std::string_view to_string(Prediction prediction);

/// `count` points from lo to hi inclusive, geometric spacing (lo > 0).
std::vector<double> log_grid(double lo, double hi, int count);
/// `count` points from lo to hi inclusive, even spacing.
std::vector<double> linear_grid(double lo, double hi, int count);

}  // namespace driftlab
