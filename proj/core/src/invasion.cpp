#include "driftlab/invasion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftlab/error.hpp"
#include "driftlab/parallel.hpp"

namespace driftlab {

namespace {

// Bisection on a bracket with f(lo) > 0 >= f(hi) for a decreasing f, or the
// mirror for an increasing one; stops at the requested width or when the
// midpoint can no longer split the interval.
template <typename Fn>
double bisect(Fn&& positive_at, double lo, double hi, double tolerance) {
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (positive_at(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double derivative_at(const StreamTopology& topo, double d, double q, const GrowthProfile& profile) {
  const auto eig = principal_eigenpair(topo, d, q, profile);
  const auto mats = build_matrices(topo);
  const Vector beta = geometric_weights(topo.n, d, q);
  return -weighted_form(mats.diffusion, beta, eig.phi) /
         weighted_form(mats.advection, beta, eig.phi);
}

void require_case_ab(const StreamTopology& topo) {
  if (topo.boundary == BoundaryCase::InlandStream) {
    throw Error(ErrorCode::UnsupportedCase,
                "invasion analysis covers the stream-to-lake and stream-to-ocean cases only");
  }
}

// lambda1(d1, q1, r - v*(d2, q2)); v* = 0 when the invader cannot persist alone.
double resident_eigenvalue_against(const StreamTopology& topo, const GrowthProfile& r,
                                   const SpeciesParams& resident, const SpeciesParams& invader) {
  const auto v = single_species_equilibrium(topo, invader, r);
  return lambda1(topo, resident.d, resident.q, r - v.u);
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }
bool le(double a, double b) { return a <= b || near(a, b); }

}  // namespace

std::optional<double> d_star(const StreamTopology& topo, const GrowthProfile& r,
                             const RootOptions& options) {
  const auto limit = large_diffusion_limit(topo, 0.0, r);
  if (const double* finite = std::get_if<double>(&limit); finite && *finite > 0.0) {
    return std::nullopt;
  }
  auto positive_at = [&](double d) { return lambda1(topo, d, 0.0, r) > 0.0; };
  if (!(r.maxCoeff() > 0.0)) {
    throw Error(ErrorCode::NoRoot, "max r <= 0: lambda1(d, 0, r) is never positive");
  }
  double lo = 1.0;
  int expansions = 0;
  while (!positive_at(lo)) {
    lo *= 0.5;
    if (++expansions > options.max_expansions) {
      throw Error(ErrorCode::NoRoot, "could not find a d with lambda1(d, 0, r) > 0");
    }
  }
  double hi = std::max(1.0, 2.0 * lo);
  expansions = 0;
  while (positive_at(hi)) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > options.max_expansions) {
      throw Error(ErrorCode::NoRoot, "lambda1(d, 0, r) stays positive on the expanded bracket");
    }
  }
  return bisect(positive_at, lo, hi, options.tolerance);
}

double q_star(const StreamTopology& topo, double d, const GrowthProfile& r,
              const RootOptions& options) {
  auto positive_at = [&](double q) { return lambda1(topo, d, q, r) > 0.0; };
  if (!positive_at(0.0)) {
    throw Error(ErrorCode::NotPersistentAtZeroAdvection,
                "lambda1(d, 0, r) <= 0 at d = " + std::to_string(d));
  }
  double lo = 0.0;
  double hi = r.maxCoeff() + 1.0;
  int expansions = 0;
  while (positive_at(hi)) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > options.max_expansions) {
      throw Error(ErrorCode::NoRoot, "lambda1(d, q, r) stays positive as q grows");
    }
  }
  return bisect(positive_at, lo, hi, options.tolerance);
}

double q_star_derivative(const StreamTopology& topo, double d, const GrowthProfile& profile) {
  return derivative_at(topo, d, q_star(topo, d, profile), profile);
}

Resident establish_resident(const StreamTopology& topo, const GrowthProfile& r,
                            const SpeciesParams& resident) {
  require_case_ab(topo);
  validate(resident);
  const auto eq = single_species_equilibrium(topo, resident, r);
  if (!eq.positive()) {
    throw Error(ErrorCode::ResidentNotEstablished,
                "lambda1(d1, q1, r) = " + std::to_string(eq.lambda1) +
                    " <= 0: the resident cannot persist");
  }
  Resident out{resident, eq.u, r - eq.u, std::nullopt};
  if (topo.boundary == BoundaryCase::StreamToOcean) out.d_cutoff = d_star(topo, out.profile);
  return out;
}

CriticalCurve trace_persistence_curve(const StreamTopology& topo, const GrowthProfile& r,
                                      std::span<const double> d_grid,
                                      const CurveOptions& options) {
  CriticalCurve curve;
  curve.profile_tag = CurveProfile::Growth;
  curve.profile = r;
  curve.d_cutoff = d_star(topo, r);
  std::vector<double> grid;
  for (double d : d_grid) {
    if (d > 0.0 && (!curve.d_cutoff || d < *curve.d_cutoff - 1e-6)) grid.push_back(d);
  }
  curve.samples.resize(grid.size());
  parallel_for(grid.size(), options.threads, [&](std::size_t i) {
    CurveSample s;
    s.d = grid[i];
    s.q_star = q_star(topo, s.d, r);
    if (options.derivative) s.derivative = derivative_at(topo, s.d, s.q_star, r);
    curve.samples[i] = s;
  });
  return curve;
}

CriticalCurve trace_invasion_curve(const StreamTopology& topo, const GrowthProfile& r,
                                   const SpeciesParams& resident, std::span<const double> d_grid,
                                   const CurveOptions& options) {
  const auto res = establish_resident(topo, r, resident);
  CriticalCurve curve;
  curve.profile_tag = CurveProfile::ResidentReduced;
  curve.profile = res.profile;
  curve.d_cutoff = res.d_cutoff;
  std::vector<double> grid;
  for (double d : d_grid) {
    if (d > 0.0 && (!curve.d_cutoff || d < *curve.d_cutoff - 1e-6)) grid.push_back(d);
  }
  curve.samples.resize(grid.size());
  parallel_for(grid.size(), options.threads, [&](std::size_t i) {
    CurveSample s;
    s.d = grid[i];
    s.q_star = q_star(topo, s.d, res.profile);
    if (options.derivative) s.derivative = derivative_at(topo, s.d, s.q_star, res.profile);
    if (options.lambda1_star) {
      const SpeciesParams invader{s.d, s.q_star};
      if (lambda1(topo, invader.d, invader.q, r) > 1e-10) {
        s.lambda1_star = resident_eigenvalue_against(topo, r, resident, invader);
      }
    }
    curve.samples[i] = s;
  });
  return curve;
}

Stability stability_from_eigenvalue(double lambda, double band) {
  if (std::abs(lambda) <= band) return Stability::Marginal;
  return lambda < 0.0 ? Stability::Stable : Stability::Unstable;
}

Stability e1_stability(const StreamTopology& topo, const GrowthProfile& r,
                       const SpeciesParams& resident, const SpeciesParams& invader) {
  validate(invader);
  const auto res = establish_resident(topo, r, resident);
  return stability_from_eigenvalue(lambda1(topo, invader.d, invader.q, res.profile));
}

double q2_star(const StreamTopology& topo, const GrowthProfile& r, const SpeciesParams& resident,
               double d2, const RootOptions& options) {
  if (topo.boundary != BoundaryCase::StreamToLake) {
    throw Error(ErrorCode::UnsupportedCase, "q2* is defined for the stream-to-lake case");
  }
  if (!(d2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "d2 must be > 0");
  establish_resident(topo, r, resident);
  auto g = [&](double q2) { return resident_eigenvalue_against(topo, r, resident, {d2, q2}); };
  const double hi = q_star(topo, d2, r);
  if (!(g(0.0) < 0.0)) {
    throw Error(ErrorCode::OutOfRange,
                "lambda1(d1, q1, r - v*(d2, 0)) >= 0 at d2 = " + std::to_string(d2));
  }
  // At q2 = q*_r(d2) the invader is extinct and g = lambda1(d1, q1, r) > 0.
  return bisect([&](double q2) { return g(q2) < 0.0; }, 0.0, hi, options.tolerance);
}

double lambda1_star(const StreamTopology& topo, const GrowthProfile& r,
                    const SpeciesParams& resident, double d2) {
  if (!(d2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "d2 must be > 0");
  const auto res = establish_resident(topo, r, resident);
  if (res.d_cutoff && d2 >= *res.d_cutoff) {
    throw Error(ErrorCode::OutOfRange, "d2 is past the invasion cutoff d**");
  }
  const double q = q_star(topo, d2, res.profile);
  if (!(lambda1(topo, d2, q, r) > 1e-10)) {
    throw Error(ErrorCode::InvaderNotEstablished,
                "v* does not exist at (d2, q*_{r-u*}(d2))");
  }
  return resident_eigenvalue_against(topo, r, resident, {d2, q});
}

InvasionReport classify_point(const StreamTopology& topo, const GrowthProfile& r,
                              const SpeciesParams& resident, const SpeciesParams& invader,
                              const ClassifyOptions& options) {
  validate(invader);
  if (!(resident.q > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "region classification needs q1 > 0");
  }
  const auto res = establish_resident(topo, r, resident);
  const double d1 = resident.d;
  const double q1 = resident.q;
  const double d2 = invader.d;
  const double q2 = invader.q;
  const bool ocean = topo.boundary == BoundaryCase::StreamToOcean;

  InvasionReport report;
  report.lambda_e1 = lambda1(topo, d2, q2, res.profile);
  report.e1 = stability_from_eigenvalue(report.lambda_e1, options.stability_band);
  const auto v_eq = single_species_equilibrium(topo, invader, r);
  if (v_eq.positive()) {
    report.lambda_e2 = lambda1(topo, d1, q1, r - v_eq.u);
    report.e2 = stability_from_eigenvalue(*report.lambda_e2, options.stability_band);
  } else {
    report.e2 = Stability::NotExists;
  }

  const bool past_cutoff = res.d_cutoff && d2 >= *res.d_cutoff;
  if (!past_cutoff) report.q_curve = q_star(topo, d2, res.profile);

  const bool at_resident = near(d2, d1) && near(q2, q1);
  const double ray_d = d1 / q1 * q2;  // d on the ray q = (q1/d1) d at height q2
  if (at_resident || (report.q_curve && std::abs(q2 - *report.q_curve) <= options.region_band)) {
    report.region = RegionLabel::Boundary;
  } else if (!ocean && le(d2, ray_d) && le(q1, q2)) {
    report.region = RegionLabel::G1;
  } else if (!ocean && le(ray_d, d2) && q2 > 0.0 && le(q2, q1)) {
    report.region = RegionLabel::G2;
  } else if (ocean && d2 > d1 && !near(d2, d1) && le(d2, ray_d)) {
    report.region = RegionLabel::G1star;
  } else if (ocean && le(ray_d, d2) && le(d2, d1) && q2 > 0.0) {
    report.region = RegionLabel::G2star;
  } else if (past_cutoff || q2 > *report.q_curve) {
    report.region = ocean ? RegionLabel::S1star : RegionLabel::S1only;
  } else {
    report.region = ocean ? RegionLabel::S2star : RegionLabel::S2only;
  }

  switch (report.region) {
    case RegionLabel::G1:
    case RegionLabel::G1star:
      report.predicted = Prediction::E1GloballyStable;
      break;
    case RegionLabel::G2:
    case RegionLabel::G2star:
      report.predicted = Prediction::E2GloballyStable;
      break;
    case RegionLabel::Boundary:
      report.predicted = Prediction::Undetermined;
      break;
    default:
      if (report.e1 == Stability::Unstable && report.e2 == Stability::Unstable) {
        report.predicted = Prediction::Coexist;
      } else if (report.e1 == Stability::Stable && report.e2 == Stability::Stable) {
        report.predicted = Prediction::Bistable;
      } else if (report.e1 == Stability::Stable && report.e2 == Stability::NotExists) {
        // v alone dies out, and competition only lowers its growth.
        report.predicted = Prediction::E1GloballyStable;
      } else {
        report.predicted = Prediction::Undetermined;
      }
  }
  return report;
}

std::string_view to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::G1: return "G1";
    case RegionLabel::G2: return "G2";
    case RegionLabel::S1only: return "S1only";
    case RegionLabel::S2only: return "S2only";
    case RegionLabel::Boundary: return "Boundary";
    case RegionLabel::G1star: return "G1star";
    case RegionLabel::G2star: return "G2star";
    case RegionLabel::S1star: return "S1star";
    case RegionLabel::S2star: return "S2star";
  }
  return "?";
}

std::string_view to_string(Stability stability) {
  switch (stability) {
    case Stability::Stable: return "Stable";
    case Stability::Unstable: return "Unstable";
    case Stability::Marginal: return "Marginal";
    case Stability::NotExists: return "NotExists";
  }
  return "?";
}

std::string_view to_string(Prediction prediction) {
  switch (prediction) {
    case Prediction::E1GloballyStable: return "E1GloballyStable";
    case Prediction::E2GloballyStable: return "E2GloballyStable";
    case Prediction::Coexist: return "Coexist";
    case Prediction::Bistable: return "Bistable";
    case Prediction::Undetermined: return "Undetermined";
  }
  return "?";
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (count <= 0) return {};
  if (!(lo > 0.0) || !(hi >= lo)) {
    throw Error(ErrorCode::InvalidArgument, "log grid needs 0 < lo <= hi");
  }
  if (count == 1) return {lo};
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) {
    grid[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  if (count <= 0) return {};
  if (!(hi >= lo)) throw Error(ErrorCode::InvalidArgument, "linear grid needs lo <= hi");
  if (count == 1) return {lo};
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  }
  return grid;
}

}  // namespace driftlab
