#include "driftlab/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "driftlab/dynamics.hpp"
#include "driftlab/error.hpp"

namespace driftlab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Accepting a residual below the roundoff floor of evaluating L u + u o (r - u)
// keeps large-d solves from failing on arithmetic noise.
double residual_target(double relative_tol, const Matrix& l, const GrowthProfile& r,
                       const Vector& u) {
  const double scale = u.lpNorm<Eigen::Infinity>();
  const double noise =
      16.0 * kEps * (l.lpNorm<Eigen::Infinity>() + r.lpNorm<Eigen::Infinity>() + scale) * scale;
  return std::max(relative_tol * (1.0 + scale), noise);
}

Vector single_residual_vector(const Matrix& l, const GrowthProfile& r, const Vector& u) {
  return l * u + u.cwiseProduct(r - u);
}

Vector competition_residual(const Matrix& l1, const Matrix& l2, const GrowthProfile& r,
                            const Vector& u, const Vector& v) {
  const Vector crowding = r - u - v;
  Vector f(2 * u.size());
  f << l1 * u + u.cwiseProduct(crowding), l2 * v + v.cwiseProduct(crowding);
  return f;
}

}  // namespace

void validate(const SpeciesParams& params) {
  if (!(params.d > 0.0) || !std::isfinite(params.d)) {
    throw Error(ErrorCode::InvalidArgument, "diffusion rate d must be a finite value > 0");
  }
  if (!(params.q >= 0.0) || !std::isfinite(params.q)) {
    throw Error(ErrorCode::InvalidArgument, "advection rate q must be a finite value >= 0");
  }
}

double equilibrium_residual(const StreamTopology& topo, const SpeciesParams& params,
                            const GrowthProfile& r, const Vector& u) {
  const Matrix l = build_connection(topo, params.d, params.q);
  return single_residual_vector(l, r, u).lpNorm<Eigen::Infinity>();
}

EquilibriumResult single_species_equilibrium(const StreamTopology& topo,
                                             const SpeciesParams& params, const GrowthProfile& r,
                                             const EquilibriumOptions& options) {
  validate(params);
  const auto eig = principal_eigenpair(topo, params.d, params.q, r);
  EquilibriumResult result;
  result.lambda1 = eig.lambda;
  result.near_threshold = std::abs(eig.lambda) <= options.extinction_band;
  if (eig.lambda <= options.extinction_band) {
    result.status = EquilibriumStatus::Extinction;
    result.u = Vector::Zero(topo.n);
    return result;
  }

  const Matrix l = build_connection(topo, params.d, params.q);
  const double r_min = r.minCoeff();
  const double scale = r_min > 0.0 ? r_min : r.maxCoeff();
  const Vector seed = 0.5 * scale * eig.phi;

  // Stage 1: ride the globally attracting flow into Newton's basin. At the
  // default rtol the step controller keeps ||rhs|| hovering near 1e-7 when
  // diffusion is fast, so the seed run uses tighter tolerances.
  const double horizon[] = {options.max_seed_time};
  const auto seeded = integrate_adaptive(
      [&](const Vector& u, Vector& dudt) { dudt = single_residual_vector(l, r, u); }, seed, 0.0,
      horizon, IntegratorOptions{.rtol = 1e-11, .atol = 1e-13},
      [&](double, const Vector&, const Vector& dudt) {
        return dudt.lpNorm<Eigen::Infinity>() < options.seed_rhs_tolerance;
      });
  Vector u = seeded.final_state;

  // Stage 2: Newton polish with Jacobian L + diag(r - 2u).
  Vector f = single_residual_vector(l, r, u);
  double res = f.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < options.max_newton_iterations; ++it) {
    if (res <= residual_target(options.newton_tolerance, l, r, u)) break;
    Matrix jac = l;
    jac.diagonal() += r - 2.0 * u;
    const Vector step = jac.partialPivLu().solve(-f);
    // Backtrack if the full step would increase the residual.
    double t = 1.0;
    Vector trial = u + step;
    Vector f_trial = single_residual_vector(l, r, trial);
    while (f_trial.lpNorm<Eigen::Infinity>() > res && t > 1e-4) {
      t *= 0.5;
      trial = u + t * step;
      f_trial = single_residual_vector(l, r, trial);
    }
    u = std::move(trial);
    f = std::move(f_trial);
    res = f.lpNorm<Eigen::Infinity>();
  }

  if (res > residual_target(options.newton_tolerance, l, r, u) || !(u.minCoeff() > 0.0)) {
    throw Error(ErrorCode::SolverFailure,
                "Newton polish stalled at residual " + std::to_string(res) +
                    " (lambda1 = " + std::to_string(eig.lambda) + ")");
  }
  result.status = EquilibriumStatus::Positive;
  result.u = std::move(u);
  result.residual = res;
  return result;
}

OrderingReport check_ordering(const Vector& u, const StreamTopology& topo, double r) {
  OrderingReport report;
  report.positive = u.size() > 0 && u.minCoeff() > 0.0;
  report.bounded = u.size() > 0 && u.maxCoeff() < r;
  report.increasing = true;
  for (Eigen::Index i = 1; i < u.size(); ++i) {
    if (!(u(i) > u(i - 1))) report.increasing = false;
  }
  report.monotonicity_asserted = topo.boundary == BoundaryCase::StreamToLake;
  return report;
}

CoexistenceSearchResult two_species_equilibrium_search(const StreamTopology& topo,
                                                       const GrowthProfile& r,
                                                       const SpeciesParams& resident,
                                                       const SpeciesParams& invader,
                                                       std::span<const StatePair> extra_seeds) {
  const auto n = topo.n;
  const auto u_eq = single_species_equilibrium(topo, resident, r);
  const auto v_eq = single_species_equilibrium(topo, invader, r);
  const Vector& us = u_eq.u;
  const Vector& vs = v_eq.u;

  std::vector<StatePair> seeds{{0.5 * us, 0.5 * vs}, {0.75 * us, 0.25 * vs}, {0.25 * us, 0.75 * vs}};
  seeds.insert(seeds.end(), extra_seeds.begin(), extra_seeds.end());

  const Matrix l1 = build_connection(topo, resident.d, resident.q);
  const Matrix l2 = build_connection(topo, invader.d, invader.q);
  constexpr double kTolerance = 1e-10;
  constexpr double kPositiveFloor = 1e-9;

  CoexistenceSearchResult best;
  auto polish = [&](Vector u, Vector v, int index) {
    if (u.size() != n || v.size() != n) {
      throw Error(ErrorCode::InvalidArgument, "coexistence seed has the wrong length");
    }
    Vector f = competition_residual(l1, l2, r, u, v);
    double res = f.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < 100 && res > kTolerance; ++it) {
      const Vector crowding = r - u - v;
      Matrix jac = Matrix::Zero(2 * n, 2 * n);
      jac.topLeftCorner(n, n) = l1;
      jac.topLeftCorner(n, n).diagonal() += crowding - u;
      jac.topRightCorner(n, n).diagonal() = -u;
      jac.bottomLeftCorner(n, n).diagonal() = -v;
      jac.bottomRightCorner(n, n) = l2;
      jac.bottomRightCorner(n, n).diagonal() += crowding - v;
      // Minimum-norm step: the Jacobian is singular along a continuum of
      // equilibria (identical species).
      const Vector step = jac.completeOrthogonalDecomposition().solve(-f);
      double t = 1.0;
      Vector nu, nv, nf;
      do {
        nu = u + t * step.head(n);
        nv = v + t * step.tail(n);
        nf = competition_residual(l1, l2, r, nu, nv);
        t *= 0.5;
      } while (nf.lpNorm<Eigen::Infinity>() > res && t > 1e-6);
      if (!(nf.lpNorm<Eigen::Infinity>() < res)) break;
      u = std::move(nu);
      v = std::move(nv);
      f = std::move(nf);
      res = f.lpNorm<Eigen::Infinity>();
    }
    if (res <= kTolerance && u.minCoeff() > kPositiveFloor && v.minCoeff() > kPositiveFloor) {
      best.status = SearchStatus::Found;
      best.u = std::move(u);
      best.v = std::move(v);
      best.residual = res;
      best.seed_index = index;
      return true;
    }
    return false;
  };

  for (std::size_t k = 0; k < seeds.size(); ++k) {
    if (polish(seeds[k].first, seeds[k].second, static_cast<int>(k))) return best;
  }
  // Newton's basin can be narrow when one species is nearly absent in some
  // patches; let the flow carry the first seed closer and try once more.
  if (u_eq.positive() && v_eq.positive()) {
    const CompetitionScenario scenario{topo, r, resident, invader};
    const double horizon = 2000.0;
    const auto traj = simulate(scenario, seeds[0].first, seeds[0].second,
                               std::vector<double>{horizon},
                               IntegratorOptions{.rtol = 1e-10, .atol = 1e-12});
    const Vector& y = traj.terminal_state();
    polish(y.head(n), y.tail(n), static_cast<int>(seeds.size()));
  }
  return best;
}

}  // namespace driftlab
