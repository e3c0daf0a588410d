#include "driftlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "driftlab/error.hpp"

namespace driftlab {

namespace {

void require_state(const StreamTopology& topo, const Vector& x, const char* name) {
  if (x.size() != topo.n) {
    throw Error(ErrorCode::InvalidArgument, std::string(name) + " must have one entry per patch");
  }
  if ((x.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be nonnegative");
  }
}

RhsFunction competition_rhs(const CompetitionScenario& s) {
  const auto n = s.topo.n;
  return [n, r = s.r, l1 = build_connection(s.topo, s.resident.d, s.resident.q),
          l2 = build_connection(s.topo, s.invader.d, s.invader.q)](const Vector& y, Vector& dydt) {
    const auto u = y.head(n);
    const auto v = y.tail(n);
    const Vector crowding = r - u - v;
    dydt.head(n).noalias() = l1 * u;
    dydt.head(n) += u.cwiseProduct(crowding);
    dydt.tail(n).noalias() = l2 * v;
    dydt.tail(n) += v.cwiseProduct(crowding);
  };
}

RhsFunction single_rhs(const StreamTopology& topo, const SpeciesParams& p, const GrowthProfile& r) {
  return [r, l = build_connection(topo, p.d, p.q)](const Vector& u, Vector& dudt) {
    dudt.noalias() = l * u;
    dudt += u.cwiseProduct(r - u);
  };
}

Vector stack(const Vector& u, const Vector& v) {
  Vector y(u.size() + v.size());
  y << u, v;
  return y;
}

std::optional<Vector> semi_trivial(const StreamTopology& topo, const SpeciesParams& p,
                                   const GrowthProfile& r) {
  auto eq = single_species_equilibrium(topo, p, r);
  if (!eq.positive()) return std::nullopt;
  return std::move(eq.u);
}

struct SemiTrivialStates {
  std::optional<Vector> u_star;
  std::optional<Vector> v_star;
};

Outcome classify_terminal(const Vector& state, double rhs_norm, double horizon, int n,
                          const SemiTrivialStates& eq, const OutcomeThresholds& th) {
  const Vector u = state.head(n);
  const Vector v = state.tail(n);
  const double u_max = u.lpNorm<Eigen::Infinity>();
  const double v_max = v.lpNorm<Eigen::Infinity>();
  OutcomeTag tag = OutcomeTag::Undecided;
  if (u_max < th.extinction && v_max < th.extinction) {
    tag = OutcomeTag::Extinct;
  } else if (v_max < th.extinction && eq.u_star &&
             (u - *eq.u_star).lpNorm<Eigen::Infinity>() < th.equilibrium_match) {
    tag = OutcomeTag::E1Wins;
  } else if (u_max < th.extinction && eq.v_star &&
             (v - *eq.v_star).lpNorm<Eigen::Infinity>() < th.equilibrium_match) {
    tag = OutcomeTag::E2Wins;
  } else if (u.maxCoeff() > th.coexistence_floor && v.maxCoeff() > th.coexistence_floor &&
             rhs_norm < th.steady_rhs) {
    tag = OutcomeTag::Coexistence;
  }
  return {tag, state, horizon};
}

}  // namespace

void validate(const CompetitionScenario& scenario) {
  if (scenario.topo.n < 2) throw Error(ErrorCode::InvalidArgument, "patch count n must be >= 2");
  if (scenario.r.size() != scenario.topo.n) {
    throw Error(ErrorCode::InvalidArgument, "growth profile length must equal n");
  }
  validate(scenario.resident);
  validate(scenario.invader);
}

Vector rhs_single(const StreamTopology& topo, const SpeciesParams& params, const GrowthProfile& r,
                  const Vector& u) {
  if (u.size() != topo.n || r.size() != topo.n) {
    throw Error(ErrorCode::InvalidArgument, "state and growth profile must have n entries");
  }
  Vector out(topo.n);
  single_rhs(topo, params, r)(u, out);
  return out;
}

Vector rhs_competition(const CompetitionScenario& scenario, const Vector& u, const Vector& v) {
  validate(scenario);
  if (u.size() != scenario.topo.n || v.size() != scenario.topo.n) {
    throw Error(ErrorCode::InvalidArgument, "u and v must have n entries");
  }
  Vector out(2 * scenario.topo.n);
  competition_rhs(scenario)(stack(u, v), out);
  return out;
}

std::string_view to_string(OutcomeTag tag) {
  switch (tag) {
    case OutcomeTag::E1Wins: return "E1Wins";
    case OutcomeTag::E2Wins: return "E2Wins";
    case OutcomeTag::Coexistence: return "Coexistence";
    case OutcomeTag::Extinct: return "Extinct";
    case OutcomeTag::Undecided: return "Undecided";
  }
  return "?";
}

std::vector<double> uniform_times(double t_end, int count) {
  if (count < 1) return {t_end};
  std::vector<double> times(static_cast<std::size_t>(count) + 1);
  for (int i = 0; i <= count; ++i) times[static_cast<std::size_t>(i)] = t_end * i / count;
  return times;
}

Trajectory simulate_single(const StreamTopology& topo, const SpeciesParams& params,
                           const GrowthProfile& r, const Vector& u0,
                           std::span<const double> output_times, const IntegratorOptions& options) {
  validate(params);
  require_state(topo, u0, "u0");
  const auto f = single_rhs(topo, params, r);
  auto run = integrate_adaptive(f, u0, 0.0, output_times, options);
  Trajectory traj{std::move(run.times), std::move(run.states), 0.0,
                  run.accepted_steps};
  traj.terminal_rhs_norm = run.final_derivative.lpNorm<Eigen::Infinity>();
  return traj;
}

Trajectory simulate(const CompetitionScenario& scenario, const Vector& u0, const Vector& v0,
                    std::span<const double> output_times, const IntegratorOptions& options) {
  validate(scenario);
  require_state(scenario.topo, u0, "u0");
  require_state(scenario.topo, v0, "v0");
  const auto f = competition_rhs(scenario);
  auto run = integrate_adaptive(f, stack(u0, v0), 0.0, output_times, options);
  Trajectory traj{std::move(run.times), std::move(run.states), 0.0, run.accepted_steps};
  traj.terminal_rhs_norm = run.final_derivative.lpNorm<Eigen::Infinity>();
  return traj;
}

Outcome detect_outcome(const Trajectory& trajectory, const CompetitionScenario& scenario,
                       const OutcomeThresholds& thresholds) {
  validate(scenario);
  if (trajectory.states.empty()) {
    throw Error(ErrorCode::InvalidArgument, "trajectory has no stored states");
  }
  const SemiTrivialStates eq{semi_trivial(scenario.topo, scenario.resident, scenario.r),
                             semi_trivial(scenario.topo, scenario.invader, scenario.r)};
  return classify_terminal(trajectory.terminal_state(), trajectory.terminal_rhs_norm,
                           trajectory.times.back(), scenario.topo.n, eq, thresholds);
}

Outcome run_until_decided(const CompetitionScenario& scenario, const Vector& u0, const Vector& v0,
                          const OutcomeRunOptions& options) {
  validate(scenario);
  require_state(scenario.topo, u0, "u0");
  require_state(scenario.topo, v0, "v0");
  const SemiTrivialStates eq{semi_trivial(scenario.topo, scenario.resident, scenario.r),
                             semi_trivial(scenario.topo, scenario.invader, scenario.r)};
  const auto f = competition_rhs(scenario);

  Vector y = stack(u0, v0);
  double t = 0.0;
  double horizon = options.horizon;
  Outcome outcome;
  while (true) {
    const double stop_at[] = {horizon};
    const auto run = integrate_adaptive(f, y, t, stop_at, options.integrator);
    y = run.final_state;
    t = run.final_time;
    outcome = classify_terminal(y, run.final_derivative.lpNorm<Eigen::Infinity>(), t,
                                scenario.topo.n, eq, options.thresholds);
    if (outcome.tag != OutcomeTag::Undecided || horizon >= options.max_horizon) break;
    horizon = std::min(2.0 * horizon, options.max_horizon);
  }
  return outcome;
}

bool ProbeResult::bistable() const {
  const auto a = invader_favoured.tag;
  const auto b = resident_favoured.tag;
  return (a == OutcomeTag::E1Wins && b == OutcomeTag::E2Wins) ||
         (a == OutcomeTag::E2Wins && b == OutcomeTag::E1Wins);
}

ProbeResult bistability_probe(const CompetitionScenario& scenario,
                              const OutcomeRunOptions& options) {
  const auto n = scenario.topo.n;
  return {run_until_decided(scenario, Vector::Constant(n, 0.1), Vector::Constant(n, 2.0), options),
          run_until_decided(scenario, Vector::Constant(n, 5.0), Vector::Constant(n, 1.0), options)};
}

bool k_order_check(const CompetitionScenario& scenario, const StatePair& lower,
                   const StatePair& upper, std::span<const double> sample_times, double tolerance,
                   const IntegratorOptions& options) {
  validate(scenario);
  const auto& [ua, va] = lower;
  const auto& [ub, vb] = upper;
  if (ua.size() != ub.size() || va.size() != vb.size() || ua.size() != scenario.topo.n ||
      va.size() != scenario.topo.n) {
    throw Error(ErrorCode::InvalidArgument, "initial states must have n entries");
  }
  if ((ua.array() > ub.array()).any() || (va.array() < vb.array()).any()) {
    throw Error(ErrorCode::PreconditionViolation,
                "initial data are not K-ordered (need u_a <= u_b and v_a >= v_b)");
  }
  const auto a = simulate(scenario, ua, va, sample_times, options);
  const auto b = simulate(scenario, ub, vb, sample_times, options);
  const auto n = scenario.topo.n;
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    const auto& ya = a.states[k];
    const auto& yb = b.states[k];
    if ((ya.head(n).array() > yb.head(n).array() + tolerance).any()) return false;
    if ((ya.tail(n).array() < yb.tail(n).array() - tolerance).any()) return false;
  }
  return true;
}

}  // namespace driftlab
