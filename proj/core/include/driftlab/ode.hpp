#pragma once

#include <functional>
#include <span>
#include <vector>

#include "driftlab/topology.hpp"

namespace driftlab {

/// Autonomous right-hand side: writes dy/dt for state y.
using RhsFunction = std::function<void(const Vector& y, Vector& dydt)>;

/// Called after every accepted step with the new time, state and derivative.
/// Returning true stops the integration at that step.
using StopCondition = std::function<bool(double t, const Vector& y, const Vector& dydt)>;

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 0.0;  ///< 0 selects a step from the initial derivative
  double max_step = 0.0;      ///< 0 means unbounded
  long max_steps = 100'000'000;
  /// Project the state onto the nonnegative orthant after each step.
  bool clamp_nonnegative = true;
};

struct IntegrationResult {
  std::vector<double> times;
  std::vector<Vector> states;
  Vector final_state;
  Vector final_derivative;
  double final_time = 0.0;
  long accepted_steps = 0;
  long rejected_steps = 0;
  bool stopped_early = false;
};

/// Dormand-Prince 5(4) with local extrapolation and FSAL. States are stored
/// exactly at `output_times` (which must be increasing and >= t0); the
/// integration ends at the last output time unless `stop` fires first.
/// Throws StepSizeUnderflow when the controller drives h below roundoff.
IntegrationResult integrate_adaptive(const RhsFunction& rhs, const Vector& y0, double t0,
                                     std::span<const double> output_times,
                                     const IntegratorOptions& options = {},
                                     const StopCondition& stop = {});

/// Same tableau with a fixed step and no error control. Used to measure the
/// convergence order.
Vector integrate_fixed_step(const RhsFunction& rhs, const Vector& y0, double t0, double t_end,
                            int steps);

}  // namespace driftlab
