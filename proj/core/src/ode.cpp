#include "driftlab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftlab/error.hpp"

namespace driftlab {

namespace {

// Dormand & Prince (1980) RK5(4)7M coefficients.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// Fifth-order weights minus the embedded fourth-order weights.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

struct Stages {
  explicit Stages(Eigen::Index n)
      : k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n) {}
  Vector k1, k2, k3, k4, k5, k6, k7, tmp, y_new;
};

// One step from (y, k1 = f(y)); fills y_new and k7 = f(y_new).
void dp_step(const RhsFunction& rhs, const Vector& y, double h, Stages& s) {
  s.tmp = y + h * a21 * s.k1;
  rhs(s.tmp, s.k2);
  s.tmp = y + h * (a31 * s.k1 + a32 * s.k2);
  rhs(s.tmp, s.k3);
  s.tmp = y + h * (a41 * s.k1 + a42 * s.k2 + a43 * s.k3);
  rhs(s.tmp, s.k4);
  s.tmp = y + h * (a51 * s.k1 + a52 * s.k2 + a53 * s.k3 + a54 * s.k4);
  rhs(s.tmp, s.k5);
  s.tmp = y + h * (a61 * s.k1 + a62 * s.k2 + a63 * s.k3 + a64 * s.k4 + a65 * s.k5);
  rhs(s.tmp, s.k6);
  s.y_new = y + h * (b1 * s.k1 + b3 * s.k3 + b4 * s.k4 + b5 * s.k5 + b6 * s.k6);
  rhs(s.y_new, s.k7);
}

double error_norm(const Vector& y, const Stages& s, double h, const IntegratorOptions& opt) {
  const Vector err =
      h * (e1 * s.k1 + e3 * s.k3 + e4 * s.k4 + e5 * s.k5 + e6 * s.k6 + e7 * s.k7);
  const Vector scale =
      (opt.atol + opt.rtol * y.cwiseAbs().cwiseMax(s.y_new.cwiseAbs()).array()).matrix();
  return std::sqrt(err.cwiseQuotient(scale).squaredNorm() / static_cast<double>(y.size()));
}

double initial_step(const RhsFunction& rhs, const Vector& y0, const Vector& f0,
                    const IntegratorOptions& opt) {
  const Vector scale = (opt.atol + opt.rtol * y0.cwiseAbs().array()).matrix();
  const double n = static_cast<double>(y0.size());
  const double d0 = std::sqrt(y0.cwiseQuotient(scale).squaredNorm() / n);
  const double d1 = std::sqrt(f0.cwiseQuotient(scale).squaredNorm() / n);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  const Vector y1 = y0 + h0 * f0;
  Vector f1(y0.size());
  rhs(y1, f1);
  const double d2 = std::sqrt((f1 - f0).cwiseQuotient(scale).squaredNorm() / n) / h0;
  const double h1 = (std::max(d1, d2) <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                 : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
  return std::min(100.0 * h0, h1);
}

}  // namespace

IntegrationResult integrate_adaptive(const RhsFunction& rhs, const Vector& y0, double t0,
                                     std::span<const double> output_times,
                                     const IntegratorOptions& options, const StopCondition& stop) {
  for (std::size_t k = 0; k < output_times.size(); ++k) {
    if (output_times[k] < t0 || (k > 0 && !(output_times[k] > output_times[k - 1]))) {
      throw Error(ErrorCode::InvalidArgument, "output times must increase from t0");
    }
  }
  IntegrationResult result;
  const auto n = y0.size();
  Vector y = y0;
  if (options.clamp_nonnegative) y = y.cwiseMax(0.0);
  double t = t0;
  Stages s(n);
  rhs(y, s.k1);

  std::size_t next = 0;
  while (next < output_times.size() && output_times[next] <= t) {
    result.times.push_back(output_times[next]);
    result.states.push_back(y);
    ++next;
  }

  double h = options.initial_step > 0.0 ? options.initial_step : initial_step(rhs, y, s.k1, options);
  if (options.max_step > 0.0) h = std::min(h, options.max_step);

  while (next < output_times.size()) {
    if (result.accepted_steps + result.rejected_steps >= options.max_steps) {
      throw Error(ErrorCode::StepSizeUnderflow,
                  "step budget exhausted at t = " + std::to_string(t));
    }
    const double target = output_times[next];
    const bool hits_target = t + h >= target;
    const double step = hits_target ? target - t : h;
    if (step <= 1e-13 * std::max(1.0, std::abs(t))) {
      if (hits_target) {
        // Already at the target up to roundoff.
        t = target;
      } else {
        throw Error(ErrorCode::StepSizeUnderflow,
                    "step size underflow at t = " + std::to_string(t));
      }
    } else {
      dp_step(rhs, y, step, s);
      const double err = error_norm(y, s, step, options);
      if (!(err <= 1.0)) {
        ++result.rejected_steps;
        const double factor = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.1;
        h = step * factor;
        continue;
      }
      ++result.accepted_steps;
      t = hits_target ? target : t + step;
      y = s.y_new;
      if (options.clamp_nonnegative && y.minCoeff() < 0.0) {
        y = y.cwiseMax(0.0);
        rhs(y, s.k1);
      } else {
        s.k1 = s.k7;
      }
      const double factor = err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
      // A step shortened to land on an output time does not shrink the next one.
      const double proposal = step * factor;
      h = hits_target ? std::max(h, proposal) : proposal;
      if (options.max_step > 0.0) h = std::min(h, options.max_step);
    }

    while (next < output_times.size() && output_times[next] <= t) {
      result.times.push_back(output_times[next]);
      result.states.push_back(y);
      ++next;
    }
    if (stop && stop(t, y, s.k1)) {
      result.stopped_early = true;
      break;
    }
  }

  result.final_state = y;
  result.final_derivative = s.k1;
  result.final_time = t;
  return result;
}

Vector integrate_fixed_step(const RhsFunction& rhs, const Vector& y0, double t0, double t_end,
                            int steps) {
  if (steps <= 0) throw Error(ErrorCode::InvalidArgument, "fixed-step integration needs steps > 0");
  const double h = (t_end - t0) / steps;
  Stages s(y0.size());
  Vector y = y0;
  rhs(y, s.k1);
  for (int i = 0; i < steps; ++i) {
    dp_step(rhs, y, h, s);
    y = s.y_new;
    s.k1 = s.k7;
  }
  return y;
}

}  // namespace driftlab
