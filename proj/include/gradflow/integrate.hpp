#ifndef GRADFLOW_INTEGRATE_HPP
#define GRADFLOW_INTEGRATE_HPP

#include <string>
#include <vector>

#include "gradflow/flows.hpp"

namespace gradflow {

struct IntegratorParams {
  double dt = 1e-3;
  double t_end = 10.0;
  int record_stride = 1;
  /// Stop with status Converged once ||u_t|| drops below this; 0 disables.
  double stationary_tol = 0.0;
  /// Blow-up is declared once the coefficient 2-norm reaches this value.
  double blowup_threshold = 1e6;
};

enum class TrajectoryStatus { Converged, MaxTime, BlowUp };

const char* to_string(TrajectoryStatus status);

/// Recorded samples of an orbit. For perturbed flows `lyapunov_values` holds
/// the base-flow V.
struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::vector<double> lyapunov_values;
  std::vector<double> ut_norms;
  TrajectoryStatus status = TrajectoryStatus::MaxTime;

  size_t size() const { return times.size(); }
  double final_time() const { return times.back(); }
};

/// Integrating-factor RK4 on b_k = exp(L_k t) a_k: the stiff diagonal part is
/// integrated exactly, so arbitrarily large eigenvalues stay stable.
///
/// Records every record_stride-th step plus the final one. A non-finite
/// right-hand side inside a step is retried on halved substeps until the
/// blow-up threshold is crossed or the overflow is localized to a substep
/// shorter than 2^-40 dt; the trajectory then ends with status BlowUp.
Trajectory integrate(const Flow& flow, const SpectralField& init, const IntegratorParams& params);

/// A single fixed step of the integrating-factor RK4 scheme.
SpectralField ifrk4_step(const Flow& flow, const SpectralField& a, double t, double dt);

/// int_t^{t_last} ||u_t||^2 ds by the trapezoid rule on the recorded samples
/// (linear interpolation of ||u_t||^2 inside the first partial interval).
double tail_energy(const Trajectory& traj, double t);

/// Trajectory of the state at the recorded times given by `fn(t)`, with
/// ||u_t|| from `rate(t)` and V from `potential(t)`. Handy for analytic orbits.
template <class StateFn, class RateFn, class PotentialFn>
Trajectory sample_trajectory(const std::vector<double>& times, StateFn fn, RateFn rate, PotentialFn potential) {
  Trajectory traj;
  for (double t : times) {
    traj.times.push_back(t);
    traj.states.push_back(fn(t));
    traj.ut_norms.push_back(rate(t));
    traj.lyapunov_values.push_back(potential(t));
  }
  return traj;
}

}  // namespace gradflow

#endif
