#include "gradflow/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "gradflow/error.hpp"

namespace gradflow {

const char* to_string(TrajectoryStatus status) {
  switch (status) {
    case TrajectoryStatus::Converged: return "converged";
    case TrajectoryStatus::MaxTime: return "max_time";
    case TrajectoryStatus::BlowUp: return "blow_up";
  }
  return "unknown";
}

SpectralField ifrk4_step(const Flow& flow, const SpectralField& a, double t, double dt) {
  const Eigen::ArrayXd rates = flow.linear_rates().array();
  const Eigen::VectorXd e_half = (-0.5 * dt * rates).exp().matrix();
  const Eigen::VectorXd e_full = (-dt * rates).exp().matrix();

  const SpectralField k1 = flow.nonlinear(a, t);
  const SpectralField a_half = e_half.cwiseProduct(a);
  const SpectralField k2 = flow.nonlinear(a_half + 0.5 * dt * e_half.cwiseProduct(k1), t + 0.5 * dt);
  const SpectralField k3 = flow.nonlinear(a_half + 0.5 * dt * k2, t + 0.5 * dt);
  const SpectralField k4 = flow.nonlinear(e_full.cwiseProduct(a) + dt * e_half.cwiseProduct(k3), t + dt);

  SpectralField next = e_full.cwiseProduct(a) +
                       dt / 6.0 * (e_full.cwiseProduct(k1) + 2.0 * e_half.cwiseProduct(k2 + k3) + k4);
  if (!next.allFinite()) throw Error(ErrorCode::Overflow, "non-finite state after step");
  return next;
}

namespace {

struct Recorder {
  const Flow& flow;
  Trajectory traj;

  void record(double t, const SpectralField& a, double ut_norm) {
    traj.times.push_back(t);
    traj.states.push_back(a);
    traj.lyapunov_values.push_back(flow.base().lyapunov(a));
    traj.ut_norms.push_back(ut_norm);
  }
};

// Result of re-running [t, t + dt] on halved substeps after an overflow:
// the first substep state whose norm reaches the threshold (crossed), or the
// state at t + dt when the whole interval stays below it.
struct Substepped {
  SpectralField state;
  double time;
  bool crossed;
};

Substepped substep_blowup(const Flow& flow, SpectralField a, double t, double dt, double threshold) {
  constexpr int kMaxHalvings = 40;
  const double t_stop = t + dt;
  double h = 0.5 * dt;
  int halvings = 1;
  while (t < t_stop) {
    const double step = std::min(h, t_stop - t);
    try {
      SpectralField next = ifrk4_step(flow, a, t, step);
      a = std::move(next);
      t += step;
      if (a.norm() >= threshold) return {a, t, true};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Overflow) throw;
      if (++halvings > kMaxHalvings) {
        // Overflow localized to a vanishing substep: the solution escapes
        // here, report the escape with an infinite norm sample.
        SpectralField escaped = a;
        const Eigen::Index big = [&] {
          Eigen::Index idx;
          a.cwiseAbs().maxCoeff(&idx);
          return idx;
        }();
        escaped[big] = std::copysign(std::numeric_limits<double>::infinity(), a[big] == 0.0 ? 1.0 : a[big]);
        return {escaped, t, true};
      }
      h *= 0.5;
    }
  }
  return {a, t, false};
}

double safe_rhs_norm(const Flow& flow, const SpectralField& a, double t) {
  try {
    return flow.rhs(a, t).norm();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Overflow) throw;
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

Trajectory integrate(const Flow& flow, const SpectralField& init, const IntegratorParams& params) {
  if (!(params.dt > 0.0) || !(params.dt < 1.0))
    throw Error(ErrorCode::InvalidArgument, "dt must lie in (0, 1)");
  if (!(params.t_end > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_end must be positive");
  if (params.record_stride < 1) throw Error(ErrorCode::InvalidArgument, "record_stride must be >= 1");
  if (!(params.blowup_threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "blowup_threshold must be positive");
  if (init.size() != flow.basis().size()) throw Error(ErrorCode::SizeMismatch, "initial state does not match basis");
  if (!init.allFinite()) throw Error(ErrorCode::InvalidArgument, "initial state is not finite");

  Recorder rec{flow, {}};
  SpectralField a = init;
  double t = 0.0;
  double ut = safe_rhs_norm(flow, a, t);
  if (a.norm() >= params.blowup_threshold || !std::isfinite(ut)) {
    rec.record(t, a, ut);
    rec.traj.status = TrajectoryStatus::BlowUp;
    return std::move(rec.traj);
  }
  rec.record(t, a, ut);
  if (params.stationary_tol > 0.0 && ut < params.stationary_tol) {
    rec.traj.status = TrajectoryStatus::Converged;
    return std::move(rec.traj);
  }

  const auto n_steps = static_cast<long long>(std::ceil(params.t_end / params.dt - 1e-9));
  for (long long step = 1; step <= n_steps; ++step) {
    const double t_next = std::min(step * params.dt, params.t_end);
    const double h = t_next - t;
    std::optional<SpectralField> next;
    try {
      next = ifrk4_step(flow, a, t, h);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Overflow) throw;
    }
    if (!next || next->norm() >= params.blowup_threshold) {
      Substepped sub = next ? Substepped{*next, t_next, true}
                            : substep_blowup(flow, a, t, h, params.blowup_threshold);
      if (sub.crossed) {
        const double ut_end = sub.state.allFinite() ? safe_rhs_norm(flow, sub.state, sub.time)
                                                    : std::numeric_limits<double>::infinity();
        rec.traj.times.push_back(sub.time);
        rec.traj.states.push_back(sub.state);
        rec.traj.lyapunov_values.push_back(sub.state.allFinite() ? flow.base().lyapunov(sub.state)
                                                                 : std::numeric_limits<double>::quiet_NaN());
        rec.traj.ut_norms.push_back(ut_end);
        rec.traj.status = TrajectoryStatus::BlowUp;
        return std::move(rec.traj);
      }
      next = std::move(sub.state);
    }
    a = std::move(*next);
    t = t_next;
    ut = safe_rhs_norm(flow, a, t);
    const bool last = step == n_steps;
    const bool stationary = params.stationary_tol > 0.0 && ut < params.stationary_tol;
    if (last || stationary || step % params.record_stride == 0) rec.record(t, a, ut);
    if (stationary) {
      rec.traj.status = TrajectoryStatus::Converged;
      return std::move(rec.traj);
    }
  }
  rec.traj.status = TrajectoryStatus::MaxTime;
  return std::move(rec.traj);
}

double tail_energy(const Trajectory& traj, double t) {
  if (traj.size() < 2) throw Error(ErrorCode::InsufficientData, "tail_energy needs at least two samples");
  const double t0 = traj.times.front();
  const double t1 = traj.times.back();
  if (t < t0 || t > t1)
    throw Error(ErrorCode::OutOfRange,
                "t = " + std::to_string(t) + " outside [" + std::to_string(t0) + ", " + std::to_string(t1) + "]");
  auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
  if (it == traj.times.end()) return 0.0;
  size_t i = static_cast<size_t>(it - traj.times.begin());  // first sample strictly after t
  const auto q = [&](size_t k) { return traj.ut_norms[k] * traj.ut_norms[k]; };
  double sum = 0.0;
  // partial interval [t, times[i]]
  {
    const double ta = traj.times[i - 1], tb = traj.times[i];
    const double frac = (t - ta) / (tb - ta);
    const double qt = q(i - 1) + frac * (q(i) - q(i - 1));
    sum += 0.5 * (qt + q(i)) * (tb - t);
  }
  for (size_t k = i; k + 1 < traj.size(); ++k) sum += 0.5 * (q(k) + q(k + 1)) * (traj.times[k + 1] - traj.times[k]);
  return sum;
}

}  // namespace gradflow
