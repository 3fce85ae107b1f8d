#ifndef GRADFLOW_METRICS_HPP
#define GRADFLOW_METRICS_HPP

#include <span>
#include <string>
#include <vector>

#include "gradflow/decay.hpp"
#include "gradflow/flows.hpp"
#include "gradflow/integrate.hpp"

namespace gradflow {

/// Samples at or below this magnitude are not trusted in log-scale fits.
inline constexpr double kTrustFloor = 1e-13;

// ---------------------------------------------------------------------------
// Energy identity

/// Largest violation of d/dt V = ||u_t||^2 over the recorded intervals: the
/// difference quotient of V against Simpson's rule for ||u_t||^2, with the
/// midpoint state from cubic Hermite interpolation of the endpoint states and
/// right-hand sides. For perturbed flows the balance is
/// d/dt [V + h W] = ||u_t||^2 + h' W.
double energy_identity_residual(const Flow& flow, const Trajectory& traj);

// ---------------------------------------------------------------------------
// Rate fitting

enum class DecayModel { Exponential, Algebraic, Logarithmic, TExponential };

const char* to_string(DecayModel model);

struct ModelFit {
  DecayModel model = DecayModel::Exponential;
  double amplitude = 0.0;  // A
  double rate = 0.0;       // delta, p or q
  double residual = 0.0;   // RMS on log scale; +inf when not applicable
};

/// Best of the four decay models on the trailing half of the samples above
/// kTrustFloor: A e^{-delta t}, A t^{-p}, A (ln t)^{-q}, A t e^{-delta t}.
struct RateFit {
  ModelFit best;
  ModelFit runner_up;
  std::vector<ModelFit> candidates;  // in DecayModel order
  /// 1 - best.residual / runner_up.residual; below 0.05 the choice is ambiguous.
  double margin = 0.0;
  bool ambiguous = false;
  double t_start = 0.0;
  double t_end = 0.0;
  int samples_used = 0;

  const ModelFit& candidate(DecayModel m) const { return candidates[static_cast<size_t>(m)]; }
};

/// Throws InsufficientData when fewer than 20 samples remain.
RateFit fit_rate(std::span<const double> times, std::span<const double> values);

// ---------------------------------------------------------------------------
// Zelenyak partition bound

struct ZelenyakReport {
  bool holds = false;
  double c9 = 0.0;
  double worst_ratio = 0.0;
  int grid_points = 0;
};

/// Constant of the unit-interval partition argument for tail energies
/// bounded by C8 e^{-beta t}: sqrt(C8) (1 / (1 - e^{-beta/2}) + 1).
double zelenyak_constant(double c8, double beta);

/// Checks ||u(t) - u(tau)|| <= C9 e^{-beta t / 2} for recorded pairs t <= tau,
/// with t on the grid of recorded times whose tail energy exceeds kTrustFloor.
/// Throws HypothesisFailed unless tail_energy(t) <= C8 e^{-beta t} there, up
/// to a relative quadrature allowance of 1e-4.
ZelenyakReport zelenyak_bound_check(const Trajectory& traj, double c8, double beta);

struct TailDecay {
  double beta = 0.0;
  double c8 = 0.0;
  RateFit fit;
};

/// beta from an exponential fit of the tail energies, C8 the smallest
/// constant with tail_energy(t) <= C8 e^{-beta t} on the trusted grid.
TailDecay fit_tail_decay(const Trajectory& traj);

// ---------------------------------------------------------------------------
// Perturbed systems

struct PerturbedBoundReport {
  bool holds = false;
  double worst_ratio = 0.0;
  /// c in int_t^inf ||u_t||^2 <= c h(t), fitted on the grid t >= t_min.
  double h_scale = 0.0;
  int grid_points = 0;
};

/// int_{t-1}^inf sqrt(h(s)) ds; analytic for power laws, quadrature otherwise.
/// Infinite when sqrt(h) is not integrable.
double sqrt_h_majorant(const DecayProfile& h, double t);

/// Displacement bound ||u(t) - u(tau)|| <= int_{t-1}^inf sqrt(c h) for all
/// recorded t_min <= t <= tau.
PerturbedBoundReport perturbed_bound_check(const Trajectory& traj, const DecayProfile& h, double t_min = 2.0);

struct HClassReport {
  bool positive_decreasing = false;
  bool vanishes = false;
  bool sqrt_integrable = false;
  bool slow_decay = false;
  double sqrt_integral = 0.0;  // int_0^inf sqrt(h), +inf if divergent
  double log_slope_at_probe = 0.0;
};

HClassReport h_class_check(const DecayProfile& h, double t_probe = 1e6);

// ---------------------------------------------------------------------------
// Lojasiewicz exponent

struct LojasiewiczEstimate {
  double theta = 0.0;
  double slope = 0.0;
  int pairs_used = 0;
  double lyapunov_limit = 0.0;
};

/// Regression of log ||V'|| on log |V - B| over the trailing half of the pairs
/// with |V - B| above 1e-12 (1 + |B|); theta = 1 - slope clipped to [0, 1/2].
/// Throws InsufficientData with fewer than 10 pairs.
LojasiewiczEstimate lojasiewicz_fit(std::span<const double> potentials, std::span<const double> gradient_norms,
                                    double limit);

/// V_final plus the extrapolated remaining tail energy (fitted decay model
/// for ||u_t||^2). Falls back to V_final when the tail cannot be fitted.
double lyapunov_limit(const Trajectory& traj);

LojasiewiczEstimate lojasiewicz_estimate(const Flow& flow, const Trajectory& traj);

/// Reference modulus 2 |s| |ln(2 s)|^{3/2} of the flat potential.
double flat_gradient_modulus(double s);

// ---------------------------------------------------------------------------
// omega-limit

/// True iff the distance to `candidate` stays below tol from some recorded
/// time on, is non-increasing there (up to 1e-9 tol rounding slack) and ends
/// below tol / 10.
bool omega_limit_single(const Trajectory& traj, const SpectralField& candidate, double tol);

// ---------------------------------------------------------------------------
// Slow-decay scalar flows

enum class SlowFlowKind { FlatExp, NonlocalLog };

const char* to_string(SlowFlowKind kind);

/// Samples of a scalar gradient flow a' = dV/da decaying to the equilibrium 0
/// (Lyapunov limit 0).
struct ScalarTrajectory {
  SlowFlowKind kind = SlowFlowKind::FlatExp;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> rates;       // |a'|
  std::vector<double> potentials;  // V(a) <= 0
};

/// flat_exp: a' = -rho2 exp(-1 / (4 rho1^2 a^2)).
/// nonlocal_log: a' = -a^3 exp(-1 / a^2) (rho1, rho2 unused).
/// Implicit midpoint from t = 0 to 1e-2, then on a geometric grid with 64
/// points per decade up to t_end.
ScalarTrajectory scalar_slow_flow(SlowFlowKind kind, double rho1, double rho2, double a0, double t_end);

/// Exact solution 1 / sqrt(ln(2 t + exp(1 / a0^2))) of the nonlocal_log ODE.
double nonlocal_log_exact(double a0, double t);

}  // namespace gradflow

#endif
