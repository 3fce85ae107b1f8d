#include "gradflow/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "gradflow/error.hpp"

namespace gradflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative allowance for the trapezoid tail energies in hypothesis checks.
constexpr double kTailQuadratureSlack = 1e-4;

// 8-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 4> kGlNodes{0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                         0.9602898564975363};
constexpr std::array<double, 4> kGlWeights{0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                           0.1012285362903763};

template <class F>
double gauss_legendre(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (size_t i = 0; i < kGlNodes.size(); ++i)
    sum += kGlWeights[i] * (f(mid - half * kGlNodes[i]) + f(mid + half * kGlNodes[i]));
  return half * sum;
}

struct SqrtIntegral {
  double value = 0.0;
  bool converged = false;
};

// int_from^inf sqrt(h) in the variable s = ln(1 + t), panel by panel, until
// a power-law tail estimate falls below rel_tol of the accumulated value.
SqrtIntegral integrate_sqrt_h(const DecayProfile& h, double from, double rel_tol = 1e-6, double t_max = 1e30) {
  constexpr double kPanel = 0.25;
  const auto integrand = [&](double s) {
    const double t = std::expm1(s);
    return std::sqrt(std::max(h.value(t), 0.0)) * std::exp(s);
  };
  double acc = 0.0;
  double s = std::log1p(from);
  const double s_max = std::log1p(t_max);
  while (true) {
    acc += gauss_legendre(integrand, s, s + kPanel);
    s += kPanel;
    const double t = std::expm1(s);
    const double root = std::sqrt(std::max(h.value(t), 0.0));
    if (root == 0.0) return {acc, true};
    const double p = -0.5 * h.log_slope(t) * (1.0 + t);
    const double tail = p > 1.0 ? root * (1.0 + t) / (p - 1.0) : kInf;
    if (tail < rel_tol * acc) return {acc + tail, true};
    if (s >= s_max) return {acc + tail, false};
  }
}

// Tail energies int_{t_i}^{t_last} ||u_t||^2 at every recorded time.
std::vector<double> tail_energies(const Trajectory& traj) {
  std::vector<double> out(traj.size(), 0.0);
  for (size_t k = traj.size(); k-- > 1;) {
    const double q0 = traj.ut_norms[k - 1] * traj.ut_norms[k - 1];
    const double q1 = traj.ut_norms[k] * traj.ut_norms[k];
    out[k - 1] = out[k] + 0.5 * (q0 + q1) * (traj.times[k] - traj.times[k - 1]);
  }
  return out;
}

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double rms = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / n);
  return fit;
}

double pair_distance(const SpectralField& a, const SpectralField& b) { return (a - b).norm(); }

}  // namespace

// ---------------------------------------------------------------------------

double energy_identity_residual(const Flow& flow, const Trajectory& traj) {
  const Flow& base = flow.base();
  const PerturbedFlow* pert = flow.perturbation();
  // Balance quantity E and its source S with dE/dt = S.
  const auto energy = [&](const SpectralField& a, double t) {
    double e = base.lyapunov(a);
    if (pert) e += pert->h.value(t) * flow.perturbation_potential(a);
    return e;
  };
  const auto source = [&](const SpectralField& a, const SpectralField& r, double t) {
    double s = r.squaredNorm();
    if (pert) s += pert->h.derivative(t) * flow.perturbation_potential(a);
    return s;
  };

  double worst = 0.0;
  for (size_t i = 0; i + 1 < traj.size(); ++i) {
    const SpectralField& u0 = traj.states[i];
    const SpectralField& u1 = traj.states[i + 1];
    if (!u0.allFinite() || !u1.allFinite()) continue;
    const double t0 = traj.times[i], t1 = traj.times[i + 1];
    const double dt = t1 - t0;
    const double tm = 0.5 * (t0 + t1);
    const SpectralField r0 = flow.rhs(u0, t0);
    const SpectralField r1 = flow.rhs(u1, t1);
    const SpectralField um = 0.5 * (u0 + u1) + dt / 8.0 * (r0 - r1);
    const SpectralField rm = flow.rhs(um, tm);
    const double quotient = (energy(u1, t1) - energy(u0, t0)) / dt;
    const double simpson = (source(u0, r0, t0) + 4.0 * source(um, rm, tm) + source(u1, r1, t1)) / 6.0;
    worst = std::max(worst, std::abs(quotient - simpson));
  }
  return worst;
}

// ---------------------------------------------------------------------------

const char* to_string(DecayModel model) {
  switch (model) {
    case DecayModel::Exponential: return "exponential";
    case DecayModel::Algebraic: return "algebraic";
    case DecayModel::Logarithmic: return "logarithmic";
    case DecayModel::TExponential: return "t_exponential";
  }
  return "unknown";
}

RateFit fit_rate(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) throw Error(ErrorCode::SizeMismatch, "fit_rate: times and values differ in length");
  std::vector<double> t, v;
  for (size_t i = 0; i < times.size(); ++i) {
    if (std::isfinite(values[i]) && values[i] > kTrustFloor && std::isfinite(times[i])) {
      t.push_back(times[i]);
      v.push_back(values[i]);
    }
  }
  const size_t skip = t.size() / 2;
  t.erase(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(skip));
  v.erase(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(skip));
  if (t.size() < 20)
    throw Error(ErrorCode::InsufficientData,
                "fit_rate needs >= 20 samples above 1e-13 in the trailing half, got " + std::to_string(t.size()));

  std::vector<double> logv(v.size());
  for (size_t i = 0; i < v.size(); ++i) logv[i] = std::log(v[i]);
  const bool positive_t = t.front() > 0.0;
  const bool log_t_positive = t.front() > 1.0;

  RateFit out;
  out.t_start = t.front();
  out.t_end = t.back();
  out.samples_used = static_cast<int>(t.size());
  for (DecayModel model : {DecayModel::Exponential, DecayModel::Algebraic, DecayModel::Logarithmic,
                           DecayModel::TExponential}) {
    ModelFit mf;
    mf.model = model;
    mf.residual = kInf;
    std::vector<double> x(t.size()), y = logv;
    bool applicable = true;
    switch (model) {
      case DecayModel::Exponential: x = t; break;
      case DecayModel::Algebraic:
        applicable = positive_t;
        if (applicable)
          for (size_t i = 0; i < t.size(); ++i) x[i] = std::log(t[i]);
        break;
      case DecayModel::Logarithmic:
        applicable = log_t_positive;
        if (applicable)
          for (size_t i = 0; i < t.size(); ++i) x[i] = std::log(std::log(t[i]));
        break;
      case DecayModel::TExponential:
        applicable = positive_t;
        if (applicable) {
          x = t;
          for (size_t i = 0; i < t.size(); ++i) y[i] -= std::log(t[i]);
        }
        break;
    }
    if (applicable) {
      const LineFit lf = least_squares(x, y);
      mf.amplitude = std::exp(lf.intercept);
      mf.rate = -lf.slope;
      mf.residual = lf.rms;
    }
    out.candidates.push_back(mf);
  }

  std::vector<ModelFit> ranked = out.candidates;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const ModelFit& a, const ModelFit& b) { return a.residual < b.residual; });
  out.best = ranked[0];
  out.runner_up = ranked[1];
  if (std::isinf(out.runner_up.residual))
    out.margin = 1.0;
  else if (out.runner_up.residual > 0.0)
    out.margin = 1.0 - out.best.residual / out.runner_up.residual;
  out.ambiguous = out.margin < 0.05;
  return out;
}

// ---------------------------------------------------------------------------

double zelenyak_constant(double c8, double beta) {
  if (!(c8 >= 0.0) || !(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "zelenyak_constant needs C8 >= 0, beta > 0");
  return std::sqrt(c8) * (1.0 / (1.0 - std::exp(-0.5 * beta)) + 1.0);
}

ZelenyakReport zelenyak_bound_check(const Trajectory& traj, double c8, double beta) {
  if (traj.size() < 2) throw Error(ErrorCode::InsufficientData, "zelenyak_bound_check needs two samples");
  const std::vector<double> tails = tail_energies(traj);
  ZelenyakReport report;
  report.c9 = zelenyak_constant(c8, beta);
  std::vector<size_t> grid;
  for (size_t i = 0; i < traj.size(); ++i)
    if (tails[i] > kTrustFloor) grid.push_back(i);
  report.grid_points = static_cast<int>(grid.size());

  const double log_c8 = std::log(c8);
  for (size_t i : grid) {
    // tail <= C8 e^{-beta t} in log form, up to the trapezoid error allowance.
    if (std::log(tails[i]) > log_c8 - beta * traj.times[i] + kTailQuadratureSlack)
      throw Error(ErrorCode::HypothesisFailed, "tail energy " + std::to_string(tails[i]) + " at t = " +
                                                   std::to_string(traj.times[i]) + " exceeds C8 e^{-beta t}");
  }
  for (size_t i : grid) {
    const double bound = report.c9 * std::exp(-0.5 * beta * traj.times[i]);
    for (size_t k = i + 1; k < traj.size(); ++k) {
      const double ratio = pair_distance(traj.states[i], traj.states[k]) / bound;
      report.worst_ratio = std::max(report.worst_ratio, ratio);
    }
  }
  report.holds = report.worst_ratio <= 1.0;
  return report;
}

TailDecay fit_tail_decay(const Trajectory& traj) {
  const std::vector<double> tails = tail_energies(traj);
  TailDecay out;
  out.fit = fit_rate(traj.times, tails);
  out.beta = out.fit.candidate(DecayModel::Exponential).rate;
  if (!(out.beta > 0.0)) throw Error(ErrorCode::HypothesisFailed, "tail energy does not decay exponentially");
  double log_c8 = -kInf;
  for (size_t i = 0; i < traj.size(); ++i)
    if (tails[i] > kTrustFloor) log_c8 = std::max(log_c8, std::log(tails[i]) + out.beta * traj.times[i]);
  out.c8 = std::exp(log_c8);
  return out;
}

// ---------------------------------------------------------------------------

double sqrt_h_majorant(const DecayProfile& h, double t) {
  const double from = std::max(t - 1.0, 0.0);
  if (h.form() == DecayProfile::Form::PowerLaw) {
    const double alpha = h.alpha();
    if (alpha <= 2.0) return kInf;
    return 2.0 / (alpha - 2.0) * std::pow(1.0 + from, 1.0 - 0.5 * alpha);
  }
  const SqrtIntegral integral = integrate_sqrt_h(h, from);
  return integral.converged ? integral.value : kInf;
}

PerturbedBoundReport perturbed_bound_check(const Trajectory& traj, const DecayProfile& h, double t_min) {
  if (traj.size() < 2) throw Error(ErrorCode::InsufficientData, "perturbed_bound_check needs two samples");
  const std::vector<double> tails = tail_energies(traj);
  PerturbedBoundReport report;
  std::vector<size_t> grid;
  for (size_t i = 0; i < traj.size(); ++i)
    if (traj.times[i] >= t_min) grid.push_back(i);
  report.grid_points = static_cast<int>(grid.size());
  for (size_t i : grid) report.h_scale = std::max(report.h_scale, tails[i] / h.value(traj.times[i]));
  if (!std::isfinite(report.h_scale))
    throw Error(ErrorCode::HypothesisFailed, "tail energy is not bounded by a multiple of h");

  const double scale = std::sqrt(report.h_scale);
  for (size_t i : grid) {
    const double majorant = sqrt_h_majorant(h, traj.times[i]);
    if (!std::isfinite(majorant))
      throw Error(ErrorCode::HypothesisFailed, "sqrt(h) is not integrable, no displacement majorant");
    for (size_t k = i + 1; k < traj.size(); ++k) {
      const double dist = pair_distance(traj.states[i], traj.states[k]);
      if (dist == 0.0) continue;
      report.worst_ratio = std::max(report.worst_ratio, dist / (scale * majorant));
    }
  }
  report.holds = report.worst_ratio <= 1.0;
  return report;
}

HClassReport h_class_check(const DecayProfile& h, double t_probe) {
  HClassReport report;
  std::vector<double> grid{0.0};
  constexpr int kPerDecade = 32;
  for (int i = 0;; ++i) {
    const double t = 1e-3 * std::pow(10.0, static_cast<double>(i) / kPerDecade);
    if (t >= t_probe) break;
    grid.push_back(t);
  }
  grid.push_back(t_probe);

  report.positive_decreasing = true;
  for (double t : grid) {
    const double v = h.value(t);
    // Once h underflows its sign is no longer observable.
    if (v < std::numeric_limits<double>::min() && v >= 0.0 && t > 0.0) break;
    if (!(v > 0.0) || !(h.derivative(t) < 0.0)) {
      report.positive_decreasing = false;
      break;
    }
  }
  report.vanishes = h.value(t_probe) < 1e-3 * h.value(0.0);
  const SqrtIntegral integral = integrate_sqrt_h(h, 0.0);
  report.sqrt_integrable = integral.converged && std::isfinite(integral.value);
  report.sqrt_integral = report.sqrt_integrable ? integral.value : kInf;
  report.log_slope_at_probe = h.log_slope(t_probe);
  report.slow_decay = report.log_slope_at_probe < 0.0 && std::abs(report.log_slope_at_probe) < 0.01;
  return report;
}

// ---------------------------------------------------------------------------

LojasiewiczEstimate lojasiewicz_fit(std::span<const double> potentials, std::span<const double> gradient_norms,
                                    double limit) {
  if (potentials.size() != gradient_norms.size())
    throw Error(ErrorCode::SizeMismatch, "lojasiewicz_fit: potential and gradient samples differ in length");
  const double floor = 1e-12 * (1.0 + std::abs(limit));
  std::vector<double> x, y;
  for (size_t i = 0; i < potentials.size(); ++i) {
    const double gap = std::abs(potentials[i] - limit);
    if (gap > floor && gradient_norms[i] > 0.0 && std::isfinite(gap) && std::isfinite(gradient_norms[i])) {
      x.push_back(std::log(gap));
      y.push_back(std::log(gradient_norms[i]));
    }
  }
  const size_t skip = x.size() / 2;
  x.erase(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(skip));
  y.erase(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(skip));
  if (x.size() < 10)
    throw Error(ErrorCode::InsufficientData,
                "lojasiewicz_fit needs >= 10 pairs in the trailing window, got " + std::to_string(x.size()));
  const LineFit lf = least_squares(x, y);
  LojasiewiczEstimate out;
  out.slope = lf.slope;
  out.theta = std::clamp(1.0 - lf.slope, 0.0, 0.5);
  out.pairs_used = static_cast<int>(x.size());
  out.lyapunov_limit = limit;
  return out;
}

double lyapunov_limit(const Trajectory& traj) {
  if (traj.size() == 0) throw Error(ErrorCode::InsufficientData, "empty trajectory");
  const double v_final = traj.lyapunov_values.back();
  std::vector<double> q(traj.size());
  for (size_t i = 0; i < traj.size(); ++i) q[i] = traj.ut_norms[i] * traj.ut_norms[i];
  RateFit fit;
  try {
    fit = fit_rate(traj.times, q);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientData) throw;
    return v_final;
  }
  const double t_last = traj.times.back();
  const ModelFit& m = fit.best;
  double tail = 0.0;
  switch (m.model) {
    case DecayModel::Exponential:
      if (m.rate > 0.0) tail = m.amplitude * std::exp(-m.rate * t_last) / m.rate;
      break;
    case DecayModel::TExponential:
      if (m.rate > 0.0)
        tail = m.amplitude * std::exp(-m.rate * t_last) * (t_last / m.rate + 1.0 / (m.rate * m.rate));
      break;
    case DecayModel::Algebraic:
      if (m.rate > 1.0 && t_last > 0.0) tail = m.amplitude * std::pow(t_last, 1.0 - m.rate) / (m.rate - 1.0);
      break;
    case DecayModel::Logarithmic: break;  // not integrable
  }
  return v_final + tail;
}

LojasiewiczEstimate lojasiewicz_estimate(const Flow& flow, const Trajectory& traj) {
  if (flow.is_perturbed()) throw Error(ErrorCode::UndefinedPotential, "Lojasiewicz estimate needs a gradient flow");
  if (traj.status == TrajectoryStatus::BlowUp)
    throw Error(ErrorCode::InvalidArgument, "Lojasiewicz estimate needs a bounded trajectory");
  return lojasiewicz_fit(traj.lyapunov_values, traj.ut_norms, lyapunov_limit(traj));
}

double flat_gradient_modulus(double s) {
  if (s == 0.0) return 0.0;
  return 2.0 * std::abs(s) * std::pow(std::abs(std::log(2.0 * std::abs(s))), 1.5);
}

// ---------------------------------------------------------------------------

bool omega_limit_single(const Trajectory& traj, const SpectralField& candidate, double tol) {
  if (traj.status == TrajectoryStatus::BlowUp)
    throw Error(ErrorCode::InvalidArgument, "omega-limit of a blown-up trajectory");
  if (traj.size() == 0) return false;
  std::vector<double> dist(traj.size());
  for (size_t i = 0; i < traj.size(); ++i) dist[i] = pair_distance(traj.states[i], candidate);
  size_t start = traj.size();
  while (start > 0 && dist[start - 1] < tol) --start;
  if (start == traj.size()) return false;
  const double slack = 1e-9 * tol;
  for (size_t i = start + 1; i < traj.size(); ++i)
    if (dist[i] > dist[i - 1] + slack) return false;
  return dist.back() < tol / 10.0;
}

// ---------------------------------------------------------------------------

const char* to_string(SlowFlowKind kind) {
  switch (kind) {
    case SlowFlowKind::FlatExp: return "flat_exp";
    case SlowFlowKind::NonlocalLog: return "nonlocal_log";
  }
  return "unknown";
}

double nonlocal_log_exact(double a0, double t) { return 1.0 / std::sqrt(std::log(2.0 * t + std::exp(1.0 / (a0 * a0)))); }

ScalarTrajectory scalar_slow_flow(SlowFlowKind kind, double rho1, double rho2, double a0, double t_end) {
  if (!(a0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "slow flow needs a0 > 0");
  if (!(t_end > 0.0)) throw Error(ErrorCode::InvalidArgument, "slow flow needs t_end > 0");
  if (kind == SlowFlowKind::FlatExp && (!(rho1 > 0.0) || !(rho2 > 0.0)))
    throw Error(ErrorCode::InvalidArgument, "flat_exp needs rho1, rho2 > 0");

  const double c = 1.0 / (4.0 * rho1 * rho1);
  std::function<double(double)> f, df, potential;
  if (kind == SlowFlowKind::FlatExp) {
    f = [=](double a) { return -rho2 * std::exp(-c / (a * a)); };
    df = [=](double a) { return -rho2 * std::exp(-c / (a * a)) * 2.0 * c / (a * a * a); };
    // V(a) = -rho2 int_0^a exp(-c / s^2) ds
    potential = [=](double a) {
      const double x = a / std::sqrt(c);
      const double inner = x * std::exp(-1.0 / (x * x)) - std::sqrt(M_PI) * std::erfc(1.0 / x);
      return -rho2 * std::sqrt(c) * inner;
    };
  } else {
    f = [](double a) { return -a * a * a * std::exp(-1.0 / (a * a)); };
    df = [](double a) { return -std::exp(-1.0 / (a * a)) * (3.0 * a * a + 2.0); };
    // V(a) = -g(a^2) / 2 with g' (s) = s exp(-1/s)
    potential = [](double a) {
      const double s = a * a;
      const double g = 0.5 * std::exp(-1.0 / s) * (s * s - s) - 0.5 * std::expint(-1.0 / s);
      return -0.5 * g;
    };
  }

  std::vector<double> grid{0.0};
  constexpr int kPerDecade = 64;
  const double first = std::min(1e-2, t_end);
  for (int i = 0;; ++i) {
    const double t = first * std::pow(10.0, static_cast<double>(i) / kPerDecade);
    if (t >= t_end * (1.0 - 1e-12)) break;
    grid.push_back(t);
  }
  grid.push_back(t_end);

  ScalarTrajectory out;
  out.kind = kind;
  double a = a0;
  const auto record = [&](double t) {
    out.times.push_back(t);
    out.values.push_back(a);
    out.rates.push_back(std::abs(f(a)));
    out.potentials.push_back(potential(a));
  };
  record(0.0);
  for (size_t n = 1; n < grid.size(); ++n) {
    const double h = grid[n] - grid[n - 1];
    // implicit midpoint: x = a + h f((a + x) / 2), Newton from explicit Euler
    double x = a + h * f(a);
    if (!(x > 0.0)) x = 0.5 * a;
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (a + x);
      const double g = x - a - h * f(mid);
      const double dg = 1.0 - 0.5 * h * df(mid);
      const double next = x - g / dg;
      if (!std::isfinite(next)) break;
      if (std::abs(next - x) <= 1e-15 * std::abs(x)) {
        x = next;
        ok = true;
        break;
      }
      x = next;
    }
    if (!ok || !(x > 0.0))
      throw Error(ErrorCode::StepFailure, "implicit midpoint step failed at t = " + std::to_string(grid[n]));
    a = x;
    record(grid[n]);
  }
  return out;
}

}  // namespace gradflow
