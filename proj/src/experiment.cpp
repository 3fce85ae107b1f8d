#include "gradflow/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "gradflow/equilibria.hpp"
#include "gradflow/error.hpp"

namespace gradflow::experiment {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// JSON has no inf or nan; such measurements are written as strings.
Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

int resolve(const EigenBasis& basis, const ModeRef& ref) {
  const auto pos = basis.find_mode(ref.mode);
  if (!pos) {
    const std::string name = basis.kind() == DomainKind::Interval
                                 ? std::to_string(ref.mode.k1)
                                 : "[" + std::to_string(ref.mode.k1) + ", " + std::to_string(ref.mode.k2) + "]";
    throw Error(ErrorCode::Config, ref.path + ": mode " + name + " is not in the basis of " +
                                       std::to_string(basis.size()) + " modes");
  }
  return *pos;
}

SpectralField assemble(const EigenBasis& basis, const std::vector<ModeValue>& pairs) {
  SpectralField a = SpectralField::Zero(basis.size());
  for (const auto& p : pairs) a[resolve(basis, p.mode)] += p.value;
  return a;
}

SpectralField initial_state(const EigenBasis& basis, const InitialSpec& init, std::uint64_t seed) {
  if (!init.random) return assemble(basis, init.pairs);
  if (init.random_count > basis.size())
    throw Error(ErrorCode::Config, "initial.random.count: exceeds the basis size " + std::to_string(basis.size()));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  SpectralField a = SpectralField::Zero(basis.size());
  for (int i = 0; i < init.random_count; ++i) a[i] = init.amplitude * normal(rng);
  return a;
}

void check_modes(const EigenBasis& basis, const AnalysisSpec& spec) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ScaledValue>) resolve(basis, p.mode);
        if constexpr (std::is_same_v<T, RateFitCheck>)
          if (p.mode) resolve(basis, *p.mode);
        if constexpr (std::is_same_v<T, OmegaLimit>) assemble(basis, p.candidate);
      },
      spec.params);
}

const NonlocalCubicFlow& cubic_spec(const Flow& flow) { return std::get<NonlocalCubicFlow>(flow.spec().variant); }

Trajectory closed_form_trajectory(const Flow& flow, const SpectralField& init, const SolverSpec& solver) {
  const auto& spec = cubic_spec(flow);
  std::vector<double> times{0.0};
  const double t0 = solver.t_start, t1 = solver.params.t_end;
  for (int i = 0; i < solver.samples; ++i) {
    const double s = static_cast<double>(i) / (solver.samples - 1);
    const double t = solver.log_spacing ? t0 * std::pow(t1 / t0, s) : t0 + (t1 - t0) * s;
    if (t > times.back()) times.push_back(i == solver.samples - 1 ? t1 : t);
  }
  Trajectory traj;
  for (double t : times) {
    SpectralField a = nonlocal::closed_form(flow.basis(), init, spec.l, spec.m, t);
    traj.times.push_back(t);
    traj.ut_norms.push_back(flow.rhs(a, t).norm());
    traj.lyapunov_values.push_back(flow.lyapunov(a));
    traj.states.push_back(std::move(a));
  }
  traj.status = TrajectoryStatus::MaxTime;
  return traj;
}

// Collects results and assertions of one analysis.
class Outcome {
 public:
  Json results = Json::object();
  Json assertions = Json::array();
  int failed = 0;

  void check(const std::string& name, bool passed, Json measured, Json expected, Json tolerance) {
    Json a = Json::object();
    a["name"] = name;
    a["passed"] = passed;
    a["measured"] = std::move(measured);
    a["expected"] = std::move(expected);
    a["tolerance"] = std::move(tolerance);
    assertions.push_back(std::move(a));
    if (!passed) ++failed;
  }

  void within(const std::string& name, double measured, double expected, double tol) {
    check(name, std::abs(measured - expected) <= tol, number(measured), number(expected), number(tol));
  }

  void at_most(const std::string& name, double measured, double bound) {
    check(name, measured <= bound, number(measured), Json{{"max", number(bound)}}, 0.0);
  }

  void at_least(const std::string& name, double measured, double bound) {
    check(name, measured >= bound, number(measured), Json{{"min", number(bound)}}, 0.0);
  }

  void in_range(const std::string& name, double measured, double lo, double hi) {
    check(name, measured >= lo && measured <= hi, number(measured), Json::array({number(lo), number(hi)}), 0.0);
  }

  void flag(const std::string& name, bool measured, bool expected = true) {
    check(name, measured == expected, measured, expected, 0.0);
  }
};

struct Context {
  const ExperimentConfig& config;
  const RunConfig& run;
  const Flow& flow;
  const SpectralField& init;
  const Trajectory* traj;
};

Json fit_json(const RateFit& fit) {
  Json j = Json::object();
  j["model"] = to_string(fit.best.model);
  j["amplitude"] = number(fit.best.amplitude);
  j["rate"] = number(fit.best.rate);
  j["residual"] = number(fit.best.residual);
  j["runner_up"] = to_string(fit.runner_up.model);
  j["margin"] = number(fit.margin);
  j["ambiguous"] = fit.ambiguous;
  j["window"] = Json::array({number(fit.t_start), number(fit.t_end)});
  j["samples_used"] = fit.samples_used;
  return j;
}

void analyze(const Context& ctx, const ClosedFormMatch& p, Outcome& out) {
  const auto& spec = cubic_spec(ctx.flow);
  double sup = 0.0;
  for (size_t i = 0; i < ctx.traj->size(); ++i) {
    const SpectralField cf = nonlocal::closed_form(ctx.flow.basis(), ctx.init, spec.l, spec.m, ctx.traj->times[i]);
    sup = std::max(sup, (ctx.traj->states[i] - cf).cwiseAbs().maxCoeff());
  }
  out.results["sup_error"] = number(sup);
  out.at_most("sup_error", sup, p.tol);
}

void analyze(const Context& ctx, const ScaledValue& p, Outcome& out) {
  const auto& times = ctx.traj->times;
  size_t best = 0;
  for (size_t i = 1; i < times.size(); ++i)
    if (std::abs(times[i] - p.t) < std::abs(times[best] - p.t)) best = i;
  const double t = times[best];
  if (std::abs(t - p.t) > 1e-9 * std::max(1.0, p.t))
    throw Error(ErrorCode::OutOfRange, "no sample at t = " + std::to_string(p.t));
  double scale = 1.0;
  switch (p.scale) {
    case ValueScale::None: break;
    case ValueScale::Sqrt2t: scale = std::sqrt(2.0 * t); break;
    case ValueScale::SqrtLnT: scale = std::sqrt(std::log(t)); break;
    case ValueScale::SqrtLn2t: scale = std::sqrt(std::log(2.0 * t)); break;
  }
  const double value = ctx.traj->states[best][resolve(ctx.flow.basis(), p.mode)] * scale;
  out.results["t"] = t;
  out.results["value"] = number(value);
  out.in_range("scaled_value", value, p.lo, p.hi);
}

void analyze(const Context& ctx, const RateFitCheck& p, Outcome& out) {
  const Trajectory& traj = *ctx.traj;
  const int pos = p.mode ? resolve(ctx.flow.basis(), *p.mode) : -1;
  std::vector<double> energies;
  if (p.series == SeriesKind::TailEnergy)
    for (double t : traj.times) energies.push_back(tail_energy(traj, t));
  std::vector<double> times, values;
  for (size_t i = 0; i < traj.size(); ++i) {
    double v = 0.0;
    switch (p.series) {
      case SeriesKind::Mode: v = std::abs(traj.states[i][pos]); break;
      case SeriesKind::Deviation: v = std::abs(traj.states[i][pos] - p.target); break;
      case SeriesKind::Norm: v = traj.states[i].norm(); break;
      case SeriesKind::TailEnergy: v = energies[i]; break;
    }
    const double t = traj.times[i];
    if (p.t_window && (t < p.t_window->first || t > p.t_window->second)) continue;
    if (p.value_window && (v < p.value_window->first || v > p.value_window->second)) continue;
    times.push_back(t);
    values.push_back(v);
  }
  const RateFit fit = fit_rate(times, values);
  out.results = fit_json(fit);
  out.check("model", fit.best.model == p.model, to_string(fit.best.model), to_string(p.model), 0.0);
  const double tol = std::max(p.abs_tol, p.rel_tol * std::abs(p.rate));
  out.within("rate", fit.best.rate, p.rate, tol);
}

void analyze(const Context& ctx, const LimitNorm& p, Outcome& out) {
  const double norm = ctx.traj->states.back().norm();
  out.results["final_time"] = ctx.traj->final_time();
  out.results["limit_norm"] = number(norm);
  out.within("limit_norm", norm, p.expected, p.tol);
}

void analyze(const Context& ctx, const Classify& p, Outcome& out) {
  const auto& spec = cubic_spec(ctx.flow);
  const auto cls = nonlocal::classify_rate(ctx.flow.basis(), ctx.init, spec.l, spec.m);
  out.results["case"] = nonlocal::to_string(cls.rate_case);
  out.results["lambda_j"] = cls.j_group.eigenvalue;
  out.results["lambda_l"] = ctx.flow.basis().group(spec.l).eigenvalue;
  out.results["predicted_rate"] = number(cls.predicted_rate);
  out.results["limit_norm"] = number(cls.limit_norm);
  out.results["t_prefactor"] = cls.t_prefactor;
  Json modes = Json::array();
  for (const auto& [pos, rate] : nonlocal::modewise_rates(ctx.flow.basis(), ctx.init, spec.l, spec.m))
    modes.push_back(Json{{"position", pos}, {"eigenvalue", ctx.flow.basis().eigenvalues()[pos]}, {"rate", rate}});
  out.results["modewise_rates"] = std::move(modes);
  out.check("case", cls.rate_case == p.expect, nonlocal::to_string(cls.rate_case), nonlocal::to_string(p.expect),
            0.0);
}

void analyze(const Context& ctx, const HrCheck& p, Outcome& out) {
  const auto& spec = cubic_spec(ctx.flow);
  const auto report = nonlocal::hr_check(ctx.flow.basis_ptr(), p.j, spec.l, spec.m, p.samples, ctx.config.seed);
  out.results["lambda_j"] = report.manifold.j_group.eigenvalue;
  out.results["lambda_l"] = report.manifold.l_group.eigenvalue;
  out.results["radius"] = number(report.manifold.radius);
  out.results["manifold_dim"] = report.manifold.dim;
  out.results["passed"] = report.passed;
  Json samples = Json::array();
  int worst_dim_mismatch = 0;
  double gap_error = 0.0, worst_gap = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& s : report.samples) {
    min_gap = std::min(min_gap, s.spectral_gap);
    samples.push_back(Json{{"kernel_dim", s.kernel_dim},
                           {"spectral_gap", number(s.spectral_gap)},
                           {"kernel_tol", number(s.kernel_tol)}});
    worst_dim_mismatch = std::max(worst_dim_mismatch, std::abs(s.kernel_dim - report.manifold.dim));
    if (p.gap && std::abs(s.spectral_gap - *p.gap) >= gap_error) {
      gap_error = std::abs(s.spectral_gap - *p.gap);
      worst_gap = s.spectral_gap;
    }
  }
  out.results["samples"] = std::move(samples);
  out.flag("kernel_dim_equals_manifold_dim", worst_dim_mismatch == 0);
  out.at_least("spectral_gap_floor", min_gap, report.gap_floor);
  if (p.kernel_dim) {
    bool all = true;
    for (const auto& s : report.samples) all = all && s.kernel_dim == *p.kernel_dim;
    out.check("kernel_dim", all, report.samples.front().kernel_dim, *p.kernel_dim, 0.0);
  }
  if (p.gap) out.within("spectral_gap", worst_gap, *p.gap, p.gap_tol);
}

void analyze(const Context& ctx, const EnergyIdentity& p, Outcome& out) {
  const double residual = energy_identity_residual(ctx.flow, *ctx.traj);
  out.results["dt"] = ctx.run.solver.params.dt;
  out.results["residual"] = number(residual);
  out.at_most("residual", residual, p.tol);
  if (p.min_reduction) {
    IntegratorParams refined = ctx.run.solver.params;
    refined.dt *= 0.5;
    const Trajectory fine = integrate(ctx.flow, ctx.init, refined);
    const double fine_residual = energy_identity_residual(ctx.flow, fine);
    const double reduction = residual / fine_residual;
    out.results["refined_dt"] = refined.dt;
    out.results["refined_residual"] = number(fine_residual);
    out.results["reduction"] = number(reduction);
    out.results["observed_order"] = number(std::log2(reduction));
    out.at_least("reduction", reduction, *p.min_reduction);
  }
}

void analyze(const Context& ctx, const Zelenyak& p, Outcome& out) {
  ZelenyakReport report;
  if (p.synthetic) {
    // u(t) = e^{-t/2} e_1, ||u_t||^2 = e^{-t} / 4
    std::vector<double> times(p.samples);
    for (int i = 0; i < p.samples; ++i) times[i] = p.t_end * i / (p.samples - 1);
    const SpectralField e1 = ctx.flow.basis().unit(0);
    const Trajectory traj = sample_trajectory(
        times, [&](double t) -> SpectralField { return std::exp(-0.5 * t) * e1; },
        [](double t) { return 0.5 * std::exp(-0.5 * t); }, [](double t) { return -0.25 * std::exp(-t); });
    out.results["source"] = "synthetic";
    out.results["c8"] = p.c8;
    out.results["beta"] = p.beta;
    report = zelenyak_bound_check(traj, p.c8, p.beta);
  } else {
    const TailDecay tail = fit_tail_decay(*ctx.traj);
    out.results["source"] = "trajectory";
    out.results["c8"] = number(tail.c8);
    out.results["beta"] = number(tail.beta);
    out.results["tail_fit"] = fit_json(tail.fit);
    report = zelenyak_bound_check(*ctx.traj, tail.c8, tail.beta);
  }
  out.results["c9"] = number(report.c9);
  out.results["worst_ratio"] = number(report.worst_ratio);
  out.results["grid_points"] = report.grid_points;
  out.flag("holds", report.holds);
  out.at_most("worst_ratio", report.worst_ratio, 1.0);
}

void analyze(const Context& ctx, const OmegaLimit& p, Outcome& out) {
  const SpectralField candidate = assemble(ctx.flow.basis(), p.candidate);
  const bool converges = omega_limit_single(*ctx.traj, candidate, p.tol);
  out.results["final_distance"] = number((ctx.traj->states.back() - candidate).norm());
  out.results["converges"] = converges;
  out.flag("omega_limit", converges, p.expect);
}

void analyze(const Context& ctx, const PerturbedBound& p, Outcome& out) {
  const auto report = perturbed_bound_check(*ctx.traj, ctx.flow.perturbation()->h, p.t_min);
  out.results["t_min"] = p.t_min;
  out.results["h_scale"] = number(report.h_scale);
  out.results["worst_ratio"] = number(report.worst_ratio);
  out.results["grid_points"] = report.grid_points;
  out.flag("holds", report.holds);
}

void analyze(const Context& ctx, const HClass& p, Outcome& out) {
  const DecayProfile h = p.alpha ? DecayProfile::power_law(*p.alpha) : ctx.flow.perturbation()->h;
  const auto report = h_class_check(h, p.t_probe);
  out.results["h"] = h.name();
  out.results["sqrt_integral"] = number(report.sqrt_integral);
  out.results["log_slope_at_probe"] = number(report.log_slope_at_probe);
  out.flag("positive_decreasing", report.positive_decreasing);
  out.flag("vanishes", report.vanishes);
  out.flag("sqrt_integrable", report.sqrt_integrable);
  out.flag("slow_decay", report.slow_decay);
  if (p.integral) out.within("sqrt_integral", report.sqrt_integral, *p.integral, p.integral_tol);
}

void analyze(const Context&, const SlowFlow& p, Outcome& out) {
  const ScalarTrajectory traj = scalar_slow_flow(p.kind, p.rho1, p.rho2, p.a0, p.t_end);
  out.results["kind"] = to_string(p.kind);
  out.results["samples"] = traj.times.size();
  out.results["final_value"] = number(traj.values.back());
  bool decreasing = true;
  for (size_t i = 1; i < traj.values.size(); ++i)
    decreasing = decreasing && traj.values[i] < traj.values[i - 1] && traj.values[i] > 0.0;
  out.flag("positive_decreasing", decreasing);

  const auto in_window = [&](double t) { return !p.bound_window || (t >= p.bound_window->first && t <= p.bound_window->second); };
  if (p.bound_window) {
    double worst = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < traj.times.size(); ++i)
      if (in_window(traj.times[i])) worst = std::min(worst, traj.values[i] * std::sqrt(std::log(traj.times[i])));
    out.results["min_a_sqrt_ln_t"] = number(worst);
    out.at_least("lower_bound", worst, 1.0 / (3.0 * p.rho1));
  }
  if (p.theta_max) {
    std::vector<double> v, g;
    for (size_t i = 0; i < traj.times.size(); ++i)
      if (in_window(traj.times[i])) {
        v.push_back(traj.potentials[i]);
        g.push_back(traj.rates[i]);
      }
    const auto est = lojasiewicz_fit(v, g, 0.0);
    out.results["theta"] = number(est.theta);
    out.results["slope"] = number(est.slope);
    out.results["pairs_used"] = est.pairs_used;
    // Reference modulus 2|s| |ln 2s|^{3/2} at the last |V - B|, recorded only.
    out.results["reference_modulus_at_end"] = number(flat_gradient_modulus(std::abs(traj.potentials.back())));
    out.at_most("theta", est.theta, *p.theta_max);
  }
  if (p.value_t) {
    size_t best = 0;
    for (size_t i = 1; i < traj.times.size(); ++i)
      if (std::abs(traj.times[i] - *p.value_t) < std::abs(traj.times[best] - *p.value_t)) best = i;
    const double t = traj.times[best];
    const double value = traj.values[best] * std::sqrt(std::log(2.0 * t));
    out.results["value_t"] = t;
    out.results["a_sqrt_ln_2t"] = number(value);
    if (p.kind == SlowFlowKind::NonlocalLog)
      out.results["exact_a_sqrt_ln_2t"] = number(nonlocal_log_exact(p.a0, t) * std::sqrt(std::log(2.0 * t)));
    out.in_range("a_sqrt_ln_2t", value, p.value_lo, p.value_hi);
  }
}

void analyze(const Context& ctx, const Lojasiewicz& p, Outcome& out) {
  const auto est = lojasiewicz_estimate(ctx.flow, *ctx.traj);
  out.results["theta"] = number(est.theta);
  out.results["slope"] = number(est.slope);
  out.results["pairs_used"] = est.pairs_used;
  out.results["lyapunov_limit"] = number(est.lyapunov_limit);
  if (p.theta) out.within("theta", est.theta, *p.theta, p.tol);
  if (p.theta_max) out.at_most("theta", est.theta, *p.theta_max);
}

void analyze(const Context& ctx, const BlowUp& p, Outcome& out) {
  const bool blew_up = ctx.traj->status == TrajectoryStatus::BlowUp;
  out.results["status"] = to_string(ctx.traj->status);
  out.results["final_time"] = number(ctx.traj->final_time());
  out.flag("blow_up", blew_up, p.expect);
  if (p.expect) out.flag("finite_blow_up_time", std::isfinite(ctx.traj->final_time()));
}

std::string csv_name(const ExperimentConfig& cfg, const RunConfig& run) {
  return run.id.empty() ? cfg.id + ".csv" : cfg.id + "." + run.id + ".csv";
}

const char* solver_name(SolverMethod m) {
  switch (m) {
    case SolverMethod::Integrate: return "integrate";
    case SolverMethod::ClosedForm: return "closed_form";
    case SolverMethod::None: return "none";
  }
  return "unknown";
}

[[noreturn]] void rethrow_with_id(const Error& e, const ExperimentConfig& cfg, const RunConfig& run) {
  const std::string where = run.id.empty() ? cfg.id : cfg.id + "/" + run.id;
  throw Error(e.code(), "experiment " + where + ": " + e.detail());
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t,V,ut_norm";
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
  for (Eigen::Index k = 1; k <= n; ++k) out += ",a_" + std::to_string(k);
  out += '\n';
  char buf[32];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
  };
  for (size_t i = 0; i < traj.size(); ++i) {
    put(traj.times[i]);
    out += ',';
    put(traj.lyapunov_values[i]);
    out += ',';
    put(traj.ut_norms[i]);
    for (Eigen::Index k = 0; k < n; ++k) {
      out += ',';
      put(traj.states[i][k]);
    }
    out += '\n';
  }
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::Config, "cannot write '" + tmp + "'");
    f << content;
    f.flush();
    if (!f) throw Error(ErrorCode::Config, "short write to '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Config, "cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

Report run(const ExperimentConfig& config) {
  const auto start = Clock::now();
  namespace fs = std::filesystem;
  if (!config.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec || !fs::is_directory(config.out_dir))
      throw Error(ErrorCode::Config, "output.dir: cannot create '" + config.out_dir + "'");
  }

  std::shared_ptr<const EigenBasis> basis;
  try {
    basis = build_basis(config.domain, config.n_modes);
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, "n_modes/domain: " + e.detail());
  }

  // Resolve every run before any computation so config mistakes surface first.
  struct Prepared {
    std::unique_ptr<Flow> flow;
    SpectralField init;
  };
  std::vector<Prepared> prepared;
  for (const auto& run : config.runs) {
    Prepared p;
    try {
      try {
        p.flow = std::make_unique<Flow>(basis, run.flow);
      } catch (const Error& e) {
        throw Error(ErrorCode::Config, "flow: " + e.detail());
      }
      p.init = run.solver.method == SolverMethod::None && run.initial.pairs.empty() && !run.initial.random
                   ? SpectralField::Zero(basis->size())
                   : initial_state(*basis, run.initial, config.seed);
      for (const auto& a : run.analyses) check_modes(*basis, a);
    } catch (const Error& e) {
      rethrow_with_id(e, config, run);
    }
    prepared.push_back(std::move(p));
  }

  Report report;
  report.id = config.id;
  Json runs = Json::array();
  Json timings = Json::array();
  for (size_t r = 0; r < config.runs.size(); ++r) {
    const RunConfig& run = config.runs[r];
    const Flow& flow = *prepared[r].flow;
    const auto run_start = Clock::now();
    Json rj = Json::object();
    rj["id"] = run.id;
    rj["solver"] = solver_name(run.solver.method);

    std::optional<Trajectory> traj;
    try {
      if (run.solver.method == SolverMethod::Integrate)
        traj = integrate(flow, prepared[r].init, run.solver.params);
      else if (run.solver.method == SolverMethod::ClosedForm)
        traj = closed_form_trajectory(flow, prepared[r].init, run.solver);
    } catch (const Error& e) {
      rethrow_with_id(e, config, run);
    }
    if (traj) {
      Json tj = Json::object();
      tj["status"] = to_string(traj->status);
      tj["final_time"] = number(traj->final_time());
      tj["samples"] = traj->size();
      tj["final_norm"] = number(traj->states.back().norm());
      if (!config.out_dir.empty() && config.write_csv) {
        const std::string name = csv_name(config, run);
        write_atomic((fs::path(config.out_dir) / name).string(), trajectory_csv(*traj));
        tj["csv"] = name;
      }
      rj["trajectory"] = std::move(tj);
    } else {
      rj["trajectory"] = nullptr;
    }

    const Context ctx{config, run, flow, prepared[r].init, traj ? &*traj : nullptr};
    Json analyses = Json::array();
    for (const auto& a : run.analyses) {
      Outcome out;
      try {
        std::visit([&](const auto& params) { analyze(ctx, params, out); }, a.params);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::Config) rethrow_with_id(e, config, run);
        out.results["error"] = e.what();
        out.check("completed", false, e.what(), "no error", 0.0);
      }
      Json aj = Json::object();
      aj["type"] = a.type;
      aj["label"] = a.label;
      aj["results"] = std::move(out.results);
      aj["assertions"] = std::move(out.assertions);
      analyses.push_back(std::move(aj));
      report.assertions += static_cast<int>(analyses.back()["assertions"].size());
      report.failed += out.failed;
    }
    rj["analyses"] = std::move(analyses);
    runs.push_back(std::move(rj));

    const double seconds = seconds_since(run_start);
    Json time = Json::object();
    time["run"] = run.id;
    time["seconds"] = seconds;
    if (run.max_seconds) {
      const bool ok = seconds <= *run.max_seconds;
      time["budget_seconds"] = *run.max_seconds;
      time["within_budget"] = ok;
      ++report.assertions;
      if (!ok) ++report.failed;
    }
    timings.push_back(std::move(time));
  }

  Json& j = report.json;
  j["schema_version"] = kSchemaVersion;
  j["experiment"] = config.id;
  j["seed"] = config.seed;
  j["config"] = config.source;
  j["runs"] = std::move(runs);
  j["summary"] = Json{{"assertions", report.assertions}, {"failed", report.failed}, {"passed", report.passed()}};
  j["timings"] = Json{{"total_seconds", seconds_since(start)}, {"runs", std::move(timings)}};
  if (!config.out_dir.empty())
    write_atomic((fs::path(config.out_dir) / (config.id + ".report.json")).string(), j.dump(2) + "\n");
  return report;
}

}  // namespace gradflow::experiment
