#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <vector>

#include "doctest.h"
#include "gradflow/error.hpp"
#include "gradflow/metrics.hpp"

using namespace gradflow;

namespace {

std::shared_ptr<const EigenBasis> interval(int n) { return build_basis({DomainKind::Interval}, n); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a * std::pow(b / a, double(i) / (n - 1));
  return v;
}

template <class F>
std::vector<double> apply(const std::vector<double>& t, F f) {
  std::vector<double> v;
  for (double x : t) v.push_back(f(x));
  return v;
}

Trajectory exp_orbit(const std::vector<double>& times) {
  // u = e^{-t/2} e1 with V = 0 as placeholder.
  return sample_trajectory(
      times,
      [](double t) {
        SpectralField a = SpectralField::Zero(2);
        a[0] = std::exp(-0.5 * t);
        return a;
      },
      [](double t) { return 0.5 * std::exp(-0.5 * t); }, [](double) { return 0.0; });
}

}  // namespace

TEST_CASE("fit_rate recovers each model") {
  struct Case {
    DecayModel model;
    std::vector<double> t;
    std::function<double(double)> f;
    double rate;
  };
  const std::vector<Case> cases{
      {DecayModel::Exponential, linspace(1, 50, 400), [](double t) { return 2.0 * std::exp(-0.3 * t); }, 0.3},
      {DecayModel::Algebraic, logspace(1, 1e4, 400), [](double t) { return 3.0 * std::pow(t, -1.5); }, 1.5},
      {DecayModel::Logarithmic, logspace(10, 1e8, 400), [](double t) { return std::pow(std::log(t), -2.0); }, 2.0},
      {DecayModel::TExponential, linspace(1, 50, 400), [](double t) { return 1.5 * t * std::exp(-0.5 * t); }, 0.5},
  };
  for (const auto& c : cases) {
    const RateFit fit = fit_rate(c.t, apply(c.t, c.f));
    CAPTURE(to_string(c.model));
    CHECK(fit.best.model == c.model);
    CHECK(std::abs(fit.best.rate - c.rate) <= 0.005 * c.rate);
    CHECK_FALSE(fit.ambiguous);
    CHECK(fit.samples_used == 200);
  }
}

TEST_CASE("fit_rate on the nonlocal closed-form shapes") {
  // a(t) = 0.3 / sqrt(1 + 0.18 t): algebraic with p -> 1/2
  const auto t = logspace(1e2, 1e6, 300);
  const RateFit fit = fit_rate(t, apply(t, [](double s) { return 0.3 / std::sqrt(1.0 + 0.18 * s); }));
  CHECK(fit.best.model == DecayModel::Algebraic);
  CHECK(fit.best.rate == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("fit_rate edge cases") {
  const auto t = linspace(1, 10, 100);
  const RateFit flat = fit_rate(t, std::vector<double>(100, 0.7));
  CHECK(flat.ambiguous);
  CHECK(flat.best.rate == doctest::Approx(0.0).epsilon(1e-12));

  const auto few = linspace(1, 10, 30);
  CHECK(code_of([&] { fit_rate(few, std::vector<double>(30, 1.0)); }) == ErrorCode::InsufficientData);
  // Values at or below the trust floor are discarded.
  std::vector<double> v(100, 1e-14);
  CHECK(code_of([&] { fit_rate(t, v); }) == ErrorCode::InsufficientData);
  CHECK(code_of([&] { fit_rate(t, few); }) == ErrorCode::SizeMismatch);
}

TEST_CASE("Zelenyak constant and bound") {
  CHECK(zelenyak_constant(0.25, 1.0) == doctest::Approx(0.5 * (1.0 / (1.0 - std::exp(-0.5)) + 1.0)));
  CHECK(zelenyak_constant(0.25, 1.0) == doctest::Approx(1.7707).epsilon(1e-4));
  CHECK(zelenyak_constant(0.5, 1.0) > zelenyak_constant(0.25, 1.0));
  CHECK(zelenyak_constant(0.25, 2.0) < zelenyak_constant(0.25, 1.0));
  CHECK(code_of([] { zelenyak_constant(-1.0, 1.0); }) == ErrorCode::InvalidArgument);

  const Trajectory traj = exp_orbit(linspace(0, 20, 4001));
  const ZelenyakReport r = zelenyak_bound_check(traj, 0.25, 1.0);
  CHECK(r.holds);
  CHECK(r.worst_ratio > 0.3);
  CHECK(r.worst_ratio <= 1.0);
  CHECK(r.grid_points > 1000);
  CHECK(code_of([&] { zelenyak_bound_check(traj, 0.1, 1.0); }) == ErrorCode::HypothesisFailed);

  // A longer horizon keeps the truncation of the tail out of the fit window.
  const TailDecay td = fit_tail_decay(exp_orbit(linspace(0, 40, 8001)));
  CHECK(td.beta == doctest::Approx(1.0).epsilon(0.01));
  CHECK(td.c8 == doctest::Approx(0.25).epsilon(0.01));
}

TEST_CASE("sqrt(h) majorant") {
  const DecayProfile h = DecayProfile::power_law(3.0);
  for (double t : {1.0, 2.0, 10.0, 1e4}) CHECK(sqrt_h_majorant(h, t) == doctest::Approx(2.0 / std::sqrt(t)));
  const DecayProfile same = DecayProfile::custom(
      "copy", [](double t) { return std::pow(1.0 + t, -3.0); }, [](double t) { return -3.0 * std::pow(1.0 + t, -4.0); });
  for (double t : {1.0, 5.0, 100.0}) CHECK(sqrt_h_majorant(same, t) == doctest::Approx(2.0 / std::sqrt(t)).epsilon(1e-5));
  CHECK(std::isinf(sqrt_h_majorant(DecayProfile::power_law(2.0), 3.0)));
}

TEST_CASE("h class") {
  HClassReport r = h_class_check(DecayProfile::power_law(3.0));
  CHECK(r.positive_decreasing);
  CHECK(r.vanishes);
  CHECK(r.sqrt_integrable);
  CHECK(r.slow_decay);
  CHECK(r.sqrt_integral == doctest::Approx(2.0).epsilon(1e-5));

  r = h_class_check(DecayProfile::power_law(1.5));
  CHECK(r.positive_decreasing);
  CHECK_FALSE(r.sqrt_integrable);
  CHECK(std::isinf(r.sqrt_integral));

  r = h_class_check(DecayProfile::custom(
      "exp", [](double t) { return std::exp(-t); }, [](double t) { return -std::exp(-t); }, [](double) { return -1.0; }));
  CHECK(r.positive_decreasing);
  CHECK(r.sqrt_integrable);
  CHECK(r.sqrt_integral == doctest::Approx(2.0).epsilon(1e-5));
  CHECK_FALSE(r.slow_decay);

  r = h_class_check(DecayProfile::custom(
      "grows", [](double t) { return 1.0 + t; }, [](double) { return 1.0; }));
  CHECK_FALSE(r.positive_decreasing);
  CHECK_FALSE(r.vanishes);
}

TEST_CASE("Lojasiewicz fit") {
  for (double slope : {0.5, 0.9, 0.2, 1.5}) {
    std::vector<double> v, g;
    for (double s : logspace(1e-10, 1.0, 60)) {
      v.push_back(2.0 + s);
      g.push_back(0.7 * std::pow(s, slope));
    }
    const auto est = lojasiewicz_fit(v, g, 2.0);
    CAPTURE(slope);
    CHECK(est.slope == doctest::Approx(slope));
    CHECK(est.theta == doctest::Approx(std::clamp(1.0 - slope, 0.0, 0.5)));
    CHECK(est.pairs_used == 30);
  }
  std::vector<double> v(15, 1.0), g(15, 1.0);
  CHECK(code_of([&] { lojasiewicz_fit(v, g, 0.0); }) == ErrorCode::InsufficientData);
  CHECK(flat_gradient_modulus(0.0) == 0.0);
  CHECK(flat_gradient_modulus(0.1) == doctest::Approx(0.2 * std::pow(std::log(5.0), 1.5)));
}

TEST_CASE("nonlocal orbit: Lyapunov limit, Lojasiewicz and omega-limit") {
  const auto b = interval(16);
  const Flow flow(b, FlowSpec{NonlocalCubicFlow{GroupSelector::index(2), 1}});
  SpectralField a = SpectralField::Zero(16);
  a[0] = 0.1;
  const Trajectory traj = integrate(flow, a, {5e-4, 10.0, 20, 0.0, 1e6});
  CHECK(lyapunov_limit(traj) == doctest::Approx(2.25).epsilon(1e-10));
  const auto est = lojasiewicz_estimate(flow, traj);
  CHECK(est.theta == doctest::Approx(0.5).epsilon(0.1));

  SpectralField psi = SpectralField::Zero(16);
  psi[0] = std::sqrt(3.0);
  CHECK(omega_limit_single(traj, psi, 1e-3));
  CHECK_FALSE(omega_limit_single(traj, -psi, 1e-3));
  CHECK_FALSE(omega_limit_single(traj, SpectralField::Zero(16), 1e-3));

  Trajectory blown = traj;
  blown.status = TrajectoryStatus::BlowUp;
  CHECK(code_of([&] { omega_limit_single(blown, psi, 1e-3); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { lojasiewicz_estimate(flow, blown); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("energy identity") {
  const auto b = interval(16);
  const Flow flow(b, FlowSpec{NonlocalCubicFlow{GroupSelector::index(2), 1}});
  SpectralField a = SpectralField::Zero(16);
  a[0] = 0.1;
  a[1] = 0.05;
  const double coarse = energy_identity_residual(flow, integrate(flow, a, {1e-3, 5.0, 20, 0.0, 1e6}));
  const double fine = energy_identity_residual(flow, integrate(flow, a, {1e-3, 5.0, 10, 0.0, 1e6}));
  CHECK(coarse <= 1e-5);
  CHECK(fine < coarse / 4.0);

  auto base = std::make_shared<const FlowSpec>(flow.spec());
  const Flow perturbed(b, FlowSpec{PerturbedFlow{base, DecayProfile::power_law(3.0), linear_forcing()}});
  CHECK(energy_identity_residual(perturbed, integrate(perturbed, a, {1e-3, 5.0, 10, 0.0, 1e6})) <= 1e-5);
}

TEST_CASE("slow scalar flows") {
  const ScalarTrajectory nl = scalar_slow_flow(SlowFlowKind::NonlocalLog, 1, 1, 0.5, 1e6);
  CHECK(nl.times.back() == doctest::Approx(1e6));
  double worst = 0.0;
  for (size_t i = 0; i < nl.times.size(); ++i)
    worst = std::max(worst, std::abs(nl.values[i] / nonlocal_log_exact(0.5, nl.times[i]) - 1.0));
  CHECK(worst <= 1e-4);
  CHECK(nonlocal_log_exact(0.5, 0.0) == doctest::Approx(0.5));
  CHECK(nonlocal_log_exact(0.5, 1e6) * std::sqrt(std::log(2e6)) == doctest::Approx(1.0).epsilon(1e-5));

  for (double a0 : {0.5, 5.0}) {
    const ScalarTrajectory flat = scalar_slow_flow(SlowFlowKind::FlatExp, 1, 1, a0, 1e6);
    CHECK(flat.values.front() == a0);
    for (size_t i = 1; i < flat.values.size(); ++i) {
      CHECK(flat.values[i] > 0.0);
      CHECK(flat.values[i] <= flat.values[i - 1]);
      CHECK(flat.potentials[i] <= 0.0);
    }
  }
  CHECK(code_of([] { scalar_slow_flow(SlowFlowKind::FlatExp, 1, 1, -0.5, 10); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { scalar_slow_flow(SlowFlowKind::FlatExp, 0, 1, 0.5, 10); }) == ErrorCode::InvalidArgument);
}
