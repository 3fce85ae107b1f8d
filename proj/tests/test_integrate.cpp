#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "gradflow/error.hpp"
#include "gradflow/integrate.hpp"
#include "gradflow/nonlocal_model.hpp"
#include "support.hpp"

using namespace gradflow;

namespace {

std::shared_ptr<const EigenBasis> interval(int n) { return build_basis({DomainKind::Interval}, n); }

FlowSpec cubic(std::int64_t l, int m = 1) { return FlowSpec{NonlocalCubicFlow{GroupSelector::index(l), m}}; }

SpectralField benchmark_init(int n) {
  SpectralField a = SpectralField::Zero(n);
  a[0] = 0.1;
  a[1] = 0.05;
  return a;
}

double sup_error_vs_closed_form(const Flow& flow, const SpectralField& init, const Trajectory& traj) {
  const auto& spec = std::get<NonlocalCubicFlow>(flow.spec().variant);
  double err = 0.0;
  for (size_t i = 0; i < traj.size(); ++i) {
    const SpectralField cf = nonlocal::closed_form(flow.basis(), init, spec.l, spec.m, traj.times[i]);
    err = std::max(err, (traj.states[i] - cf).cwiseAbs().maxCoeff());
  }
  return err;
}

}  // namespace

TEST_CASE("pure heat flow decays like exp(-t)") {
  const auto b = interval(16);
  const Flow flow(b, FlowSpec{LocalFlow{zero_nonlinearity()}});
  const Trajectory traj = integrate(flow, b->unit(0), {1e-3, 1.0, 1, 0.0, 1e6});
  CHECK(traj.final_time() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(traj.states.back()[0] - std::exp(-1.0)) <= 1e-10);
  CHECK(traj.status == TrajectoryStatus::MaxTime);
}

TEST_CASE("stiff pure heat with 256 modes and dt = 1e-2") {
  const auto b = interval(256);
  const Flow flow(b, FlowSpec{LocalFlow{zero_nonlinearity()}});
  const SpectralField a0 = testing::random_vector(256, 1.0, 17);
  const Trajectory traj = integrate(flow, a0, {1e-2, 1.0, 10, 0.0, 1e6});
  for (size_t i = 0; i < traj.size(); ++i) {
    CHECK(traj.states[i].allFinite());
    double worst = 0.0;
    for (int k = 1; k <= 256; ++k)
      worst = std::max(worst, std::abs(traj.states[i][k - 1] - a0[k - 1] * std::exp(-double(k) * k * traj.times[i])));
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("non-local benchmark matches the closed form") {
  const auto b = interval(16);
  const Flow flow(b, cubic(2));
  const SpectralField init = benchmark_init(16);
  const Trajectory traj = integrate(flow, init, {1e-3, 10.0, 1, 0.0, 1e6});
  CHECK(sup_error_vs_closed_form(flow, init, traj) <= 1e-6);
}

TEST_CASE("fourth order: halving dt reduces the error at least 12 times") {
  const auto b = interval(16);
  const Flow flow(b, cubic(2));
  const SpectralField init = benchmark_init(16);
  const double coarse = sup_error_vs_closed_form(flow, init, integrate(flow, init, {0.05, 10.0, 1, 0.0, 1e6}));
  const double fine = sup_error_vs_closed_form(flow, init, integrate(flow, init, {0.025, 10.0, 2, 0.0, 1e6}));
  MESSAGE("coarse " << coarse << " fine " << fine << " ratio " << coarse / fine);
  CHECK(coarse / fine >= 12.0);
}

TEST_CASE("blow-up of the cubic flow") {
  const auto b = interval(16);
  const Flow flow(b, FlowSpec{LocalFlow{pure_cubic()}});
  IntegratorParams p;
  p.t_end = 10.0;
  const Trajectory traj = integrate(flow, 10.0 * b->unit(0), p);
  CHECK(traj.status == TrajectoryStatus::BlowUp);
  CHECK(std::isfinite(traj.final_time()));
  CHECK(traj.final_time() < 1.0);
  CHECK(traj.states.back().norm() >= p.blowup_threshold);
}

TEST_CASE("Lyapunov values are nondecreasing along unperturbed flows") {
  const auto b = interval(16);
  for (const auto& spec : {FlowSpec{LocalFlow{allen_cahn(3.0)}}, cubic(3), FlowSpec{LocalFlow{flat_exponential()}},
                           FlowSpec{NonlocalGeneralFlow{5.0, slow_log_potential()}}}) {
    const Flow flow(b, spec);
    const Trajectory traj = integrate(flow, testing::random_vector(16, 0.3, 4), {1e-3, 5.0, 5, 0.0, 1e6});
    for (size_t i = 1; i < traj.size(); ++i) CHECK(traj.lyapunov_values[i] >= traj.lyapunov_values[i - 1] - 1e-9);
  }
}

TEST_CASE("trajectory bookkeeping") {
  const auto b = interval(8);
  const Flow flow(b, cubic(2));
  const Trajectory traj = integrate(flow, benchmark_init(8), {1e-2, 1.005, 7, 0.0, 1e6});
  REQUIRE(traj.size() == traj.states.size());
  REQUIRE(traj.size() == traj.lyapunov_values.size());
  REQUIRE(traj.size() == traj.ut_norms.size());
  for (size_t i = 1; i < traj.size(); ++i) CHECK(traj.times[i] > traj.times[i - 1]);
  CHECK(traj.times[1] == doctest::Approx(0.07));
  CHECK(traj.final_time() == doctest::Approx(1.005));
  for (size_t i = 0; i < traj.size(); ++i) CHECK(traj.ut_norms[i] == doctest::Approx(flow.rhs(traj.states[i]).norm()));
}

TEST_CASE("stationarity detection") {
  const auto b = interval(8);
  const Flow flow(b, cubic(2));
  const Trajectory traj = integrate(flow, benchmark_init(8), {1e-2, 100.0, 1, 1e-6, 1e6});
  CHECK(traj.status == TrajectoryStatus::Converged);
  CHECK(traj.ut_norms.back() < 1e-6);
  CHECK(traj.final_time() < 100.0);
}

TEST_CASE("parameter validation") {
  const auto b = interval(4);
  const Flow flow(b, cubic(2));
  const SpectralField a = SpectralField::Zero(4);
  CHECK_THROWS_AS(integrate(flow, a, {1.5, 1.0, 1, 0.0, 1e6}), Error);
  CHECK_THROWS_AS(integrate(flow, a, {1e-3, 1.0, 0, 0.0, 1e6}), Error);
  CHECK_THROWS_AS(integrate(flow, SpectralField::Zero(3), {}), Error);
}

TEST_CASE("tail energy") {
  SUBCASE("equilibrium trajectory") {
    const auto b = interval(8);
    const Flow flow(b, cubic(2));
    SpectralField psi = SpectralField::Zero(8);
    psi[0] = std::sqrt(3.0);
    const Trajectory traj = integrate(flow, psi, {1e-3, 2.0, 1, 0.0, 1e6});
    // Only the O(dt^4) fixed-point shift of the scheme remains.
    CHECK(tail_energy(traj, 0.0) <= 1e-20);
  }
  SUBCASE("energy identity along the benchmark run") {
    const auto b = interval(16);
    const Flow flow(b, cubic(2));
    const Trajectory traj = integrate(flow, benchmark_init(16), {1e-3, 10.0, 1, 0.0, 1e6});
    const double v_final = traj.lyapunov_values.back();
    for (size_t i = traj.size() / 2; i < traj.size(); i += 97)
      CHECK(std::abs(tail_energy(traj, traj.times[i]) - (v_final - traj.lyapunov_values[i])) <= 1e-5);
  }
  SUBCASE("synthetic exponential orbit") {
    const auto b = interval(4);
    std::vector<double> times;
    for (int i = 0; i <= 40000; ++i) times.push_back(i * 1e-3);
    const SpectralField e1 = b->unit(0);
    const Trajectory traj = sample_trajectory(
        times, [&](double t) -> SpectralField { return std::exp(-0.5 * t) * e1; },
        [](double t) { return 0.5 * std::exp(-0.5 * t); }, [](double t) { return -0.25 * std::exp(-t); });
    for (double t : {0.0, 1.0, 2.5, 7.3, 15.0}) {
      const double exact = 0.25 * std::exp(-t);
      CHECK(std::abs(tail_energy(traj, t) - exact) <= 1e-3 * exact);
    }
    CHECK_THROWS_AS(tail_energy(traj, 41.0), Error);
    CHECK_THROWS_AS(tail_energy(traj, -1.0), Error);
  }
}

TEST_CASE("perturbed flows integrate and record the base V") {
  const auto b = interval(8);
  auto base = std::make_shared<const FlowSpec>(cubic(2));
  const Flow flow(b, FlowSpec{PerturbedFlow{base, DecayProfile::power_law(3.0), linear_forcing()}});
  const Trajectory traj = integrate(flow, benchmark_init(8), {1e-2, 5.0, 10, 0.0, 1e6});
  for (size_t i = 0; i < traj.size(); ++i)
    CHECK(traj.lyapunov_values[i] == doctest::Approx(flow.base().lyapunov(traj.states[i])));
}
