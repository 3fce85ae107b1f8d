#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "gradflow/error.hpp"
#include "gradflow/flows.hpp"
#include "gradflow/integrate.hpp"
#include "gradflow/nonlocal_model.hpp"
#include "support.hpp"

using namespace gradflow;
using namespace gradflow::nonlocal;

namespace {

std::shared_ptr<const EigenBasis> interval(int n) { return build_basis({DomainKind::Interval}, n); }
std::shared_ptr<const EigenBasis> square(int n) { return build_basis({DomainKind::Square}, n); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

// Direct evaluation of the closed form without any log-space rearrangement,
// valid for moderate t.
SpectralField naive_closed_form(const EigenBasis& b, const SpectralField& a0, double lam_l, int m, double t) {
  double den = 1.0;
  for (int k = 0; k < b.size(); ++k) {
    const double d = lam_l - std::pow(double(b.eigenvalues()[k]), m);
    den += d == 0.0 ? 2.0 * a0[k] * a0[k] * t : a0[k] * a0[k] / d * std::expm1(2.0 * d * t);
  }
  SpectralField out(b.size());
  for (int k = 0; k < b.size(); ++k)
    out[k] = a0[k] * std::exp((lam_l - std::pow(double(b.eigenvalues()[k]), m)) * t) / std::sqrt(den);
  return out;
}

}  // namespace

TEST_CASE("closed form basic values") {
  const auto b = interval(8);
  const auto l2 = GroupSelector::index(2);
  CHECK(closed_form(*b, SpectralField::Zero(8), l2, 1, 5.0).norm() == 0.0);

  SpectralField a = SpectralField::Zero(8);
  a[0] = 0.1;
  CHECK(closed_form(*b, a, l2, 1, 0.0)[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(std::abs(closed_form(*b, a, l2, 1, 20.0)[0] - std::sqrt(3.0)) <= 1e-12);
  CHECK(std::abs(closed_form(*b, a, l2, 1, 1e6).norm() - std::sqrt(3.0)) <= 1e-8);

  a[0] = 0.3;
  const double v = closed_form(*b, a, GroupSelector::index(1), 1, 1e4)[0];
  CHECK(v == doctest::Approx(0.3 / std::sqrt(1.0 + 2.0 * 0.09 * 1e4)).epsilon(1e-13));
  CHECK(v == doctest::Approx(1.0 / std::sqrt(2e4)).epsilon(1e-3));
}

TEST_CASE("closed form agrees with the direct formula and survives large t") {
  for (auto b : {interval(10), square(10)}) {
    for (int m : {1, 2}) {
      const SpectralField a = testing::random_vector(b->size(), 0.3, 40 + m);
      const double lam_l = std::pow(double(b->group(GroupSelector::index(2)).eigenvalue), m);
      for (double t : {0.0, 0.01, 0.1, 0.5}) {
        const SpectralField ref = naive_closed_form(*b, a, lam_l, m, t);
        CHECK((closed_form(*b, a, GroupSelector::index(2), m, t) - ref).cwiseAbs().maxCoeff() <= 1e-12);
      }
      for (double t : {1e3, 1e8, 1e300}) CHECK(closed_form(*b, a, GroupSelector::index(2), m, t).allFinite());
    }
  }
  const auto b = interval(4);
  SpectralField a = SpectralField::Zero(4);
  a[3] = 0.5;
  const SpectralField far = closed_form(*b, a, GroupSelector::index(1), 1, 1e3);
  CHECK(far.allFinite());
  CHECK(far[3] == 0.0);  // magnitude underflows
  CHECK_THROWS_AS(closed_form(*b, a, GroupSelector::index(1), 1, -1.0), Error);
}

TEST_CASE("closed form and integrate agree for random data") {
  int run = 0;
  for (auto b : {interval(12), square(12)}) {
    for (int m : {1, 2}) {
      for (int s = 0; s < 10; ++s, ++run) {
        SpectralField a = testing::random_vector(b->size(), 0.2, 500 + run);
        const auto l = GroupSelector::index(2);
        const Flow flow(b, FlowSpec{NonlocalCubicFlow{l, m}});
        const Trajectory traj = integrate(flow, a, {m == 1 ? 5e-4 : 1e-4, 10.0, 20, 0.0, 1e6});
        double err = 0.0;
        for (size_t i = 0; i < traj.size(); ++i)
          err = std::max(err, (traj.states[i] - closed_form(*b, a, l, m, traj.times[i])).cwiseAbs().maxCoeff());
        CAPTURE(run);
        CHECK(err <= 1e-6);
      }
    }
  }
}

TEST_CASE("closed form commutes with rotations inside the j-group") {
  const auto b = square(20);
  const auto& g = b->group(GroupSelector::eigenvalue(5));
  const SpectralField a = testing::random_vector(b->size(), 0.2, 77);
  const double th = 1.1;
  Eigen::Matrix2d rot;
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  SpectralField ra = a;
  ra.segment(g.start, 2) = rot * a.segment(g.start, 2);
  for (double t : {0.3, 2.0, 40.0}) {
    SpectralField expected = closed_form(*b, a, GroupSelector::eigenvalue(10), 1, t);
    expected.segment(g.start, 2) = rot * expected.segment(g.start, 2).eval();
    CHECK((closed_form(*b, ra, GroupSelector::eigenvalue(10), 1, t) - expected).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("equilibrium manifolds") {
  const auto m1 = equilibrium_manifold(*interval(8), GroupSelector::index(1), GroupSelector::index(2));
  CHECK(m1.radius == doctest::Approx(std::sqrt(3.0)));
  CHECK(m1.dim == 0);
  const auto m2 = equilibrium_manifold(*square(20), GroupSelector::eigenvalue(5), GroupSelector::eigenvalue(10));
  CHECK(m2.radius == doctest::Approx(std::sqrt(5.0)));
  CHECK(m2.dim == 1);
  CHECK(code_of([&] { equilibrium_manifold(*interval(8), GroupSelector::index(2), GroupSelector::index(1)); }) ==
        ErrorCode::NoEquilibrium);
  CHECK(code_of([&] { equilibrium_manifold(*interval(8), GroupSelector::index(2), GroupSelector::index(2)); }) ==
        ErrorCode::NoEquilibrium);
}

TEST_CASE("rate classification") {
  const auto b = interval(8);
  SpectralField a = SpectralField::Zero(8);
  a[1] = 0.1;
  auto c = classify_rate(*b, a, GroupSelector::index(1));
  CHECK(c.rate_case == RateCase::DecayExponential);
  CHECK(c.predicted_rate == 3.0);
  CHECK(c.limit_norm == 0.0);

  a.setZero();
  a[0] = 0.3;
  c = classify_rate(*b, a, GroupSelector::index(1));
  CHECK(c.rate_case == RateCase::DecayAlgebraic);
  CHECK(c.predicted_rate == 0.5);

  a[0] = 0.1;
  c = classify_rate(*b, a, GroupSelector::index(2));
  CHECK(c.rate_case == RateCase::ConvergeNonzero);
  CHECK(c.limit_norm == doctest::Approx(std::sqrt(3.0)));
  CHECK(c.predicted_rate == 6.0);
  CHECK_FALSE(c.t_prefactor);
  a[1] = 0.05;
  CHECK(classify_rate(*b, a, GroupSelector::index(2)).t_prefactor);

  // Mode-wise rates: the resonant mode decays at lambda_l - lambda_j = 3.
  const auto rates = modewise_rates(*b, a, GroupSelector::index(2));
  REQUIRE(rates.size() == 1);
  CHECK(rates[0].first == 1);
  CHECK(rates[0].second == 3.0);

  a.setZero();
  a[2] = 1e-15;
  CHECK(code_of([&] { classify_rate(*b, a, GroupSelector::index(1)); }) == ErrorCode::ZeroState);

  // m = 2 uses lambda^m throughout.
  a.setZero();
  a[0] = 0.1;
  c = classify_rate(*b, a, GroupSelector::index(2), 2);
  CHECK(c.limit_norm == doctest::Approx(std::sqrt(15.0)));
}

TEST_CASE("H_R verification") {
  SUBCASE("square, lambda_j = 5, lambda_l = 10") {
    const auto r = hr_check(square(64), GroupSelector::eigenvalue(5), GroupSelector::eigenvalue(10), 1, 8);
    CHECK(r.passed);
    CHECK(r.manifold.dim == 1);
    REQUIRE(r.samples.size() == 8);
    for (const auto& s : r.samples) {
      CHECK(s.kernel_dim == 1);
      CHECK(std::abs(s.spectral_gap - 3.0) <= 1e-8);
      CHECK(std::abs(s.point.norm() - std::sqrt(5.0)) <= 1e-12);
    }
  }
  SUBCASE("interval, j = 1, l = 2") {
    const auto r = hr_check(interval(16), GroupSelector::index(1), GroupSelector::index(2), 1, 3);
    CHECK(r.passed);
    for (const auto& s : r.samples) {
      CHECK(s.kernel_dim == 0);
      CHECK(s.spectral_gap == doctest::Approx(3.0).epsilon(1e-10));
    }
  }
  SUBCASE("square, simple lambda_j = 2, lambda_l = 5") {
    const auto r = hr_check(square(20), GroupSelector::eigenvalue(2), GroupSelector::eigenvalue(5), 1, 4);
    CHECK(r.passed);
    for (const auto& s : r.samples) CHECK(s.kernel_dim == 0);
  }
  SUBCASE("missing manifold propagates") {
    CHECK_THROWS_AS(hr_check(interval(8), GroupSelector::index(3), GroupSelector::index(2), 1, 2), Error);
  }
}

TEST_CASE("projection onto the equilibrium sphere") {
  const auto b = square(20);
  const auto man = equilibrium_manifold(*b, GroupSelector::eigenvalue(5), GroupSelector::eigenvalue(10));
  const int s = man.j_group.start;

  SpectralField u = SpectralField::Zero(b->size());
  u[s] = 3.0;
  u[s + 1] = 4.0;
  u[0] = 0.7;
  const SpectralField p = project_onto_manifold(u, man);
  CHECK(p[s] == doctest::Approx(std::sqrt(5.0) * 0.6));
  CHECK(p[s + 1] == doctest::Approx(std::sqrt(5.0) * 0.8));
  CHECK((project_onto_manifold(p, man) - p).norm() <= 1e-14);

  // u - psi is orthogonal to the tangent direction at psi.
  SpectralField tangent = SpectralField::Zero(b->size());
  tangent[s] = -p[s + 1];
  tangent[s + 1] = p[s];
  CHECK(std::abs(b->inner_product(u - p, tangent)) <= 1e-10);

  // Nearest point among sampled sphere points.
  for (int k = 0; k < 64; ++k) {
    SpectralField q = SpectralField::Zero(b->size());
    q[s] = man.radius * std::cos(0.1 * k);
    q[s + 1] = man.radius * std::sin(0.1 * k);
    CHECK((u - p).norm() <= (u - q).norm() + 1e-14);
  }

  SpectralField off = SpectralField::Zero(b->size());
  off[0] = 1.0;
  CHECK(code_of([&] { project_onto_manifold(off, man); }) == ErrorCode::DegenerateProjection);
}
