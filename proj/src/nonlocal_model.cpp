#include "gradflow/nonlocal_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "gradflow/equilibria.hpp"
#include "gradflow/error.hpp"
#include "gradflow/flows.hpp"

namespace gradflow::nonlocal {

namespace {

constexpr double kActiveThreshold = 1e-14;

double power(std::int64_t lambda, int m) { return std::pow(static_cast<double>(lambda), m); }

void check_init(const EigenBasis& basis, const SpectralField& init) {
  if (init.size() != basis.size()) throw Error(ErrorCode::SizeMismatch, "initial data does not match basis");
  if (!init.allFinite()) throw Error(ErrorCode::InvalidArgument, "initial data is not finite");
}

// log(exp(x) - 1) for x > 0 without overflow.
double log_expm1(double x) { return x > 30.0 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x)); }

const EigenGroup* first_active_group(const EigenBasis& basis, const SpectralField& init) {
  for (const auto& g : basis.groups())
    for (int i = g.start; i < g.start + g.size; ++i)
      if (std::abs(init[i]) > kActiveThreshold) return &g;
  return nullptr;
}

}  // namespace

const char* to_string(RateCase c) {
  switch (c) {
    case RateCase::DecayExponential: return "decay_exponential";
    case RateCase::DecayAlgebraic: return "decay_algebraic";
    case RateCase::ConvergeNonzero: return "converge_nonzero";
  }
  return "unknown";
}

SpectralField closed_form(const EigenBasis& basis, const SpectralField& init, GroupSelector l, int m, double t) {
  check_init(basis, init);
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "closed_form requires t >= 0");
  const double shift = power(basis.group(l).eigenvalue, m);

  // Group sums of a_k(0)^2 keyed by the eigenvalue.
  std::map<std::int64_t, double> mass;
  for (int i = 0; i < basis.size(); ++i) mass[basis.eigenvalues()[i]] += init[i] * init[i];

  // Denominator 1 + 2 a_l^2 t + sum_mu a_mu^2 / d (e^{2 d t} - 1), d = shift - lambda_mu^m.
  // Every term is nonnegative, so the log of the sum is a stable log-sum-exp.
  std::vector<double> logs{0.0};
  for (const auto& [lambda, s] : mass) {
    if (s == 0.0) continue;
    const double d = shift - power(lambda, m);
    if (d == 0.0) {
      if (t > 0.0) logs.push_back(std::log(2.0 * s * t));
    } else if (d > 0.0) {
      if (t > 0.0) logs.push_back(std::log(s / d) + log_expm1(2.0 * d * t));
    } else {
      const double term = s / (-d) * -std::expm1(2.0 * d * t);
      if (term > 0.0) logs.push_back(std::log(term));
    }
  }
  const double peak = *std::max_element(logs.begin(), logs.end());
  double acc = 0.0;
  for (double x : logs) acc += std::exp(x - peak);
  const double log_den = peak + std::log(acc);

  SpectralField out = SpectralField::Zero(basis.size());
  for (int i = 0; i < basis.size(); ++i) {
    if (init[i] == 0.0) continue;
    const double d = shift - power(basis.eigenvalues()[i], m);
    const double log_mag = std::log(std::abs(init[i])) + d * t - 0.5 * log_den;
    out[i] = std::copysign(std::exp(log_mag), init[i]);  // exp underflows to 0
  }
  return out;
}

EquilibriumManifold equilibrium_manifold(const EigenBasis& basis, GroupSelector j, GroupSelector l, int m) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "polyharmonic order m must be >= 1");
  EquilibriumManifold out;
  out.j_group = basis.group(j);
  out.l_group = basis.group(l);
  out.m = m;
  const double gap = power(out.l_group.eigenvalue, m) - power(out.j_group.eigenvalue, m);
  if (!(gap > 0.0))
    throw Error(ErrorCode::NoEquilibrium, "nontrivial equilibria need lambda_l > lambda_j (lambda_j = " +
                                              std::to_string(out.j_group.eigenvalue) +
                                              ", lambda_l = " + std::to_string(out.l_group.eigenvalue) + ")");
  out.radius = std::sqrt(gap);
  out.dim = out.j_group.size - 1;
  return out;
}

RateClassification classify_rate(const EigenBasis& basis, const SpectralField& init, GroupSelector l, int m) {
  check_init(basis, init);
  const EigenGroup* j = first_active_group(basis, init);
  if (!j) throw Error(ErrorCode::ZeroState, "initial data vanishes (all |a_k| <= 1e-14)");
  const EigenGroup& lg = basis.group(l);
  const double lj = power(j->eigenvalue, m);
  const double ll = power(lg.eigenvalue, m);

  RateClassification out;
  out.j_group = *j;
  if (lj > ll) {
    out.rate_case = RateCase::DecayExponential;
    out.predicted_rate = lj - ll;
  } else if (lj == ll) {
    out.rate_case = RateCase::DecayAlgebraic;
    out.predicted_rate = 0.5;
  } else {
    out.rate_case = RateCase::ConvergeNonzero;
    out.predicted_rate = 2.0 * (ll - lj);
    out.limit_norm = std::sqrt(ll - lj);
    for (int i = lg.start; i < lg.start + lg.size; ++i)
      if (std::abs(init[i]) > kActiveThreshold) out.t_prefactor = true;
  }
  return out;
}

std::vector<std::pair<int, double>> modewise_rates(const EigenBasis& basis, const SpectralField& init,
                                                   GroupSelector l, int m) {
  const RateClassification cls = classify_rate(basis, init, l, m);
  const double base = std::min(power(cls.j_group.eigenvalue, m), power(basis.group(l).eigenvalue, m));
  std::vector<std::pair<int, double>> out;
  for (int i = 0; i < basis.size(); ++i) {
    if (std::abs(init[i]) <= kActiveThreshold) continue;
    const double rate = power(basis.eigenvalues()[i], m) - base;
    if (rate > 0.0) out.emplace_back(i, rate);
  }
  return out;
}

HrReport hr_check(std::shared_ptr<const EigenBasis> basis, GroupSelector j, GroupSelector l, int m, int n_samples,
                  std::uint64_t seed, double gap_floor) {
  if (n_samples < 1) throw Error(ErrorCode::InvalidArgument, "hr_check needs at least one sample");
  HrReport report;
  report.manifold = equilibrium_manifold(*basis, j, l, m);
  report.gap_floor = gap_floor;
  const Flow flow(basis, FlowSpec{NonlocalCubicFlow{l, m}});

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto& jg = report.manifold.j_group;
  report.passed = true;
  for (int s = 0; s < n_samples; ++s) {
    // Isotropic Gaussian direction normalized to the sphere.
    Eigen::VectorXd dir(jg.size);
    do {
      for (int i = 0; i < jg.size; ++i) dir[i] = normal(rng);
    } while (dir.norm() < 1e-8);
    SpectralField point = SpectralField::Zero(basis->size());
    point.segment(jg.start, jg.size) = report.manifold.radius * dir / dir.norm();

    const SpectrumAnalysis sa = analyze_spectrum(flow, point);
    report.samples.push_back({point, sa.kernel_dim, sa.spectral_gap, sa.kernel_tol});
    if (sa.kernel_dim != report.manifold.dim || !(sa.spectral_gap >= gap_floor)) report.passed = false;
  }
  return report;
}

SpectralField project_onto_manifold(const SpectralField& u, const EquilibriumManifold& manifold) {
  const auto& jg = manifold.j_group;
  if (u.size() < jg.start + jg.size) throw Error(ErrorCode::SizeMismatch, "state does not cover the j-group");
  const Eigen::VectorXd pj = u.segment(jg.start, jg.size);
  const double norm = pj.norm();
  if (norm < 1e-12)
    throw Error(ErrorCode::DegenerateProjection, "eigenspace component has norm " + std::to_string(norm));
  SpectralField out = SpectralField::Zero(u.size());
  out.segment(jg.start, jg.size) = manifold.radius * pj / norm;
  return out;
}

}  // namespace gradflow::nonlocal
