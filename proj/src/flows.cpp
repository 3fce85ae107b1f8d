#include "gradflow/flows.hpp"

#include <cmath>
#include <numbers>

#include "gradflow/error.hpp"

namespace gradflow {

namespace {

constexpr double kFlatCutoff = 1e-8;

// int_0^u exp(-1/s^2) ds, odd in u.
double flat_integral(double u) {
  const double x = std::abs(u);
  if (x < kFlatCutoff) return 0.0;
  const double val = x * std::exp(-1.0 / (x * x)) - std::sqrt(std::numbers::pi) * std::erfc(1.0 / x);
  return u < 0 ? -val : val;
}

// E1(x) = -Ei(-x)
double exp_integral_e1(double x) { return -std::expint(-x); }

}  // namespace

PointwiseNonlinearity allen_cahn(double mu) {
  return {mu == 1.0 ? "allen_cahn" : "allen_cahn(mu=" + std::to_string(mu) + ")",
          [mu](double u) { return mu * u - u * u * u; }, [mu](double u) { return mu - 3.0 * u * u; },
          [mu](double u) { return 0.5 * mu * u * u - 0.25 * u * u * u * u; }};
}

PointwiseNonlinearity pure_cubic() {
  return {"cubic", [](double u) { return u * u * u; }, [](double u) { return 3.0 * u * u; },
          [](double u) { return 0.25 * u * u * u * u; }};
}

PointwiseNonlinearity flat_exponential() {
  return {"flat_exp",
          [](double u) { return std::abs(u) < kFlatCutoff ? u : u - std::exp(-1.0 / (u * u)); },
          [](double u) {
            return std::abs(u) < kFlatCutoff ? 1.0 : 1.0 - 2.0 / (u * u * u) * std::exp(-1.0 / (u * u));
          },
          [](double u) { return 0.5 * u * u - flat_integral(u); }};
}

PointwiseNonlinearity zero_nonlinearity() {
  return {"heat", [](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

PointwiseNonlinearity linear_forcing() {
  return {"linear", [](double u) { return u; }, [](double) { return 1.0; }, [](double u) { return 0.5 * u * u; }};
}

NonlocalPotential quadratic_potential() {
  return {"quadratic", [](double s) { return 0.5 * s * s; }, [](double s) { return s; }, [](double) { return 1.0; }};
}

NonlocalPotential slow_log_potential() {
  return {"slow_log",
          [](double s) {
            if (s <= 0.0) return 0.0;
            return 0.5 * std::exp(-1.0 / s) * (s * s - s) + 0.5 * exp_integral_e1(1.0 / s);
          },
          [](double s) { return s <= 0.0 ? 0.0 : s * std::exp(-1.0 / s); },
          [](double s) { return s <= 0.0 ? 0.0 : std::exp(-1.0 / s) * (1.0 + 1.0 / s); }};
}

Flow::Flow(std::shared_ptr<const EigenBasis> basis, FlowSpec spec) : basis_(std::move(basis)), spec_(std::move(spec)) {
  if (!basis_) throw Error(ErrorCode::InvalidArgument, "flow needs a basis");
  rates_ = basis_->eigenvalue_powers(1);
  if (const auto* nc = std::get_if<NonlocalCubicFlow>(&spec_.variant)) {
    if (nc->m < 1) throw Error(ErrorCode::InvalidArgument, "polyharmonic order m must be >= 1");
    const auto& group = basis_->group(nc->l);
    rates_ = basis_->eigenvalue_powers(nc->m);
    shift_ = std::pow(static_cast<double>(group.eigenvalue), nc->m);
  } else if (const auto* p = std::get_if<PerturbedFlow>(&spec_.variant)) {
    if (!p->base) throw Error(ErrorCode::InvalidArgument, "perturbed flow needs a base flow");
    if (std::holds_alternative<PerturbedFlow>(p->base->variant))
      throw Error(ErrorCode::InvalidArgument, "perturbed flow base must not itself be perturbed");
    if (!p->w.f) throw Error(ErrorCode::InvalidArgument, "perturbed flow needs W'");
    base_ = std::make_shared<const Flow>(basis_, *p->base);
    rates_ = base_->linear_rates();
    shift_ = base_->nonlocal_shift();
  } else if (const auto* l = std::get_if<LocalFlow>(&spec_.variant)) {
    if (!l->f.f || !l->f.df) throw Error(ErrorCode::InvalidArgument, "local flow needs f and f'");
  }
}

bool Flow::is_perturbed() const { return std::holds_alternative<PerturbedFlow>(spec_.variant); }

const PerturbedFlow* Flow::perturbation() const { return std::get_if<PerturbedFlow>(&spec_.variant); }

void Flow::check_state(const SpectralField& a) const {
  if (a.size() != basis_->size())
    throw Error(ErrorCode::SizeMismatch,
                "state has " + std::to_string(a.size()) + " coefficients, basis has " + std::to_string(basis_->size()));
}

SpectralField Flow::pointwise_term(const std::function<double(double)>& f, const SpectralField& a) const {
  GridField u = basis_->synthesize(a);
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = f(u[i]);
  return basis_->analyze(u);
}

Eigen::MatrixXd Flow::pointwise_jacobian(const std::function<double(double)>& df, const SpectralField& a) const {
  const GridField u = basis_->synthesize(a);
  Eigen::VectorXd w(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) w[i] = basis_->weights()[i] * df(u[i]);
  const auto& phi = basis_->table();
  return phi.transpose() * w.asDiagonal() * phi;
}

SpectralField Flow::nonlinear(const SpectralField& a, double t) const {
  check_state(a);
  SpectralField out = std::visit(
      [&](const auto& v) -> SpectralField {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LocalFlow>) {
          return pointwise_term(v.f.f, a);
        } else if constexpr (std::is_same_v<T, NonlocalCubicFlow>) {
          return (shift_ - a.squaredNorm()) * a;
        } else if constexpr (std::is_same_v<T, NonlocalGeneralFlow>) {
          return (v.mu - v.g.dg(a.squaredNorm())) * a;
        } else {
          return base_->nonlinear(a, t) + v.h.value(t) * pointwise_term(v.w.f, a);
        }
      },
      spec_.variant);
  if (!out.allFinite()) throw Error(ErrorCode::Overflow, "non-finite nonlinear term (blow-up)");
  return out;
}

SpectralField Flow::rhs(const SpectralField& a, double t) const {
  SpectralField out = nonlinear(a, t) - rates_.cwiseProduct(a);
  if (!out.allFinite()) throw Error(ErrorCode::Overflow, "non-finite right-hand side (blow-up)");
  return out;
}

double Flow::lyapunov(const SpectralField& a) const {
  check_state(a);
  const double s = a.squaredNorm();
  const double dirichlet = -0.5 * rates_.dot(a.cwiseProduct(a));
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LocalFlow>) {
          if (!v.f.F) throw Error(ErrorCode::UndefinedPotential, "local flow has no antiderivative F");
          GridField u = basis_->synthesize(a);
          for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = v.f.F(u[i]);
          return dirichlet + basis_->integrate(u);
        } else if constexpr (std::is_same_v<T, NonlocalCubicFlow>) {
          return dirichlet + 0.5 * shift_ * s - 0.25 * s * s;
        } else if constexpr (std::is_same_v<T, NonlocalGeneralFlow>) {
          if (!v.g.g) throw Error(ErrorCode::UndefinedPotential, "non-local flow has no potential g");
          return dirichlet + 0.5 * v.mu * s - 0.5 * v.g.g(s);
        } else {
          throw Error(ErrorCode::UndefinedPotential, "V is defined for the base flow only; use base().lyapunov");
        }
      },
      spec_.variant);
}

double Flow::perturbation_potential(const SpectralField& a) const {
  const auto* p = perturbation();
  if (!p) throw Error(ErrorCode::UndefinedPotential, "flow is not perturbed");
  if (!p->w.F) throw Error(ErrorCode::UndefinedPotential, "perturbation has no potential W");
  check_state(a);
  GridField u = basis_->synthesize(a);
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = p->w.F(u[i]);
  return basis_->integrate(u);
}

Eigen::MatrixXd Flow::jacobian(const SpectralField& a, double t) const {
  check_state(a);
  const int n = basis_->size();
  const double s = a.squaredNorm();
  Eigen::MatrixXd j = std::visit(
      [&](const auto& v) -> Eigen::MatrixXd {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LocalFlow>) {
          return pointwise_jacobian(v.f.df, a);
        } else if constexpr (std::is_same_v<T, NonlocalCubicFlow>) {
          Eigen::MatrixXd m = (shift_ - s) * Eigen::MatrixXd::Identity(n, n);
          m -= 2.0 * a * a.transpose();
          return m;
        } else if constexpr (std::is_same_v<T, NonlocalGeneralFlow>) {
          if (!v.g.d2g) throw Error(ErrorCode::InvalidArgument, "non-local jacobian needs g''");
          Eigen::MatrixXd m = (v.mu - v.g.dg(s)) * Eigen::MatrixXd::Identity(n, n);
          m -= 2.0 * v.g.d2g(s) * a * a.transpose();
          return m;
        } else {
          if (!v.w.df) throw Error(ErrorCode::InvalidArgument, "perturbed jacobian needs W''");
          Eigen::MatrixXd m = base_->jacobian(a, t);
          m.diagonal() += rates_;
          m += v.h.value(t) * pointwise_jacobian(v.w.df, a);
          return m;
        }
      },
      spec_.variant);
  j.diagonal() -= rates_;
  if (!j.allFinite()) throw Error(ErrorCode::Overflow, "non-finite jacobian");
  return j;
}

}  // namespace gradflow
