#ifndef GRADFLOW_FLOWS_HPP
#define GRADFLOW_FLOWS_HPP

#include <functional>
#include <memory>
#include <string>
#include <variant>

#include "gradflow/basis.hpp"
#include "gradflow/decay.hpp"

namespace gradflow {

/// Pointwise nonlinearity f with derivative f' and antiderivative F, F(0) = 0.
struct PointwiseNonlinearity {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> F;
};

/// f(u) = mu u - u^3 (mu = 1 is the classical Allen-Cahn term).
PointwiseNonlinearity allen_cahn(double mu = 1.0);
/// f(u) = u^3; not coercive, orbits can blow up.
PointwiseNonlinearity pure_cubic();
/// f(u) = u - exp(-1/u^2), extended by f(u) = u for |u| < 1e-8.
PointwiseNonlinearity flat_exponential();
/// f = 0 (pure heat flow).
PointwiseNonlinearity zero_nonlinearity();
/// W'(u) = u, W = u^2 / 2.
PointwiseNonlinearity linear_forcing();

/// Scalar potential g(s) of the non-local term g'(int u^2) u.
struct NonlocalPotential {
  std::string name;
  std::function<double(double)> g;
  std::function<double(double)> dg;
  std::function<double(double)> d2g;
};

/// g(s) = s^2 / 2, which turns nonlocal_general into the cubic model.
NonlocalPotential quadratic_potential();
/// g'(s) = s exp(-1/s); the first-mode ODE is a' = -a^3 exp(-1/a^2).
NonlocalPotential slow_log_potential();

struct FlowSpec;

/// u_t = Laplacian u + f(u).
struct LocalFlow {
  PointwiseNonlinearity f;
};

/// u_t = -(-Laplacian)^m u + lambda_l^m u - (int u^2) u.
struct NonlocalCubicFlow {
  GroupSelector l = GroupSelector::index(1);
  int m = 1;
};

/// u_t = Laplacian u + mu u - g'(int u^2) u.
struct NonlocalGeneralFlow {
  double mu = 1.0;
  NonlocalPotential g;
};

/// u_t = V'(u) + h(t) W'(u) for an unperturbed base flow.
struct PerturbedFlow {
  std::shared_ptr<const FlowSpec> base;
  DecayProfile h = DecayProfile::power_law(3.0);
  PointwiseNonlinearity w;
};

struct FlowSpec {
  std::variant<LocalFlow, NonlocalCubicFlow, NonlocalGeneralFlow, PerturbedFlow> variant;
};

/// A FlowSpec bound to a basis: the Galerkin right-hand side split as
/// rhs = -L a + N(a, t) with diagonal stiff part L.
///
/// For local flows N is evaluated pseudospectrally (synthesize, apply f on
/// the grid, analyze). Non-local terms are exact in coefficient space.
class Flow {
 public:
  Flow(std::shared_ptr<const EigenBasis> basis, FlowSpec spec);

  const EigenBasis& basis() const { return *basis_; }
  std::shared_ptr<const EigenBasis> basis_ptr() const { return basis_; }
  const FlowSpec& spec() const { return spec_; }
  bool is_perturbed() const;
  /// The unperturbed flow (itself when not perturbed).
  const Flow& base() const { return base_ ? *base_ : *this; }

  /// Diagonal L of the linear stiff part (lambda_k or lambda_k^m).
  const Eigen::VectorXd& linear_rates() const { return rates_; }

  SpectralField rhs(const SpectralField& a, double t = 0.0) const;
  SpectralField nonlinear(const SpectralField& a, double t = 0.0) const;
  /// V(u); throws UndefinedPotential for perturbed flows.
  double lyapunov(const SpectralField& a) const;
  /// W(u) = int W(u) for perturbed flows; throws UndefinedPotential otherwise.
  double perturbation_potential(const SpectralField& a) const;
  const PerturbedFlow* perturbation() const;
  /// Frechet derivative of rhs in the coefficient basis (symmetric).
  Eigen::MatrixXd jacobian(const SpectralField& a, double t = 0.0) const;

  /// lambda_l^m for nonlocal_cubic flows.
  double nonlocal_shift() const { return shift_; }

 private:
  SpectralField pointwise_term(const std::function<double(double)>& f, const SpectralField& a) const;
  Eigen::MatrixXd pointwise_jacobian(const std::function<double(double)>& df, const SpectralField& a) const;
  void check_state(const SpectralField& a) const;

  std::shared_ptr<const EigenBasis> basis_;
  FlowSpec spec_;
  std::shared_ptr<const Flow> base_;
  Eigen::VectorXd rates_;
  double shift_ = 0.0;
};

inline SpectralField rhs(const Flow& flow, const SpectralField& a, double t = 0.0) { return flow.rhs(a, t); }
inline double lyapunov(const Flow& flow, const SpectralField& a) { return flow.lyapunov(a); }
inline Eigen::MatrixXd jacobian(const Flow& flow, const SpectralField& a, double t = 0.0) {
  return flow.jacobian(a, t);
}

}  // namespace gradflow

#endif
