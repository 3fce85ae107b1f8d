#ifndef GRADFLOW_NONLOCAL_MODEL_HPP
#define GRADFLOW_NONLOCAL_MODEL_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "gradflow/basis.hpp"

namespace gradflow::nonlocal {

/// Sphere of equilibria sqrt(lambda_l^m - lambda_j^m) * S inside the lambda_j
/// eigenspace of u_t = -(-Laplacian)^m u + lambda_l^m u - (int u^2) u.
struct EquilibriumManifold {
  EigenGroup j_group;
  EigenGroup l_group;
  int m = 1;
  double radius = 0.0;
  int dim = 0;  // multiplicity of lambda_j minus one
};

enum class RateCase { DecayExponential, DecayAlgebraic, ConvergeNonzero };

const char* to_string(RateCase c);

struct RateClassification {
  RateCase rate_case = RateCase::DecayExponential;
  EigenGroup j_group;
  /// (i): lambda_j^m - lambda_l^m; (ii): algebraic exponent 1/2;
  /// (iii): 2 (lambda_l^m - lambda_j^m), the rate of the j-component deviation.
  double predicted_rate = 0.0;
  double limit_norm = 0.0;
  /// (iii) only: the j-component deviation carries an extra factor t, which
  /// happens exactly when the initial data has a nonzero l-component.
  bool t_prefactor = false;
};

/// Closed-form solution a_k(t); exponentials are combined in log space so no
/// intermediate overflows, and modes whose magnitude underflows return 0.
SpectralField closed_form(const EigenBasis& basis, const SpectralField& init, GroupSelector l, int m, double t);

/// Throws NoEquilibrium unless lambda_l^m > lambda_j^m.
EquilibriumManifold equilibrium_manifold(const EigenBasis& basis, GroupSelector j, GroupSelector l, int m = 1);

/// Case of the long-time behaviour from the first active eigenvalue group
/// (|a_k| > 1e-14). Throws ZeroState for vanishing data.
RateClassification classify_rate(const EigenBasis& basis, const SpectralField& init, GroupSelector l, int m = 1);

/// Coefficient-wise decay rates of the closed form for t -> infinity, for
/// every mode whose initial coefficient is nonzero and which tends to zero.
/// The active j-group itself is excluded in case (iii) (it converges to the
/// sphere). Returned as (basis position, rate) pairs.
std::vector<std::pair<int, double>> modewise_rates(const EigenBasis& basis, const SpectralField& init, GroupSelector l,
                                                   int m = 1);

struct HrSample {
  SpectralField point;
  int kernel_dim = 0;
  double spectral_gap = 0.0;
  double kernel_tol = 0.0;
};

struct HrReport {
  EquilibriumManifold manifold;
  std::vector<HrSample> samples;
  double gap_floor = 1e-6;
  bool passed = false;
};

/// Samples points uniformly on the equilibrium sphere, assembles the
/// Jacobian of the non-local flow there and compares kernel dimension with
/// the manifold dimension. Passes iff they agree at every sample and every
/// spectral gap is at least gap_floor.
HrReport hr_check(std::shared_ptr<const EigenBasis> basis, GroupSelector j, GroupSelector l, int m, int n_samples,
                  std::uint64_t seed = 1, double gap_floor = 1e-6);

/// Closest manifold point: radius * P_j u / ||P_j u||. Throws
/// DegenerateProjection when ||P_j u|| < 1e-12.
SpectralField project_onto_manifold(const SpectralField& u, const EquilibriumManifold& manifold);

}  // namespace gradflow::nonlocal

#endif
