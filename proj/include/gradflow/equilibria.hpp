#ifndef GRADFLOW_EQUILIBRIA_HPP
#define GRADFLOW_EQUILIBRIA_HPP

#include <vector>

#include "gradflow/flows.hpp"

namespace gradflow {

/// Linearized spectrum at a state: eigenvalues of the symmetric Jacobian in
/// ascending order, the numerical kernel (|lambda| <= kernel_tol, ties count
/// as kernel) and the smallest nonzero |lambda|.
struct SpectrumAnalysis {
  Eigen::VectorXd spectrum;
  Eigen::MatrixXd eigenvectors;
  int kernel_dim = 0;
  double spectral_gap = 0.0;
  double kernel_tol = 0.0;
};

struct Equilibrium {
  SpectralField state;
  double residual_norm = 0.0;
  Eigen::VectorXd spectrum;
  int kernel_dim = 0;
  double spectral_gap = 0.0;
  int iterations = 0;
};

/// 1e-8 * (1 + spectral radius).
double kernel_tolerance(const Eigen::VectorXd& spectrum);

SpectrumAnalysis analyze_spectrum(const Eigen::MatrixXd& jacobian);
SpectrumAnalysis analyze_spectrum(const Flow& flow, const SpectralField& state);

struct NewtonOptions {
  int max_iterations = 50;
  int max_halvings = 30;
};

/// Damped Newton iteration for rhs(u) = 0. Each step solves J du = -r on the
/// orthogonal complement of the numerical kernel of J (a least-squares step
/// when J is singular) and halves the step until the residual decreases.
///
/// Throws NoConvergence after max_iterations or when no halving reduces the
/// residual, and SingularJacobian when the residual lies entirely in the
/// kernel so no admissible step exists.
Equilibrium newton_equilibrium(const Flow& flow, const SpectralField& guess, double newton_tol,
                               const NewtonOptions& options = {});

}  // namespace gradflow

#endif
