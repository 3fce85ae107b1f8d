#include "gradflow/equilibria.hpp"

#include <cmath>

#include "gradflow/error.hpp"

namespace gradflow {

double kernel_tolerance(const Eigen::VectorXd& spectrum) {
  const double radius = spectrum.size() ? spectrum.cwiseAbs().maxCoeff() : 0.0;
  return 1e-8 * (1.0 + radius);
}

SpectrumAnalysis analyze_spectrum(const Eigen::MatrixXd& jacobian) {
  // The Jacobian is symmetric up to rounding in the pseudospectral products.
  const Eigen::MatrixXd sym = 0.5 * (jacobian + jacobian.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "symmetric eigensolver failed");

  SpectrumAnalysis out;
  out.spectrum = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  out.kernel_tol = kernel_tolerance(out.spectrum);
  out.spectral_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < out.spectrum.size(); ++i) {
    const double mag = std::abs(out.spectrum[i]);
    if (mag <= out.kernel_tol)
      ++out.kernel_dim;
    else
      out.spectral_gap = std::min(out.spectral_gap, mag);
  }
  return out;
}

SpectrumAnalysis analyze_spectrum(const Flow& flow, const SpectralField& state) {
  return analyze_spectrum(flow.jacobian(state));
}

Equilibrium newton_equilibrium(const Flow& flow, const SpectralField& guess, double newton_tol,
                               const NewtonOptions& options) {
  if (flow.is_perturbed()) throw Error(ErrorCode::InvalidArgument, "equilibria are defined for unperturbed flows");
  if (!guess.allFinite()) throw Error(ErrorCode::InvalidArgument, "Newton guess is not finite");

  SpectralField u = guess;
  SpectralField r = flow.rhs(u);
  double res = r.norm();
  int iter = 0;
  while (res > newton_tol) {
    if (iter == options.max_iterations)
      throw Error(ErrorCode::NoConvergence, "Newton did not converge in " + std::to_string(options.max_iterations) +
                                                " iterations, residual " + std::to_string(res));
    ++iter;
    const SpectrumAnalysis sa = analyze_spectrum(flow.jacobian(u));
    // du = -sum over non-kernel eigenpairs of (q_i . r / lambda_i) q_i
    const Eigen::VectorXd proj = sa.eigenvectors.transpose() * r;
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(proj.size());
    for (Eigen::Index i = 0; i < proj.size(); ++i)
      if (std::abs(sa.spectrum[i]) > sa.kernel_tol) coef[i] = -proj[i] / sa.spectrum[i];
    const SpectralField du = sa.eigenvectors * coef;
    if (sa.kernel_dim == proj.size() || du.norm() == 0.0)
      throw Error(ErrorCode::SingularJacobian,
                  "residual lies in the numerical kernel (dim " + std::to_string(sa.kernel_dim) + ")");

    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
      SpectralField trial = u + step * du;
      double trial_res;
      try {
        trial_res = flow.rhs(trial).norm();
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Overflow) throw;
        continue;
      }
      if (trial_res < res) {
        u = std::move(trial);
        res = trial_res;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw Error(ErrorCode::NoConvergence, "line search failed to reduce residual " + std::to_string(res));
    r = flow.rhs(u);
    res = r.norm();
  }

  const SpectrumAnalysis sa = analyze_spectrum(flow, u);
  Equilibrium eq;
  eq.state = std::move(u);
  eq.residual_norm = res;
  eq.spectrum = sa.spectrum;
  eq.kernel_dim = sa.kernel_dim;
  eq.spectral_gap = sa.spectral_gap;
  eq.iterations = iter;
  return eq;
}

}  // namespace gradflow
