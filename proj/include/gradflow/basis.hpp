#ifndef GRADFLOW_BASIS_HPP
#define GRADFLOW_BASIS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace gradflow {

/// Coefficients a_k of a state over an EigenBasis (L2-orthonormal modes).
using SpectralField = Eigen::VectorXd;
/// Values of a state on the quadrature grid of an EigenBasis.
using GridField = Eigen::VectorXd;

enum class DomainKind { Interval, Square };

/// Interval (0,pi) or square (0,pi)^2 with Dirichlet boundary conditions.
/// A quadrature resolution of 0 selects the dealiasing floor 2 * k_max.
struct DomainSpec {
  DomainKind kind = DomainKind::Interval;
  int quadrature_points_per_dim = 0;
};

/// Sine mode sin(k1 x) (interval, k2 == 0) or sin(k1 x) sin(k2 y) (square).
struct Mode {
  int k1 = 1;
  int k2 = 0;
  bool operator==(const Mode&) const = default;
};

/// Contiguous run of modes sharing one eigenvalue of -Laplacian.
struct EigenGroup {
  std::int64_t eigenvalue = 0;
  int start = 0;
  int size = 0;
};

/// Selects an eigenvalue group either by its 1-based position in the sorted
/// list of distinct eigenvalues or by the eigenvalue itself.
struct GroupSelector {
  enum class By { Index, Eigenvalue };
  By by = By::Index;
  std::int64_t value = 1;

  static GroupSelector index(std::int64_t i) { return {By::Index, i}; }
  static GroupSelector eigenvalue(std::int64_t lambda) { return {By::Eigenvalue, lambda}; }
};

/// Dirichlet eigenbasis of -Laplacian with its uniform sine quadrature.
///
/// Eigenvalues are nondecreasing with lexicographic (k1, k2) tie order, so
/// every multiplicity group occupies a contiguous block of positions. The
/// basis is immutable once built and safe to share between threads.
class EigenBasis {
 public:
  DomainKind kind() const { return kind_; }
  int size() const { return static_cast<int>(modes_.size()); }
  int points_per_dim() const { return points_per_dim_; }
  int grid_size() const { return static_cast<int>(weights_.size()); }

  const std::vector<Mode>& modes() const { return modes_; }
  const std::vector<std::int64_t>& eigenvalues() const { return eigenvalues_; }
  const std::vector<EigenGroup>& groups() const { return groups_; }

  /// Eigenvalues raised to the polyharmonic order m, as doubles.
  Eigen::VectorXd eigenvalue_powers(int m) const;

  /// Position in groups() of the selected group, or nullopt if absent.
  std::optional<int> find_group(GroupSelector sel) const;
  /// Like find_group but throws InvalidArgument when absent.
  const EigenGroup& group(GroupSelector sel) const;
  /// Position of a mode in the basis ordering, or nullopt if not included.
  std::optional<int> find_mode(Mode mode) const;
  /// Group position containing basis position `pos`.
  int group_of(int pos) const { return group_index_[pos]; }

  /// Grid abscissae per dimension and the tensor quadrature weights.
  const std::vector<double>& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  /// Basis functions sampled on the grid (grid_size x size).
  const Eigen::MatrixXd& table() const { return table_; }

  GridField synthesize(const SpectralField& a) const;
  SpectralField analyze(const GridField& values) const;
  double integrate(const GridField& values) const;
  double inner_product(const SpectralField& a, const SpectralField& b) const;
  /// Coefficients of the basis function at position `pos` (unit vector).
  SpectralField unit(int pos) const;

 private:
  friend std::shared_ptr<const EigenBasis> build_basis(const DomainSpec&, int);

  DomainKind kind_ = DomainKind::Interval;
  int points_per_dim_ = 0;
  std::vector<Mode> modes_;
  std::vector<std::int64_t> eigenvalues_;
  std::vector<EigenGroup> groups_;
  std::vector<int> group_index_;
  std::vector<double> nodes_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd table_;
};

/// Builds the first n_modes eigenmodes. On the square the count is rounded up
/// to close the last multiplicity group.
std::shared_ptr<const EigenBasis> build_basis(const DomainSpec& domain, int n_modes);

/// Largest Gram-matrix deviation from the identity under the quadrature.
double orthonormality_defect(const EigenBasis& basis);

}  // namespace gradflow

#endif
