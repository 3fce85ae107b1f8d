#include "gradflow/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <tuple>

#include "gradflow/error.hpp"

namespace gradflow {

namespace {

std::vector<Mode> interval_modes(int n) {
  std::vector<Mode> modes;
  modes.reserve(n);
  for (int k = 1; k <= n; ++k) modes.push_back({k, 0});
  return modes;
}

// First n pairs by (k1^2 + k2^2, k1, k2), extended to the end of the last
// eigenvalue group. Pairs (1, k) for k <= n already give n candidates with
// eigenvalue <= 1 + n^2, so no selected pair has k1 or k2 beyond n + 1.
std::vector<Mode> square_modes(int n) {
  const int kmax = n + 1;
  std::vector<std::tuple<std::int64_t, int, int>> pairs;
  pairs.reserve(static_cast<size_t>(kmax) * kmax);
  for (int k1 = 1; k1 <= kmax; ++k1)
    for (int k2 = 1; k2 <= kmax; ++k2)
      pairs.emplace_back(std::int64_t{k1} * k1 + std::int64_t{k2} * k2, k1, k2);
  std::sort(pairs.begin(), pairs.end());
  const std::int64_t last = std::get<0>(pairs[n - 1]);
  std::vector<Mode> modes;
  for (const auto& [lambda, k1, k2] : pairs) {
    if (lambda > last) break;
    modes.push_back({k1, k2});
  }
  return modes;
}

}  // namespace

std::shared_ptr<const EigenBasis> build_basis(const DomainSpec& domain, int n_modes) {
  if (n_modes < 1)
    throw Error(ErrorCode::InvalidArgument, "n_modes must be >= 1, got " + std::to_string(n_modes));

  auto basis = std::shared_ptr<EigenBasis>(new EigenBasis());
  basis->kind_ = domain.kind;
  basis->modes_ = domain.kind == DomainKind::Interval ? interval_modes(n_modes) : square_modes(n_modes);

  int kmax = 0;
  for (const auto& m : basis->modes_) kmax = std::max({kmax, m.k1, m.k2});
  const int floor = 2 * kmax;
  int points = domain.quadrature_points_per_dim == 0 ? floor : domain.quadrature_points_per_dim;
  if (points < floor)
    throw Error(ErrorCode::ResolutionTooLow, std::to_string(points) + " points per dimension, need at least " +
                                                 std::to_string(floor) + " for max mode index " +
                                                 std::to_string(kmax));
  basis->points_per_dim_ = points;

  const int n = basis->size();
  basis->eigenvalues_.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& m = basis->modes_[i];
    basis->eigenvalues_[i] = std::int64_t{m.k1} * m.k1 + std::int64_t{m.k2} * m.k2;
  }
  basis->group_index_.resize(n);
  for (int i = 0; i < n; ++i) {
    if (basis->groups_.empty() || basis->groups_.back().eigenvalue != basis->eigenvalues_[i])
      basis->groups_.push_back({basis->eigenvalues_[i], i, 0});
    ++basis->groups_.back().size;
    basis->group_index_[i] = static_cast<int>(basis->groups_.size()) - 1;
  }

  // Interior nodes of the uniform grid; the discrete sine sums are exact for
  // frequencies below 2 (points + 1).
  const double h = std::numbers::pi / (points + 1);
  basis->nodes_.resize(points);
  for (int i = 0; i < points; ++i) basis->nodes_[i] = (i + 1) * h;

  // sines(k, i) = sqrt(2/pi) sin(k x_i)
  const double norm = std::sqrt(2.0 / std::numbers::pi);
  Eigen::MatrixXd sines(kmax + 1, points);
  for (int k = 0; k <= kmax; ++k)
    for (int i = 0; i < points; ++i) sines(k, i) = norm * std::sin(k * basis->nodes_[i]);

  if (domain.kind == DomainKind::Interval) {
    basis->weights_ = Eigen::VectorXd::Constant(points, h);
    basis->table_.resize(points, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < points; ++i) basis->table_(i, j) = sines(basis->modes_[j].k1, i);
  } else {
    const int g = points * points;
    basis->weights_ = Eigen::VectorXd::Constant(g, h * h);
    basis->table_.resize(g, n);
    for (int j = 0; j < n; ++j) {
      const auto& m = basis->modes_[j];
      for (int iy = 0; iy < points; ++iy)
        for (int ix = 0; ix < points; ++ix) basis->table_(iy * points + ix, j) = sines(m.k1, ix) * sines(m.k2, iy);
    }
  }
  return basis;
}

Eigen::VectorXd EigenBasis::eigenvalue_powers(int m) const {
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) out[i] = std::pow(static_cast<double>(eigenvalues_[i]), m);
  return out;
}

std::optional<int> EigenBasis::find_group(GroupSelector sel) const {
  if (sel.by == GroupSelector::By::Index) {
    if (sel.value < 1 || sel.value > static_cast<std::int64_t>(groups_.size())) return std::nullopt;
    return static_cast<int>(sel.value - 1);
  }
  for (size_t g = 0; g < groups_.size(); ++g)
    if (groups_[g].eigenvalue == sel.value) return static_cast<int>(g);
  return std::nullopt;
}

const EigenGroup& EigenBasis::group(GroupSelector sel) const {
  auto g = find_group(sel);
  if (!g)
    throw Error(ErrorCode::InvalidArgument,
                std::string(sel.by == GroupSelector::By::Index ? "group index " : "eigenvalue ") +
                    std::to_string(sel.value) + " not present in basis of size " + std::to_string(size()));
  return groups_[*g];
}

std::optional<int> EigenBasis::find_mode(Mode mode) const {
  auto it = std::find(modes_.begin(), modes_.end(), mode);
  if (it == modes_.end()) return std::nullopt;
  return static_cast<int>(it - modes_.begin());
}

GridField EigenBasis::synthesize(const SpectralField& a) const {
  if (a.size() != size())
    throw Error(ErrorCode::SizeMismatch,
                "synthesize: " + std::to_string(a.size()) + " coefficients for basis of " + std::to_string(size()));
  return table_ * a;
}

SpectralField EigenBasis::analyze(const GridField& values) const {
  if (values.size() != grid_size())
    throw Error(ErrorCode::SizeMismatch,
                "analyze: " + std::to_string(values.size()) + " grid values for grid of " + std::to_string(grid_size()));
  return table_.transpose() * weights_.cwiseProduct(values);
}

double EigenBasis::integrate(const GridField& values) const {
  if (values.size() != grid_size()) throw Error(ErrorCode::SizeMismatch, "integrate: grid size mismatch");
  return weights_.dot(values);
}

double EigenBasis::inner_product(const SpectralField& a, const SpectralField& b) const {
  if (a.size() != size() || b.size() != size()) throw Error(ErrorCode::SizeMismatch, "inner_product: size mismatch");
  return a.dot(b);
}

SpectralField EigenBasis::unit(int pos) const {
  SpectralField e = SpectralField::Zero(size());
  e[pos] = 1.0;
  return e;
}

double orthonormality_defect(const EigenBasis& basis) {
  const Eigen::MatrixXd gram = basis.table().transpose() * basis.weights().asDiagonal() * basis.table();
  return (gram - Eigen::MatrixXd::Identity(basis.size(), basis.size())).cwiseAbs().maxCoeff();
}

}  // namespace gradflow
