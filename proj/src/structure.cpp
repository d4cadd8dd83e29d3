#include "revealed/structure.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace revealed {

namespace {

constexpr double kSymTol = 1e-12;
constexpr double kPinvCutoff = 1e-10;

std::string subset_to_string(const std::vector<Index>& subset) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < subset.size(); ++i)
    os << (i ? ", " : "") << subset[i];
  os << "}";
  return os.str();
}

}  // namespace

InformationStructure::InformationStructure(const MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols())
    throw contract_error("information structure: matrix is not square");
  if (sigma.rows() == 0)
    throw contract_error("information structure: empty matrix");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= kSymTol * scale))
    throw contract_error("information structure: matrix is not symmetric");
  sigma_ = 0.5 * (sigma + sigma.transpose());
}

double ExtendedMatrix::pattern_residual() const {
  const Index N = n();
  double r = std::abs(omega(0, 0) - 1.0);
  for (Index j = 1; j <= N; ++j) {
    r = std::max(r, std::abs(omega(0, j) - omega(j, j)));
    r = std::max(r, std::abs(omega(j, 0) - omega(j, j)));
  }
  return r;
}

ExtendedMatrix extend(const InformationStructure& sigma) {
  const Index N = sigma.n();
  MatrixXd omega(N + 1, N + 1);
  omega(0, 0) = 1.0;
  omega.block(0, 1, 1, N) = sigma.delta().transpose();
  omega.block(1, 0, N, 1) = sigma.delta();
  omega.bottomRightCorner(N, N) = sigma.sigma();
  return ExtendedMatrix{std::move(omega)};
}

double min_eigenvalue_h(const InformationStructure& sigma) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(extend(sigma).omega,
                                             Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw numerical_error("coherence check: eigendecomposition failed");
  return es.eigenvalues().minCoeff();
}

bool is_info_coherent(const InformationStructure& sigma, double tol) {
  return min_eigenvalue_h(sigma) >= -tol;
}

double condition_number(const MatrixXd& m) {
  if (m.rows() != m.cols())
    throw contract_error("condition number: matrix is not square");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw numerical_error("condition number: eigendecomposition failed");
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

ConditionalZ0 conditional_z0(const InformationStructure& sigma,
                             const VectorXd& z,
                             const std::vector<Index>& subset,
                             bool allow_singular) {
  const Index N = sigma.n();
  if (z.size() != N)
    throw contract_error("conditional_z0: signal vector size mismatch");
  if (subset.empty())
    throw contract_error("conditional_z0: empty conditioning subset");
  for (Index j : subset)
    if (j < 0 || j >= N)
      throw contract_error("conditional_z0: subset index out of range");

  const Index m = static_cast<Index>(subset.size());
  MatrixXd block(m, m);
  VectorXd delta_s(m), z_s(m);
  for (Index a = 0; a < m; ++a) {
    delta_s[a] = sigma.sigma()(subset[a], subset[a]);
    z_s[a] = z[subset[a]];
    for (Index b = 0; b < m; ++b)
      block(a, b) = sigma.sigma()(subset[a], subset[b]);
  }

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(block);
  if (es.info() != Eigen::Success)
    throw numerical_error("conditional_z0: eigendecomposition failed");
  const VectorXd& ev = es.eigenvalues();
  const double cutoff = kPinvCutoff * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  if (ev.minCoeff() <= cutoff && !allow_singular)
    throw singular_error("conditional_z0: singular information block for subset " +
                         subset_to_string(subset));

  // w = pinv(block) * delta_s via the eigenbasis; exact inverse when the
  // block is nonsingular.
  VectorXd proj = es.eigenvectors().transpose() * delta_s;
  for (Index a = 0; a < m; ++a)
    proj[a] = ev[a] > cutoff ? proj[a] / ev[a] : 0.0;
  const VectorXd w = es.eigenvectors() * proj;

  ConditionalZ0 out;
  out.mean = w.dot(z_s);
  out.variance = 1.0 - w.dot(delta_s);
  return out;
}

ConditionalZ0 conditional_z0(const InformationStructure& sigma,
                             const VectorXd& z, bool allow_singular) {
  std::vector<Index> all(sigma.n());
  std::iota(all.begin(), all.end(), Index{0});
  return conditional_z0(sigma, z, all, allow_singular);
}

std::vector<Index> diversity_ordering(const InformationStructure& sigma) {
  const VectorXd d = sigma.delta();
  std::vector<Index> order(sigma.n());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return d[a] < d[b]; });
  return order;
}

}  // namespace revealed
