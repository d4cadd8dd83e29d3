#pragma once

#include <vector>

#include "revealed/types.hpp"

namespace revealed {

// Covariance of the latent information variables (Z_1..Z_N). The outcome
// variable Z_0 has unit variance and Cov(Z_0, Z_j) = Sigma_jj, so the diagonal
// doubles as the information share delta_j of each forecaster.
class InformationStructure {
 public:
  // Accepts a square matrix, symmetrizes exactly; asymmetry beyond a small
  // relative tolerance is a contract violation.
  explicit InformationStructure(const MatrixXd& sigma);

  Index n() const { return sigma_.rows(); }
  const MatrixXd& sigma() const { return sigma_; }
  VectorXd delta() const { return sigma_.diagonal(); }

 private:
  MatrixXd sigma_;
};

// (N+1) x (N+1) bordered matrix h(Sigma) = [[1, diag'], [diag, Sigma]].
// pattern_residual measures how far a general symmetric matrix is from that
// border structure.
struct ExtendedMatrix {
  MatrixXd omega;

  Index n() const { return omega.rows() - 1; }
  MatrixXd drop() const { return omega.bottomRightCorner(n(), n()); }
  double pattern_residual() const;
};

ExtendedMatrix extend(const InformationStructure& sigma);

// Coherence: h(Sigma) is positive semidefinite within tol, i.e. the claimed
// information shares and overlaps are jointly realizable.
bool is_info_coherent(const InformationStructure& sigma, double tol = 1e-8);

// Smallest eigenvalue of h(Sigma); coherence is min_eigenvalue_h >= -tol.
double min_eigenvalue_h(const InformationStructure& sigma);

// lambda_max / lambda_min of a symmetric matrix; +infinity when
// lambda_min <= 0.
double condition_number(const MatrixXd& m);

struct ConditionalZ0 {
  double mean = 0.0;
  double variance = 1.0;
};

// Distribution of Z_0 given the coordinates of z listed in subset:
// mean = delta_s' inv(Sigma_ss) z_s, variance = 1 - delta_s' inv(Sigma_ss)
// delta_s. A singular subset block is an error unless allow_singular, which
// switches to the pseudo-inverse (relative cutoff 1e-10).
ConditionalZ0 conditional_z0(const InformationStructure& sigma,
                             const VectorXd& z,
                             const std::vector<Index>& subset,
                             bool allow_singular = false);

// Full-vector conditioning convenience: subset = all coordinates.
ConditionalZ0 conditional_z0(const InformationStructure& sigma,
                             const VectorXd& z, bool allow_singular = false);

// Stable ascending sort of forecasters by information share delta_j.
std::vector<Index> diversity_ordering(const InformationStructure& sigma);

}  // namespace revealed
