#pragma once

#include <string>
#include <vector>

#include "revealed/structure.hpp"
#include "revealed/types.hpp"

namespace revealed {

// Orthogonal projection onto the border pattern set: entry (0,0) pinned to 1
// and, for each j >= 1, entries (j,j), (0,j), (j,0) replaced by their mean.
MatrixXd project_linear(const MatrixXd& m);

// Minimizer over mu >= 0 of
//   pi(mu) = sum_i [ (mu - l_i)_+^2 + (l_i - kappa mu)_+^2 ],
// the squared spectral distance to the band [mu, kappa mu]. Piecewise
// quadratic and convex; solved exactly by enumerating the breakpoints
// {l_i, l_i / kappa}. When pi vanishes on an interval the midpoint is
// returned.
double minimize_pi(const VectorXd& eigenvalues, double kappa);

double pi_objective(const VectorXd& eigenvalues, double kappa, double mu);

struct ConeInfo {
  double mu = 0.0;
  bool zero_matrix = false;     // all eigenvalues <= 0: projected to zero
  bool forced_positive = false; // mu* = 0 overridden to keep a nonzero result
};

// Projection onto the closed convex cone of positive semidefinite matrices
// with condition number at most kappa: eigenvalues are clamped into
// [mu*, kappa mu*] where mu* minimizes pi. The zero matrix is returned only
// when no eigenvalue is positive; otherwise a mu* of zero is replaced by the
// best strictly positive breakpoint solution.
MatrixXd project_cone(const MatrixXd& m, double kappa,
                      ConeInfo* info = nullptr);

struct ProjectionConfig {
  double kappa = 100.0;
  double epsilon = 1e-5;     // stop when max (Omega_D - Omega_C)_ij^2 < epsilon
  Index max_iterations = 10000;
};

struct ProjectionResult {
  MatrixXd sigma;            // N x N, the trailing block of the final iterate
  double kappa = 0.0;
  Index iterations = 0;
  double residual = 0.0;     // final max squared entry of Omega_D - Omega_C
  double condition = 0.0;    // condition number of the extended result
  double min_eigenvalue = 0.0;  // smallest eigenvalue of the extended result
  double objective = 0.0;       // Frobenius distance of the iterate to h(S)
  bool cone_zero_matrix = false;
  bool cone_forced_positive = false;
  Index plain_steps = 0;     // directional steps replaced by plain alternation

  InformationStructure structure() const {
    return InformationStructure(sigma);
  }
};

// Alternating projection with directional acceleration between the border
// pattern set and the condition-bounded cone, started at the extended
// unconstrained estimate. Beyond the epsilon stop, iterations continue until
// the returned structure itself is coherent within 1e-8 and its extended
// condition number is within a relative 1e-6 slack of kappa, so the
// advertised feasibility holds for the de-bordered result and not just the
// internal iterate.
ProjectionResult project_lse(const UnconstrainedEstimate& s,
                             const ProjectionConfig& config);
ProjectionResult project_lse(const MatrixXd& s, const ProjectionConfig& config);

// Log-likelihood of forecaster j's information variables conditional on the
// other present forecasters, summed over the events j answered. Events where
// j is absent contribute zero; an event where j is the only present
// forecaster uses the marginal N(0, delta_j).
double conditional_loglik(const InformationStructure& sigma,
                          const MaskedGrid& z, Index j);

// Sum of conditional_loglik over all forecasters, grouped by presence
// pattern so each pattern is factorized once.
double total_conditional_loglik(const InformationStructure& sigma,
                                const MaskedGrid& z);

struct KappaGrid {
  double min = 10.0;
  double max = 1000.0;
  Index count = 100;
  bool log_spaced = true;

  std::vector<double> values() const;
};

struct KappaCandidate {
  double kappa = 0.0;
  double score = 0.0;
  bool ok = false;
  std::string note;  // failure reason when not ok
};

struct KappaSelection {
  double chosen = 0.0;
  std::vector<KappaCandidate> candidates;
  ProjectionResult projection;  // projection at the chosen kappa
};

// Grid search for the condition bound: each candidate kappa is scored by the
// summed conditional log-likelihood of the projected structure on z. Ties
// resolve to the smallest kappa; candidates whose projection fails are
// skipped with a note. Parallel across candidates.
KappaSelection select_kappa(const UnconstrainedEstimate& s,
                            const MaskedGrid& z, const KappaGrid& grid,
                            double epsilon = 1e-5);

}  // namespace revealed
