#include "revealed/projection.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "revealed/parallel.hpp"

namespace revealed {

namespace {

constexpr double kCoherenceTol = 1e-8;
constexpr double kCondSlack = 1e-6;        // relative slack on the kappa bound
constexpr double kDenomFloor = 1e-14;      // directional step fallback
constexpr double kTwoPi = 6.2831853071795864769;

void check_square_symmetric(const MatrixXd& m, const char* who) {
  if (m.rows() != m.cols())
    throw contract_error(std::string(who) + ": matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw contract_error(std::string(who) + ": matrix is not symmetric");
}

// Bordered start h(S) for a raw estimate: unit corner, border = diagonal.
MatrixXd border_extend(const MatrixXd& s) {
  const Index N = s.rows();
  MatrixXd omega(N + 1, N + 1);
  omega(0, 0) = 1.0;
  for (Index j = 0; j < N; ++j) {
    omega(0, j + 1) = s(j, j);
    omega(j + 1, 0) = s(j, j);
  }
  omega.bottomRightCorner(N, N) = 0.5 * (s + s.transpose());
  return omega;
}

// Exact minimizer of pi over [floor, inf). pi is convex piecewise quadratic
// with breakpoints at l_i and l_i / kappa; each closed piece is minimized in
// closed form and the best (leftmost on ties) candidate wins.
double minimize_pi_from(const VectorXd& l, double kappa, double floor) {
  const Index n = l.size();
  const double lmin = l.minCoeff();
  const double lmax = l.maxCoeff();

  // Band [lmax / kappa, lmin] is where pi vanishes; return its midpoint when
  // it meets [floor, inf).
  const double flat_lo = std::max(lmax / kappa, floor);
  const double flat_hi = lmin;
  if (flat_lo <= flat_hi) return 0.5 * (flat_lo + flat_hi);

  if (lmax <= floor) return floor;  // pi increasing beyond all eigenvalues

  // Shortfall breakpoints, rounded once; classification below compares
  // against these exact doubles so a piece can never lose the term whose
  // breakpoint bounds it to re-rounding of l_i / kappa.
  VectorXd q(n);
  for (Index i = 0; i < n; ++i) q[i] = l[i] / kappa;

  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(2 * n + 2));
  pts.push_back(floor);
  for (Index i = 0; i < n; ++i) {
    if (l[i] > floor) pts.push_back(l[i]);
    if (q[i] > floor) pts.push_back(q[i]);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  pts.push_back(pts.back() + 1.0);  // final piece is quadratic and increasing

  double best_mu = floor;
  double best_val = pi_objective(l, kappa, floor);
  for (std::size_t t = 0; t + 1 < pts.size(); ++t) {
    const double a = pts[t], b = pts[t + 1];
    if (!(b > a)) continue;
    // Active terms on (a, b): growth terms for l_i <= a, shortfall terms for
    // q_i >= b.
    double sum_low = 0.0, sum_high = 0.0;
    Index n_low = 0, n_high = 0;
    for (Index i = 0; i < n; ++i) {
      if (l[i] <= a) { sum_low += l[i]; ++n_low; }
      if (q[i] >= b) { sum_high += l[i]; ++n_high; }
    }
    const double denom =
        static_cast<double>(n_low) + kappa * kappa * static_cast<double>(n_high);
    double mu = denom > 0.0 ? (sum_low + kappa * sum_high) / denom
                            : 0.5 * (a + b);
    mu = std::clamp(mu, a, b);
    const double val = pi_objective(l, kappa, mu);
    if (val < best_val) {
      best_val = val;
      best_mu = mu;
    }
  }
  return best_mu;
}

}  // namespace

MatrixXd project_linear(const MatrixXd& m) {
  check_square_symmetric(m, "linear projection");
  if (m.rows() < 2)
    throw contract_error("linear projection: need at least a 2 x 2 matrix");
  MatrixXd out = 0.5 * (m + m.transpose());
  out(0, 0) = 1.0;
  for (Index j = 1; j < out.rows(); ++j) {
    const double a = (out(j, j) + out(0, j) + out(j, 0)) / 3.0;
    out(j, j) = a;
    out(0, j) = a;
    out(j, 0) = a;
  }
  return out;
}

double pi_objective(const VectorXd& eigenvalues, double kappa, double mu) {
  double acc = 0.0;
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    const double grow = mu - eigenvalues[i];
    if (grow > 0.0) acc += grow * grow;
    const double short_ = eigenvalues[i] - kappa * mu;
    if (short_ > 0.0) acc += short_ * short_;
  }
  return acc;
}

double minimize_pi(const VectorXd& eigenvalues, double kappa) {
  if (eigenvalues.size() == 0)
    throw contract_error("minimize_pi: empty spectrum");
  if (!(kappa >= 1.0))
    throw contract_error("minimize_pi: kappa must be at least 1");
  return minimize_pi_from(eigenvalues, kappa, 0.0);
}

MatrixXd project_cone(const MatrixXd& m, double kappa, ConeInfo* info) {
  check_square_symmetric(m, "cone projection");
  if (!(kappa >= 1.0))
    throw contract_error("cone projection: kappa must be at least 1");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success)
    throw numerical_error("cone projection: eigendecomposition failed");
  const VectorXd& l = es.eigenvalues();

  ConeInfo local;
  double mu = minimize_pi_from(l, kappa, 0.0);
  if (mu <= 0.0) {
    if (l.maxCoeff() <= 0.0) {
      // Nothing of the spectrum is retainable: the projection is the zero
      // matrix (the closure point of the cone).
      local.zero_matrix = true;
      local.mu = 0.0;
      if (info) *info = local;
      return MatrixXd::Zero(m.rows(), m.cols());
    }
    // Keep a nonzero result: restart the search at the smallest positive
    // breakpoint.
    double p1 = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < l.size(); ++i)
      if (l[i] > 0.0) p1 = std::min(p1, l[i] / kappa);
    mu = minimize_pi_from(l, kappa, p1);
    local.forced_positive = true;
  }
  local.mu = mu;
  if (info) *info = local;

  VectorXd clamped(l.size());
  for (Index i = 0; i < l.size(); ++i)
    clamped[i] = std::clamp(l[i], mu, kappa * mu);
  MatrixXd out = es.eigenvectors() * clamped.asDiagonal() *
                 es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

ProjectionResult project_lse(const UnconstrainedEstimate& s,
                             const ProjectionConfig& config) {
  return project_lse(s.s, config);
}

ProjectionResult project_lse(const MatrixXd& s, const ProjectionConfig& config) {
  check_square_symmetric(s, "projection");
  if (!s.allFinite()) throw contract_error("projection: non-finite input");
  if (!(config.kappa >= 1.0))
    throw contract_error("projection: kappa must be at least 1");
  if (!(config.epsilon > 0.0))
    throw contract_error("projection: epsilon must be positive");

  const Index N = s.rows();
  const MatrixXd start = border_extend(s);
  MatrixXd omega_a = start;

  ProjectionResult result;
  result.kappa = config.kappa;

  double last_resid = std::numeric_limits<double>::infinity();
  for (Index it = 1; it <= config.max_iterations; ++it) {
    const MatrixXd omega_b = project_linear(omega_a);
    ConeInfo cone;
    const MatrixXd omega_c = project_cone(omega_b, config.kappa, &cone);
    result.cone_zero_matrix = result.cone_zero_matrix || cone.zero_matrix;
    result.cone_forced_positive =
        result.cone_forced_positive || cone.forced_positive;
    const MatrixXd omega_d = project_linear(omega_c);

    const double resid = (omega_d - omega_c).cwiseAbs2().maxCoeff();
    last_resid = resid;
    if (resid < config.epsilon) {
      // The iterate satisfies the loop criterion; accept it only once the
      // de-bordered structure is itself feasible, otherwise keep refining.
      MatrixXd sigma = omega_c.bottomRightCorner(N, N);
      sigma = 0.5 * (sigma + sigma.transpose());
      const MatrixXd h = border_extend(sigma);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(h, Eigen::EigenvaluesOnly);
      if (es.info() == Eigen::Success) {
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        const double cond = lo > 0.0
                                ? hi / lo
                                : std::numeric_limits<double>::infinity();
        if (lo >= -kCoherenceTol &&
            cond <= config.kappa * (1.0 + kCondSlack)) {
          result.sigma = std::move(sigma);
          result.iterations = it;
          result.residual = resid;
          result.condition = cond;
          result.min_eigenvalue = lo;
          result.objective = (omega_c - start).norm();
          return result;
        }
      }
    }

    const MatrixXd b_minus_c = omega_b - omega_c;
    const MatrixXd b_minus_d = omega_b - omega_d;
    const double denom = b_minus_d.cwiseProduct(b_minus_c).sum();
    if (std::abs(denom) < kDenomFloor) {
      omega_a = omega_d;
      ++result.plain_steps;
    } else {
      const double delta = b_minus_c.squaredNorm() / denom;
      omega_a = omega_b + delta * (omega_d - omega_b);
    }
  }

  std::ostringstream os;
  os << "projection: no convergence within " << config.max_iterations
     << " iterations (kappa " << config.kappa << ", last residual "
     << last_resid << ")";
  throw numerical_error(os.str());
}

namespace {

struct PatternGroup {
  std::vector<Index> members;  // forecaster indices present in the pattern
  std::vector<Index> events;   // event rows carrying the pattern
};

std::vector<PatternGroup> group_by_pattern(const Mask& present) {
  std::map<std::vector<char>, PatternGroup> groups;
  const Index K = present.rows(), N = present.cols();
  for (Index k = 0; k < K; ++k) {
    std::vector<char> key(static_cast<std::size_t>(N));
    bool any = false;
    for (Index j = 0; j < N; ++j) {
      key[static_cast<std::size_t>(j)] = present(k, j) ? 1 : 0;
      any = any || present(k, j);
    }
    if (!any) continue;
    auto& g = groups[key];
    if (g.members.empty())
      for (Index j = 0; j < N; ++j)
        if (present(k, j)) g.members.push_back(j);
    g.events.push_back(k);
  }
  std::vector<PatternGroup> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  return out;
}

// Precision matrix of the pattern's submatrix; throws when the restricted
// covariance is not positive definite, since conditional variances would be
// nonpositive.
MatrixXd pattern_precision(const InformationStructure& sigma,
                           const std::vector<Index>& members) {
  const Index m = static_cast<Index>(members.size());
  MatrixXd block(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b)
      block(a, b) = sigma.sigma()(members[a], members[b]);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(block);
  if (es.info() != Eigen::Success)
    throw numerical_error("conditional likelihood: eigendecomposition failed");
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw numerical_error(
        "conditional likelihood: nonpositive conditional variance "
        "(restricted covariance not positive definite)");
  return es.eigenvectors() *
         es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

double group_loglik(const InformationStructure& sigma, const MaskedGrid& z,
                    const PatternGroup& group, Index only_j) {
  const Index m = static_cast<Index>(group.members.size());
  const MatrixXd theta = pattern_precision(sigma, group.members);
  double acc = 0.0;
  VectorXd zi(m);
  for (Index k : group.events) {
    for (Index a = 0; a < m; ++a) zi[a] = z.values(k, group.members[a]);
    const VectorXd w = theta * zi;
    for (Index a = 0; a < m; ++a) {
      const Index j = group.members[a];
      if (only_j >= 0 && j != only_j) continue;
      // Conditional of coordinate a given the rest of the pattern:
      // variance 1 / theta_aa, deviation from the mean w_a / theta_aa.
      const double var = 1.0 / theta(a, a);
      const double dev = w[a] * var;
      acc += -0.5 * (std::log(kTwoPi * var) + dev * dev / var);
    }
  }
  return acc;
}

}  // namespace

double conditional_loglik(const InformationStructure& sigma,
                          const MaskedGrid& z, Index j) {
  if (z.forecasters() != sigma.n())
    throw contract_error("conditional likelihood: grid width mismatch");
  if (j < 0 || j >= sigma.n())
    throw contract_error("conditional likelihood: forecaster out of range");
  double acc = 0.0;
  for (const PatternGroup& g : group_by_pattern(z.present)) {
    if (std::find(g.members.begin(), g.members.end(), j) == g.members.end())
      continue;
    acc += group_loglik(sigma, z, g, j);
  }
  return acc;
}

double total_conditional_loglik(const InformationStructure& sigma,
                                const MaskedGrid& z) {
  if (z.forecasters() != sigma.n())
    throw contract_error("conditional likelihood: grid width mismatch");
  double acc = 0.0;
  for (const PatternGroup& g : group_by_pattern(z.present))
    acc += group_loglik(sigma, z, g, Index{-1});
  return acc;
}

std::vector<double> KappaGrid::values() const {
  if (count < 1) throw contract_error("kappa grid: count must be positive");
  if (!(min >= 1.0) || !(max >= min))
    throw contract_error("kappa grid: need 1 <= min <= max");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    out.push_back(min);
    return out;
  }
  for (Index i = 0; i < count; ++i) {
    if (i == 0) {  // exact endpoints, not exp(log(...)) round trips
      out.push_back(min);
      continue;
    }
    if (i == count - 1) {
      out.push_back(max);
      continue;
    }
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(log_spaced
                      ? std::exp(std::log(min) + t * (std::log(max) - std::log(min)))
                      : min + t * (max - min));
  }
  return out;
}

KappaSelection select_kappa(const UnconstrainedEstimate& s,
                            const MaskedGrid& z, const KappaGrid& grid,
                            double epsilon) {
  const std::vector<double> kappas = grid.values();
  KappaSelection sel;
  sel.candidates.resize(kappas.size());

  parallel_for(kappas.size(), [&](std::size_t i) {
    KappaCandidate& cand = sel.candidates[i];
    cand.kappa = kappas[i];
    try {
      ProjectionConfig cfg;
      cfg.kappa = kappas[i];
      cfg.epsilon = epsilon;
      const ProjectionResult proj = project_lse(s, cfg);
      const double score =
          total_conditional_loglik(proj.structure(), z);
      if (!std::isfinite(score))
        throw numerical_error("non-finite validation score");
      cand.score = score;
      cand.ok = true;
    } catch (const error& e) {
      cand.ok = false;
      cand.note = e.what();
    }
  });

  // Highest score wins; scanning in ascending kappa order with a strict
  // comparison resolves ties toward the smallest kappa.
  bool found = false;
  double best = -std::numeric_limits<double>::infinity();
  for (const KappaCandidate& cand : sel.candidates) {
    if (!cand.ok) continue;
    if (!found || cand.score > best) {
      best = cand.score;
      sel.chosen = cand.kappa;
      found = true;
    }
  }
  if (!found) {
    std::string detail;
    for (const KappaCandidate& cand : sel.candidates)
      if (!cand.ok && detail.empty()) detail = cand.note;
    throw numerical_error(
        "kappa selection: every candidate failed (first failure: " + detail +
        ")");
  }

  ProjectionConfig cfg;
  cfg.kappa = sel.chosen;
  cfg.epsilon = epsilon;
  sel.projection = project_lse(s, cfg);
  return sel;
}

}  // namespace revealed
