#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "revealed/projection.hpp"
#include "revealed/rng.hpp"
#include "revealed/structure.hpp"
#include "revealed/types.hpp"
#include "support/oracle.hpp"

using revealed::ConeInfo;
using revealed::contract_error;
using revealed::Index;
using revealed::MatrixXd;
using revealed::minimize_pi;
using revealed::numerical_error;
using revealed::pi_objective;
using revealed::project_cone;
using revealed::project_lse;
using revealed::project_linear;
using revealed::ProjectionConfig;
using revealed::ProjectionResult;
using revealed::Rng;
using revealed::VectorXd;

namespace {

MatrixXd random_symmetric(Rng& rng, Index n, double diag_lo, double diag_hi,
                          double off_amp) {
  MatrixXd m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) {
      if (i == j) {
        m(i, i) = diag_lo + (diag_hi - diag_lo) * rng.uniform01();
      } else {
        m(i, j) = off_amp * (2.0 * rng.uniform01() - 1.0);
        m(j, i) = m(i, j);
      }
    }
  return m;
}

}  // namespace

TEST_CASE("border-pattern projection replaces each triple by its mean") {
  MatrixXd m(3, 3);
  m << 2.0, 0.5, 0.1, 0.5, 0.2, 0.3, 0.1, 0.3, 0.9;
  const MatrixXd p = project_linear(m);
  CHECK(p(0, 0) == 1.0);
  const double a1 = (0.2 + 0.5 + 0.5) / 3.0;
  CHECK(p(1, 1) == doctest::Approx(a1).epsilon(1e-15));
  CHECK(p(0, 1) == p(1, 1));
  CHECK(p(1, 0) == p(1, 1));
  const double a2 = (0.9 + 0.1 + 0.1) / 3.0;
  CHECK(p(2, 2) == doctest::Approx(a2).epsilon(1e-15));
  // Entries outside the border pattern are untouched.
  CHECK(p(1, 2) == 0.3);
  CHECK(p(2, 1) == 0.3);
}

TEST_CASE("border-pattern projection is idempotent") {
  Rng rng(17);
  const MatrixXd m = random_symmetric(rng, 5, -1.0, 2.0, 1.0);
  const MatrixXd once = project_linear(m);
  const MatrixXd twice = project_linear(once);
  CHECK((twice - once).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("border-pattern projection agrees with the normal-equation oracle") {
  Rng rng(23);
  for (int rep = 0; rep < 12; ++rep) {
    const Index n = 2 + static_cast<Index>(rng.below(5));
    const MatrixXd m = random_symmetric(rng, n, -1.5, 1.5, 1.2);
    const MatrixXd lib = project_linear(m);
    const MatrixXd ora = oracle::affine_project_generic(m);
    CHECK((lib - ora).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("border-pattern projection validates input") {
  CHECK_THROWS_AS(project_linear(MatrixXd::Zero(2, 3)), contract_error);
  CHECK_THROWS_AS(project_linear(MatrixXd::Identity(1, 1)), contract_error);
  MatrixXd asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(project_linear(asym), contract_error);
}

TEST_CASE("spectral penalty hand values") {
  VectorXd l(2);
  l << 2.0, -1.0;
  CHECK(pi_objective(l, 2.0, 1.0) == doctest::Approx(4.0).epsilon(1e-15));
  // At mu = 0 both terms of the first eigenvalue vanish and the second
  // contributes (0 - (-1))^2 from below plus (2 - 0)^2 from above: 1 + 4.
  CHECK(pi_objective(l, 2.0, 0.0) == doctest::Approx(5.0).epsilon(1e-15));
  VectorXd band(2);
  band << 1.0, 2.0;
  CHECK(pi_objective(band, 4.0, 0.75) == 0.0);
}

TEST_CASE("penalty minimizer: interior optimum") {
  VectorXd l(2);
  l << 2.0, -1.0;
  // Balances the lifted negative eigenvalue against squeezing the positive
  // one: mu* = (sum_low + kappa sum_high) / (n_low + kappa^2 n_high) = 3/5.
  CHECK(minimize_pi(l, 2.0) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(pi_objective(l, 2.0, 0.6) == doctest::Approx(3.2).epsilon(1e-14));
}

TEST_CASE("penalty minimizer: flat stretch returns the midpoint") {
  VectorXd l(2);
  l << 1.0, 2.0;
  CHECK(minimize_pi(l, 4.0) == doctest::Approx(0.75).epsilon(1e-15));
  VectorXd single(1);
  single << 4.0;
  CHECK(minimize_pi(single, 2.0) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("penalty minimizer: nonpositive and dominated spectra give zero") {
  VectorXd l(2);
  l << -1.0, -3.0;
  CHECK(minimize_pi(l, 2.0) == 0.0);
  // A large negative eigenvalue makes any positive band too expensive.
  l << 0.1, -10.0;
  CHECK(minimize_pi(l, 2.0) == 0.0);
}

TEST_CASE("penalty minimizer validates input") {
  CHECK_THROWS_AS(minimize_pi(VectorXd::Zero(0), 2.0), contract_error);
  VectorXd l(1);
  l << 1.0;
  CHECK_THROWS_AS(minimize_pi(l, 0.5), contract_error);
}

TEST_CASE("penalty minimizer agrees with the scanning oracle") {
  Rng rng(41);
  const double kappas[] = {1.5, 5.0, 50.0};
  for (int rep = 0; rep < 100; ++rep) {
    const Index n = 1 + static_cast<Index>(rng.below(12));
    VectorXd l(n);
    for (Index i = 0; i < n; ++i) l[i] = -2.0 + 5.0 * rng.uniform01();
    const double kappa = kappas[rep % 3];
    const double lib = minimize_pi(l, kappa);
    const double scan = oracle::minimize_pi_scan(l, kappa, 1e-7);
    // The library is an exact breakpoint solver, so it can only win.
    CHECK(pi_objective(l, kappa, lib) <=
          pi_objective(l, kappa, scan) + 1e-12);
    // And on strictly convex instances the minimizers themselves agree.
    if (pi_objective(l, kappa, lib) > 1e-12)
      CHECK(lib == doctest::Approx(scan).epsilon(2e-6));
  }
}

TEST_CASE("cone projection leaves a feasible matrix alone") {
  MatrixXd d = MatrixXd::Zero(3, 3);
  d.diagonal() << 1.0, 2.0, 3.0;
  ConeInfo info;
  const MatrixXd p = project_cone(d, 5.0, &info);
  CHECK((p - d).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_FALSE(info.zero_matrix);
  CHECK_FALSE(info.forced_positive);
  CHECK(info.mu > 0.0);
}

TEST_CASE("cone projection of a nonpositive spectrum is the zero matrix") {
  MatrixXd d = MatrixXd::Zero(2, 2);
  d.diagonal() << -1.0, -3.0;
  ConeInfo info;
  const MatrixXd p = project_cone(d, 2.0, &info);
  CHECK(p == MatrixXd::Zero(2, 2));
  CHECK(info.zero_matrix);
  CHECK(info.mu == 0.0);
}

TEST_CASE("cone projection forces a nonzero result when possible") {
  MatrixXd d = MatrixXd::Zero(2, 2);
  d.diagonal() << 0.1, -10.0;
  ConeInfo info;
  const MatrixXd p = project_cone(d, 2.0, &info);
  CHECK(info.forced_positive);
  CHECK_FALSE(info.zero_matrix);
  // Restarting at the smallest positive breakpoint keeps the band
  // [0.05, 0.1]: the positive eigenvalue survives, the negative one lifts.
  CHECK(p(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(p(1, 1) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(std::abs(p(0, 1)) <= 1e-14);
  CHECK(revealed::condition_number(p) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("cone projection agrees with the scanning oracle off the forced path") {
  Rng rng(59);
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 2 + static_cast<Index>(rng.below(5));
    const MatrixXd m = random_symmetric(rng, n, -0.5, 1.5, 0.8);
    const double kappa = rep % 2 == 0 ? 3.0 : 30.0;
    ConeInfo info;
    const MatrixXd lib = project_cone(m, kappa, &info);
    if (info.forced_positive || info.zero_matrix) continue;
    const MatrixXd ora = oracle::cone_project_scan(m, kappa);
    CHECK((lib - ora).cwiseAbs().maxCoeff() <= 1e-7);
    // Feasibility of the result.
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(lib, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    if (es.eigenvalues().minCoeff() > 0.0)
      CHECK(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff() <=
            kappa * (1.0 + 1e-9));
  }
}

TEST_CASE("cone projection validates input") {
  CHECK_THROWS_AS(project_cone(MatrixXd::Zero(2, 3), 2.0), contract_error);
  CHECK_THROWS_AS(project_cone(MatrixXd::Identity(2, 2), 0.9), contract_error);
}

TEST_CASE("full projection satisfies its feasibility posts on rough inputs") {
  Rng rng(73);
  ProjectionConfig cfg;
  cfg.kappa = 50.0;
  for (int rep = 0; rep < 10; ++rep) {
    const Index n = 3 + static_cast<Index>(rng.below(6));
    MatrixXd s = random_symmetric(rng, n, 0.05, 0.9, 0.25);
    const ProjectionResult out = project_lse(s, cfg);

    REQUIRE(out.sigma.rows() == n);
    CHECK(out.iterations >= 1);
    CHECK(out.residual < cfg.epsilon);
    CHECK(out.min_eigenvalue >= -1e-8);
    CHECK(out.condition <= cfg.kappa * (1.0 + 1e-6));
    // The reported numbers describe the returned structure itself.
    const auto structure = out.structure();
    CHECK(revealed::min_eigenvalue_h(structure) ==
          doctest::Approx(out.min_eigenvalue).epsilon(1e-9));
    const double cond =
        revealed::condition_number(revealed::extend(structure).omega);
    CHECK(cond == doctest::Approx(out.condition).epsilon(1e-9));
    CHECK(out.objective >= 0.0);
  }
}

TEST_CASE("projecting a projection is a fixed point") {
  Rng rng(91);
  ProjectionConfig cfg;
  cfg.kappa = 30.0;
  const MatrixXd s = random_symmetric(rng, 5, 0.1, 0.8, 0.3);
  const ProjectionResult first = project_lse(s, cfg);
  const ProjectionResult second = project_lse(first.sigma, cfg);
  CHECK((second.sigma - first.sigma).cwiseAbs().maxCoeff() <= 1e-4);
  CHECK(second.objective <= 1e-3);
}

TEST_CASE("objective shrinks as the condition bound relaxes") {
  Rng rng(107);
  const MatrixXd s = random_symmetric(rng, 6, 0.1, 0.85, 0.3);
  // The tight bound stays above the smallest condition number any bordered
  // structure of this size can reach (about 2 sqrt(N)).
  ProjectionConfig tight, mid, loose;
  tight.kappa = 15.0;
  mid.kappa = 50.0;
  loose.kappa = 500.0;
  const double o1 = project_lse(s, tight).objective;
  const double o2 = project_lse(s, mid).objective;
  const double o3 = project_lse(s, loose).objective;
  CHECK(o1 >= o2 - 5e-3);
  CHECK(o2 >= o3 - 5e-3);
}

TEST_CASE("projection is deterministic") {
  Rng rng(113);
  const MatrixXd s = random_symmetric(rng, 5, 0.1, 0.8, 0.3);
  ProjectionConfig cfg;
  cfg.kappa = 40.0;
  const ProjectionResult a = project_lse(s, cfg);
  const ProjectionResult b = project_lse(s, cfg);
  CHECK(a.sigma == b.sigma);
  CHECK(a.iterations == b.iterations);
  CHECK(a.objective == b.objective);
}

TEST_CASE("projection validates input and reports non-convergence") {
  ProjectionConfig cfg;
  CHECK_THROWS_AS(project_lse(MatrixXd::Zero(2, 3), cfg), contract_error);
  MatrixXd nan2 = MatrixXd::Constant(2, 2, std::nan(""));
  CHECK_THROWS_AS(project_lse(nan2, cfg), contract_error);
  MatrixXd asym(2, 2);
  asym << 0.5, 0.2, -0.2, 0.5;
  CHECK_THROWS_AS(project_lse(asym, cfg), contract_error);
  cfg.kappa = 0.5;
  CHECK_THROWS_AS(project_lse(MatrixXd::Identity(2, 2) * 0.5, cfg),
                  contract_error);
  cfg.kappa = 100.0;
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(project_lse(MatrixXd::Identity(2, 2) * 0.5, cfg),
                  contract_error);

  // kappa = 1 forces a multiple of the identity, which cannot carry the
  // border pattern: the alternation never settles.
  ProjectionConfig unit;
  unit.kappa = 1.0;
  unit.max_iterations = 500;
  MatrixXd s(2, 2);
  s << 0.4, 0.1, 0.1, 0.5;
  CHECK_THROWS_AS(project_lse(s, unit), numerical_error);
}
