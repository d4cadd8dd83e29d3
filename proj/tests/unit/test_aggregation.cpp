#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "revealed/aggregation.hpp"
#include "revealed/estimation.hpp"
#include "revealed/normal.hpp"
#include "revealed/structure.hpp"
#include "revealed/types.hpp"
#include "support/reference.hpp"

using revealed::aggregate_baseline;
using revealed::aggregate_panel;
using revealed::contract_error;
using revealed::data_error;
using revealed::default_methods;
using revealed::estimate_thresholds;
using revealed::ForecastPanel;
using revealed::Index;
using revealed::InformationStructure;
using revealed::Mask;
using revealed::MaskedGrid;
using revealed::MatrixXd;
using revealed::Method;
using revealed::method_applies;
using revealed::method_name;
using revealed::Mode;
using revealed::norm_cdf;
using revealed::norm_ppf;
using revealed::numerical_error;
using revealed::parse_method;
using revealed::probit_scores;
using revealed::ProbitPanel;
using revealed::recover_z;
using revealed::reveal_binary;
using revealed::reveal_continuous;
using revealed::RevealDiagnostics;
using revealed::singular_error;
using revealed::update_prior_means;
using revealed::usage_error;
using revealed::VectorXd;

namespace {

ForecastPanel make_panel(const MatrixXd& values, const Mask& present,
                         Mode mode) {
  ForecastPanel p;
  p.grid = MaskedGrid(values, present);
  p.mode = mode;
  for (Index k = 0; k < values.rows(); ++k)
    p.event_ids.push_back("e" + std::to_string(k));
  for (Index j = 0; j < values.cols(); ++j)
    p.forecaster_ids.push_back("f" + std::to_string(j));
  p.validate();
  return p;
}

ForecastPanel full_panel(const MatrixXd& values, Mode mode) {
  return make_panel(values, Mask::Constant(values.rows(), values.cols(), true),
                    mode);
}

}  // namespace

TEST_CASE("method names round trip and unknown names are usage errors") {
  const Method all[] = {Method::revealed,     Method::mean_prob,
                        Method::median_prob,  Method::probit_mean,
                        Method::logodds_mean, Method::mean,
                        Method::median,       Method::ama};
  for (Method m : all) CHECK(parse_method(method_name(m)) == m);
  CHECK(std::string(method_name(Method::mean_prob)) == "mean-prob");
  CHECK(std::string(method_name(Method::logodds_mean)) == "logodds-mean");
  CHECK_THROWS_AS(parse_method("average"), usage_error);
  CHECK_THROWS_AS(parse_method(""), usage_error);
}

TEST_CASE("method applicability by panel mode") {
  CHECK(method_applies(Method::revealed, Mode::binary));
  CHECK(method_applies(Method::revealed, Mode::continuous));
  CHECK(method_applies(Method::mean_prob, Mode::binary));
  CHECK(method_applies(Method::logodds_mean, Mode::binary));
  CHECK_FALSE(method_applies(Method::mean_prob, Mode::continuous));
  CHECK_FALSE(method_applies(Method::mean, Mode::binary));
  CHECK(method_applies(Method::ama, Mode::continuous));

  const auto bin = default_methods(Mode::binary);
  REQUIRE(bin.size() == 5);
  CHECK(bin.front() == Method::revealed);
  const auto cont = default_methods(Mode::continuous);
  REQUIRE(cont.size() == 4);
  CHECK(cont.front() == Method::revealed);
  for (Method m : bin) CHECK(method_applies(m, Mode::binary));
  for (Method m : cont) CHECK(method_applies(m, Mode::continuous));
}

TEST_CASE("baseline hand values") {
  CHECK(aggregate_baseline(Method::mean_prob, {0.2, 0.6}) ==
        doctest::Approx(0.4).epsilon(1e-15));
  CHECK(aggregate_baseline(Method::median_prob, {0.1, 0.3, 0.8}) == 0.3);
  CHECK(aggregate_baseline(Method::median_prob, {0.9, 0.1, 0.5, 0.3}) ==
        doctest::Approx(0.4).epsilon(1e-15));
  CHECK(aggregate_baseline(Method::probit_mean, {0.8, 0.5}) ==
        doctest::Approx(reference::kPhiHalfPpf08).epsilon(1e-14));
  CHECK(aggregate_baseline(Method::logodds_mean, {0.25, 0.75}) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(aggregate_baseline(Method::mean, {1.0, 2.0, 3.0, 10.0}) == 4.0);
  CHECK(aggregate_baseline(Method::median, {1.0, 2.0, 3.0, 10.0}) == 2.5);
  CHECK(aggregate_baseline(Method::ama, {1.0, 2.0, 3.0, 10.0}) == 3.25);
}

TEST_CASE("every baseline preserves unanimity") {
  for (Method m : {Method::mean_prob, Method::median_prob, Method::probit_mean,
                   Method::logodds_mean})
    CHECK(aggregate_baseline(m, {0.37, 0.37, 0.37}) ==
          doctest::Approx(0.37).epsilon(1e-13));
  for (Method m : {Method::mean, Method::median, Method::ama})
    CHECK(aggregate_baseline(m, {5.5, 5.5}) ==
          doctest::Approx(5.5).epsilon(1e-15));
}

TEST_CASE("baselines are permutation invariant") {
  const std::vector<double> a{0.2, 0.7, 0.4, 0.55};
  const std::vector<double> b{0.55, 0.4, 0.7, 0.2};
  for (Method m : {Method::mean_prob, Method::median_prob, Method::probit_mean,
                   Method::logodds_mean})
    CHECK(aggregate_baseline(m, a) ==
          doctest::Approx(aggregate_baseline(m, b)).epsilon(1e-15));
}

TEST_CASE("baseline error handling") {
  CHECK_THROWS_AS(aggregate_baseline(Method::mean_prob, {}), data_error);
  CHECK_THROWS_AS(aggregate_baseline(Method::revealed, {0.5}),
                  contract_error);
  // Probit and log-odds means need values strictly inside the unit interval.
  CHECK_THROWS_AS(aggregate_baseline(Method::probit_mean, {0.0, 0.5}),
                  contract_error);
  CHECK_THROWS_AS(aggregate_baseline(Method::logodds_mean, {0.5, 1.0}),
                  contract_error);
}

TEST_CASE("threshold estimate for a lone forecaster halves the probit score") {
  MatrixXd s(1, 1);
  s << 0.75;
  const InformationStructure sigma(s);
  ProbitPanel probit;
  probit.scores.resize(1, 1);
  probit.scores(0, 0) = norm_ppf(0.8);
  probit.present = Mask::Constant(1, 1, true);
  const VectorXd t = estimate_thresholds(sigma, probit);
  REQUIRE(t.size() == 1);
  // -sqrt(1 - 0.75) * ppf(0.8), frozen to twenty digits.
  CHECK(t[0] == doctest::Approx(-0.4208106167864571025894).epsilon(1e-14));
  // The implied prior outcome probability Phi(-t).
  CHECK(norm_cdf(-t[0]) ==
        doctest::Approx(reference::kPhiHalfPpf08).epsilon(1e-14));
}

TEST_CASE("recovered information variables combine scores and thresholds") {
  MatrixXd s(2, 2);
  s << 0.36, 0.1, 0.1, 0.19;
  const InformationStructure sigma(s);
  ProbitPanel probit;
  probit.scores.resize(1, 2);
  probit.scores << 1.25, -0.5;
  probit.present = Mask::Constant(1, 2, true);
  VectorXd t(1);
  t << 0.3;
  const MaskedGrid z = recover_z(sigma, probit, t);
  CHECK(z.values(0, 0) ==
        doctest::Approx(std::sqrt(0.64) * 1.25 + 0.3).epsilon(1e-14));
  CHECK(z.values(0, 1) ==
        doctest::Approx(std::sqrt(0.81) * -0.5 + 0.3).epsilon(1e-14));

  VectorXd wrong(2);
  wrong << 0.1, 0.2;
  CHECK_THROWS_AS(recover_z(sigma, probit, wrong), contract_error);
}

TEST_CASE("threshold estimation flags empty events and degenerate weights") {
  MatrixXd s(2, 2);
  s << 0.36, 0.1, 0.1, 0.19;
  ProbitPanel probit;
  probit.scores = MatrixXd::Zero(1, 2);
  probit.present = Mask::Constant(1, 2, false);
  CHECK_THROWS_AS(estimate_thresholds(InformationStructure(s), probit),
                  data_error);

  // A structure whose restricted pseudo-inverse annihilates the ones vector
  // cannot support precision weighting.
  MatrixXd anti(2, 2);
  anti << 0.5, -0.5, -0.5, 0.5;
  probit.present = Mask::Constant(1, 2, true);
  CHECK_THROWS_AS(
      estimate_thresholds(InformationStructure(anti), probit, true),
      numerical_error);
}

TEST_CASE("one forecaster, one event: the aggregate returns the forecast") {
  MatrixXd s(1, 1);
  s << 0.75;
  const InformationStructure sigma(s);
  MatrixXd v(2, 1);
  v << 0.3, 0.8;
  const ForecastPanel panel = full_panel(v, Mode::binary);
  const auto agg = aggregate_panel(panel, sigma, {Method::revealed});
  REQUIRE(agg.values.rows() == 2);
  CHECK(agg.values(0, 0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(agg.values(1, 0) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(agg.variance_clamps == 0);
}

TEST_CASE("the exact round trip holds for any claimed information share") {
  for (double delta : {0.05, 0.5, 0.95}) {
    MatrixXd s(1, 1);
    s << delta;
    MatrixXd v(1, 1);
    v << 0.663;
    const auto agg = aggregate_panel(full_panel(v, Mode::binary),
                                     InformationStructure(s),
                                     {Method::revealed});
    CHECK(agg.values(0, 0) == doctest::Approx(0.663).epsilon(1e-11));
  }
}

TEST_CASE("fully shared information reduces the aggregate to the probit mean") {
  // With Sigma = c J every forecaster carries the same information, the
  // pseudo-inverse weights are uniform, and the revealed aggregate collapses
  // onto the probit-mean baseline exactly.
  const double c = 0.4;
  const InformationStructure sigma(MatrixXd::Constant(3, 3, c));
  MatrixXd v(2, 3);
  v << 0.55, 0.70, 0.62, 0.25, 0.33, 0.41;
  const ForecastPanel panel = full_panel(v, Mode::binary);
  CHECK_THROWS_AS(aggregate_panel(panel, sigma, {Method::revealed}),
                  singular_error);
  const auto agg = aggregate_panel(
      panel, sigma, {Method::revealed, Method::probit_mean}, true);
  for (Index k = 0; k < 2; ++k)
    CHECK(agg.values(k, 0) ==
          doctest::Approx(agg.values(k, 1)).epsilon(1e-11));
}

TEST_CASE("variance floor clamps are reported") {
  MatrixXd s(1, 1);
  s << 1.0 - 1e-13;
  const InformationStructure sigma(s);
  VectorXd z(1);
  z << 0.1;
  RevealDiagnostics diag;
  const double p = reveal_binary(sigma, z, {0}, 0.0, &diag);
  CHECK(diag.variance_clamped);
  CHECK(diag.conditional_variance == 1e-12);
  // The floored variance turns the standardized mean into 1e5, where the
  // normal cdf saturates: the point is that the result is a usable
  // probability, not a division by zero.
  CHECK(p == 1.0);

  s << 0.5;
  RevealDiagnostics clean;
  reveal_binary(InformationStructure(s), z, {0}, 0.0, &clean);
  CHECK_FALSE(clean.variance_clamped);
  CHECK(clean.conditional_variance == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("reveal validates its subset") {
  MatrixXd s(1, 1);
  s << 0.5;
  VectorXd z(1);
  z << 0.2;
  CHECK_THROWS_AS(reveal_binary(InformationStructure(s), z, {}, 0.0),
                  data_error);
}

TEST_CASE("nested information: updated prior mean follows the coarse forecaster") {
  MatrixXd s(2, 2);
  s << 0.2, 0.2, 0.2, 0.5;
  const InformationStructure sigma(s);
  // Precision weights inv(Sigma) 1 = (5, 0): the better-informed forecaster
  // is pure signal and contributes nothing to locating the prior.
  MatrixXd v(1, 2);
  v << 3.0, 7.0;
  const VectorXd mu =
      update_prior_means(sigma, full_panel(v, Mode::continuous));
  REQUIRE(mu.size() == 1);
  CHECK(mu[0] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("continuous reveal hand case lands on twelve exactly") {
  MatrixXd s(2, 2);
  s << 0.5, 0.25, 0.25, 0.5;
  const InformationStructure sigma(s);
  VectorXd x(2);
  x << 12.0, 11.0;  // standardized signals (1, 0.5) under mu=10, sigma0=2
  RevealDiagnostics diag;
  const double out = reveal_continuous(sigma, x, {0, 1}, 10.0, 4.0, &diag);
  CHECK(out == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(diag.conditional_variance == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(diag.weights[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(diag.weights[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  CHECK_THROWS_AS(reveal_continuous(sigma, x, {0, 1}, 10.0, 0.0), data_error);
}

TEST_CASE("panel aggregation fills one column per method over present cells") {
  MatrixXd v(3, 3);
  v << 0.2, 0.4, 0.6, 0.3, 0.5, 0.9, 0.1, 0.8, 0.7;
  Mask m = Mask::Constant(3, 3, true);
  m(1, 2) = false;  // event e1 only sees forecasters 0 and 1
  const ForecastPanel panel = make_panel(v, m, Mode::binary);
  MatrixXd s = MatrixXd::Identity(3, 3) * 0.2;
  const InformationStructure sigma(s);

  const auto agg = aggregate_panel(
      panel, sigma, {Method::mean_prob, Method::median_prob});
  REQUIRE(agg.methods.size() == 2);
  REQUIRE(agg.values.rows() == 3);
  CHECK(agg.values(0, 0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(agg.values(0, 1) == 0.4);
  CHECK(agg.values(1, 0) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(agg.values(1, 1) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(agg.values(2, 0) ==
        doctest::Approx((0.1 + 0.8 + 0.7) / 3.0).epsilon(1e-14));
  CHECK(agg.values(2, 1) == 0.7);
}

TEST_CASE("panel aggregation rejects inapplicable methods and wrong widths") {
  MatrixXd v(2, 2);
  v << 0.2, 0.4, 0.3, 0.5;
  const ForecastPanel panel = full_panel(v, Mode::binary);
  MatrixXd s = MatrixXd::Identity(2, 2) * 0.2;
  CHECK_THROWS_AS(
      aggregate_panel(panel, InformationStructure(s), {Method::mean}),
      usage_error);
  MatrixXd wide = MatrixXd::Identity(3, 3) * 0.2;
  CHECK_THROWS_AS(
      aggregate_panel(panel, InformationStructure(wide), {Method::mean_prob}),
      contract_error);
}

TEST_CASE("revealed aggregation demands a censored panel") {
  MatrixXd v(2, 1);
  v << 0.0, 0.8;  // an exact zero survives only in an uncensored panel
  const ForecastPanel panel = full_panel(v, Mode::binary);
  MatrixXd s(1, 1);
  s << 0.4;
  CHECK_THROWS_AS(
      aggregate_panel(panel, InformationStructure(s), {Method::revealed}),
      contract_error);
}
