#include "revealed/aggregation.hpp"

#include <algorithm>
#include <cmath>

#include "revealed/estimation.hpp"
#include "revealed/normal.hpp"

namespace revealed {

namespace {

constexpr double kVarFloor = 1e-12;
constexpr double kVarCeil = 1.0;
constexpr double kDeltaCap = 1.0 - 1e-6;

std::vector<Index> present_subset(const Mask& present, Index k) {
  std::vector<Index> subset;
  for (Index j = 0; j < present.cols(); ++j)
    if (present(k, j)) subset.push_back(j);
  return subset;
}

// Solves Sigma_oo x = rhs for each rhs column, via the spectral
// pseudo-inverse when singularity is tolerated.
MatrixXd restricted_solve(const InformationStructure& sigma,
                          const std::vector<Index>& subset,
                          const MatrixXd& rhs, bool allow_singular,
                          const char* who) {
  const Index m = static_cast<Index>(subset.size());
  MatrixXd block(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b)
      block(a, b) = sigma.sigma()(subset[a], subset[b]);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(block);
  if (es.info() != Eigen::Success)
    throw numerical_error(std::string(who) + ": eigendecomposition failed");
  const VectorXd& ev = es.eigenvalues();
  const double cutoff = 1e-10 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  if (ev.minCoeff() <= cutoff && !allow_singular)
    throw singular_error(std::string(who) +
                         ": singular restricted information matrix");
  MatrixXd proj = es.eigenvectors().transpose() * rhs;
  for (Index a = 0; a < m; ++a)
    proj.row(a) *= ev[a] > cutoff ? 1.0 / ev[a] : 0.0;
  return es.eigenvectors() * proj;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::revealed: return "revealed";
    case Method::mean_prob: return "mean-prob";
    case Method::median_prob: return "median-prob";
    case Method::probit_mean: return "probit-mean";
    case Method::logodds_mean: return "logodds-mean";
    case Method::mean: return "mean";
    case Method::median: return "median";
    case Method::ama: return "ama";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  static const Method all[] = {Method::revealed,    Method::mean_prob,
                               Method::median_prob, Method::probit_mean,
                               Method::logodds_mean, Method::mean,
                               Method::median,      Method::ama};
  for (Method m : all)
    if (name == method_name(m)) return m;
  throw usage_error("unknown aggregation method: " + name);
}

bool method_applies(Method m, Mode mode) {
  switch (m) {
    case Method::revealed: return true;
    case Method::mean_prob:
    case Method::median_prob:
    case Method::probit_mean:
    case Method::logodds_mean: return mode == Mode::binary;
    case Method::mean:
    case Method::median:
    case Method::ama: return mode == Mode::continuous;
  }
  return false;
}

std::vector<Method> default_methods(Mode mode) {
  if (mode == Mode::binary)
    return {Method::revealed, Method::mean_prob, Method::median_prob,
            Method::probit_mean, Method::logodds_mean};
  return {Method::revealed, Method::mean, Method::median, Method::ama};
}

VectorXd estimate_thresholds(const InformationStructure& sigma,
                             const ProbitPanel& probit, bool allow_singular) {
  if (probit.scores.cols() != sigma.n())
    throw contract_error("thresholds: grid width mismatch");
  const Index K = probit.scores.rows();
  const VectorXd delta = sigma.delta();
  VectorXd t(K);
  for (Index k = 0; k < K; ++k) {
    const std::vector<Index> subset = present_subset(probit.present, k);
    if (subset.empty())
      throw data_error("thresholds: event without present forecasters");
    const Index m = static_cast<Index>(subset.size());
    VectorXd ones = VectorXd::Ones(m);
    const VectorXd w =
        restricted_solve(sigma, subset, ones, allow_singular, "thresholds");
    double num = 0.0, den = 0.0;
    for (Index a = 0; a < m; ++a) {
      const Index j = subset[a];
      const double root = std::sqrt(std::max(1.0 - delta[j], 0.0));
      num += probit.scores(k, j) * root * w[a];
      den += w[a];
    }
    if (den == 0.0)
      throw numerical_error("thresholds: degenerate precision weights");
    t[k] = -num / den;
  }
  return t;
}

MaskedGrid recover_z(const InformationStructure& sigma,
                     const ProbitPanel& probit, const VectorXd& thresholds) {
  if (probit.scores.cols() != sigma.n())
    throw contract_error("recover_z: grid width mismatch");
  if (thresholds.size() != probit.scores.rows())
    throw contract_error("recover_z: threshold vector size mismatch");
  const VectorXd delta = sigma.delta();
  MaskedGrid out;
  out.present = probit.present;
  out.values.setZero(probit.scores.rows(), probit.scores.cols());
  for (Index k = 0; k < probit.scores.rows(); ++k)
    for (Index j = 0; j < probit.scores.cols(); ++j) {
      if (!probit.present(k, j)) continue;
      const double d = std::min(delta[j], kDeltaCap);
      out.values(k, j) =
          std::sqrt(1.0 - d) * probit.scores(k, j) + thresholds[k];
    }
  return out;
}

double reveal_binary(const InformationStructure& sigma, const VectorXd& z,
                     const std::vector<Index>& subset, double threshold,
                     RevealDiagnostics* diag, bool allow_singular) {
  if (subset.empty())
    throw data_error("reveal: event without present forecasters");
  const Index m = static_cast<Index>(subset.size());
  VectorXd delta_o(m), z_o(m);
  for (Index a = 0; a < m; ++a) {
    delta_o[a] = sigma.sigma()(subset[a], subset[a]);
    z_o[a] = z[subset[a]];
  }
  const VectorXd w =
      restricted_solve(sigma, subset, delta_o, allow_singular, "reveal");
  const double mean = w.dot(z_o);
  double var = 1.0 - w.dot(delta_o);
  const bool clamped = var < kVarFloor || var > kVarCeil;
  var = std::clamp(var, kVarFloor, kVarCeil);
  if (diag) {
    diag->subset = subset;
    diag->weights = w;
    diag->conditional_mean = mean;
    diag->conditional_variance = var;
    diag->variance_clamped = clamped;
  }
  return norm_cdf((mean - threshold) / std::sqrt(var));
}

double reveal_continuous(const InformationStructure& sigma, const VectorXd& x,
                         const std::vector<Index>& subset, double prior_mean,
                         double prior_variance, RevealDiagnostics* diag,
                         bool allow_singular) {
  if (subset.empty())
    throw data_error("reveal: event without present forecasters");
  if (!(prior_variance > 0.0))
    throw data_error("reveal: degenerate prior (zero variance)");
  const double sigma0 = std::sqrt(prior_variance);
  const Index m = static_cast<Index>(subset.size());
  VectorXd delta_o(m), z_o(m);
  for (Index a = 0; a < m; ++a) {
    delta_o[a] = sigma.sigma()(subset[a], subset[a]);
    z_o[a] = (x[subset[a]] - prior_mean) / sigma0;
  }
  const VectorXd w =
      restricted_solve(sigma, subset, delta_o, allow_singular, "reveal");
  const double mean = w.dot(z_o);
  double var = 1.0 - w.dot(delta_o);
  const bool clamped = var < kVarFloor || var > kVarCeil;
  var = std::clamp(var, kVarFloor, kVarCeil);
  if (diag) {
    diag->subset = subset;
    diag->weights = w;
    diag->conditional_mean = mean;
    diag->conditional_variance = var;
    diag->variance_clamped = clamped;
  }
  return prior_mean + sigma0 * mean;
}

VectorXd update_prior_means(const InformationStructure& sigma,
                            const ForecastPanel& panel, bool allow_singular) {
  if (panel.mode != Mode::continuous)
    throw contract_error("prior update: continuous panels only");
  if (panel.forecasters() != sigma.n())
    throw contract_error("prior update: panel width mismatch");
  const Index K = panel.events();
  VectorXd mu(K);
  for (Index k = 0; k < K; ++k) {
    const std::vector<Index> subset = present_subset(panel.grid.present, k);
    const Index m = static_cast<Index>(subset.size());
    const VectorXd w = restricted_solve(sigma, subset, VectorXd::Ones(m),
                                        allow_singular, "prior update");
    double num = 0.0, den = 0.0;
    for (Index a = 0; a < m; ++a) {
      num += panel.grid.values(k, subset[a]) * w[a];
      den += w[a];
    }
    if (den == 0.0)
      throw numerical_error("prior update: degenerate precision weights");
    mu[k] = num / den;
  }
  return mu;
}

double aggregate_baseline(Method method, const std::vector<double>& values) {
  if (values.empty())
    throw data_error("baseline: event without present forecasters");
  const double n = static_cast<double>(values.size());
  switch (method) {
    case Method::revealed:
      throw contract_error("baseline: revealed is not a baseline");
    case Method::mean_prob:
    case Method::mean: {
      double acc = 0.0;
      for (double v : values) acc += v;
      return acc / n;
    }
    case Method::median_prob:
    case Method::median:
      return median_of(values);
    case Method::probit_mean: {
      double acc = 0.0;
      for (double v : values) acc += norm_ppf(v);
      return norm_cdf(acc / n);
    }
    case Method::logodds_mean: {
      double acc = 0.0;
      for (double v : values) acc += logit(v);
      return logistic(acc / n);
    }
    case Method::ama: {
      double acc = 0.0;
      for (double v : values) acc += v;
      return 0.5 * (acc / n + median_of(values));
    }
  }
  throw contract_error("baseline: unknown method");
}

PanelAggregates aggregate_panel(const ForecastPanel& panel,
                                const InformationStructure& sigma,
                                const std::vector<Method>& methods,
                                bool allow_singular) {
  if (panel.forecasters() != sigma.n())
    throw contract_error("aggregate: panel width mismatch");
  for (Method m : methods)
    if (!method_applies(m, panel.mode))
      throw usage_error(std::string("aggregate: method ") + method_name(m) +
                        " does not apply to " + mode_name(panel.mode) +
                        " panels");

  const Index K = panel.events();
  PanelAggregates out;
  out.methods = methods;
  out.values.resize(K, static_cast<Index>(methods.size()));

  const bool wants_revealed =
      std::find(methods.begin(), methods.end(), Method::revealed) !=
      methods.end();

  // Revealed column inputs.
  MaskedGrid z;
  VectorXd thresholds;
  VectorXd prior_means;
  double prior_variance = 0.0;
  if (wants_revealed) {
    if (panel.mode == Mode::binary) {
      const ProbitPanel probit = probit_scores(panel);
      thresholds = estimate_thresholds(sigma, probit, allow_singular);
      z = recover_z(sigma, probit, thresholds);
    } else {
      const LinkModel initial = continuous_prior(panel);
      if (initial.degenerate())
        throw data_error("aggregate: degenerate prior (zero variance)");
      prior_variance = initial.prior_variance;
      prior_means = update_prior_means(sigma, panel, allow_singular);
    }
  }

  for (Index k = 0; k < K; ++k) {
    const std::vector<Index> subset = present_subset(panel.grid.present, k);
    std::vector<double> present_values;
    present_values.reserve(subset.size());
    for (Index j : subset) present_values.push_back(panel.grid.values(k, j));

    for (std::size_t c = 0; c < methods.size(); ++c) {
      const Method m = methods[c];
      double v;
      if (m == Method::revealed) {
        RevealDiagnostics diag;
        if (panel.mode == Mode::binary) {
          const VectorXd zrow = z.values.row(k).transpose();
          v = reveal_binary(sigma, zrow, subset, thresholds[k], &diag,
                            allow_singular);
        } else {
          const VectorXd xrow = panel.grid.values.row(k).transpose();
          v = reveal_continuous(sigma, xrow, subset, prior_means[k],
                                prior_variance, &diag, allow_singular);
        }
        if (diag.variance_clamped) ++out.variance_clamps;
      } else {
        v = aggregate_baseline(m, present_values);
      }
      out.values(k, static_cast<Index>(c)) = v;
    }
  }
  return out;
}

}  // namespace revealed
