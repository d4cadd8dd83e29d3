#pragma once

#include <string>
#include <vector>

#include "revealed/structure.hpp"
#include "revealed/types.hpp"

namespace revealed {

enum class Method {
  revealed,
  mean_prob,
  median_prob,
  probit_mean,
  logodds_mean,
  mean,
  median,
  ama,
};

const char* method_name(Method m);
Method parse_method(const std::string& name);  // usage_error on unknown names
bool method_applies(Method m, Mode mode);
std::vector<Method> default_methods(Mode mode);  // revealed + mode's baselines

// Per-event threshold estimates from uncentered probit scores:
// t_k = -(P_o' Diag(sqrt(1 - delta_o)) inv(Sigma_oo) 1) / (1' inv(Sigma_oo) 1)
// with o the forecasters present on event k (missing rows and columns are
// dropped).
VectorXd estimate_thresholds(const InformationStructure& sigma,
                             const ProbitPanel& probit,
                             bool allow_singular = false);

// Information variables recovered from probit scores:
// z_jk = sqrt(1 - delta_j) p_jk + t_k.
MaskedGrid recover_z(const InformationStructure& sigma,
                     const ProbitPanel& probit, const VectorXd& thresholds);

struct RevealDiagnostics {
  std::vector<Index> subset;     // forecasters that contributed
  VectorXd weights;              // inv(Sigma_oo) delta_o, aligned with subset
  double conditional_mean = 0.0;
  double conditional_variance = 1.0;
  bool variance_clamped = false;
};

// Revealed binary aggregate for one event: the posterior outcome probability
// Phi((m - t) / sqrt(v)) where (m, v) is the distribution of Z_0 given the
// present information variables. The conditional variance is clamped into
// [1e-12, 1]; clamps are reported, not silent.
double reveal_binary(const InformationStructure& sigma, const VectorXd& z,
                     const std::vector<Index>& subset, double threshold,
                     RevealDiagnostics* diag = nullptr,
                     bool allow_singular = false);

// Revealed continuous aggregate for one event:
// mu_k + sigma0 * delta_o' inv(Sigma_oo) z_o with z = (x - mu_k) / sigma0.
double reveal_continuous(const InformationStructure& sigma, const VectorXd& x,
                         const std::vector<Index>& subset, double prior_mean,
                         double prior_variance,
                         RevealDiagnostics* diag = nullptr,
                         bool allow_singular = false);

// Precision-weighted per-event prior means for a continuous panel:
// mu_k = (x_o' inv(Sigma_oo) 1) / (1' inv(Sigma_oo) 1) over present
// forecasters.
VectorXd update_prior_means(const InformationStructure& sigma,
                            const ForecastPanel& panel,
                            bool allow_singular = false);

// One-event baselines over the present values; revealed is not accepted
// here. Binary baselines require probabilities in [0, 1]; the probit and
// log-odds means additionally need values strictly inside (0, 1). The median
// is the midpoint of the two central order statistics.
double aggregate_baseline(Method method, const std::vector<double>& values);

struct PanelAggregates {
  std::vector<Method> methods;
  MatrixXd values;          // K x methods
  Index variance_clamps = 0;
};

// Whole-panel driver: estimates what each method needs (thresholds or
// updated prior means for the revealed column) and aggregates every event.
// The panel must already be censored in binary mode.
PanelAggregates aggregate_panel(const ForecastPanel& panel,
                                const InformationStructure& sigma,
                                const std::vector<Method>& methods,
                                bool allow_singular = false);

}  // namespace revealed
