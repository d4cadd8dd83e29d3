#pragma once

#include "revealed/types.hpp"

namespace revealed {

// Clamps present binary forecasts into [floor, ceiling] so the probit
// transform stays finite. Returns the number of values moved via
// clamp_count when given. Binary panels only.
ForecastPanel censor(const ForecastPanel& panel, double floor = 0.001,
                     double ceiling = 0.999, Index* clamp_count = nullptr);

// Probit scores Phi^{-1}(x) of a censored binary panel. Present values must
// lie strictly in (0, 1).
ProbitPanel probit_scores(const ForecastPanel& panel);

// Sample covariance from pairwise-complete observations: entry (i, j) uses
// only events both answered, with means computed on those same events and
// divisor (count - 1). Every pair (diagonal included) needs at least two
// common events. The result need not be positive semidefinite.
UnconstrainedEstimate pairwise_covariance(const MatrixXd& values,
                                          const Mask& present);
UnconstrainedEstimate pairwise_covariance(const MaskedGrid& grid);

// Maps a probit-score covariance S_P onto the information-variable scale:
// S = (I - D)^{1/2} S_P (I - D)^{1/2} with D_jj = d_j / (1 + d_j),
// d = diag(S_P). The diagonal lands in [0, 1).
MatrixXd probit_sigma(const MatrixXd& score_cov);

// Continuous-mode prior estimates: per-event means mu_k as row averages of
// present forecasts, and prior variance (N+1)/N * max_j s_j where s_j is
// forecaster j's sample variance about those means. A zero estimate is
// returned flagged degenerate rather than rejected.
LinkModel continuous_prior(const ForecastPanel& panel);

// Standardizes a continuous panel to the information scale:
// z = (x - mu_k) / sigma0. Refuses a degenerate prior.
MaskedGrid standardize(const ForecastPanel& panel, const LinkModel& link);

struct PipelineInputs {
  ForecastPanel prepared;          // censored copy in binary mode
  UnconstrainedEstimate estimate;  // S on the information-variable scale
  MaskedGrid z;                    // proxies of Z for condition-bound scoring
  Index clamp_count = 0;           // values moved by censoring
  LinkModel link;                  // continuous prior when applicable
};

// Everything upstream of the projection, so command-line runs, experiments,
// and tests share one construction. Binary: censor, probit scores, pairwise
// covariance, map to the information scale; the scoring grid holds per-
// forecaster centered scores shrunk by sqrt(1 - S_jj). Continuous: prior,
// standardize, pairwise covariance; the scoring grid is the standardized
// panel.
PipelineInputs prepare_pipeline(const ForecastPanel& panel,
                                double censor_floor = 0.001,
                                double censor_ceiling = 0.999);

}  // namespace revealed
