#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "revealed/aggregation.hpp"
#include "revealed/projection.hpp"
#include "revealed/types.hpp"

namespace revealed {

// Root mean squared error of predictions against outcomes.
double rmse(const VectorXd& predictions, const VectorXd& outcomes);

// Square root of the Brier score; outcomes must lie in {0, 1}, so the result
// lies in [0, 1] for predictions in [0, 1].
double brier_rmse(const VectorXd& predictions, const VectorXd& outcomes);

// Per-event Winsorization at the given level (e.g. 90 keeps the central 90%):
// present values below the (100 - level)/2 percentile are raised to it and
// values above the mirror percentile lowered. Percentiles interpolate order
// statistics linearly (index h = (n - 1) p on the sorted values). Continuous
// panels only.
ForecastPanel winsorize(const ForecastPanel& panel, double level);

struct ExperimentPlan {
  std::vector<Index> sizes;        // subsample sizes N
  Index replications = 100;        // per size
  std::vector<Method> methods;
  std::uint64_t seed = 0;
  // Redraw until every selected pair shares at least this many events.
  // Raised to 2 automatically when the revealed method runs, since the
  // covariance estimator needs two common events per pair.
  Index min_pair_overlap = 1;
  Index max_redraws = 1000;
  KappaGrid kappa_grid{10.0, 1000.0, 10, true};
  double epsilon = 1e-5;
  double censor_floor = 0.001;
  double censor_ceiling = 0.999;
};

struct ReplicationResult {
  Index size = 0;
  Index replication = 0;
  std::vector<double> rmse_by_method;   // aligned with plan.methods; NaN on failure
  std::vector<std::string> failures;    // failure note per method ("" if ok)
  std::vector<Index> selected;          // chosen forecaster indices
  double kappa = 0.0;                   // chosen bound when revealed ran
  Index scored_events = 0;              // events entering the RMSE
  Index excluded_events = 0;            // events with no present selected forecast
  Index variance_clamps = 0;
};

struct MethodSummary {
  Method method = Method::revealed;
  Index size = 0;
  double mean_rmse = 0.0;
  double stderr_rmse = 0.0;
  Index count = 0;  // replications that produced a score
};

struct EvaluationReport {
  ExperimentPlan plan;
  std::vector<ReplicationResult> replications;
  std::vector<MethodSummary> summaries;
};

// Subsampling experiment: per (size, replication) draw that many distinct
// forecasters (redrawing until the pair-overlap rule holds), aggregate the
// drawn panel with every planned method, and score RMSE against outcomes on
// the events the selection answers. Replications are independent seeded
// streams, so results do not depend on thread count. The panel must carry
// outcomes.
EvaluationReport run_subsample_experiment(const ForecastPanel& panel,
                                          const ExperimentPlan& plan);

}  // namespace revealed
