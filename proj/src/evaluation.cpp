#include "revealed/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "revealed/estimation.hpp"
#include "revealed/parallel.hpp"
#include "revealed/rng.hpp"

namespace revealed {

namespace {

double quantile_type7(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = static_cast<double>(n - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

struct SubPanel {
  ForecastPanel panel;
  std::vector<Index> selected;     // column j of panel = selected[j] in source
  std::vector<Index> kept_events;  // row k of panel = kept_events[k] in source
  Index excluded_events = 0;
};

SubPanel restrict_panel(const ForecastPanel& source,
                        const std::vector<Index>& selected) {
  SubPanel out;
  out.selected = selected;
  const Index K = source.events();
  const Index n = static_cast<Index>(selected.size());
  for (Index k = 0; k < K; ++k) {
    bool any = false;
    for (Index j : selected) any = any || source.grid.present(k, j);
    if (any) out.kept_events.push_back(k);
    else ++out.excluded_events;
  }
  const Index Ks = static_cast<Index>(out.kept_events.size());
  out.panel.mode = source.mode;
  out.panel.grid.values.resize(Ks, n);
  out.panel.grid.present.resize(Ks, n);
  VectorXd y(Ks);
  for (Index k = 0; k < Ks; ++k) {
    const Index src_k = out.kept_events[k];
    out.panel.event_ids.push_back(source.event_ids[src_k]);
    y[k] = (*source.outcomes)[src_k];
    for (Index j = 0; j < n; ++j) {
      out.panel.grid.values(k, j) = source.grid.values(src_k, selected[j]);
      out.panel.grid.present(k, j) = source.grid.present(src_k, selected[j]);
    }
  }
  out.panel.outcomes = std::move(y);
  for (Index j = 0; j < n; ++j)
    out.panel.forecaster_ids.push_back(source.forecaster_ids[selected[j]]);
  return out;
}

}  // namespace

double rmse(const VectorXd& predictions, const VectorXd& outcomes) {
  if (predictions.size() != outcomes.size())
    throw contract_error("rmse: prediction and outcome sizes differ");
  if (predictions.size() == 0) throw contract_error("rmse: empty input");
  const double mse =
      (predictions - outcomes).squaredNorm() /
      static_cast<double>(predictions.size());
  return std::sqrt(mse);
}

double brier_rmse(const VectorXd& predictions, const VectorXd& outcomes) {
  for (Index k = 0; k < outcomes.size(); ++k)
    if (outcomes[k] != 0.0 && outcomes[k] != 1.0)
      throw contract_error("brier: outcomes must lie in {0, 1}");
  return rmse(predictions, outcomes);
}

ForecastPanel winsorize(const ForecastPanel& panel, double level) {
  if (panel.mode != Mode::continuous)
    throw contract_error("winsorize: continuous panels only");
  if (!(level > 0.0 && level < 100.0))
    throw contract_error("winsorize: level must lie strictly between 0 and 100");
  const double p_low = (100.0 - level) / 200.0;
  ForecastPanel out = panel;
  for (Index k = 0; k < panel.events(); ++k) {
    std::vector<double> present;
    for (Index j = 0; j < panel.forecasters(); ++j)
      if (panel.grid.present(k, j)) present.push_back(panel.grid.values(k, j));
    if (present.size() < 2) continue;
    std::sort(present.begin(), present.end());
    const double lo = quantile_type7(present, p_low);
    const double hi = quantile_type7(present, 1.0 - p_low);
    for (Index j = 0; j < panel.forecasters(); ++j) {
      if (!out.grid.present(k, j)) continue;
      double& v = out.grid.values(k, j);
      v = std::clamp(v, lo, hi);
    }
  }
  return out;
}

EvaluationReport run_subsample_experiment(const ForecastPanel& panel,
                                          const ExperimentPlan& plan) {
  panel.validate();
  if (!panel.has_outcomes())
    throw data_error("experiment: panel carries no outcomes");
  if (plan.sizes.empty()) throw contract_error("experiment: no sizes");
  if (plan.methods.empty()) throw contract_error("experiment: no methods");
  if (plan.replications < 1)
    throw contract_error("experiment: replications must be positive");
  const Index N = panel.forecasters();
  for (Index n : plan.sizes)
    if (n < 1 || n > N)
      throw contract_error("experiment: subsample size out of range");
  for (Method m : plan.methods)
    if (!method_applies(m, panel.mode))
      throw usage_error(std::string("experiment: method ") + method_name(m) +
                        " does not apply to " + mode_name(panel.mode) +
                        " panels");

  const bool wants_revealed =
      std::find(plan.methods.begin(), plan.methods.end(), Method::revealed) !=
      plan.methods.end();
  const Index min_overlap =
      wants_revealed ? std::max<Index>(plan.min_pair_overlap, 2)
                     : plan.min_pair_overlap;

  // Pair overlap counts on the full panel; the redraw rule checks these.
  Eigen::MatrixXi overlap = Eigen::MatrixXi::Zero(N, N);
  for (Index k = 0; k < panel.events(); ++k)
    for (Index i = 0; i < N; ++i) {
      if (!panel.grid.present(k, i)) continue;
      for (Index j = i; j < N; ++j)
        if (panel.grid.present(k, j)) {
          overlap(i, j) += 1;
          if (i != j) overlap(j, i) += 1;
        }
    }

  const std::size_t n_sizes = plan.sizes.size();
  const std::size_t reps = static_cast<std::size_t>(plan.replications);
  EvaluationReport report;
  report.plan = plan;
  report.replications.resize(n_sizes * reps);

  parallel_for(n_sizes * reps, [&](std::size_t task) {
    const std::size_t si = task / reps;
    const Index rep = static_cast<Index>(task % reps);
    const Index size = plan.sizes[si];
    Rng rng(derive_seed(plan.seed, static_cast<std::uint64_t>(task)));

    // Draw distinct forecasters until the overlap rule holds.
    std::vector<Index> selection;
    bool ok = false;
    for (Index attempt = 0; attempt < plan.max_redraws && !ok; ++attempt) {
      std::vector<Index> pool(static_cast<std::size_t>(N));
      for (Index j = 0; j < N; ++j) pool[static_cast<std::size_t>(j)] = j;
      for (Index j = 0; j < size; ++j) {
        const std::uint64_t pick =
            rng.below(static_cast<std::uint64_t>(N - j));
        std::swap(pool[static_cast<std::size_t>(j)],
                  pool[static_cast<std::size_t>(j) + pick]);
      }
      selection.assign(pool.begin(), pool.begin() + size);
      std::sort(selection.begin(), selection.end());
      ok = true;
      for (std::size_t a = 0; a < selection.size() && ok; ++a)
        for (std::size_t b = a; b < selection.size() && ok; ++b)
          ok = overlap(selection[a], selection[b]) >= min_overlap;
    }
    if (!ok) {
      std::ostringstream os;
      os << "experiment: subsample size " << size
         << " cannot satisfy the pair overlap rule (need " << min_overlap
         << " common events)";
      throw data_error(os.str());
    }

    SubPanel sub = restrict_panel(panel, selection);
    ReplicationResult& row = report.replications[task];
    row.size = size;
    row.replication = rep;
    row.selected = selection;
    row.scored_events = sub.panel.events();
    row.excluded_events = sub.excluded_events;
    row.rmse_by_method.assign(plan.methods.size(),
                              std::numeric_limits<double>::quiet_NaN());
    row.failures.assign(plan.methods.size(), std::string());

    // Binary data is censored once per replication, for every method.
    ForecastPanel prepared = sub.panel;
    if (panel.mode == Mode::binary)
      prepared = censor(prepared, plan.censor_floor, plan.censor_ceiling);

    // The revealed column needs the projected structure.
    std::optional<InformationStructure> structure;
    std::string structure_failure;
    if (wants_revealed) {
      try {
        const PipelineInputs inputs = prepare_pipeline(
            sub.panel, plan.censor_floor, plan.censor_ceiling);
        const KappaSelection sel = select_kappa(
            inputs.estimate, inputs.z, plan.kappa_grid, plan.epsilon);
        row.kappa = sel.chosen;
        structure = sel.projection.structure();
      } catch (const error& e) {
        structure_failure = e.what();
      }
    }

    for (std::size_t c = 0; c < plan.methods.size(); ++c) {
      const Method m = plan.methods[c];
      try {
        if (m == Method::revealed && !structure)
          throw numerical_error(structure_failure.empty()
                                    ? "revealed: structure unavailable"
                                    : structure_failure);
        PanelAggregates agg =
            aggregate_panel(prepared, m == Method::revealed
                                          ? *structure
                                          : InformationStructure(
                                                MatrixXd::Identity(
                                                    sub.panel.forecasters(),
                                                    sub.panel.forecasters())),
                            {m});
        row.variance_clamps += agg.variance_clamps;
        row.rmse_by_method[c] =
            rmse(agg.values.col(0), *prepared.outcomes);
      } catch (const error& e) {
        row.failures[c] = e.what();
      }
    }
  });

  // Fixed-order reduction keeps summaries identical across thread counts.
  for (std::size_t si = 0; si < n_sizes; ++si) {
    for (std::size_t c = 0; c < plan.methods.size(); ++c) {
      MethodSummary sum;
      sum.method = plan.methods[c];
      sum.size = plan.sizes[si];
      double acc = 0.0;
      Index count = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        const double v =
            report.replications[si * reps + r].rmse_by_method[c];
        if (std::isfinite(v)) {
          acc += v;
          ++count;
        }
      }
      sum.count = count;
      if (count > 0) {
        sum.mean_rmse = acc / static_cast<double>(count);
        double ss = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
          const double v =
              report.replications[si * reps + r].rmse_by_method[c];
          if (std::isfinite(v)) {
            const double d = v - sum.mean_rmse;
            ss += d * d;
          }
        }
        sum.stderr_rmse =
            count > 1 ? std::sqrt(ss / static_cast<double>(count - 1) /
                                  static_cast<double>(count))
                      : 0.0;
      }
      report.summaries.push_back(sum);
    }
  }
  return report;
}

}  // namespace revealed
