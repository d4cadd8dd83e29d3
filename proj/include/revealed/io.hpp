#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "revealed/aggregation.hpp"
#include "revealed/evaluation.hpp"
#include "revealed/projection.hpp"
#include "revealed/types.hpp"

namespace revealed {

// 17-significant-digit decimal form of x, which reads back bit-identical.
std::string format_number(double x);

struct IngestReport {
  Index rows = 0;             // data rows parsed
  Index duplicate_rows = 0;   // (event, forecaster) repeats; last kept
};

// Reads a long-format forecast CSV with header
//   event_id,forecaster_id,forecast[,outcome]
// into a panel. Events and forecasters are ordered lexicographically by id.
// Repeated (event, forecaster) rows keep the last value; the count is
// reported so callers can warn. Outcomes must agree across the rows of one
// event. Errors carry the offending line number.
ForecastPanel ingest_panel(const std::string& path, Mode mode,
                           IngestReport* report = nullptr);

// Writers produce the file atomically (temp file in the same directory,
// then rename) with rows in a deterministic order.
void write_panel_csv(const std::string& path, const ForecastPanel& panel);

void write_sigma_csv(const std::string& path, const MatrixXd& sigma,
                     const std::vector<std::string>& forecaster_ids);

// Reads a sigma grid written by write_sigma_csv; the header row and label
// column must agree.
MatrixXd read_sigma_csv(const std::string& path,
                        std::vector<std::string>* forecaster_ids = nullptr);

struct RunDiagnostics {
  double kappa = 0.0;
  double condition_number = 0.0;
  double min_eigenvalue_h = 0.0;
  Index iterations = 0;
  Index clamp_count = 0;
  std::uint64_t seed = 0;
};

void write_diagnostics_json(const std::string& path,
                            const RunDiagnostics& diagnostics);

void write_aggregates_csv(const std::string& path,
                          const std::vector<std::string>& event_ids,
                          const PanelAggregates& aggregates);

void write_kappa_scores_csv(const std::string& path,
                            const KappaSelection& selection);

void write_report_csv(const std::string& path, const EvaluationReport& report);

void write_summary_json(const std::string& path,
                        const EvaluationReport& report);

}  // namespace revealed
