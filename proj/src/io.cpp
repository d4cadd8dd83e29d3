#include "revealed/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

namespace revealed {

namespace {

using ordered_json = nlohmann::ordered_json;

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw data_error("cannot open " + tmp.string() + " for writing");
    os << content;
    os.flush();
    if (!os) throw data_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec)
    throw data_error("cannot move " + tmp.string() + " into place: " +
                     ec.message());
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

std::string location(const std::string& path, Index line) {
  std::ostringstream os;
  os << path << ":" << line;
  return os.str();
}

double parse_double(const std::string& field, const std::string& path,
                    Index line) {
  if (field.empty())
    throw data_error(location(path, line) + ": empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size())
    throw data_error(location(path, line) + ": cannot parse number '" +
                     field + "'");
  return v;
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ForecastPanel ingest_panel(const std::string& path, Mode mode,
                           IngestReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);

  std::string line;
  if (!std::getline(in, line))
    throw data_error(path + ": empty file, expected a header row");
  const std::vector<std::string> header = split_csv(line);
  const bool has_outcome = header.size() == 4 && header[3] == "outcome";
  if (!((header.size() == 3 || has_outcome) && header[0] == "event_id" &&
        header[1] == "forecaster_id" && header[2] == "forecast"))
    throw data_error(location(path, 1) +
                     ": header must be event_id,forecaster_id,forecast" +
                     std::string("[,outcome]"));
  const std::size_t expected = header.size();

  // std::map keeps both id axes in lexicographic order.
  std::map<std::string, std::map<std::string, double>> cells;
  std::map<std::string, double> outcome_of;
  std::map<std::string, bool> forecaster_seen;
  IngestReport local;

  Index line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != expected) {
      std::ostringstream os;
      os << location(path, line_no) << ": expected " << expected
         << " fields, found " << fields.size();
      throw data_error(os.str());
    }
    const std::string& event = fields[0];
    const std::string& forecaster = fields[1];
    if (event.empty() || forecaster.empty())
      throw data_error(location(path, line_no) + ": empty identifier");
    const double value = parse_double(fields[2], path, line_no);
    if (mode == Mode::binary && !(value >= 0.0 && value <= 1.0))
      throw data_error(location(path, line_no) +
                       ": binary forecast outside [0, 1]");
    if (!std::isfinite(value))
      throw data_error(location(path, line_no) + ": non-finite forecast");

    auto& row = cells[event];
    if (row.count(forecaster)) ++local.duplicate_rows;
    row[forecaster] = value;  // repeated rows: the last one wins
    forecaster_seen[forecaster] = true;
    ++local.rows;

    if (has_outcome) {
      const double y = parse_double(fields[3], path, line_no);
      auto it = outcome_of.find(event);
      if (it != outcome_of.end() && it->second != y)
        throw data_error(location(path, line_no) +
                         ": inconsistent outcome for event " + event);
      outcome_of[event] = y;
    }
  }
  if (cells.empty()) throw data_error(path + ": no data rows");

  ForecastPanel panel;
  panel.mode = mode;
  for (const auto& [event, _] : cells) panel.event_ids.push_back(event);
  for (const auto& [forecaster, _] : forecaster_seen)
    panel.forecaster_ids.push_back(forecaster);
  const Index K = static_cast<Index>(panel.event_ids.size());
  const Index N = static_cast<Index>(panel.forecaster_ids.size());
  panel.grid.values.setZero(K, N);
  panel.grid.present.setConstant(K, N, false);
  std::map<std::string, Index> col;
  for (Index j = 0; j < N; ++j) col[panel.forecaster_ids[j]] = j;
  VectorXd y(K);
  for (Index k = 0; k < K; ++k) {
    const auto& row = cells[panel.event_ids[k]];
    for (const auto& [forecaster, value] : row) {
      panel.grid.values(k, col[forecaster]) = value;
      panel.grid.present(k, col[forecaster]) = true;
    }
    if (has_outcome) y[k] = outcome_of[panel.event_ids[k]];
  }
  if (has_outcome) panel.outcomes = std::move(y);
  panel.validate();
  if (report) *report = local;
  return panel;
}

void write_panel_csv(const std::string& path, const ForecastPanel& panel) {
  std::ostringstream os;
  os << "event_id,forecaster_id,forecast";
  if (panel.has_outcomes()) os << ",outcome";
  os << "\n";
  for (Index k = 0; k < panel.events(); ++k)
    for (Index j = 0; j < panel.forecasters(); ++j) {
      if (!panel.grid.present(k, j)) continue;
      os << panel.event_ids[k] << "," << panel.forecaster_ids[j] << ","
         << format_number(panel.grid.values(k, j));
      if (panel.has_outcomes())
        os << "," << format_number((*panel.outcomes)[k]);
      os << "\n";
    }
  atomic_write(path, os.str());
}

void write_sigma_csv(const std::string& path, const MatrixXd& sigma,
                     const std::vector<std::string>& forecaster_ids) {
  if (sigma.rows() != sigma.cols() ||
      sigma.rows() != static_cast<Index>(forecaster_ids.size()))
    throw contract_error("sigma writer: label count does not match the grid");
  std::ostringstream os;
  os << "forecaster_id";
  for (const std::string& id : forecaster_ids) os << "," << id;
  os << "\n";
  for (Index i = 0; i < sigma.rows(); ++i) {
    os << forecaster_ids[i];
    for (Index j = 0; j < sigma.cols(); ++j)
      os << "," << format_number(sigma(i, j));
    os << "\n";
  }
  atomic_write(path, os.str());
}

MatrixXd read_sigma_csv(const std::string& path,
                        std::vector<std::string>* forecaster_ids) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw data_error(path + ": empty file, expected a header row");
  std::vector<std::string> header = split_csv(line);
  if (header.size() < 2 || header[0] != "forecaster_id")
    throw data_error(location(path, 1) +
                     ": header must start with forecaster_id");
  const Index n = static_cast<Index>(header.size()) - 1;
  MatrixXd sigma(n, n);
  Index line_no = 1;
  for (Index i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw data_error(path + ": expected " + std::to_string(n) +
                       " data rows");
    ++line_no;
    const std::vector<std::string> fields = split_csv(line);
    if (static_cast<Index>(fields.size()) != n + 1)
      throw data_error(location(path, line_no) + ": expected " +
                       std::to_string(n + 1) + " fields");
    if (fields[0] != header[static_cast<std::size_t>(i) + 1])
      throw data_error(location(path, line_no) +
                       ": row label does not match the header order");
    for (Index j = 0; j < n; ++j)
      sigma(i, j) =
          parse_double(fields[static_cast<std::size_t>(j) + 1], path, line_no);
  }
  if (forecaster_ids)
    forecaster_ids->assign(header.begin() + 1, header.end());
  return sigma;
}

void write_diagnostics_json(const std::string& path,
                            const RunDiagnostics& diagnostics) {
  ordered_json j;
  j["kappa"] = diagnostics.kappa;
  j["condition_number"] = diagnostics.condition_number;
  j["min_eigenvalue_h"] = diagnostics.min_eigenvalue_h;
  j["iterations"] = diagnostics.iterations;
  j["clamp_count"] = diagnostics.clamp_count;
  j["seed"] = diagnostics.seed;
  atomic_write(path, j.dump(2) + "\n");
}

void write_aggregates_csv(const std::string& path,
                          const std::vector<std::string>& event_ids,
                          const PanelAggregates& aggregates) {
  if (static_cast<Index>(event_ids.size()) != aggregates.values.rows())
    throw contract_error("aggregates writer: id count does not match rows");
  std::ostringstream os;
  os << "event_id,method,value\n";
  for (Index k = 0; k < aggregates.values.rows(); ++k)
    for (std::size_t c = 0; c < aggregates.methods.size(); ++c)
      os << event_ids[k] << "," << method_name(aggregates.methods[c]) << ","
         << format_number(aggregates.values(k, static_cast<Index>(c)))
         << "\n";
  atomic_write(path, os.str());
}

void write_kappa_scores_csv(const std::string& path,
                            const KappaSelection& selection) {
  std::ostringstream os;
  os << "kappa,score\n";
  for (const KappaCandidate& c : selection.candidates)
    os << format_number(c.kappa) << ","
       << format_number(c.ok ? c.score
                             : std::numeric_limits<double>::quiet_NaN())
       << "\n";
  atomic_write(path, os.str());
}

void write_report_csv(const std::string& path,
                      const EvaluationReport& report) {
  std::ostringstream os;
  os << "method,N,replication,rmse\n";
  for (const ReplicationResult& row : report.replications)
    for (std::size_t c = 0; c < report.plan.methods.size(); ++c)
      os << method_name(report.plan.methods[c]) << "," << row.size << ","
         << row.replication << "," << format_number(row.rmse_by_method[c])
         << "\n";
  atomic_write(path, os.str());
}

void write_summary_json(const std::string& path,
                        const EvaluationReport& report) {
  ordered_json j;
  j["seed"] = report.plan.seed;
  j["replications"] = report.plan.replications;
  j["sizes"] = report.plan.sizes;
  std::vector<std::string> methods;
  for (Method m : report.plan.methods) methods.push_back(method_name(m));
  j["methods"] = methods;
  j["kappa_grid"] = {{"min", report.plan.kappa_grid.min},
                     {"max", report.plan.kappa_grid.max},
                     {"count", report.plan.kappa_grid.count},
                     {"log_spaced", report.plan.kappa_grid.log_spaced}};
  ordered_json rows = ordered_json::array();
  for (const MethodSummary& s : report.summaries) {
    ordered_json row;
    row["method"] = method_name(s.method);
    row["N"] = s.size;
    row["mean_rmse"] = s.mean_rmse;
    row["stderr_rmse"] = s.stderr_rmse;
    row["count"] = s.count;
    rows.push_back(row);
  }
  j["summaries"] = rows;
  atomic_write(path, j.dump(2) + "\n");
}

}  // namespace revealed
