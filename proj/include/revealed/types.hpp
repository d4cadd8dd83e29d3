#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace revealed {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

// Error taxonomy. The CLI maps these onto its exit codes: usage_error -> 1,
// data_error and contract_error -> 2, numerical_error -> 3.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct usage_error : error {
  using error::error;
};
struct data_error : error {
  using error::error;
};
struct contract_error : error {
  using error::error;
};
struct numerical_error : error {
  using error::error;
};
struct singular_error : numerical_error {
  using numerical_error::numerical_error;
};

enum class Mode { binary, continuous };

inline const char* mode_name(Mode m) {
  return m == Mode::binary ? "binary" : "continuous";
}

// K x N grid of real values with an explicit presence mask. Absent cells are
// ignored by every operation; their stored values are meaningless.
struct MaskedGrid {
  MatrixXd values;  // K x N
  Mask present;     // K x N

  MaskedGrid() = default;
  MaskedGrid(MatrixXd v, Mask p) : values(std::move(v)), present(std::move(p)) {
    if (values.rows() != present.rows() || values.cols() != present.cols())
      throw contract_error("masked grid: value and mask shapes differ");
  }

  Index events() const { return values.rows(); }
  Index forecasters() const { return values.cols(); }

  Index present_count(Index j) const {
    Index c = 0;
    for (Index k = 0; k < present.rows(); ++k) c += present(k, j) ? 1 : 0;
    return c;
  }
};

// Panel of forecasts: K events x N forecasters, with identifiers and optional
// realized outcomes. Invariants: ids unique; every event and every forecaster
// has at least one present value; binary forecasts lie in [0, 1]; binary
// outcomes lie in {0, 1}.
struct ForecastPanel {
  MaskedGrid grid;
  std::vector<std::string> event_ids;       // size K
  std::vector<std::string> forecaster_ids;  // size N
  std::optional<VectorXd> outcomes;         // size K when present
  Mode mode = Mode::binary;

  Index events() const { return grid.events(); }
  Index forecasters() const { return grid.forecasters(); }
  bool has_outcomes() const { return outcomes.has_value(); }

  void validate() const {
    const Index K = events(), N = forecasters();
    if (static_cast<Index>(event_ids.size()) != K ||
        static_cast<Index>(forecaster_ids.size()) != N)
      throw contract_error("panel: id list sizes do not match the grid");
    if (std::set<std::string>(event_ids.begin(), event_ids.end()).size() !=
            event_ids.size() ||
        std::set<std::string>(forecaster_ids.begin(), forecaster_ids.end())
                .size() != forecaster_ids.size())
      throw contract_error("panel: duplicate identifiers");
    if (outcomes && outcomes->size() != K)
      throw contract_error("panel: outcome vector size does not match events");
    for (Index k = 0; k < K; ++k) {
      bool any = false;
      for (Index j = 0; j < N; ++j) {
        if (!grid.present(k, j)) continue;
        any = true;
        const double v = grid.values(k, j);
        if (!std::isfinite(v))
          throw contract_error("panel: non-finite forecast for event " +
                               event_ids[k]);
        if (mode == Mode::binary && (v < 0.0 || v > 1.0))
          throw data_error("panel: binary forecast outside [0, 1] for event " +
                           event_ids[k] + ", forecaster " + forecaster_ids[j]);
      }
      if (!any)
        throw contract_error("panel: event " + event_ids[k] +
                             " has no present forecast");
      if (outcomes) {
        const double y = (*outcomes)[k];
        if (!std::isfinite(y))
          throw data_error("panel: non-finite outcome for event " +
                           event_ids[k]);
        if (mode == Mode::binary && y != 0.0 && y != 1.0)
          throw data_error("panel: binary outcome not in {0, 1} for event " +
                           event_ids[k]);
      }
    }
    for (Index j = 0; j < N; ++j)
      if (grid.present_count(j) == 0)
        throw contract_error("panel: forecaster " + forecaster_ids[j] +
                             " has no present forecast");
  }
};

// Probit scores of a censored binary panel, same shape and mask as its source.
struct ProbitPanel {
  MatrixXd scores;  // K x N
  Mask present;     // K x N
};

// Output of the pairwise covariance estimator, before any projection. Not
// necessarily coherent; pair_counts(i, j) is the number of events both i and j
// answered (own present count on the diagonal).
struct UnconstrainedEstimate {
  MatrixXd s;                // N x N symmetric
  Eigen::MatrixXi pair_counts;  // N x N
};

// Link between the latent information variables and observed forecasts.
// Binary: Y_k = 1{Z_0k > threshold_k}. Continuous: Y_k = Z_0k * sigma0 +
// prior_mean_k with sigma0 > 0 (a zero variance estimate is representable but
// flagged degenerate; downstream standardization refuses it).
struct LinkModel {
  Mode mode = Mode::binary;
  VectorXd thresholds;   // binary: size K
  VectorXd prior_means;  // continuous: size K
  double prior_variance = 1.0;

  static LinkModel binary(VectorXd thresholds) {
    LinkModel l;
    l.mode = Mode::binary;
    l.thresholds = std::move(thresholds);
    for (Index k = 0; k < l.thresholds.size(); ++k)
      if (!std::isfinite(l.thresholds[k]))
        throw contract_error("link: non-finite threshold");
    return l;
  }
  static LinkModel continuous(VectorXd prior_means, double prior_variance) {
    LinkModel l;
    l.mode = Mode::continuous;
    l.prior_means = std::move(prior_means);
    if (!(prior_variance >= 0.0))
      throw contract_error("link: prior variance must be nonnegative");
    l.prior_variance = prior_variance;
    return l;
  }
  bool degenerate() const {
    return mode == Mode::continuous && prior_variance == 0.0;
  }
};

}  // namespace revealed
