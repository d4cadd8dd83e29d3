#include "revealed/estimation.hpp"

#include <cmath>
#include <sstream>

#include "revealed/normal.hpp"

namespace revealed {

ForecastPanel censor(const ForecastPanel& panel, double floor, double ceiling,
                     Index* clamp_count) {
  if (panel.mode != Mode::binary)
    throw contract_error("censor: binary panels only");
  if (!(floor > 0.0 && floor < ceiling && ceiling < 1.0))
    throw contract_error("censor: need 0 < floor < ceiling < 1");
  ForecastPanel out = panel;
  Index moved = 0;
  for (Index k = 0; k < panel.events(); ++k)
    for (Index j = 0; j < panel.forecasters(); ++j) {
      if (!out.grid.present(k, j)) continue;
      double& v = out.grid.values(k, j);
      if (v < floor) { v = floor; ++moved; }
      else if (v > ceiling) { v = ceiling; ++moved; }
    }
  if (clamp_count) *clamp_count = moved;
  return out;
}

ProbitPanel probit_scores(const ForecastPanel& panel) {
  if (panel.mode != Mode::binary)
    throw contract_error("probit scores: binary panels only");
  ProbitPanel out;
  out.present = panel.grid.present;
  out.scores.resize(panel.events(), panel.forecasters());
  out.scores.setZero();
  for (Index k = 0; k < panel.events(); ++k)
    for (Index j = 0; j < panel.forecasters(); ++j) {
      if (!panel.grid.present(k, j)) continue;
      const double v = panel.grid.values(k, j);
      if (!(v > 0.0 && v < 1.0))
        throw contract_error(
            "probit scores: forecast at the 0/1 boundary; censor first");
      out.scores(k, j) = norm_ppf(v);
    }
  return out;
}

UnconstrainedEstimate pairwise_covariance(const MatrixXd& values,
                                          const Mask& present) {
  if (values.rows() != present.rows() || values.cols() != present.cols())
    throw contract_error("pairwise covariance: value and mask shapes differ");
  const Index K = values.rows(), N = values.cols();
  UnconstrainedEstimate out;
  out.s.resize(N, N);
  out.pair_counts.resize(N, N);
  for (Index i = 0; i < N; ++i) {
    for (Index j = i; j < N; ++j) {
      Index count = 0;
      double mi = 0.0, mj = 0.0;
      for (Index k = 0; k < K; ++k) {
        if (!(present(k, i) && present(k, j))) continue;
        ++count;
        mi += values(k, i);
        mj += values(k, j);
      }
      if (count < 2) {
        std::ostringstream os;
        os << "pairwise covariance: forecaster pair (" << i << ", " << j
           << ") shares only " << count << " events; need at least 2";
        throw data_error(os.str());
      }
      mi /= static_cast<double>(count);
      mj /= static_cast<double>(count);
      double acc = 0.0;
      for (Index k = 0; k < K; ++k) {
        if (!(present(k, i) && present(k, j))) continue;
        acc += (values(k, i) - mi) * (values(k, j) - mj);
      }
      const double cov = acc / static_cast<double>(count - 1);
      out.s(i, j) = cov;
      out.s(j, i) = cov;
      out.pair_counts(i, j) = static_cast<int>(count);
      out.pair_counts(j, i) = static_cast<int>(count);
    }
  }
  return out;
}

UnconstrainedEstimate pairwise_covariance(const MaskedGrid& grid) {
  return pairwise_covariance(grid.values, grid.present);
}

MatrixXd probit_sigma(const MatrixXd& score_cov) {
  if (score_cov.rows() != score_cov.cols())
    throw contract_error("probit sigma: matrix is not square");
  const Index N = score_cov.rows();
  VectorXd scale(N);
  for (Index j = 0; j < N; ++j) {
    const double d = score_cov(j, j);
    if (d < 0.0)
      throw contract_error("probit sigma: negative score variance");
    // sqrt(1 - D_jj) with D_jj = d / (1 + d).
    scale[j] = std::sqrt(1.0 / (1.0 + d));
  }
  MatrixXd s = scale.asDiagonal() * score_cov * scale.asDiagonal();
  return 0.5 * (s + s.transpose());
}

LinkModel continuous_prior(const ForecastPanel& panel) {
  if (panel.mode != Mode::continuous)
    throw contract_error("continuous prior: continuous panels only");
  const Index K = panel.events(), N = panel.forecasters();
  VectorXd mu(K);
  for (Index k = 0; k < K; ++k) {
    double acc = 0.0;
    Index count = 0;
    for (Index j = 0; j < N; ++j) {
      if (!panel.grid.present(k, j)) continue;
      acc += panel.grid.values(k, j);
      ++count;
    }
    mu[k] = acc / static_cast<double>(count);  // >= 1 by panel invariant
  }

  double max_s = 0.0;
  for (Index j = 0; j < N; ++j) {
    double acc = 0.0;
    Index count = 0;
    for (Index k = 0; k < K; ++k) {
      if (!panel.grid.present(k, j)) continue;
      const double r = panel.grid.values(k, j) - mu[k];
      acc += r * r;
      ++count;
    }
    if (count < 2)
      throw data_error("continuous prior: forecaster " +
                       panel.forecaster_ids[j] +
                       " answered fewer than 2 events");
    max_s = std::max(max_s, acc / static_cast<double>(count - 1));
  }
  const double n = static_cast<double>(N);
  return LinkModel::continuous(std::move(mu), (n + 1.0) / n * max_s);
}

PipelineInputs prepare_pipeline(const ForecastPanel& panel,
                                double censor_floor, double censor_ceiling) {
  PipelineInputs out;
  if (panel.mode == Mode::binary) {
    out.prepared = censor(panel, censor_floor, censor_ceiling,
                          &out.clamp_count);
    const ProbitPanel probit = probit_scores(out.prepared);
    out.estimate = pairwise_covariance(probit.scores, probit.present);
    out.estimate.s = probit_sigma(out.estimate.s);
    out.z.present = probit.present;
    out.z.values.setZero(probit.scores.rows(), probit.scores.cols());
    for (Index j = 0; j < panel.forecasters(); ++j) {
      double mean = 0.0;
      Index count = 0;
      for (Index k = 0; k < panel.events(); ++k)
        if (probit.present(k, j)) {
          mean += probit.scores(k, j);
          ++count;
        }
      mean /= static_cast<double>(count);  // >= 2 by the pairwise contract
      const double root = std::sqrt(1.0 - out.estimate.s(j, j));
      for (Index k = 0; k < panel.events(); ++k)
        if (probit.present(k, j))
          out.z.values(k, j) = root * (probit.scores(k, j) - mean);
    }
  } else {
    out.prepared = panel;
    out.link = continuous_prior(panel);
    out.z = standardize(panel, out.link);
    out.estimate = pairwise_covariance(out.z);
  }
  return out;
}

MaskedGrid standardize(const ForecastPanel& panel, const LinkModel& link) {
  if (panel.mode != Mode::continuous || link.mode != Mode::continuous)
    throw contract_error("standardize: continuous panels only");
  if (link.degenerate())
    throw data_error("standardize: degenerate prior (zero variance)");
  if (link.prior_means.size() != panel.events())
    throw contract_error("standardize: prior mean size mismatch");
  const double sigma0 = std::sqrt(link.prior_variance);
  MaskedGrid out;
  out.present = panel.grid.present;
  out.values.resize(panel.events(), panel.forecasters());
  out.values.setZero();
  for (Index k = 0; k < panel.events(); ++k)
    for (Index j = 0; j < panel.forecasters(); ++j)
      if (panel.grid.present(k, j))
        out.values(k, j) =
            (panel.grid.values(k, j) - link.prior_means[k]) / sigma0;
  return out;
}

}  // namespace revealed
