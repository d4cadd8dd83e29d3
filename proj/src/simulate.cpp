#include "revealed/simulate.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

#include "revealed/normal.hpp"
#include "revealed/rng.hpp"

namespace revealed {

namespace {

constexpr double kCoherenceTol = 1e-8;
constexpr double kDeltaCap = 1.0 - 1e-6;

std::string padded_id(const char* prefix, Index i, Index count) {
  Index width = 1;
  for (Index c = count; c >= 10; c /= 10) ++width;
  std::ostringstream os;
  os << prefix;
  std::string digits = std::to_string(i);
  for (Index p = static_cast<Index>(digits.size()); p < width; ++p) os << '0';
  os << digits;
  return os.str();
}

}  // namespace

LatentDraws simulate_draws(const InformationStructure& sigma, Index events,
                           std::uint64_t seed) {
  if (events <= 0) throw contract_error("simulate: events must be positive");
  const double min_eig = min_eigenvalue_h(sigma);
  if (min_eig < -kCoherenceTol) {
    std::ostringstream os;
    os << "simulate: incoherent structure, min eigenvalue of extended matrix "
       << min_eig;
    throw contract_error(os.str());
  }

  const Index N = sigma.n();
  const MatrixXd omega = extend(sigma).omega;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(omega);
  if (es.info() != Eigen::Success)
    throw numerical_error("simulate: eigendecomposition failed");
  VectorXd root = es.eigenvalues();
  for (Index i = 0; i < root.size(); ++i)
    root[i] = root[i] > 0.0 ? std::sqrt(root[i]) : 0.0;
  const MatrixXd factor = es.eigenvectors() * root.asDiagonal();

  Rng rng(seed);
  LatentDraws out;
  out.z0.resize(events);
  out.z.resize(events, N);
  VectorXd e(N + 1);
  for (Index k = 0; k < events; ++k) {
    for (Index i = 0; i <= N; ++i) e[i] = rng.gaussian();
    const VectorXd x = factor * e;
    out.z0[k] = x[0];
    out.z.row(k) = x.tail(N).transpose();
  }
  return out;
}

ForecastPanel simulate_panel(const InformationStructure& sigma,
                             const LinkModel& link, Index events,
                             std::uint64_t seed) {
  const Index N = sigma.n();
  const VectorXd param =
      link.mode == Mode::binary ? link.thresholds : link.prior_means;
  if (param.size() != events)
    throw contract_error("simulate: link parameter size does not match events");

  const LatentDraws draws = simulate_draws(sigma, events, seed);
  ForecastPanel panel;
  panel.mode = link.mode;
  panel.grid.values.resize(events, N);
  panel.grid.present = Mask::Constant(events, N, true);
  VectorXd y(events);

  const VectorXd delta = sigma.delta();
  if (link.mode == Mode::binary) {
    for (Index k = 0; k < events; ++k) {
      const double t = link.thresholds[k];
      y[k] = draws.z0[k] > t ? 1.0 : 0.0;
      for (Index j = 0; j < N; ++j) {
        const double d = std::min(delta[j], kDeltaCap);
        panel.grid.values(k, j) =
            norm_cdf((draws.z(k, j) - t) / std::sqrt(1.0 - d));
      }
    }
  } else {
    const double sigma0 = std::sqrt(link.prior_variance);
    if (!(sigma0 > 0.0))
      throw contract_error("simulate: continuous link needs positive variance");
    for (Index k = 0; k < events; ++k) {
      const double mu = link.prior_means[k];
      y[k] = sigma0 * draws.z0[k] + mu;
      for (Index j = 0; j < N; ++j)
        panel.grid.values(k, j) = sigma0 * draws.z(k, j) + mu;
    }
  }

  panel.outcomes = std::move(y);
  panel.event_ids.reserve(events);
  for (Index k = 0; k < events; ++k)
    panel.event_ids.push_back(padded_id("e", k, events));
  panel.forecaster_ids.reserve(N);
  for (Index j = 0; j < N; ++j)
    panel.forecaster_ids.push_back(padded_id("f", j, N));
  panel.validate();
  return panel;
}

InformationStructure make_block_sigma(const std::vector<Index>& block_sizes,
                                      const std::vector<double>& shared,
                                      const VectorXd& private_var) {
  if (block_sizes.size() != shared.size())
    throw contract_error("block sigma: one shared variance per block required");
  Index total = 0;
  double budget = 0.0;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) {
    if (block_sizes[b] <= 0 || shared[b] < 0.0)
      throw contract_error("block sigma: invalid block specification");
    total += block_sizes[b];
    budget += shared[b];
  }
  if (private_var.size() != total)
    throw contract_error("block sigma: one private variance per forecaster");
  for (Index j = 0; j < total; ++j) {
    if (private_var[j] < 0.0)
      throw contract_error("block sigma: negative private variance");
    budget += private_var[j];
  }
  if (budget > 1.0 + 1e-12)
    throw contract_error("block sigma: information allocation exceeds 1");

  MatrixXd s = MatrixXd::Zero(total, total);
  Index offset = 0;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) {
    for (Index i = 0; i < block_sizes[b]; ++i)
      for (Index j = 0; j < block_sizes[b]; ++j)
        s(offset + i, offset + j) = shared[b];
    offset += block_sizes[b];
  }
  for (Index j = 0; j < total; ++j) s(j, j) += private_var[j];
  return InformationStructure(s);
}

InformationStructure make_nested_sigma(const VectorXd& delta) {
  const Index N = delta.size();
  if (N == 0) throw contract_error("nested sigma: empty delta");
  for (Index j = 0; j < N; ++j)
    if (delta[j] < 0.0 || delta[j] > 1.0)
      throw contract_error("nested sigma: delta outside [0, 1]");
  MatrixXd s(N, N);
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < N; ++j) s(i, j) = std::min(delta[i], delta[j]);
  return InformationStructure(s);
}

ForecastPanel apply_random_mask(const ForecastPanel& panel, double miss_rate,
                                std::uint64_t seed) {
  if (miss_rate < 0.0 || miss_rate >= 1.0)
    throw contract_error("mask: miss rate must lie in [0, 1)");
  ForecastPanel out = panel;
  Rng rng(seed);
  const Index K = panel.events(), N = panel.forecasters();
  for (Index k = 0; k < K; ++k)
    for (Index j = 0; j < N; ++j)
      if (out.grid.present(k, j) && rng.uniform01() < miss_rate)
        out.grid.present(k, j) = false;
  // Repair: any emptied event row or forecaster column gets one cell back,
  // chosen deterministically from the source panel.
  for (Index k = 0; k < K; ++k) {
    bool any = false;
    for (Index j = 0; j < N; ++j) any = any || out.grid.present(k, j);
    if (!any) {
      const Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(N)));
      if (panel.grid.present(k, j)) out.grid.present(k, j) = true;
      else {
        for (Index jj = 0; jj < N; ++jj)
          if (panel.grid.present(k, jj)) { out.grid.present(k, jj) = true; break; }
      }
    }
  }
  for (Index j = 0; j < N; ++j) {
    bool any = false;
    for (Index k = 0; k < K; ++k) any = any || out.grid.present(k, j);
    if (!any) {
      const Index k = static_cast<Index>(rng.below(static_cast<std::uint64_t>(K)));
      if (panel.grid.present(k, j)) out.grid.present(k, j) = true;
      else {
        for (Index kk = 0; kk < K; ++kk)
          if (panel.grid.present(kk, j)) { out.grid.present(kk, j) = true; break; }
      }
    }
  }
  out.validate();
  return out;
}

}  // namespace revealed
