#pragma once

#include <cstdint>

#include "revealed/structure.hpp"
#include "revealed/types.hpp"

namespace revealed {

// Joint draws of (Z_0, Z) from N(0, h(Sigma)). Row k of z holds the
// forecasters' information variables for event k.
struct LatentDraws {
  VectorXd z0;  // K
  MatrixXd z;   // K x N
};

// Requires a coherent Sigma (min eigenvalue of h >= -1e-8); small negative
// eigenvalues from roundoff are clamped to zero inside the factor.
LatentDraws simulate_draws(const InformationStructure& sigma, Index events,
                           std::uint64_t seed);

// Calibrated synthetic panel under the given link. Binary: outcome
// 1{Z_0 > t_k}, forecast Phi((Z_j - t_k) / sqrt(1 - delta_j)). Continuous:
// outcome sigma0 Z_0 + mu_k, forecast sigma0 Z_j + mu_k. The link's
// thresholds / prior means must have size `events`. All cells present.
ForecastPanel simulate_panel(const InformationStructure& sigma,
                             const LinkModel& link, Index events,
                             std::uint64_t seed);

// Coherent structure from an explicit information allocation: forecaster j in
// block b sees a block-shared piece of variance shared[b] plus a private
// piece private_var[j]. Requires sum(shared) + sum(private_var) <= 1.
InformationStructure make_block_sigma(const std::vector<Index>& block_sizes,
                                      const std::vector<double>& shared,
                                      const VectorXd& private_var);

// Coherent nested structure Sigma_ij = min(delta_i, delta_j) (each forecaster
// refines the previous one's information). delta in [0, 1].
InformationStructure make_nested_sigma(const VectorXd& delta);

// Marks cells absent independently with probability miss_rate, then repairs
// the panel invariants (every event and forecaster keeps >= 1 present cell).
ForecastPanel apply_random_mask(const ForecastPanel& panel, double miss_rate,
                                std::uint64_t seed);

}  // namespace revealed
