#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tvopt/estimation.hpp"
#include "tvopt/simulation.hpp"

namespace tvopt {

// Exactly computable pieces of the tracking-error decomposition. The
// remaining constants of the full bound are not estimated here.
struct BoundComponents {
  std::size_t horizon = 0;        // H
  double noise_term = 0.0;        // sqrt(p / alpha_k)
  double anchor_decay = 0.0;      // ||A^H||_2
  double prediction_floor = 0.0;  // sqrt(tr sum_{j<H} A^j Q A^jT)
  double floor_limit = 0.0;       // sqrt(tr Sigma_theta)
};

double prediction_floor(const LatentDynamics& dyn, std::size_t horizon);
double anchor_decay(const LatentDynamics& dyn, std::size_t horizon);
double noise_term(std::span<const WindowedEstimate> estimates);

// One row per H = 0..max_horizon, accumulated incrementally.
std::vector<BoundComponents> bound_components(const LatentDynamics& dyn,
                                              std::span<const WindowedEstimate> estimates,
                                              std::size_t max_horizon);

}  // namespace tvopt
