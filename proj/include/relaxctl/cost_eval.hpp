#pragma once

#include "relaxctl/mfsde_sim.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace relaxctl {

/// Monte Carlo estimate of an expected cost.
struct CostEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(N); 0 when N == 1
  int samples = 0;
  std::vector<double> per_particle;
};

/// Mean and standard error of per-particle values with fixed-order summation.
CostEstimate summarize(std::vector<double> per_particle);

/// J(mu) = E[ sum_k dt sum_i alpha_i(t_k) h(t_k, X_k, m_varphi(k), a_i) + g(X_K, m_lambda(K)) ].
/// Mean-field arguments are the ensemble's cached empirical means. The
/// ensemble must have been simulated under `control` (fingerprint match).
CostEstimate estimate_cost(const ModelSpec& model, const ParticleEnsemble& ensemble, const SlidingControl& control);

/// Simulate with the given regime and estimate the cost in one pass, keeping
/// only summary statistics of the paths.
CostEstimate simulate_cost(const ModelSpec& model, const SlidingControl& control, Regime regime, int particles,
                           std::uint64_t seed, int threads = 1);

/// J(c1) - J(c2) under relaxed dynamics with common random numbers.
CostEstimate paired_cost_difference(const ModelSpec& model, const SlidingControl& c1, const SlidingControl& c2,
                                    int particles, std::uint64_t seed, int threads = 1);

/// Per-particle difference a - b summarized; both must have the same sample count.
CostEstimate paired_difference(const CostEstimate& a, const CostEstimate& b);

}  // namespace relaxctl
