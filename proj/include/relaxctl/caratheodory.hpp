#pragma once

#include "relaxctl/mfsde_sim.hpp"

#include <Eigen/Dense>

#include <span>
#include <variant>
#include <vector>

namespace relaxctl {

struct ReductionResult {
  std::vector<double> weights;
  bool degenerate = false;  // a dependence solve failed with support above D + 1
  int removed = 0;
};

/// Caratheodory reduction. `vectors` holds one point per column (D x p).
/// Repeatedly finds an affine dependence c (sum c_i v_i = 0, sum c_i = 0) on
/// the current support and moves the weights along -c until one hits zero.
/// Stops once the support points are affinely independent, so the result has
/// at most D + 1 nonzero weights and the same weighted mean.
ReductionResult reduce_support(std::span<const double> weights, const Eigen::MatrixXd& vectors);

struct StepReduction {
  int step = 0;
  int support_before = 0;
  int support_after = 0;
  double moment_residual = 0.0;  // max-norm, relative to max(1, |moment|)
  bool degenerate = false;
};

struct ReducedControl {
  SlidingControl control;
  std::vector<StepReduction> steps;
  double max_residual = 0.0;
  int max_support = 0;
};

/// Per-step reduction of mu's rows against the moment vectors
/// (b, sigma sigma^T, h) evaluated at the ensemble mean state and the cached
/// empirical mean-fields. Per-row support is at most d + d^2 + 2. When the
/// moment geometry leaves room, the first action moment sum_i alpha_i a_i is
/// preserved as well.
ReducedControl sliding_from_relaxed(const ModelSpec& model, const SlidingControl& mu,
                                    const ParticleEnsemble& ensemble);

/// Moment vectors (one column per atom) at step k of the ensemble.
Eigen::MatrixXd step_moments(const ModelSpec& model, const SlidingControl& mu, const ParticleEnsemble& ensemble,
                             int k);

struct NotRepresentable {
  int step = 0;
  double residual = 0.0;  // best scaled per-component mismatch at that step
};

/// Looks for one atom per step whose moment vector equals the mu-averaged
/// moment vector within 1e-8 per component, each component scaled by its
/// range over the grid. Ties go to the smallest atom index.
std::variant<StrictControl, NotRepresentable> extract_strict_if_convex(const ModelSpec& model,
                                                                      const SlidingControl& mu,
                                                                      const ParticleEnsemble& ensemble);

}  // namespace relaxctl
