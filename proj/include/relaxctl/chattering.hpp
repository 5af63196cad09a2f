#pragma once

#include "relaxctl/cost_eval.hpp"

#include <optional>
#include <vector>

namespace relaxctl {

/// Largest-remainder rounding of weights * total to integers summing to
/// `total`. Ties on the remainder go to the smaller index.
std::vector<int> largest_remainder(std::span<const double> weights, int total);

/// Slice-averaged weights of mu on n equal slices (n x p, row-major).
std::vector<double> slice_average(const SlidingControl& mu, int n);

/// Chattering approximation: each of n slices is split into consecutive
/// blocks, one per atom in index order, with block lengths given by the
/// largest-remainder rounding of the slice-averaged weights. Requires K to be
/// divisible by n * p.
StrictControl chatter(const SlidingControl& mu, int n);

/// max over grid times t of |int_0^t g d(delta_{u^n}) - int_0^t g dmu|.
double chatter_error(const SlidingControl& mu, int n, const TestFunction& g);

struct ConvergenceRow {
  int n = 0;
  CostEstimate strict_cost;
  CostEstimate relaxed_cost;
  CostEstimate cost_difference;  // J(u^n) - J(mu), paired per particle
  double strict_sup_square = 0.0;   // E[sup_t |X^n_t|^2]
  double relaxed_sup_square = 0.0;  // E[sup_t |X_t|^2]
  double strict_terminal_mean = 0.0, strict_terminal_var = 0.0;
  double relaxed_terminal_mean = 0.0, relaxed_terminal_var = 0.0;
  /// E[sup_t |X^n_t - X_t|^2] on a shared driver; only for models whose
  /// diffusion ignores the action.
  std::optional<double> coupled_sup_diff;
};

struct ConvergenceStudy {
  bool coupled = false;
  std::vector<ConvergenceRow> rows;
};

/// For each n, simulate the chattered strict control and the relaxed control
/// with the same seed and compare costs. When sigma does not depend on the
/// action the relaxed state is driven by the strict control's Brownian
/// motion, which is an exact representation of the relaxed law in that case
/// and yields a pathwise coupling.
ConvergenceStudy convergence_study(const ModelSpec& model, const SlidingControl& mu, const std::vector<int>& ns,
                                   int particles, std::uint64_t seed, int threads = 1);

}  // namespace relaxctl
