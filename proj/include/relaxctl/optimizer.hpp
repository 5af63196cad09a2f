#pragma once

#include "relaxctl/cost_eval.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace relaxctl {

struct TraceEntry {
  long iteration = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

struct OptimizationReport {
  std::string method;
  SlidingControl best_control;
  CostEstimate best_cost;
  std::vector<std::vector<double>> best_block_weights;
  std::vector<TraceEntry> trace;
  long budget = 0;  // cost evaluations performed
  int blocks = 1;
};

struct SearchOptions {
  int particles = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  long long max_candidates = 1'000'000;
};

/// Block-constant control: block b covers steps [b K / B, (b + 1) K / B).
SlidingControl block_control(const ActionGrid& grid, const TimeGrid& time,
                             const std::vector<std::vector<double>>& block_weights);

/// Exhaustive search over block-constant sliding controls with weights on the
/// lattice {0, 1/r, ..., 1}. Every candidate is evaluated under relaxed
/// dynamics with the same seed; ties go to the lexicographically smallest
/// weight tuple.
OptimizationReport grid_search(const ModelSpec& model, const ActionGrid& grid, const TimeGrid& time, int resolution,
                               int blocks, const SearchOptions& options);

/// Exhaustive search over block-constant strict controls (one atom per block).
OptimizationReport strict_grid_search(const ModelSpec& model, const ActionGrid& grid, const TimeGrid& time,
                                      int blocks, const SearchOptions& options);

struct DescentOptions {
  int iterations = 50;
  double step = 0.1;
  int blocks = 1;
  SearchOptions search;
};

/// Cyclic coordinate moves on block weight vectors with Euclidean simplex
/// projection. A move is accepted when the paired cost improvement exceeds
/// one standard error of the paired difference. Stops after `iterations`
/// cycles or after a cycle without accepted moves.
OptimizationReport coordinate_descent(const ModelSpec& model, const SlidingControl& init,
                                      const DescentOptions& options);

struct ChatterBridgeRow {
  int n = 0;
  CostEstimate chattered_cost;
  CostEstimate difference;  // J(chatter(mu*, n)) - J(mu*), paired
};

struct ValueGapOptions {
  int blocks = 1;
  int resolution = 4;
  int descent_iterations = 20;
  double descent_step = 0.1;
  std::vector<int> ns = {4, 16, 64};
  SearchOptions search;
};

struct ValueGapReport {
  OptimizationReport strict_best;
  OptimizationReport relaxed_best;
  CostEstimate gap;  // J(strict best) - J(relaxed best), paired
  std::vector<ChatterBridgeRow> bridge;
};

/// Best strict versus best relaxed cost over the same block structure, plus
/// chattered versions of the relaxed optimum.
ValueGapReport value_gap(const ModelSpec& model, const ActionGrid& grid, const TimeGrid& time,
                         const ValueGapOptions& options);

}  // namespace relaxctl
