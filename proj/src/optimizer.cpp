#include "relaxctl/optimizer.hpp"

#include "relaxctl/chattering.hpp"
#include "relaxctl/parallel.hpp"
#include "relaxctl/simplex.hpp"

#include <fmt/format.h>

#include <cmath>

namespace relaxctl {

SlidingControl block_control(const ActionGrid& grid, const TimeGrid& time,
                             const std::vector<std::vector<double>>& block_weights) {
  const int B = static_cast<int>(block_weights.size());
  if (B < 1 || time.steps() % B != 0) {
    throw ValidationError(fmt::format("K = {} is not divisible into {} equal blocks", time.steps(), B));
  }
  const int len = time.steps() / B;
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(time.steps()) * static_cast<std::size_t>(grid.size()));
  for (const auto& row : block_weights) {
    if (static_cast<int>(row.size()) != grid.size()) throw ValidationError("block weight length mismatch");
    for (int k = 0; k < len; ++k) w.insert(w.end(), row.begin(), row.end());
  }
  return SlidingControl(grid, time, std::move(w));
}

namespace {

struct Candidate {
  std::vector<std::vector<double>> blocks;
  Regime regime;
};

// Evaluates all candidates with common random numbers and returns the
// lexicographically first argmin (candidates arrive in lexicographic order).
OptimizationReport evaluate_all(const std::string& method, const ModelSpec& model, const ActionGrid& grid,
                                const TimeGrid& time, const std::vector<Candidate>& candidates,
                                const SearchOptions& options) {
  std::vector<TraceEntry> trace(candidates.size());
  parallel_for(options.threads, candidates.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t c = lo; c < hi; ++c) {
      const auto control = block_control(grid, time, candidates[c].blocks);
      const auto est = simulate_cost(model, control, candidates[c].regime, options.particles, options.seed, 1);
      trace[c] = {static_cast<long>(c), est.mean, est.std_error};
    }
  });
  std::size_t best = 0;
  for (std::size_t c = 1; c < trace.size(); ++c) {
    if (trace[c].mean < trace[best].mean) best = c;
  }
  const auto control = block_control(grid, time, candidates[best].blocks);
  auto cost = simulate_cost(model, control, candidates[best].regime, options.particles, options.seed,
                            options.threads);
  return OptimizationReport{method,
                            control,
                            std::move(cost),
                            candidates[best].blocks,
                            std::move(trace),
                            static_cast<long>(candidates.size()),
                            static_cast<int>(candidates[best].blocks.size())};
}

void check_blocks(const TimeGrid& time, int blocks) {
  if (blocks < 1 || time.steps() % blocks != 0) {
    throw ValidationError(fmt::format("K = {} is not divisible into {} equal blocks", time.steps(), blocks));
  }
}

long long checked_power(long long base, int exponent, long long cap) {
  long long total = 1;
  for (int b = 0; b < exponent; ++b) {
    if (base > 0 && total > cap / base) return cap + 1;
    total *= base;
  }
  return total;
}

}  // namespace

OptimizationReport grid_search(const ModelSpec& model, const ActionGrid& grid, const TimeGrid& time, int resolution,
                               int blocks, const SearchOptions& options) {
  if (resolution < 1) throw ValidationError("lattice resolution must be >= 1");
  check_blocks(time, blocks);
  const long long per_block = simplex_lattice_size(grid.size(), resolution, options.max_candidates);
  const long long count = checked_power(per_block, blocks, options.max_candidates);
  if (count > options.max_candidates) {
    throw ValidationError(fmt::format("grid search would evaluate more than {} candidates ({} per block, {} blocks)",
                                      options.max_candidates, per_block, blocks));
  }
  const auto lattice = simplex_lattice(grid.size(), resolution);
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(count));
  std::vector<std::size_t> digits(static_cast<std::size_t>(blocks), 0);
  for (long long c = 0; c < count; ++c) {
    Candidate cand{{}, Regime::relaxed};
    for (int b = 0; b < blocks; ++b) cand.blocks.push_back(lattice[digits[static_cast<std::size_t>(b)]]);
    candidates.push_back(std::move(cand));
    for (int b = blocks - 1; b >= 0; --b) {
      if (++digits[static_cast<std::size_t>(b)] < lattice.size()) break;
      digits[static_cast<std::size_t>(b)] = 0;
    }
  }
  return evaluate_all("grid_search", model, grid, time, candidates, options);
}

OptimizationReport strict_grid_search(const ModelSpec& model, const ActionGrid& grid, const TimeGrid& time,
                                      int blocks, const SearchOptions& options) {
  check_blocks(time, blocks);
  const long long count = checked_power(grid.size(), blocks, options.max_candidates);
  if (count > options.max_candidates) {
    throw ValidationError(fmt::format("strict search would evaluate more than {} candidates", options.max_candidates));
  }
  // Dirac rows in ascending lexicographic order of their weight vectors:
  // the last atom's indicator is the smallest.
  std::vector<std::vector<double>> diracs;
  for (int i = grid.size() - 1; i >= 0; --i) {
    std::vector<double> row(static_cast<std::size_t>(grid.size()), 0.0);
    row[static_cast<std::size_t>(i)] = 1.0;
    diracs.push_back(std::move(row));
  }
  std::vector<Candidate> candidates;
  std::vector<std::size_t> digits(static_cast<std::size_t>(blocks), 0);
  for (long long c = 0; c < count; ++c) {
    Candidate cand{{}, Regime::strict};
    for (int b = 0; b < blocks; ++b) cand.blocks.push_back(diracs[digits[static_cast<std::size_t>(b)]]);
    candidates.push_back(std::move(cand));
    for (int b = blocks - 1; b >= 0; --b) {
      if (++digits[static_cast<std::size_t>(b)] < diracs.size()) break;
      digits[static_cast<std::size_t>(b)] = 0;
    }
  }
  return evaluate_all("strict_grid_search", model, grid, time, candidates, options);
}

OptimizationReport coordinate_descent(const ModelSpec& model, const SlidingControl& init,
                                      const DescentOptions& options) {
  if (!(options.step > 0.0 && options.step <= 1.0)) {
    throw ValidationError(fmt::format("descent step must lie in (0, 1], got {}", options.step));
  }
  check_blocks(init.time(), options.blocks);
  const auto& search = options.search;
  const int B = options.blocks;
  const int p = init.atoms();
  const int len = init.steps() / B;

  SlidingControl current = init;
  std::vector<std::vector<double>> block_weights(static_cast<std::size_t>(B));
  const auto averaged = slice_average(init, B);
  for (int b = 0; b < B; ++b) {
    block_weights[static_cast<std::size_t>(b)].assign(averaged.begin() + static_cast<std::ptrdiff_t>(b) * p,
                                                      averaged.begin() + static_cast<std::ptrdiff_t>(b + 1) * p);
  }
  auto evaluate = [&](const SlidingControl& c) {
    return simulate_cost(model, c, Regime::relaxed, search.particles, search.seed, search.threads);
  };

  OptimizationReport report{"coordinate_descent", current, evaluate(current), block_weights, {}, 1, B};
  report.trace.push_back({0, report.best_cost.mean, report.best_cost.std_error});

  for (int cycle = 0; cycle < options.iterations; ++cycle) {
    bool accepted = false;
    for (int b = 0; b < B; ++b) {
      for (int i = 0; i < p; ++i) {
        for (double sign : {1.0, -1.0}) {
          auto moved = block_weights[static_cast<std::size_t>(b)];
          moved[static_cast<std::size_t>(i)] += sign * options.step;
          const auto projected = project_to_simplex(moved);
          if (projected == block_weights[static_cast<std::size_t>(b)]) continue;

          std::vector<double> w = current.weights();
          for (int k = b * len; k < (b + 1) * len; ++k) {
            std::copy(projected.begin(), projected.end(), w.begin() + static_cast<std::ptrdiff_t>(k) * p);
          }
          SlidingControl candidate(current.grid(), current.time(), std::move(w));
          auto cost = evaluate(candidate);
          ++report.budget;
          const auto improvement = paired_difference(report.best_cost, cost);
          if (improvement.mean > improvement.std_error) {
            current = std::move(candidate);
            const auto row = current.row(b * len);
            block_weights[static_cast<std::size_t>(b)].assign(row.begin(), row.end());
            report.best_cost = std::move(cost);
            report.trace.push_back({report.budget, report.best_cost.mean, report.best_cost.std_error});
            accepted = true;
          }
        }
      }
    }
    if (!accepted) break;
  }
  report.best_control = current;
  report.best_block_weights = block_weights;
  return report;
}

ValueGapReport value_gap(const ModelSpec& model, const ActionGrid& grid, const TimeGrid& time,
                         const ValueGapOptions& options) {
  auto strict_best = strict_grid_search(model, grid, time, options.blocks, options.search);
  const auto lattice_best = grid_search(model, grid, time, options.resolution, options.blocks, options.search);
  DescentOptions descent{options.descent_iterations, options.descent_step, options.blocks, options.search};
  auto relaxed_best = coordinate_descent(model, lattice_best.best_control, descent);
  relaxed_best.budget += lattice_best.budget;
  relaxed_best.method = "grid_search+coordinate_descent";
  auto gap = paired_difference(strict_best.best_cost, relaxed_best.best_cost);
  ValueGapReport report{std::move(strict_best), std::move(relaxed_best), std::move(gap), {}};

  const auto& mu = report.relaxed_best.best_control;
  for (int n : options.ns) {
    const auto chattered = embed_strict(chatter(mu, n));
    ChatterBridgeRow row;
    row.n = n;
    row.chattered_cost = simulate_cost(model, chattered, Regime::strict, options.search.particles,
                                       options.search.seed, options.search.threads);
    row.difference = paired_difference(row.chattered_cost, report.relaxed_best.best_cost);
    report.bridge.push_back(std::move(row));
  }
  return report;
}

}  // namespace relaxctl
