#include "relaxctl/chattering.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace relaxctl {

std::vector<int> largest_remainder(std::span<const double> weights, int total) {
  const auto p = weights.size();
  std::vector<int> counts(p);
  std::vector<double> remainders(p);
  int assigned = 0;
  for (std::size_t i = 0; i < p; ++i) {
    const double exact = weights[i] * total;
    counts[i] = static_cast<int>(std::floor(exact));
    remainders[i] = exact - counts[i];
    assigned += counts[i];
  }
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t r = 0; assigned < total; r = (r + 1) % p) {
    ++counts[order[r]];
    ++assigned;
  }
  return counts;
}

std::vector<double> slice_average(const SlidingControl& mu, int n) {
  const int K = mu.steps();
  const int p = mu.atoms();
  if (n < 1 || K % n != 0) {
    throw ValidationError(fmt::format("K = {} is not divisible by n = {}", K, n));
  }
  const int len = K / n;
  std::vector<double> avg(static_cast<std::size_t>(n) * static_cast<std::size_t>(p), 0.0);
  for (int s = 0; s < n; ++s) {
    double* out = avg.data() + static_cast<std::size_t>(s) * p;
    for (int k = s * len; k < (s + 1) * len; ++k) {
      const auto row = mu.row(k);
      for (int i = 0; i < p; ++i) out[i] += row[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < p; ++i) out[i] /= len;
  }
  return avg;
}

StrictControl chatter(const SlidingControl& mu, int n) {
  const int K = mu.steps();
  const int p = mu.atoms();
  if (n < 1) throw ValidationError("chattering needs n >= 1");
  const int block = n * p;
  if (K % block != 0) {
    const int least = ((K + block - 1) / block) * block;
    throw ValidationError(fmt::format(
        "K = {} is not divisible by n * p = {}; the least compatible K is {}", K, block, least));
  }
  const int len = K / n;
  const auto avg = slice_average(mu, n);
  std::vector<int> assignment;
  assignment.reserve(static_cast<std::size_t>(K));
  for (int s = 0; s < n; ++s) {
    const auto counts = largest_remainder(
        std::span<const double>(avg.data() + static_cast<std::size_t>(s) * p, static_cast<std::size_t>(p)), len);
    for (int i = 0; i < p; ++i) assignment.insert(assignment.end(), static_cast<std::size_t>(counts[i]), i);
  }
  return StrictControl(mu.grid(), mu.time(), std::move(assignment));
}

double chatter_error(const SlidingControl& mu, int n, const TestFunction& g) {
  const auto u = chatter(mu, n);
  const double dt = mu.time().dt();
  double strict = 0.0;
  double relaxed = 0.0;
  double worst = 0.0;
  for (int k = 0; k < mu.steps(); ++k) {
    const double tk = mu.time().time(k);
    strict += dt * g(tk, u.action_at(k));
    double inner = 0.0;
    const auto row = mu.row(k);
    for (int i = 0; i < mu.atoms(); ++i) {
      const double w = row[static_cast<std::size_t>(i)];
      if (w != 0.0) inner += w * g(tk, mu.grid().atom(i));
    }
    relaxed += dt * inner;
    worst = std::max(worst, std::abs(strict - relaxed));
  }
  return worst;
}

namespace {

struct TerminalStats {
  double mean = 0.0;
  double var = 0.0;
};

TerminalStats terminal_stats(const ParticleEnsemble& ens) {
  const int K = ens.steps();
  return {ens.mean_state(K)(0), ens.variance_state(K)(0)};
}

double mean_of(const std::vector<double>& v) { return summarize(v).mean; }

}  // namespace

ConvergenceStudy convergence_study(const ModelSpec& model, const SlidingControl& mu, const std::vector<int>& ns,
                                   int particles, std::uint64_t seed, int threads) {
  for (int n : ns) {
    const int block = n * mu.atoms();
    if (n < 1 || mu.steps() % block != 0) {
      throw ValidationError(fmt::format("n = {} needs K divisible by {}", n, block));
    }
  }
  ConvergenceStudy study;
  study.coupled = !model.diffusion_depends_on_action;
  const Recording recording = study.coupled ? Recording::full : Recording::summary;
  const Regime relaxed_regime = study.coupled ? Regime::naive : Regime::relaxed;
  const auto relaxed = simulate(model, mu, relaxed_regime, particles, seed, {threads, recording});
  const auto relaxed_cost = estimate_cost(model, relaxed, mu);
  const auto relaxed_stats = terminal_stats(relaxed);
  const double relaxed_sup = mean_of(relaxed.sup_square());

  for (int n : ns) {
    const auto u = chatter(mu, n);
    const auto embedded = embed_strict(u);
    const auto strict = simulate(model, embedded, Regime::strict, particles, seed, {threads, recording});
    ConvergenceRow row;
    row.n = n;
    row.strict_cost = estimate_cost(model, strict, embedded);
    row.relaxed_cost = relaxed_cost;
    row.cost_difference = paired_difference(row.strict_cost, relaxed_cost);
    row.strict_sup_square = mean_of(strict.sup_square());
    row.relaxed_sup_square = relaxed_sup;
    const auto ss = terminal_stats(strict);
    row.strict_terminal_mean = ss.mean;
    row.strict_terminal_var = ss.var;
    row.relaxed_terminal_mean = relaxed_stats.mean;
    row.relaxed_terminal_var = relaxed_stats.var;
    if (study.coupled) {
      std::vector<double> sup_diff(static_cast<std::size_t>(particles), 0.0);
      for (int j = 0; j < particles; ++j) {
        double worst = 0.0;
        for (int k = 0; k <= mu.steps(); ++k) {
          worst = std::max(worst, (strict.state(j, k) - relaxed.state(j, k)).squaredNorm());
        }
        sup_diff[static_cast<std::size_t>(j)] = worst;
      }
      row.coupled_sup_diff = mean_of(sup_diff);
    }
    study.rows.push_back(std::move(row));
  }
  return study;
}

}  // namespace relaxctl
