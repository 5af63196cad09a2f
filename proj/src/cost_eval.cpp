#include "relaxctl/cost_eval.hpp"

#include "relaxctl/parallel.hpp"

#include <fmt/format.h>

#include <cmath>

namespace relaxctl {

CostEstimate summarize(std::vector<double> per_particle) {
  CostEstimate est;
  const auto n = per_particle.size();
  est.samples = static_cast<int>(n);
  if (n == 0) return est;
  est.mean = pairwise_sum(per_particle, n) / static_cast<double>(n);
  if (n > 1) {
    std::vector<double> sq(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double dev = per_particle[j] - est.mean;
      sq[j] = dev * dev;
    }
    const double var = pairwise_sum(sq, n) / static_cast<double>(n - 1);
    est.std_error = std::sqrt(var / static_cast<double>(n));
  }
  est.per_particle = std::move(per_particle);
  return est;
}

CostEstimate estimate_cost(const ModelSpec& model, const ParticleEnsemble& ensemble, const SlidingControl& control) {
  if (ensemble.control_fingerprint() != fingerprint(control) || !(ensemble.time() == control.time())) {
    throw ValidationError("ensemble was not simulated under this control");
  }
  const int N = ensemble.particles();
  const int K = ensemble.steps();
  const double dt = control.time().dt();
  const StateVec m_lambda = ensemble.meanfield(MeanFieldKind::lambda, K);
  std::vector<double> costs(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) {
    double running = 0.0;
    if (ensemble.has_paths()) {
      for (int k = 0; k < K; ++k) {
        const double tk = control.time().time(k);
        const StateVec x = ensemble.state(j, k);
        const StateVec m_varphi = ensemble.meanfield(MeanFieldKind::varphi, k);
        const auto row = control.row(k);
        double inner = 0.0;
        bool first = true;
        for (int i = 0; i < control.atoms(); ++i) {
          const double w = row[static_cast<std::size_t>(i)];
          if (!(w > 0.0)) continue;
          const double h = w * model.running_cost(tk, x, m_varphi, control.grid().atom(i));
          inner = first ? h : inner + h;
          first = false;
        }
        running += dt * inner;
      }
    } else {
      running = ensemble.running_cost()[static_cast<std::size_t>(j)];
    }
    costs[static_cast<std::size_t>(j)] = running + model.terminal_cost(ensemble.terminal(j), m_lambda);
  }
  return summarize(std::move(costs));
}

CostEstimate simulate_cost(const ModelSpec& model, const SlidingControl& control, Regime regime, int particles,
                           std::uint64_t seed, int threads) {
  const auto ens = simulate(model, control, regime, particles, seed, {threads, Recording::summary});
  return estimate_cost(model, ens, control);
}

CostEstimate paired_difference(const CostEstimate& a, const CostEstimate& b) {
  if (a.per_particle.size() != b.per_particle.size()) {
    throw ValidationError("paired estimates need the same sample count");
  }
  std::vector<double> diff(a.per_particle.size());
  for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = a.per_particle[j] - b.per_particle[j];
  return summarize(std::move(diff));
}

CostEstimate paired_cost_difference(const ModelSpec& model, const SlidingControl& c1, const SlidingControl& c2,
                                    int particles, std::uint64_t seed, int threads) {
  if (!(c1.time() == c2.time()) || !(c1.grid() == c2.grid())) {
    throw ValidationError("paired controls must share the time grid and the action grid");
  }
  const auto j1 = simulate_cost(model, c1, Regime::relaxed, particles, seed, threads);
  const auto j2 = simulate_cost(model, c2, Regime::relaxed, particles, seed, threads);
  return paired_difference(j1, j2);
}

}  // namespace relaxctl
