#include "relaxctl/simplex.hpp"

#include <algorithm>
#include <functional>

namespace relaxctl {

std::vector<double> project_to_simplex(std::span<const double> v) {
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) tau = candidate;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

namespace {

void enumerate(int p, int r, int position, int remaining, std::vector<int>& counts,
               std::vector<std::vector<double>>& out) {
  if (position == p - 1) {
    counts[static_cast<std::size_t>(position)] = remaining;
    std::vector<double> w(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) w[static_cast<std::size_t>(i)] = static_cast<double>(counts[static_cast<std::size_t>(i)]) / r;
    out.push_back(std::move(w));
    return;
  }
  for (int c = 0; c <= remaining; ++c) {
    counts[static_cast<std::size_t>(position)] = c;
    enumerate(p, r, position + 1, remaining - c, counts, out);
  }
}

}  // namespace

std::vector<std::vector<double>> simplex_lattice(int p, int r) {
  std::vector<std::vector<double>> out;
  std::vector<int> counts(static_cast<std::size_t>(p), 0);
  enumerate(p, r, 0, r, counts, out);
  return out;
}

long long simplex_lattice_size(int p, int r, long long cap) {
  // C(r + p - 1, p - 1) computed incrementally; each partial product is an
  // exact binomial coefficient.
  long long value = 1;
  for (int i = 1; i <= p - 1; ++i) {
    value = value * (r + i) / i;
    if (value > cap) return cap + 1;
  }
  return value;
}

}  // namespace relaxctl
