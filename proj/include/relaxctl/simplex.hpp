#pragma once

#include <span>
#include <vector>

namespace relaxctl {

/// Euclidean projection onto the probability simplex (sort-based).
std::vector<double> project_to_simplex(std::span<const double> v);

/// All weight vectors of length p on the lattice {0, 1/r, ..., 1} that sum to
/// one, in ascending lexicographic order.
std::vector<std::vector<double>> simplex_lattice(int p, int r);

/// Number of lattice points, C(r + p - 1, p - 1), saturating at `cap`.
long long simplex_lattice_size(int p, int r, long long cap);

}  // namespace relaxctl
