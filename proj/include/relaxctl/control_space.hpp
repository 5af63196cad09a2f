#pragma once

#include "relaxctl/types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace relaxctl {

/// Uniform discretization t_k = k * T / K of [0, T].
class TimeGrid {
 public:
  TimeGrid(double horizon, int steps);

  double horizon() const { return horizon_; }
  int steps() const { return steps_; }
  double dt() const { return horizon_ / steps_; }
  double time(int k) const { return k * dt(); }

  /// Index k with t == t_k. Throws DomainError if t is outside [0, T] or not
  /// a grid point (relative tolerance 1e-9).
  int index_of(double t) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_;
  int steps_;
};

/// Finite set of distinct actions standing in for a compact action space.
class ActionGrid {
 public:
  ActionGrid(std::vector<ActionVec> atoms, ActionVec box_lo, ActionVec box_hi);

  int size() const { return static_cast<int>(atoms_.size()); }
  int action_dim() const { return static_cast<int>(atoms_.front().size()); }
  const ActionVec& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  const std::vector<ActionVec>& atoms() const { return atoms_; }
  const ActionVec& box_lo() const { return box_lo_; }
  const ActionVec& box_hi() const { return box_hi_; }

  /// Index of the atom equal to `a`, or -1.
  int find(const ActionVec& a) const;

  bool operator==(const ActionGrid& other) const;

 private:
  std::vector<ActionVec> atoms_;
  ActionVec box_lo_;
  ActionVec box_hi_;
};

/// Builds a grid whose bounding box is the coordinate-wise hull of the points.
ActionGrid make_action_grid(const std::vector<ActionVec>& points);
/// Scalar-action convenience overload.
ActionGrid make_action_grid(const std::vector<double>& points);

/// Piecewise-constant strict control: atom index per step.
class StrictControl {
 public:
  StrictControl(ActionGrid grid, TimeGrid time, std::vector<int> assignment);

  const ActionGrid& grid() const { return grid_; }
  const TimeGrid& time() const { return time_; }
  const std::vector<int>& assignment() const { return assignment_; }
  int index_at(int k) const { return assignment_[static_cast<std::size_t>(k)]; }
  const ActionVec& action_at(int k) const { return grid_.atom(index_at(k)); }

  bool operator==(const StrictControl&) const = default;

 private:
  ActionGrid grid_;
  TimeGrid time_;
  std::vector<int> assignment_;
};

/// Relaxed control restricted to finitely many atoms: one simplex row of
/// weights per time step.
class SlidingControl {
 public:
  static constexpr double kRowTolerance = 1e-12;
  static constexpr double kRenormalizeTolerance = 1e-9;

  /// `weights` is row-major K x p. Rows whose sum is within 1e-9 of one are
  /// renormalized; any negative weight or larger deviation is rejected.
  SlidingControl(ActionGrid grid, TimeGrid time, std::vector<double> weights);

  /// The same weight row at every step.
  static SlidingControl constant(ActionGrid grid, TimeGrid time,
                                 std::span<const double> row);
  static SlidingControl uniform(ActionGrid grid, TimeGrid time);
  static SlidingControl dirac(ActionGrid grid, TimeGrid time, int atom);

  const ActionGrid& grid() const { return grid_; }
  const TimeGrid& time() const { return time_; }
  int atoms() const { return grid_.size(); }
  int steps() const { return time_.steps(); }

  std::span<const double> row(int k) const {
    return {weights_.data() + static_cast<std::size_t>(k) * atoms(),
            static_cast<std::size_t>(atoms())};
  }
  double weight(int k, int i) const { return row(k)[static_cast<std::size_t>(i)]; }
  const std::vector<double>& weights() const { return weights_; }

  bool operator==(const SlidingControl&) const = default;

 private:
  ActionGrid grid_;
  TimeGrid time_;
  std::vector<double> weights_;
};

/// u_n(t) = (-1)^k on the k-th of n equal slices. The grid must hold exactly
/// the scalar atoms -1 and +1, and K must be divisible by n.
StrictControl rademacher_control(const ActionGrid& grid, int n, const TimeGrid& time);

/// Dirac embedding u_t -> delta_{u_t}(da) dt.
SlidingControl embed_strict(const StrictControl& u);

using TestFunction = std::function<double(double t, const ActionVec& a)>;

/// Left-endpoint quadrature of int_0^t int g(s, a) mu_s(da) ds.
double pushforward_test(const TestFunction& g, const SlidingControl& control, double t);

/// Content hash used to pair an ensemble with the control that produced it.
std::uint64_t fingerprint(const SlidingControl& control);

}  // namespace relaxctl
