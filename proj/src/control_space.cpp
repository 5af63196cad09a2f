#include "relaxctl/control_space.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstring>
#include <numeric>

namespace relaxctl {

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ValidationError(fmt::format("time horizon must be positive, got {}", horizon));
  }
  if (steps < 1) {
    throw ValidationError(fmt::format("time grid needs at least one step, got {}", steps));
  }
}

int TimeGrid::index_of(double t) const {
  const double tol = 1e-9 * horizon_;
  if (!(t >= -tol && t <= horizon_ + tol)) {
    throw DomainError(fmt::format("time {} outside [0, {}]", t, horizon_));
  }
  const double scaled = t / dt();
  const long k = std::lround(scaled);
  if (std::abs(k * dt() - t) > tol) {
    throw DomainError(fmt::format("time {} is not a grid point (dt = {})", t, dt()));
  }
  return static_cast<int>(k);
}

namespace {

bool same_vec(const ActionVec& a, const ActionVec& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

}  // namespace

ActionGrid::ActionGrid(std::vector<ActionVec> atoms, ActionVec box_lo, ActionVec box_hi)
    : atoms_(std::move(atoms)), box_lo_(std::move(box_lo)), box_hi_(std::move(box_hi)) {
  if (atoms_.empty()) throw ValidationError("action grid needs at least one atom");
  const auto m = atoms_.front().size();
  if (m < 1 || m > kMaxDim) {
    throw ValidationError(fmt::format("action dimension must be in [1, {}]", kMaxDim));
  }
  if (box_lo_.size() != m || box_hi_.size() != m) {
    throw ValidationError("bounding box dimension does not match the atoms");
  }
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const auto& a = atoms_[i];
    if (a.size() != m) {
      throw ValidationError(fmt::format("atom {} has dimension {}, expected {}", i, a.size(), m));
    }
    if (!a.allFinite()) throw ValidationError(fmt::format("atom {} is not finite", i));
    if ((a.array() < box_lo_.array()).any() || (a.array() > box_hi_.array()).any()) {
      throw ValidationError(fmt::format("atom {} lies outside the bounding box", i));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (same_vec(atoms_[j], a)) {
        throw ValidationError(fmt::format("duplicate atoms at positions {} and {}", j, i));
      }
    }
  }
}

int ActionGrid::find(const ActionVec& a) const {
  for (int i = 0; i < size(); ++i) {
    if (same_vec(atom(i), a)) return i;
  }
  return -1;
}

bool ActionGrid::operator==(const ActionGrid& other) const {
  if (atoms_.size() != other.atoms_.size()) return false;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!same_vec(atoms_[i], other.atoms_[i])) return false;
  }
  return same_vec(box_lo_, other.box_lo_) && same_vec(box_hi_, other.box_hi_);
}

ActionGrid make_action_grid(const std::vector<ActionVec>& points) {
  if (points.empty()) throw ValidationError("action grid needs at least one atom");
  ActionVec lo = points.front();
  ActionVec hi = points.front();
  for (const auto& p : points) {
    if (p.size() != lo.size()) throw ValidationError("atoms have inconsistent dimensions");
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return ActionGrid(points, lo, hi);
}

ActionGrid make_action_grid(const std::vector<double>& points) {
  std::vector<ActionVec> atoms;
  atoms.reserve(points.size());
  for (double p : points) {
    ActionVec a(1);
    a(0) = p;
    atoms.push_back(a);
  }
  return make_action_grid(atoms);
}

StrictControl::StrictControl(ActionGrid grid, TimeGrid time, std::vector<int> assignment)
    : grid_(std::move(grid)), time_(time), assignment_(std::move(assignment)) {
  if (static_cast<int>(assignment_.size()) != time_.steps()) {
    throw ValidationError(fmt::format("assignment has {} entries for {} steps",
                                      assignment_.size(), time_.steps()));
  }
  for (std::size_t k = 0; k < assignment_.size(); ++k) {
    if (assignment_[k] < 0 || assignment_[k] >= grid_.size()) {
      throw ValidationError(fmt::format("step {} assigns invalid atom index {}", k, assignment_[k]));
    }
  }
}

SlidingControl::SlidingControl(ActionGrid grid, TimeGrid time, std::vector<double> weights)
    : grid_(std::move(grid)), time_(time), weights_(std::move(weights)) {
  const auto p = static_cast<std::size_t>(grid_.size());
  const auto K = static_cast<std::size_t>(time_.steps());
  if (weights_.size() != p * K) {
    throw ValidationError(fmt::format("weights have {} entries, expected {} x {}",
                                      weights_.size(), K, p));
  }
  for (std::size_t k = 0; k < K; ++k) {
    double* row = weights_.data() + k * p;
    double sum = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      if (!(row[i] >= 0.0) || !std::isfinite(row[i])) {
        throw ValidationError(fmt::format("weight ({}, {}) = {} is not a nonnegative number",
                                          k, i, row[i]));
      }
      sum += row[i];
    }
    if (std::abs(sum - 1.0) > kRenormalizeTolerance) {
      throw ValidationError(fmt::format("weight row {} sums to {}", k, sum));
    }
    if (std::abs(sum - 1.0) > 0.0) {
      for (std::size_t i = 0; i < p; ++i) row[i] /= sum;
    }
  }
}

SlidingControl SlidingControl::constant(ActionGrid grid, TimeGrid time,
                                        std::span<const double> row) {
  if (static_cast<int>(row.size()) != grid.size()) {
    throw ValidationError("weight row length does not match the atom count");
  }
  std::vector<double> w;
  w.reserve(row.size() * static_cast<std::size_t>(time.steps()));
  for (int k = 0; k < time.steps(); ++k) w.insert(w.end(), row.begin(), row.end());
  return SlidingControl(std::move(grid), time, std::move(w));
}

SlidingControl SlidingControl::uniform(ActionGrid grid, TimeGrid time) {
  std::vector<double> row(static_cast<std::size_t>(grid.size()), 1.0 / grid.size());
  return constant(std::move(grid), time, row);
}

SlidingControl SlidingControl::dirac(ActionGrid grid, TimeGrid time, int atom) {
  if (atom < 0 || atom >= grid.size()) {
    throw ValidationError(fmt::format("atom index {} out of range", atom));
  }
  std::vector<double> row(static_cast<std::size_t>(grid.size()), 0.0);
  row[static_cast<std::size_t>(atom)] = 1.0;
  return constant(std::move(grid), time, row);
}

StrictControl rademacher_control(const ActionGrid& grid, int n, const TimeGrid& time) {
  if (grid.action_dim() != 1) throw ValidationError("Rademacher control needs scalar atoms");
  ActionVec plus(1), minus(1);
  plus(0) = 1.0;
  minus(0) = -1.0;
  const int ip = grid.find(plus);
  const int im = grid.find(minus);
  if (grid.size() != 2 || ip < 0 || im < 0) {
    throw ValidationError("Rademacher control needs the atom set {-1, +1}");
  }
  if (n < 1) throw ValidationError("Rademacher control needs n >= 1");
  if (time.steps() % n != 0) {
    throw ValidationError(fmt::format("K = {} is not divisible by n = {}", time.steps(), n));
  }
  const int slice = time.steps() / n;
  std::vector<int> assignment(static_cast<std::size_t>(time.steps()));
  for (int k = 0; k < time.steps(); ++k) {
    assignment[static_cast<std::size_t>(k)] = ((k / slice) % 2 == 0) ? ip : im;
  }
  return StrictControl(grid, time, std::move(assignment));
}

SlidingControl embed_strict(const StrictControl& u) {
  const auto p = static_cast<std::size_t>(u.grid().size());
  std::vector<double> w(p * static_cast<std::size_t>(u.time().steps()), 0.0);
  for (int k = 0; k < u.time().steps(); ++k) {
    w[static_cast<std::size_t>(k) * p + static_cast<std::size_t>(u.index_at(k))] = 1.0;
  }
  return SlidingControl(u.grid(), u.time(), std::move(w));
}

double pushforward_test(const TestFunction& g, const SlidingControl& control, double t) {
  const int kt = control.time().index_of(t);
  const double dt = control.time().dt();
  double total = 0.0;
  for (int k = 0; k < kt; ++k) {
    const double tk = control.time().time(k);
    double inner = 0.0;
    const auto row = control.row(k);
    for (int i = 0; i < control.atoms(); ++i) {
      const double w = row[static_cast<std::size_t>(i)];
      if (w != 0.0) inner += w * g(tk, control.grid().atom(i));
    }
    total += dt * inner;
  }
  return total;
}

std::uint64_t fingerprint(const SlidingControl& control) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ull;
    }
  };
  const double T = control.time().horizon();
  const int K = control.time().steps();
  mix(&T, sizeof T);
  mix(&K, sizeof K);
  for (const auto& a : control.grid().atoms()) mix(a.data(), sizeof(double) * static_cast<std::size_t>(a.size()));
  mix(control.weights().data(), sizeof(double) * control.weights().size());
  return h;
}

}  // namespace relaxctl
