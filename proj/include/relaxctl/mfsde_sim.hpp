#pragma once

#include "relaxctl/coefficients.hpp"
#include "relaxctl/control_space.hpp"
#include "relaxctl/rng.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace relaxctl {

/// Which stochastic dynamics a sliding control drives.
///  - strict:  one Brownian driver, control is a Dirac row per step.
///  - naive:   atom-averaged b and sigma against one Brownian driver.
///  - relaxed: atom-averaged b, and sum_i sqrt(alpha_i) sigma(a_i) dB^i with
///             one independent driver per atom (finite martingale measure).
enum class Regime { strict, naive, relaxed };

std::string to_string(Regime regime);

enum class Recording {
  full,     // keep every particle state at every step
  summary,  // keep x0, terminal states, per-step statistics and per-particle accumulators
};

enum class MeanFieldKind { psi, phi, varphi, lambda };

struct SimOptions {
  int threads = 1;
  Recording recording = Recording::full;
};

struct RngManifest {
  std::uint64_t seed = 0;
  std::string scheme;
};

/// Simulated particle system on a time grid.
class ParticleEnsemble {
 public:
  int particles() const { return particles_; }
  int steps() const { return time_.steps(); }
  int dim() const { return dim_; }
  const TimeGrid& time() const { return time_; }
  Regime regime() const { return regime_; }
  std::uint64_t control_fingerprint() const { return control_fingerprint_; }
  const RngManifest& rng_manifest() const { return manifest_; }
  bool has_paths() const { return !paths_.empty(); }

  /// State of particle j at step k. Without recorded paths only k = 0 and
  /// k = K are available.
  StateVec state(int j, int k) const;
  StateVec terminal(int j) const;

  /// Cached empirical mean of the given map at step k.
  StateVec meanfield(MeanFieldKind which, int k) const;

  /// Per-step ensemble mean and (population) variance, coordinate-wise.
  StateVec mean_state(int k) const;
  StateVec variance_state(int k) const;

  /// Per-particle left-endpoint running cost accumulated during simulation
  /// with the cached varphi mean-field.
  const std::vector<double>& running_cost() const { return running_cost_; }
  /// Per-particle max_k |X_k|^2.
  const std::vector<double>& sup_square() const { return sup_square_; }
  // sup_k |X_k - x0|^2 per particle
  const std::vector<double>& sup_deviation() const { return sup_deviation_; }
  /// Number of (particle, step) pairs outside the model's declared state box.
  long box_exits() const { return box_exits_; }

 private:
  friend class Simulator;
  ParticleEnsemble(TimeGrid time) : time_(time) {}

  TimeGrid time_;
  int particles_ = 0;
  int dim_ = 0;
  Regime regime_ = Regime::relaxed;
  std::uint64_t control_fingerprint_ = 0;
  RngManifest manifest_;
  StateVec x0_;
  std::vector<double> paths_;     // N x (K+1) x d when recorded
  std::vector<double> terminal_;  // N x d
  std::vector<double> meanfields_[4];  // (K+1) x d each
  std::vector<double> mean_;           // (K+1) x d
  std::vector<double> variance_;       // (K+1) x d
  std::vector<double> running_cost_;
  std::vector<double> sup_square_;
  std::vector<double> sup_deviation_;
  long box_exits_ = 0;
};

/// Addressable Brownian increments dB^{i,j}_k ~ Normal(0, dt I_d), one driver
/// per atom. Values are regenerated from the counter-based stream on access,
/// so the N x K x p x d array is never materialized.
class DriverIncrements {
 public:
  DriverIncrements(const SlidingControl& control, int particles, int dim, std::uint64_t seed);

  int particles() const { return particles_; }
  int steps() const { return steps_; }
  int atoms() const { return atoms_; }
  int dim() const { return dim_; }
  double dt() const { return dt_; }

  /// Stream slot of atom i at step k. Atoms with positive weight take slots
  /// 0, 1, ... in index order; zero-weight atoms follow. A Dirac row therefore
  /// draws its only active increment from slot 0, the slot used by the
  /// single-driver regimes.
  int slot(int k, int i) const { return slots_[static_cast<std::size_t>(k) * atoms_ + i]; }

  double operator()(int particle, int k, int atom, int coord) const {
    return sqrt_dt_ * stream_.normal(static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(k),
                                     static_cast<std::uint32_t>(slot(k, atom)), static_cast<std::uint32_t>(coord));
  }

 private:
  GaussianStream stream_;
  int particles_, steps_, atoms_, dim_;
  double dt_, sqrt_dt_;
  std::vector<int> slots_;
};

ParticleEnsemble simulate_strict(const ModelSpec& model, const StrictControl& u, int particles,
                                 std::uint64_t seed, const SimOptions& options = {});

ParticleEnsemble simulate_naive_relaxed(const ModelSpec& model, const SlidingControl& mu, int particles,
                                        std::uint64_t seed, const SimOptions& options = {});

std::pair<ParticleEnsemble, DriverIncrements> simulate_relaxed(const ModelSpec& model, const SlidingControl& mu,
                                                               int particles, std::uint64_t seed,
                                                               const SimOptions& options = {});

/// Dispatch on regime. `strict` requires every row of `control` to be Dirac.
ParticleEnsemble simulate(const ModelSpec& model, const SlidingControl& control, Regime regime,
                          int particles, std::uint64_t seed, const SimOptions& options = {});

/// (1/N) sum_j map(X^j_k), recomputed from stored states.
StateVec empirical_meanfield(const ModelSpec& model, const ParticleEnsemble& ensemble, MeanFieldKind which,
                             int k);

struct QvEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::vector<double> per_particle;
};

/// Realized quadratic variation of M([0, t] x B), averaged over particles
/// and coordinates. Expectation: sum_{t_k < t} dt sum_{i in B} alpha_i(t_k).
QvEstimate qv_estimate(const DriverIncrements& driver, const SlidingControl& mu, const std::set<int>& atom_subset,
                       double t);

}  // namespace relaxctl
