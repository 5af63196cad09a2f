#include "relaxctl/mfsde_sim.hpp"

#include "relaxctl/parallel.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace relaxctl {

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::strict: return "strict";
    case Regime::naive: return "naive";
    case Regime::relaxed: return "relaxed";
  }
  return "unknown";
}

namespace {

std::size_t index3(int j, int k, int c, int steps_plus_one, int d) {
  return (static_cast<std::size_t>(j) * static_cast<std::size_t>(steps_plus_one) + static_cast<std::size_t>(k)) *
             static_cast<std::size_t>(d) +
         static_cast<std::size_t>(c);
}

StateVec read_vec(const std::vector<double>& buf, std::size_t offset, int d) {
  StateVec v(d);
  for (int c = 0; c < d; ++c) v(c) = buf[offset + static_cast<std::size_t>(c)];
  return v;
}

struct ActiveAtom {
  int index;
  double weight;
  double sqrt_weight;
};

}  // namespace

StateVec ParticleEnsemble::state(int j, int k) const {
  if (j < 0 || j >= particles_ || k < 0 || k > steps()) {
    throw DomainError(fmt::format("state ({}, {}) out of range", j, k));
  }
  if (has_paths()) return read_vec(paths_, index3(j, k, 0, steps() + 1, dim_), dim_);
  if (k == 0) return x0_;
  if (k == steps()) return terminal(j);
  throw DomainError("ensemble was simulated without path recording");
}

StateVec ParticleEnsemble::terminal(int j) const {
  return read_vec(terminal_, static_cast<std::size_t>(j) * static_cast<std::size_t>(dim_), dim_);
}

StateVec ParticleEnsemble::meanfield(MeanFieldKind which, int k) const {
  if (k < 0 || k > steps()) throw DomainError(fmt::format("step {} out of range", k));
  return read_vec(meanfields_[static_cast<int>(which)], static_cast<std::size_t>(k) * dim_, dim_);
}

StateVec ParticleEnsemble::mean_state(int k) const {
  if (k < 0 || k > steps()) throw DomainError(fmt::format("step {} out of range", k));
  return read_vec(mean_, static_cast<std::size_t>(k) * dim_, dim_);
}

StateVec ParticleEnsemble::variance_state(int k) const {
  if (k < 0 || k > steps()) throw DomainError(fmt::format("step {} out of range", k));
  return read_vec(variance_, static_cast<std::size_t>(k) * dim_, dim_);
}

DriverIncrements::DriverIncrements(const SlidingControl& control, int particles, int dim, std::uint64_t seed)
    : stream_(seed),
      particles_(particles),
      steps_(control.steps()),
      atoms_(control.atoms()),
      dim_(dim),
      dt_(control.time().dt()),
      sqrt_dt_(std::sqrt(control.time().dt())),
      slots_(static_cast<std::size_t>(steps_) * static_cast<std::size_t>(atoms_)) {
  for (int k = 0; k < steps_; ++k) {
    int next = 0;
    const auto row = control.row(k);
    for (int i = 0; i < atoms_; ++i) {
      if (row[static_cast<std::size_t>(i)] > 0.0) slots_[static_cast<std::size_t>(k) * atoms_ + i] = next++;
    }
    for (int i = 0; i < atoms_; ++i) {
      if (!(row[static_cast<std::size_t>(i)] > 0.0)) slots_[static_cast<std::size_t>(k) * atoms_ + i] = next++;
    }
  }
}

class Simulator {
 public:
  static ParticleEnsemble run(const ModelSpec& model, const SlidingControl& control, Regime regime, int N,
                              std::uint64_t seed, const SimOptions& options);
};

ParticleEnsemble Simulator::run(const ModelSpec& model, const SlidingControl& control, Regime regime, int N,
                                std::uint64_t seed, const SimOptions& options) {
  if (N < 1) throw ValidationError(fmt::format("particle count must be positive, got {}", N));
  const int d = model.state_dim;
  if (d < 1 || d > kMaxDim || model.x0.size() != d) {
    throw ValidationError("model state dimension and initial state disagree");
  }
  if (control.grid().action_dim() != model.action_dim) {
    throw ValidationError(fmt::format("control atoms have dimension {}, model expects {}",
                                      control.grid().action_dim(), model.action_dim));
  }
  const int K = control.steps();
  const int p = control.atoms();
  const double dt = control.time().dt();
  const double sqrt_dt = std::sqrt(dt);

  std::vector<std::vector<ActiveAtom>> active(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const auto row = control.row(k);
    for (int i = 0; i < p; ++i) {
      const double w = row[static_cast<std::size_t>(i)];
      if (w > 0.0) active[static_cast<std::size_t>(k)].push_back({i, w, std::sqrt(w)});
    }
    if (regime == Regime::strict &&
        (active[static_cast<std::size_t>(k)].size() != 1 || active[static_cast<std::size_t>(k)][0].weight != 1.0)) {
      throw ValidationError(fmt::format("strict dynamics need a Dirac control; row {} is not", k));
    }
  }

  ParticleEnsemble ens(control.time());
  ens.particles_ = N;
  ens.dim_ = d;
  ens.regime_ = regime;
  ens.control_fingerprint_ = fingerprint(control);
  ens.manifest_ = {seed, std::string(GaussianStream::kScheme)};
  ens.x0_ = model.x0;
  const auto Nu = static_cast<std::size_t>(N);
  const auto du = static_cast<std::size_t>(d);
  const auto stepsu = static_cast<std::size_t>(K) + 1;
  if (options.recording == Recording::full) ens.paths_.assign(Nu * stepsu * du, 0.0);
  for (auto& mf : ens.meanfields_) mf.assign(stepsu * du, 0.0);
  ens.mean_.assign(stepsu * du, 0.0);
  ens.variance_.assign(stepsu * du, 0.0);
  ens.running_cost_.assign(Nu, 0.0);
  ens.sup_square_.assign(Nu, 0.0);
  ens.sup_deviation_.assign(Nu, 0.0);

  std::vector<double> cur(Nu * du), nxt(Nu * du);
  for (std::size_t j = 0; j < Nu; ++j) {
    for (int c = 0; c < d; ++c) cur[j * du + static_cast<std::size_t>(c)] = model.x0(c);
  }

  DriverIncrements driver(control, N, d, seed);
  const GaussianStream stream(seed);
  const double blowup = 1e6 * (1.0 + model.x0.norm());
  const bool check_box = model.state_box.lo.size() == d && model.state_box.hi.size() == d;

  std::vector<double> map_vals[4];
  for (auto& v : map_vals) v.assign(Nu * du, 0.0);
  std::vector<double> sq_dev(Nu * du);
  std::vector<int> outside(Nu, 0);
  std::vector<long> failure(Nu, -1);
  const MeanFieldMap* maps[4] = {&model.psi, &model.phi, &model.varphi, &model.lambda};

  for (int k = 0;; ++k) {
    const double tk = control.time().time(k);
    parallel_for(options.threads, Nu, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t j = lo; j < hi; ++j) {
        const StateVec x = read_vec(cur, j * du, d);
        for (int m = 0; m < 4; ++m) {
          const StateVec v = (*maps[m])(x);
          for (int c = 0; c < d; ++c) map_vals[m][j * du + static_cast<std::size_t>(c)] = v(c);
        }
        ens.sup_square_[j] = std::max(ens.sup_square_[j], x.squaredNorm());
        ens.sup_deviation_[j] = std::max(ens.sup_deviation_[j], (x - model.x0).squaredNorm());
        outside[j] = (check_box && k > 0 && !model.state_box.contains(x)) ? 1 : 0;
        if (!ens.paths_.empty()) {
          for (int c = 0; c < d; ++c) ens.paths_[index3(static_cast<int>(j), k, c, K + 1, d)] = x(c);
        }
      }
    });
    for (int m = 0; m < 4; ++m) {
      for (std::size_t c = 0; c < du; ++c) {
        ens.meanfields_[m][static_cast<std::size_t>(k) * du + c] = pairwise_sum(map_vals[m], Nu, du, c) / N;
      }
    }
    for (std::size_t c = 0; c < du; ++c) {
      const double mean = pairwise_sum(cur, Nu, du, c) / N;
      ens.mean_[static_cast<std::size_t>(k) * du + c] = mean;
      for (std::size_t j = 0; j < Nu; ++j) {
        const double dev = cur[j * du + c] - mean;
        sq_dev[j * du + c] = dev * dev;
      }
      ens.variance_[static_cast<std::size_t>(k) * du + c] = pairwise_sum(sq_dev, Nu, du, c) / N;
    }
    for (int flag : outside) ens.box_exits_ += flag;
    if (k == K) break;

    const StateVec m_psi = ens.meanfield(MeanFieldKind::psi, k);
    const StateVec m_phi = ens.meanfield(MeanFieldKind::phi, k);
    const StateVec m_varphi = ens.meanfield(MeanFieldKind::varphi, k);
    const auto& atoms_k = active[static_cast<std::size_t>(k)];

    parallel_for(options.threads, Nu, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t j = lo; j < hi; ++j) {
        const StateVec x = read_vec(cur, j * du, d);
        const auto jj = static_cast<std::uint32_t>(j);
        const auto kk = static_cast<std::uint32_t>(k);
        StateVec drift(d);
        StateVec next(d);
        double running = 0.0;
        bool first = true;
        if (regime == Regime::relaxed) {
          StateVec noise(d);
          StateVec dB(d);
          for (const auto& at : atoms_k) {
            const ActionVec& a = control.grid().atom(at.index);
            for (int c = 0; c < d; ++c) dB(c) = driver(static_cast<int>(j), k, at.index, c);
            const StateVec b = at.weight * model.drift(tk, x, m_psi, a);
            const StateVec term = at.sqrt_weight * (model.diffusion(tk, x, m_phi, a) * dB);
            const double h = at.weight * model.running_cost(tk, x, m_varphi, a);
            if (first) {
              drift = b;
              noise = term;
              running = h;
              first = false;
            } else {
              drift += b;
              noise += term;
              running += h;
            }
          }
          next = x + drift * dt + noise;
        } else {
          DiffusionMat sigma(d, d);
          StateVec dW(d);
          for (int c = 0; c < d; ++c) dW(c) = sqrt_dt * stream.normal(jj, kk, 0, static_cast<std::uint32_t>(c));
          for (const auto& at : atoms_k) {
            const ActionVec& a = control.grid().atom(at.index);
            const StateVec b = at.weight * model.drift(tk, x, m_psi, a);
            const DiffusionMat s = at.weight * model.diffusion(tk, x, m_phi, a);
            const double h = at.weight * model.running_cost(tk, x, m_varphi, a);
            if (first) {
              drift = b;
              sigma = s;
              running = h;
              first = false;
            } else {
              drift += b;
              sigma += s;
              running += h;
            }
          }
          next = x + drift * dt + sigma * dW;
        }
        ens.running_cost_[j] += dt * running;
        if (!next.allFinite() || next.norm() > blowup) failure[j] = k + 1;
        for (int c = 0; c < d; ++c) nxt[j * du + static_cast<std::size_t>(c)] = next(c);
      }
    });
    for (std::size_t j = 0; j < Nu; ++j) {
      if (failure[j] >= 0) {
        throw SimulationError(fmt::format("state left the admissible range at step {} for particle {}",
                                          failure[j], j),
                              failure[j], static_cast<long>(j));
      }
    }
    std::swap(cur, nxt);
  }
  ens.terminal_ = cur;
  return ens;
}

ParticleEnsemble simulate(const ModelSpec& model, const SlidingControl& control, Regime regime, int particles,
                          std::uint64_t seed, const SimOptions& options) {
  return Simulator::run(model, control, regime, particles, seed, options);
}

ParticleEnsemble simulate_strict(const ModelSpec& model, const StrictControl& u, int particles, std::uint64_t seed,
                                 const SimOptions& options) {
  return Simulator::run(model, embed_strict(u), Regime::strict, particles, seed, options);
}

ParticleEnsemble simulate_naive_relaxed(const ModelSpec& model, const SlidingControl& mu, int particles,
                                        std::uint64_t seed, const SimOptions& options) {
  return Simulator::run(model, mu, Regime::naive, particles, seed, options);
}

std::pair<ParticleEnsemble, DriverIncrements> simulate_relaxed(const ModelSpec& model, const SlidingControl& mu,
                                                               int particles, std::uint64_t seed,
                                                               const SimOptions& options) {
  auto ens = Simulator::run(model, mu, Regime::relaxed, particles, seed, options);
  DriverIncrements driver(mu, particles, model.state_dim, seed);
  return {std::move(ens), std::move(driver)};
}

StateVec empirical_meanfield(const ModelSpec& model, const ParticleEnsemble& ensemble, MeanFieldKind which,
                             int k) {
  const MeanFieldMap* maps[4] = {&model.psi, &model.phi, &model.varphi, &model.lambda};
  const auto& map = *maps[static_cast<int>(which)];
  const int N = ensemble.particles();
  const int d = ensemble.dim();
  std::vector<double> vals(static_cast<std::size_t>(N) * static_cast<std::size_t>(d));
  for (int j = 0; j < N; ++j) {
    const StateVec v = map(ensemble.state(j, k));
    for (int c = 0; c < d; ++c) vals[static_cast<std::size_t>(j) * d + static_cast<std::size_t>(c)] = v(c);
  }
  StateVec out(d);
  for (int c = 0; c < d; ++c) {
    out(c) = pairwise_sum(vals, static_cast<std::size_t>(N), static_cast<std::size_t>(d), static_cast<std::size_t>(c)) / N;
  }
  return out;
}

QvEstimate qv_estimate(const DriverIncrements& driver, const SlidingControl& mu, const std::set<int>& atom_subset,
                       double t) {
  const int kt = mu.time().index_of(t);
  if (mu.atoms() != driver.atoms() || mu.steps() != driver.steps()) {
    throw ValidationError("driver increments and control have different shapes");
  }
  for (int i : atom_subset) {
    if (i < 0 || i >= mu.atoms()) throw ValidationError(fmt::format("atom index {} out of range", i));
  }
  const int N = driver.particles();
  const int d = driver.dim();
  QvEstimate est;
  est.per_particle.assign(static_cast<std::size_t>(N), 0.0);
  if (atom_subset.empty()) return est;
  for (int j = 0; j < N; ++j) {
    double qv = 0.0;
    for (int k = 0; k < kt; ++k) {
      for (int c = 0; c < d; ++c) {
        double incr = 0.0;
        for (int i : atom_subset) {
          const double w = mu.weight(k, i);
          if (w > 0.0) incr += std::sqrt(w) * driver(j, k, i, c);
        }
        qv += incr * incr;
      }
    }
    est.per_particle[static_cast<std::size_t>(j)] = qv / d;
  }
  const double mean = pairwise_sum(est.per_particle, static_cast<std::size_t>(N)) / N;
  double ss = 0.0;
  for (double q : est.per_particle) ss += (q - mean) * (q - mean);
  est.value = mean;
  est.std_error = N > 1 ? std::sqrt(ss / (N - 1) / N) : 0.0;
  return est;
}

}  // namespace relaxctl
