#include "relaxctl/caratheodory.hpp"

#include <fmt/format.h>

#include <cmath>
#include <optional>

namespace relaxctl {

namespace {

constexpr double kRankTolerance = 1e-12;
constexpr double kSolveTolerance = 1e-9;

// Stacked system [v_i; 1] over the support, each row scaled to unit max-norm
// so rank decisions do not depend on the units of the moment components.
Eigen::MatrixXd stacked_system(const Eigen::MatrixXd& vectors, const std::vector<int>& support) {
  const auto D = vectors.rows();
  const auto s = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd A(D + 1, s);
  for (Eigen::Index c = 0; c < s; ++c) {
    A.block(0, c, D, 1) = vectors.col(support[static_cast<std::size_t>(c)]);
    A(D, c) = 1.0;
  }
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    const double scale = A.row(r).cwiseAbs().maxCoeff();
    if (scale > 0.0) A.row(r) /= scale;
  }
  return A;
}

// Greedy basis in support order; returns positions of independent columns
// and positions of dependent ones.
void split_columns(const Eigen::MatrixXd& A, std::vector<Eigen::Index>& basis, std::vector<Eigen::Index>& dependent) {
  basis.clear();
  dependent.clear();
  const double scale = A.colwise().norm().maxCoeff();
  Eigen::MatrixXd Q(A.rows(), 0);
  for (Eigen::Index c = 0; c < A.cols(); ++c) {
    Eigen::VectorXd r = A.col(c);
    for (int pass = 0; pass < 2; ++pass) r -= Q * (Q.transpose() * r);
    const double norm = r.norm();
    if (norm > kRankTolerance * scale && Q.cols() < A.rows()) {
      Q.conservativeResize(Eigen::NoChange, Q.cols() + 1);
      Q.col(Q.cols() - 1) = r / norm;
      basis.push_back(c);
    } else {
      dependent.push_back(c);
    }
  }
}

// Affine dependence with coefficient 1 on column `dep`, or nullopt when the
// solve does not reproduce the column.
std::optional<Eigen::VectorXd> dependence(const Eigen::MatrixXd& A, const std::vector<Eigen::Index>& basis,
                                          Eigen::Index dep) {
  Eigen::MatrixXd B(A.rows(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t b = 0; b < basis.size(); ++b) B.col(static_cast<Eigen::Index>(b)) = A.col(basis[b]);
  const Eigen::VectorXd target = A.col(dep);
  Eigen::VectorXd x = B.colPivHouseholderQr().solve(target);
  if (!x.allFinite() || (B * x - target).norm() > kSolveTolerance * std::max(1.0, target.norm())) {
    return std::nullopt;
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(A.cols());
  c(dep) = 1.0;
  for (std::size_t b = 0; b < basis.size(); ++b) c(basis[b]) = -x(static_cast<Eigen::Index>(b));
  return c;
}

}  // namespace

ReductionResult reduce_support(std::span<const double> weights, const Eigen::MatrixXd& vectors) {
  const auto p = static_cast<Eigen::Index>(weights.size());
  if (vectors.cols() != p) {
    throw ValidationError(fmt::format("{} weights for {} vectors", weights.size(), vectors.cols()));
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > SlidingControl::kRenormalizeTolerance) {
    throw ValidationError(fmt::format("weights sum to {}", total));
  }

  ReductionResult result;
  result.weights.assign(weights.begin(), weights.end());
  auto& w = result.weights;
  const auto bound = vectors.rows() + 1;

  std::vector<Eigen::Index> basis, dependent;
  while (true) {
    std::vector<int> support;
    for (Eigen::Index i = 0; i < p; ++i) {
      if (w[static_cast<std::size_t>(i)] > 0.0) support.push_back(static_cast<int>(i));
    }
    const Eigen::MatrixXd A = stacked_system(vectors, support);
    split_columns(A, basis, dependent);
    if (dependent.empty()) break;

    std::optional<Eigen::VectorXd> c;
    for (auto dep : dependent) {
      c = dependence(A, basis, dep);
      if (c) break;
    }
    if (!c) {
      result.degenerate = static_cast<Eigen::Index>(support.size()) > bound;
      break;
    }

    // Step length: first weight to reach zero along -c, smallest index on ties.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t hit = 0;
    for (std::size_t pos = 0; pos < support.size(); ++pos) {
      const double ci = (*c)(static_cast<Eigen::Index>(pos));
      if (ci > 0.0) {
        const double ratio = w[static_cast<std::size_t>(support[pos])] / ci;
        if (ratio < theta) {
          theta = ratio;
          hit = pos;
        }
      }
    }
    for (std::size_t pos = 0; pos < support.size(); ++pos) {
      auto& wi = w[static_cast<std::size_t>(support[pos])];
      wi -= theta * (*c)(static_cast<Eigen::Index>(pos));
      if (wi < 0.0) wi = 0.0;
    }
    w[static_cast<std::size_t>(support[hit])] = 0.0;
    ++result.removed;
  }

  if (result.removed > 0) {
    double sum = 0.0;
    for (double wi : w) sum += wi;
    for (double& wi : w) wi /= sum;
  }
  return result;
}

Eigen::MatrixXd step_moments(const ModelSpec& model, const SlidingControl& mu, const ParticleEnsemble& ensemble,
                             int k) {
  const MeanFields mf{ensemble.meanfield(MeanFieldKind::psi, k), ensemble.meanfield(MeanFieldKind::phi, k),
                      ensemble.meanfield(MeanFieldKind::varphi, k)};
  const StateVec xbar = ensemble.mean_state(k);
  const double t = mu.time().time(k);
  Eigen::MatrixXd V(moment_dim(model.state_dim), mu.atoms());
  for (int i = 0; i < mu.atoms(); ++i) V.col(i) = moment_map(model, t, xbar, mf, mu.grid().atom(i));
  return V;
}

namespace {

void require_pairing(const SlidingControl& mu, const ParticleEnsemble& ensemble) {
  if (ensemble.control_fingerprint() != fingerprint(mu) || !(ensemble.time() == mu.time())) {
    throw ValidationError("ensemble was not simulated under this control");
  }
}

Eigen::VectorXd weighted_mean(const Eigen::MatrixXd& V, std::span<const double> w) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(V.rows());
  for (Eigen::Index i = 0; i < V.cols(); ++i) {
    if (w[static_cast<std::size_t>(i)] != 0.0) m += w[static_cast<std::size_t>(i)] * V.col(i);
  }
  return m;
}

int support_size(std::span<const double> w) {
  int s = 0;
  for (double x : w) s += x > 0.0 ? 1 : 0;
  return s;
}

}  // namespace

ReducedControl sliding_from_relaxed(const ModelSpec& model, const SlidingControl& mu,
                                    const ParticleEnsemble& ensemble) {
  require_pairing(mu, ensemble);
  const int D = moment_dim(model.state_dim);
  const int m = mu.grid().action_dim();
  std::vector<double> weights;
  weights.reserve(mu.weights().size());
  std::vector<StepReduction> steps;
  steps.reserve(static_cast<std::size_t>(mu.steps()));
  double max_residual = 0.0;
  int max_support = 0;

  for (int k = 0; k < mu.steps(); ++k) {
    const Eigen::MatrixXd V = step_moments(model, mu, ensemble, k);
    Eigen::MatrixXd augmented(D + m, mu.atoms());
    augmented.topRows(D) = V;
    for (int i = 0; i < mu.atoms(); ++i) augmented.block(D, i, m, 1) = mu.grid().atom(i);

    const auto row = mu.row(k);
    auto first = reduce_support(row, augmented);
    ReductionResult reduced = first;
    if (support_size(first.weights) > D + 1) {
      reduced = reduce_support(first.weights, V);
      reduced.removed += first.removed;
    }

    const Eigen::VectorXd before = weighted_mean(V, row);
    const Eigen::VectorXd after = weighted_mean(V, reduced.weights);
    StepReduction info;
    info.step = k;
    info.support_before = support_size(row);
    info.support_after = support_size(reduced.weights);
    info.moment_residual = (before - after).cwiseAbs().maxCoeff() / std::max(1.0, before.cwiseAbs().maxCoeff());
    info.degenerate = reduced.degenerate;
    max_residual = std::max(max_residual, info.moment_residual);
    max_support = std::max(max_support, info.support_after);
    steps.push_back(info);
    weights.insert(weights.end(), reduced.weights.begin(), reduced.weights.end());
  }
  return ReducedControl{SlidingControl(mu.grid(), mu.time(), std::move(weights)), std::move(steps), max_residual,
                        max_support};
}

std::variant<StrictControl, NotRepresentable> extract_strict_if_convex(const ModelSpec& model,
                                                                      const SlidingControl& mu,
                                                                      const ParticleEnsemble& ensemble) {
  require_pairing(mu, ensemble);
  constexpr double kMatchTolerance = 1e-8;
  std::vector<int> assignment;
  assignment.reserve(static_cast<std::size_t>(mu.steps()));
  for (int k = 0; k < mu.steps(); ++k) {
    const Eigen::MatrixXd V = step_moments(model, mu, ensemble, k);
    const Eigen::VectorXd target = weighted_mean(V, mu.row(k));
    const Eigen::VectorXd range = V.rowwise().maxCoeff() - V.rowwise().minCoeff();
    int match = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < mu.atoms(); ++i) {
      double mismatch = 0.0;
      for (Eigen::Index c = 0; c < V.rows(); ++c) {
        const double scale = range(c) > 0.0 ? range(c) : 1.0;
        mismatch = std::max(mismatch, std::abs(V(c, i) - target(c)) / scale);
      }
      best = std::min(best, mismatch);
      if (mismatch <= kMatchTolerance) {
        match = i;
        break;
      }
    }
    if (match < 0) return NotRepresentable{k, best};
    assignment.push_back(match);
  }
  return StrictControl(mu.grid(), mu.time(), std::move(assignment));
}

}  // namespace relaxctl
