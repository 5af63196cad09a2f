#pragma once

#include "relaxctl/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace relaxctl {

using DriftFn = std::function<StateVec(double t, const StateVec& x, const StateVec& y, const ActionVec& a)>;
using DiffusionFn =
    std::function<DiffusionMat(double t, const StateVec& x, const StateVec& y, const ActionVec& a)>;
using MeanFieldMap = std::function<StateVec(const StateVec& x)>;
using RunningCostFn = std::function<double(double t, const StateVec& x, const StateVec& y, const ActionVec& a)>;
using TerminalCostFn = std::function<double(const StateVec& x, const StateVec& y)>;

/// Axis-aligned box used for sampling and for reporting state excursions.
struct Box {
  StateVec lo;
  StateVec hi;

  bool contains(const StateVec& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
};

/// Coefficient bundle of a controlled mean-field SDE and its cost:
///   dX = b(t, X, E psi(X), a) dt + sigma(t, X, E phi(X), a) dW
///   J  = E[ int h(t, X, E varphi(X), a) dt + g(X_T, E lambda(X_T)) ]
struct ModelSpec {
  std::string name;
  int state_dim = 1;
  int action_dim = 1;
  StateVec x0;
  double horizon = 1.0;

  DriftFn drift;
  DiffusionFn diffusion;
  MeanFieldMap psi;
  MeanFieldMap phi;
  MeanFieldMap varphi;
  MeanFieldMap lambda;
  RunningCostFn running_cost;
  TerminalCostFn terminal_cost;

  /// Declared sup-norm bound and Lipschitz constant for b, sigma, psi, phi, h
  /// on the boxes below.
  double bound = 1.0;
  double lipschitz = 1.0;
  Box state_box;
  ActionVec action_lo;
  ActionVec action_hi;

  /// False when sigma ignores the action; the relaxed and naive dynamics then
  /// coincide in law and can share one Brownian driver.
  bool diffusion_depends_on_action = true;
};

std::vector<std::string> preset_names();

/// Market parameters of the mean-variance preset.
struct MeanVarianceParams {
  std::function<double(double)> rate = [](double) { return 0.02; };
  std::function<double(double)> appreciation = [](double) { return 0.08; };
  std::function<double(double)> volatility = [](double) { return 0.2; };
  double penalty = 1.0;
  double x0 = 1.0;
  double horizon = 1.0;
};

ModelSpec make_mean_variance(const MeanVarianceParams& params = {});

/// Named presets. Throws LookupError listing the available names.
ModelSpec lookup_model(const std::string& name);

struct FunctionCheck {
  std::string function;
  double worst_bound_ratio = 0.0;      // max |f| / B_max
  double worst_lipschitz_ratio = 0.0;  // max |f(x,y) - f(x',y')| / (L (|x-x'| + |y-y'|))
  bool pass = true;
  std::string witness;  // first violating sample, empty on pass
};

struct ValidationReport {
  std::string model;
  int samples = 0;
  std::uint64_t seed = 0;
  std::vector<FunctionCheck> checks;  // b, sigma, psi, phi, h
  bool pass = true;

  const FunctionCheck& check(const std::string& function) const;
};

/// Sampled check of the declared bound and Lipschitz constant on the model's
/// state and action boxes. Violations are report content, not exceptions.
ValidationReport validate_model(const ModelSpec& model, int samples, std::uint64_t seed);

/// Mean-field arguments evaluated for one time step.
struct MeanFields {
  StateVec psi;
  StateVec phi;
  StateVec varphi;
};

/// (b, vec(sigma sigma^T), h) in R^{d + d^2 + 1}.
Eigen::VectorXd moment_map(const ModelSpec& model, double t, const StateVec& x,
                           const MeanFields& mf, const ActionVec& a);

inline int moment_dim(int state_dim) { return state_dim + state_dim * state_dim + 1; }

}  // namespace relaxctl
