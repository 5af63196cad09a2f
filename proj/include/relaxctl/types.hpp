#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace relaxctl {

// State and action dimensions are small; a fixed upper bound keeps the
// vectors on the stack inside the particle loops.
inline constexpr int kMaxDim = 4;

using StateVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using ActionVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using DiffusionMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class LookupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, long step, long particle)
      : std::runtime_error(what), step_(step), particle_(particle) {}

  long step() const { return step_; }
  long particle() const { return particle_; }

 private:
  long step_;
  long particle_;
};

}  // namespace relaxctl
