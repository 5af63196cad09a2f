#include "oracles.hpp"

#include "relaxctl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oracle {

namespace {

template <typename F>
std::array<double, 2> rk4(const std::array<double, 2>& y, double t, double h, F&& f) {
  auto add = [](const std::array<double, 2>& a, const std::array<double, 2>& b, double s) {
    return std::array<double, 2>{a[0] + s * b[0], a[1] + s * b[1]};
  };
  const auto k1 = f(t, y);
  const auto k2 = f(t + h / 2, add(y, k1, h / 2));
  const auto k3 = f(t + h / 2, add(y, k2, h / 2));
  const auto k4 = f(t + h, add(y, k3, h));
  return {y[0] + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
          y[1] + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
}

}  // namespace

MeanVarianceSolution solve_mean_variance(double rho, double b, double sigma, double mu, double x0, double T,
                                         int steps) {
  const double h = T / steps;
  // Adjoints (p_m, p_v): p_m' = -rho p_m, p_v' = -2 rho p_v, p_m(T) = -1, p_v(T) = mu.
  std::vector<std::array<double, 2>> adj(static_cast<std::size_t>(2 * steps + 1));
  adj.back() = {-1.0, mu};
  auto adjoint_rhs = [&](double, const std::array<double, 2>& p) {
    return std::array<double, 2>{-rho * p[0], -2.0 * rho * p[1]};
  };
  // Half-step resolution so RK4 stages of the forward pass read exact nodes.
  for (int i = 2 * steps; i > 0; --i) {
    adj[static_cast<std::size_t>(i - 1)] =
        rk4(adj[static_cast<std::size_t>(i)], (i * h) / 2, -h / 2, adjoint_rhs);
  }
  auto control_at = [&](double t) {
    const auto idx = static_cast<std::size_t>(std::lround(2.0 * t / h));
    const auto& p = adj[idx];
    return -p[0] * (b - rho) / (2.0 * p[1] * sigma * sigma);
  };

  MeanVarianceSolution sol;
  std::array<double, 2> y{x0, 0.0};
  auto state_rhs = [&](double t, const std::array<double, 2>& s) {
    const double pi = control_at(t);
    return std::array<double, 2>{rho * s[0] + (b - rho) * pi, 2.0 * rho * s[1] + sigma * sigma * pi * pi};
  };
  for (int i = 0; i <= steps; ++i) {
    sol.times.push_back(i * h);
    sol.control.push_back(control_at(i * h));
    if (i < steps) y = rk4(y, i * h, h, state_rhs);
  }
  sol.terminal_mean = y[0];
  sol.terminal_variance = y[1];
  sol.value = -y[0] + mu * y[1];
  return sol;
}

double mean_variance_cost(double rho, double b, double sigma, double mu, double x0, double T, double pi,
                          int steps) {
  const double h = T / steps;
  std::array<double, 2> y{x0, 0.0};
  auto rhs = [&](double, const std::array<double, 2>& s) {
    return std::array<double, 2>{rho * s[0] + (b - rho) * pi, 2.0 * rho * s[1] + sigma * sigma * pi * pi};
  };
  for (int i = 0; i < steps; ++i) y = rk4(y, i * h, h, rhs);
  return -y[0] + mu * y[1];
}

Eigen::VectorXd weighted_moment(std::span<const double> weights, const Eigen::MatrixXd& vectors) {
  Eigen::VectorXd out(vectors.rows());
  for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      s += static_cast<long double>(weights[i]) * static_cast<long double>(vectors(r, static_cast<Eigen::Index>(i)));
    }
    out(r) = static_cast<double>(s);
  }
  return out;
}

std::vector<double> simplex_projection_bisect(std::span<const double> v) {
  // sum_i max(v_i - tau, 0) is decreasing in tau; find the root of sum = 1.
  double lo = *std::min_element(v.begin(), v.end()) - 1.0;
  double hi = *std::max_element(v.begin(), v.end());
  auto mass = [&](double tau) {
    double s = 0.0;
    for (double x : v) s += std::max(x - tau, 0.0);
    return s;
  };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) > 1.0 ? lo : hi) = mid;
  }
  std::vector<double> out;
  for (double x : v) out.push_back(std::max(x - 0.5 * (lo + hi), 0.0));
  return out;
}

ScalarPaths relaxed_scalar(const relaxctl::ModelSpec& model, const std::vector<double>& atoms,
                           const std::vector<double>& row, double T, int K, int N, std::uint64_t seed) {
  using relaxctl::StateVec;
  using relaxctl::ActionVec;
  const relaxctl::GaussianStream stream(seed);
  const double dt = T / K;
  std::vector<std::uint32_t> slot(atoms.size());
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (row[i] > 0.0) slot[i] = next++;
  }
  auto vec = [](double v) {
    StateVec s(1);
    s(0) = v;
    return s;
  };
  auto act = [](double v) {
    ActionVec a(1);
    a(0) = v;
    return a;
  };
  auto mean_of = [&](const std::vector<double>& xs, const relaxctl::MeanFieldMap& f) {
    double s = 0.0;
    for (double x : xs) s += f(vec(x))(0);
    return s / static_cast<double>(xs.size());
  };

  ScalarPaths out;
  out.x.assign(static_cast<std::size_t>(N) * static_cast<std::size_t>(K + 1), 0.0);
  out.cost.assign(static_cast<std::size_t>(N), 0.0);
  std::vector<double> cur(static_cast<std::size_t>(N), model.x0(0));
  for (int k = 0; k <= K; ++k) {
    for (int j = 0; j < N; ++j) out.x[static_cast<std::size_t>(j) * (K + 1) + k] = cur[static_cast<std::size_t>(j)];
    if (k == K) break;
    const double t = k * dt;
    const double m_psi = mean_of(cur, model.psi);
    const double m_phi = mean_of(cur, model.phi);
    const double m_varphi = mean_of(cur, model.varphi);
    std::vector<double> nxt(cur.size());
    for (int j = 0; j < N; ++j) {
      const double x = cur[static_cast<std::size_t>(j)];
      double drift = 0.0, noise = 0.0, h = 0.0;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (!(row[i] > 0.0)) continue;
        const double z = stream.normal(static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(k), slot[i], 0);
        drift += row[i] * model.drift(t, vec(x), vec(m_psi), act(atoms[i]))(0);
        noise += std::sqrt(row[i]) * model.diffusion(t, vec(x), vec(m_phi), act(atoms[i]))(0, 0) * std::sqrt(dt) * z;
        h += row[i] * model.running_cost(t, vec(x), vec(m_varphi), act(atoms[i]));
      }
      nxt[static_cast<std::size_t>(j)] = x + drift * dt + noise;
      out.cost[static_cast<std::size_t>(j)] += h * dt;
    }
    cur = std::move(nxt);
  }
  const double m_lambda = mean_of(cur, model.lambda);
  for (int j = 0; j < N; ++j) {
    out.cost[static_cast<std::size_t>(j)] += model.terminal_cost(vec(cur[static_cast<std::size_t>(j)]), vec(m_lambda));
  }
  return out;
}

}  // namespace oracle
