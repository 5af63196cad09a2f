#include "relaxctl/coefficients.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace relaxctl {

namespace {

StateVec scalar(double v) {
  StateVec s(1);
  s(0) = v;
  return s;
}

DiffusionMat scalar_mat(double v) {
  DiffusionMat m(1, 1);
  m(0, 0) = v;
  return m;
}

ActionVec action_scalar(double v) {
  ActionVec a(1);
  a(0) = v;
  return a;
}

StateVec identity_map(const StateVec& x) { return x; }

Box scalar_box(double lo, double hi) { return Box{scalar(lo), scalar(hi)}; }

ModelSpec scalar_model(std::string name) {
  ModelSpec m;
  m.name = std::move(name);
  m.state_dim = 1;
  m.action_dim = 1;
  m.x0 = scalar(0.0);
  m.horizon = 1.0;
  m.psi = identity_map;
  m.phi = identity_map;
  m.varphi = identity_map;
  m.lambda = identity_map;
  m.running_cost = [](double, const StateVec&, const StateVec&, const ActionVec&) { return 0.0; };
  m.terminal_cost = [](const StateVec&, const StateVec&) { return 0.0; };
  m.action_lo = action_scalar(-1.0);
  m.action_hi = action_scalar(1.0);
  return m;
}

ModelSpec rademacher_ode() {
  auto m = scalar_model("rademacher_ode");
  m.drift = [](double, const StateVec&, const StateVec&, const ActionVec& a) { return scalar(a(0)); };
  m.diffusion = [](double, const StateVec&, const StateVec&, const ActionVec&) { return scalar_mat(0.0); };
  m.running_cost = [](double, const StateVec& x, const StateVec&, const ActionVec&) { return x(0) * x(0); };
  m.state_box = scalar_box(-1.0, 1.0);
  m.bound = 1.0;
  m.lipschitz = 2.0;
  m.diffusion_depends_on_action = false;
  return m;
}

ModelSpec fleming_drift(bool squared) {
  auto m = scalar_model(squared ? "fleming_drift_squared" : "fleming_drift");
  m.drift = [](double, const StateVec&, const StateVec&, const ActionVec& a) { return scalar(a(0)); };
  m.diffusion = [](double, const StateVec&, const StateVec&, const ActionVec&) { return scalar_mat(1.0); };
  if (squared) {
    m.running_cost = [](double, const StateVec&, const StateVec& y, const ActionVec& a) {
      const double s = 1.0 - a(0) * a(0);
      return y(0) * y(0) + s * s;
    };
    m.bound = 5.0;
  } else {
    m.running_cost = [](double, const StateVec&, const StateVec& y, const ActionVec& a) {
      const double s = 1.0 - a(0);
      return y(0) * y(0) + s * s;
    };
    m.bound = 8.0;
  }
  m.state_box = scalar_box(-2.0, 2.0);
  m.lipschitz = 4.0;
  m.diffusion_depends_on_action = false;
  return m;
}

ModelSpec diffusion_counterexample() {
  auto m = scalar_model("diffusion_counterexample");
  m.drift = [](double, const StateVec&, const StateVec&, const ActionVec&) { return scalar(0.0); };
  m.diffusion = [](double, const StateVec&, const StateVec&, const ActionVec& a) { return scalar_mat(a(0)); };
  m.state_box = scalar_box(-3.0, 3.0);
  m.bound = 3.0;
  m.lipschitz = 1.0;
  m.diffusion_depends_on_action = true;
  return m;
}

ModelSpec lipschitz_mf_test() {
  auto m = scalar_model("lipschitz_mf_test");
  m.drift = [](double, const StateVec& x, const StateVec& y, const ActionVec& a) {
    return scalar(std::tanh(x(0)) + 0.5 * std::tanh(y(0)) + a(0));
  };
  m.diffusion = [](double, const StateVec& x, const StateVec& y, const ActionVec&) {
    return scalar_mat(1.0 + 0.5 * std::cos(x(0)) + 0.25 * std::sin(y(0)));
  };
  m.psi = [](const StateVec& x) { return scalar(std::tanh(x(0))); };
  m.phi = [](const StateVec& x) { return scalar(std::tanh(x(0))); };
  m.running_cost = [](double, const StateVec& x, const StateVec&, const ActionVec& a) {
    return x(0) * x(0) + a(0) * a(0);
  };
  m.terminal_cost = [](const StateVec& x, const StateVec&) { return x(0) * x(0); };
  m.state_box = scalar_box(-1.0, 1.0);
  m.bound = 2.5;
  m.lipschitz = 2.0;
  m.diffusion_depends_on_action = false;
  return m;
}

}  // namespace

ModelSpec make_mean_variance(const MeanVarianceParams& p) {
  auto m = scalar_model("mean_variance");
  m.x0 = scalar(p.x0);
  m.horizon = p.horizon;
  m.drift = [rate = p.rate, app = p.appreciation](double t, const StateVec& x, const StateVec&,
                                                  const ActionVec& a) {
    return scalar(rate(t) * x(0) + a(0) * (app(t) - rate(t)));
  };
  m.diffusion = [vol = p.volatility](double t, const StateVec&, const StateVec&, const ActionVec& a) {
    return scalar_mat(a(0) * vol(t));
  };
  m.terminal_cost = [mu = p.penalty](const StateVec& x, const StateVec& y) {
    const double dev = x(0) - y(0);
    return -x(0) + mu * dev * dev;
  };
  m.state_box = scalar_box(0.0, 3.0);
  m.action_lo = action_scalar(0.0);
  m.action_hi = action_scalar(1.5);
  m.bound = 3.0;
  m.lipschitz = 1.0;
  m.diffusion_depends_on_action = true;
  return m;
}

std::vector<std::string> preset_names() {
  return {"rademacher_ode",           "fleming_drift", "fleming_drift_squared",
          "diffusion_counterexample", "mean_variance", "lipschitz_mf_test"};
}

ModelSpec lookup_model(const std::string& name) {
  if (name == "rademacher_ode") return rademacher_ode();
  if (name == "fleming_drift") return fleming_drift(false);
  if (name == "fleming_drift_squared") return fleming_drift(true);
  if (name == "diffusion_counterexample") return diffusion_counterexample();
  if (name == "mean_variance") return make_mean_variance();
  if (name == "lipschitz_mf_test") return lipschitz_mf_test();
  throw LookupError(fmt::format("unknown model '{}'; available presets: {}", name,
                                fmt::join(preset_names(), ", ")));
}

const FunctionCheck& ValidationReport::check(const std::string& function) const {
  for (const auto& c : checks) {
    if (c.function == function) return c;
  }
  throw LookupError(fmt::format("no check named '{}'", function));
}

namespace {

class BoxSampler {
 public:
  explicit BoxSampler(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  StateVec state(const Box& box) {
    StateVec x(box.lo.size());
    for (int c = 0; c < x.size(); ++c) x(c) = uniform(box.lo(c), box.hi(c));
    return x;
  }

  ActionVec action(const ActionVec& lo, const ActionVec& hi) {
    ActionVec a(lo.size());
    for (int c = 0; c < a.size(); ++c) a(c) = uniform(lo(c), hi(c));
    return a;
  }

 private:
  std::mt19937_64 engine_;
};

std::string fmt_vec(const Eigen::Ref<const Eigen::VectorXd>& v) {
  std::vector<double> vals(v.data(), v.data() + v.size());
  return fmt::format("[{}]", fmt::join(vals, ", "));
}

constexpr double kSlack = 1e-12;

void record(FunctionCheck& check, double bound_ratio, double lip_ratio, const std::string& where) {
  const bool was_ok = check.pass;
  check.worst_bound_ratio = std::max(check.worst_bound_ratio, bound_ratio);
  check.worst_lipschitz_ratio = std::max(check.worst_lipschitz_ratio, lip_ratio);
  if (bound_ratio > 1.0 + kSlack || lip_ratio > 1.0 + kSlack || !std::isfinite(bound_ratio) ||
      !std::isfinite(lip_ratio)) {
    check.pass = false;
    if (was_ok) {
      check.witness = fmt::format("{} (bound ratio {}, Lipschitz ratio {})", where, bound_ratio, lip_ratio);
    }
  }
}

}  // namespace

ValidationReport validate_model(const ModelSpec& model, int samples, std::uint64_t seed) {
  if (samples < 1) throw ValidationError("validate_model needs at least one sample");
  ValidationReport report;
  report.model = model.name;
  report.samples = samples;
  report.seed = seed;
  report.checks = {{"b"}, {"sigma"}, {"psi"}, {"phi"}, {"h"}};
  auto& cb = report.checks[0];
  auto& cs = report.checks[1];
  auto& cpsi = report.checks[2];
  auto& cphi = report.checks[3];
  auto& ch = report.checks[4];

  BoxSampler sampler(seed);
  const double B = model.bound;
  const double L = model.lipschitz;
  for (int s = 0; s < samples; ++s) {
    const double t = sampler.uniform(0.0, model.horizon);
    const StateVec x = sampler.state(model.state_box);
    const StateVec y = sampler.state(model.state_box);
    const StateVec x2 = sampler.state(model.state_box);
    const StateVec y2 = sampler.state(model.state_box);
    const ActionVec a = sampler.action(model.action_lo, model.action_hi);
    const double dist = (x - x2).norm() + (y - y2).norm();
    const double dist_x = (x - x2).norm();
    auto lip = [&](double diff, double d) { return d > 0.0 ? diff / (L * d) : 0.0; };
    const std::string where = fmt::format("t={}, x={}, y={}, x'={}, y'={}, a={}", t, fmt_vec(x), fmt_vec(y),
                                          fmt_vec(x2), fmt_vec(y2), fmt_vec(a));

    const StateVec b1 = model.drift(t, x, y, a);
    const StateVec b2 = model.drift(t, x2, y2, a);
    record(cb, std::max(b1.norm(), b2.norm()) / B, lip((b1 - b2).norm(), dist), where);

    const DiffusionMat s1 = model.diffusion(t, x, y, a);
    const DiffusionMat s2 = model.diffusion(t, x2, y2, a);
    record(cs, std::max(s1.norm(), s2.norm()) / B, lip((s1 - s2).norm(), dist), where);

    const StateVec p1 = model.psi(x);
    const StateVec p2 = model.psi(x2);
    record(cpsi, std::max(p1.norm(), p2.norm()) / B, lip((p1 - p2).norm(), dist_x), where);

    const StateVec f1 = model.phi(x);
    const StateVec f2 = model.phi(x2);
    record(cphi, std::max(f1.norm(), f2.norm()) / B, lip((f1 - f2).norm(), dist_x), where);

    const double h1 = model.running_cost(t, x, y, a);
    const double h2 = model.running_cost(t, x2, y2, a);
    record(ch, std::max(std::abs(h1), std::abs(h2)) / B, lip(std::abs(h1 - h2), dist), where);
  }
  for (const auto& c : report.checks) report.pass = report.pass && c.pass;
  return report;
}

Eigen::VectorXd moment_map(const ModelSpec& model, double t, const StateVec& x, const MeanFields& mf,
                           const ActionVec& a) {
  const int d = model.state_dim;
  Eigen::VectorXd out(moment_dim(d));
  const StateVec b = model.drift(t, x, mf.psi, a);
  const DiffusionMat s = model.diffusion(t, x, mf.phi, a);
  const DiffusionMat ssT = s * s.transpose();
  out.head(d) = b;
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) out(d + j * d + i) = ssT(i, j);
  }
  out(d + d * d) = model.running_cost(t, x, mf.varphi, a);
  return out;
}

}  // namespace relaxctl
