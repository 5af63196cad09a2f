#include "relaxctl/io.hpp"

#include <fmt/format.h>

namespace relaxctl {

std::string format_real(double value) { return fmt::format("{:.17g}", value); }

namespace {

Json atoms_json(const ActionGrid& grid) {
  Json atoms = Json::array();
  for (const auto& a : grid.atoms()) {
    Json row = Json::array();
    for (int c = 0; c < a.size(); ++c) row.push_back(a(c));
    atoms.push_back(std::move(row));
  }
  return atoms;
}

ActionGrid atoms_from_json(const Json& j) {
  std::vector<ActionVec> atoms;
  for (const auto& row : j.at("atoms")) {
    if (row.is_number()) {
      ActionVec a(1);
      a(0) = row.get<double>();
      atoms.push_back(a);
      continue;
    }
    ActionVec a(static_cast<Eigen::Index>(row.size()));
    for (std::size_t c = 0; c < row.size(); ++c) a(static_cast<Eigen::Index>(c)) = row[c].get<double>();
    atoms.push_back(a);
  }
  return make_action_grid(atoms);
}

TimeGrid time_from_json(const Json& j) { return TimeGrid(j.at("T").get<double>(), j.at("K").get<int>()); }

}  // namespace

Json to_json(const SlidingControl& control) {
  Json weights = Json::array();
  for (int k = 0; k < control.steps(); ++k) {
    const auto row = control.row(k);
    weights.push_back(Json(std::vector<double>(row.begin(), row.end())));
  }
  return Json{{"atoms", atoms_json(control.grid())},
              {"weights", std::move(weights)},
              {"T", control.time().horizon()},
              {"K", control.time().steps()}};
}

Json to_json(const StrictControl& control) {
  return Json{{"atoms", atoms_json(control.grid())},
              {"assignment", control.assignment()},
              {"T", control.time().horizon()},
              {"K", control.time().steps()}};
}

SlidingControl sliding_from_json(const Json& j) {
  try {
    auto grid = atoms_from_json(j);
    const auto time = time_from_json(j);
    std::vector<double> w;
    for (const auto& row : j.at("weights")) {
      if (static_cast<int>(row.size()) != grid.size()) throw ValidationError("weight row length mismatch");
      for (const auto& v : row) w.push_back(v.get<double>());
    }
    return SlidingControl(std::move(grid), time, std::move(w));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("malformed sliding control: {}", e.what()));
  }
}

StrictControl strict_from_json(const Json& j) {
  try {
    return StrictControl(atoms_from_json(j), time_from_json(j), j.at("assignment").get<std::vector<int>>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("malformed strict control: {}", e.what()));
  }
}

Json to_json(const CostEstimate& estimate) {
  return Json{{"mean", estimate.mean}, {"stderr", estimate.std_error}, {"N", estimate.samples}};
}

Json to_json(const RngManifest& manifest) {
  return Json{{"seed", manifest.seed}, {"scheme", manifest.scheme}};
}

Json to_json(const ValidationReport& report) {
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    Json entry{{"function", c.function},
               {"worst_bound_ratio", c.worst_bound_ratio},
               {"worst_lipschitz_ratio", c.worst_lipschitz_ratio},
               {"pass", c.pass}};
    if (!c.witness.empty()) entry["witness"] = c.witness;
    checks.push_back(std::move(entry));
  }
  return Json{{"model", report.model},
              {"samples", report.samples},
              {"seed", report.seed},
              {"pass", report.pass},
              {"checks", std::move(checks)}};
}

Json to_json(const ReducedControl& reduced) {
  Json steps = Json::array();
  for (const auto& s : reduced.steps) {
    steps.push_back(Json{{"step", s.step},
                         {"support_before", s.support_before},
                         {"support_after", s.support_after},
                         {"moment_residual", s.moment_residual},
                         {"degenerate", s.degenerate}});
  }
  return Json{{"max_moment_residual", reduced.max_residual},
              {"max_support", reduced.max_support},
              {"steps", std::move(steps)}};
}

Json to_json(const OptimizationReport& report) {
  return Json{{"method", report.method},
              {"budget", report.budget},
              {"blocks", report.blocks},
              {"best_weights", report.best_block_weights},
              {"best_cost", to_json(report.best_cost)}};
}

Json to_json(const ValueGapReport& report) {
  Json bridge = Json::array();
  for (const auto& row : report.bridge) {
    bridge.push_back(Json{{"n", row.n},
                          {"chattered_cost", to_json(row.chattered_cost)},
                          {"difference", to_json(row.difference)}});
  }
  return Json{{"strict", to_json(report.strict_best)},
              {"relaxed", to_json(report.relaxed_best)},
              {"gap", to_json(report.gap)},
              {"chattering_bridge", std::move(bridge)}};
}

void write_summary_csv(std::ostream& out, const ParticleEnsemble& ensemble) {
  const int d = ensemble.dim();
  auto header = [&](const std::string& base) {
    if (d == 1) return base;
    std::string cols;
    for (int c = 1; c <= d; ++c) cols += fmt::format("{}{}_{}", c > 1 ? "," : "", base, c);
    return cols;
  };
  out << "step,time," << header("mean") << ',' << header("variance") << ',' << header("meanfield_psi") << ','
      << header("meanfield_phi") << '\n';
  for (int k = 0; k <= ensemble.steps(); ++k) {
    out << k << ',' << format_real(ensemble.time().time(k));
    for (const auto& v : {ensemble.mean_state(k), ensemble.variance_state(k),
                          ensemble.meanfield(MeanFieldKind::psi, k), ensemble.meanfield(MeanFieldKind::phi, k)}) {
      for (int c = 0; c < d; ++c) out << ',' << format_real(v(c));
    }
    out << '\n';
  }
}

void write_paths_csv(std::ostream& out, const ParticleEnsemble& ensemble) {
  if (!ensemble.has_paths()) throw ValidationError("ensemble has no recorded paths");
  out << "particle,step,time";
  for (int c = 1; c <= ensemble.dim(); ++c) out << ",x_" << c;
  out << '\n';
  for (int j = 0; j < ensemble.particles(); ++j) {
    for (int k = 0; k <= ensemble.steps(); ++k) {
      out << j << ',' << k << ',' << format_real(ensemble.time().time(k));
      const auto x = ensemble.state(j, k);
      for (int c = 0; c < ensemble.dim(); ++c) out << ',' << format_real(x(c));
      out << '\n';
    }
  }
}

void write_study_csv(std::ostream& out, const ConvergenceStudy& study) {
  out << "n,J_strict,stderr,J_relaxed,stderr,J_diff,diff_stderr,sup_diff_or_NA\n";
  for (const auto& r : study.rows) {
    out << r.n << ',' << format_real(r.strict_cost.mean) << ',' << format_real(r.strict_cost.std_error) << ','
        << format_real(r.relaxed_cost.mean) << ',' << format_real(r.relaxed_cost.std_error) << ','
        << format_real(r.cost_difference.mean) << ',' << format_real(r.cost_difference.std_error) << ','
        << (r.coupled_sup_diff ? format_real(*r.coupled_sup_diff) : std::string("NA")) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace) {
  out << "iteration,mean,stderr\n";
  for (const auto& t : trace) {
    out << t.iteration << ',' << format_real(t.mean) << ',' << format_real(t.std_error) << '\n';
  }
}

}  // namespace relaxctl
