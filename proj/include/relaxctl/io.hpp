#pragma once

#include "relaxctl/caratheodory.hpp"
#include "relaxctl/chattering.hpp"
#include "relaxctl/coefficients.hpp"
#include "relaxctl/optimizer.hpp"

#include <json.hpp>

#include <ostream>
#include <string>

namespace relaxctl {

using Json = nlohmann::ordered_json;

/// Round-trip exact decimal form (17 significant digits).
std::string format_real(double value);

Json to_json(const SlidingControl& control);
Json to_json(const StrictControl& control);
SlidingControl sliding_from_json(const Json& j);
StrictControl strict_from_json(const Json& j);

Json to_json(const CostEstimate& estimate);
Json to_json(const RngManifest& manifest);
Json to_json(const ValidationReport& report);
Json to_json(const ReducedControl& reduced);
Json to_json(const OptimizationReport& report);
Json to_json(const ValueGapReport& report);

/// step, time, mean, variance, meanfield_psi, meanfield_phi (per coordinate
/// suffixes when d > 1).
void write_summary_csv(std::ostream& out, const ParticleEnsemble& ensemble);
/// particle, step, time, x_1..x_d. Needs recorded paths.
void write_paths_csv(std::ostream& out, const ParticleEnsemble& ensemble);
/// n, J_strict, stderr, J_relaxed, stderr, J_diff, diff_stderr, sup_diff_or_NA
void write_study_csv(std::ostream& out, const ConvergenceStudy& study);
/// iteration, mean, stderr
void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace);

}  // namespace relaxctl
