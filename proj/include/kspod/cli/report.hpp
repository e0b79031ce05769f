#pragma once

// JSON evaluation report comparing simulated and emulated snapshot sets.

#include <string>

#include <json.hpp>

#include "kspod/cli/run_config.hpp"
#include "kspod/snapshot_store.hpp"

namespace kspod::cli {

/// Per-case entry: spreading_angle / thickness {sim, emu, eps}, axial_profile,
/// eps_mean, field_rel_l2 and kde {grid, sim_density, emu_density}. Angles
/// and thicknesses are time averages; thresholds come from the simulated
/// snapshot unless the config fixes one.
nlohmann::json case_report(const SnapshotSet& sim, const SnapshotSet& emu, const RunConfig::Metrics& metrics);

/// {"cases": [...], "summary": {...}} with the count of cases under 5% eps_mean.
nlohmann::json assemble_report(nlohmann::json cases);

/// Deterministic pretty-printed UTF-8 text, newline terminated.
std::string report_text(const nlohmann::json& report);

}  // namespace kspod::cli
