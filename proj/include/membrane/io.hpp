#pragma once

#include <string>

#include "membrane/dynamics.hpp"
#include "membrane/oracle.hpp"

namespace membrane {

/// Parsed scenario configuration (JSON).  See README for the schema.
struct ScenarioConfig {
  EmbeddedMesh mesh;
  AmbientField initial_velocity;
  LagrangianDensity lagrangian = LagrangianDensity::kinetic();
  SimOptions options;
};

/// Parse and validate a scenario config file.  Throws BadInput naming the
/// offending field.
ScenarioConfig load_scenario(const std::string& path);

// Plot-ready outputs with fixed float formatting (byte-stable for identical
// inputs).
void write_trajectory_jsonl(const std::string& path, const Trajectory& traj,
                            int ambient_dim);
void write_diagnostics_csv(const std::string& path, const Trajectory& traj);
void write_decomposition_json(const std::string& path,
                              const DecompositionResult& result,
                              int ambient_dim);
void write_check_report(const std::string& path,
                        const std::vector<oracle::CheckResult>& results);

std::string format_double(double x);  // "%.17g"

}  // namespace membrane
