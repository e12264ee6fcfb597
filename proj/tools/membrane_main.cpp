// membrane: incompressible-membrane dynamics CLI.
//
// Subcommands:
//   simulate    --config PATH --out DIR
//   decompose   --mesh PATH --field PATH --out PATH
//   check       [--report PATH]
//   convergence --spec PATH [--report PATH]
//
// Exit codes: 0 ok, 1 bad input/config, 2 runtime error (module error name
// printed), 3 failed validation check.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "membrane/decomposition.hpp"
#include "membrane/dynamics.hpp"
#include "membrane/errors.hpp"
#include "membrane/io.hpp"
#include "membrane/oracle.hpp"

namespace {

int read_thread_cap() {
  // The numerical kernels are sequential; a value >= 1 is accepted for
  // forward compatibility and validated here.
  const char* env = std::getenv("MEMBRANE_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  if (n < 1) {
    std::cerr << "MEMBRANE_THREADS must be >= 1\n";
    std::exit(1);
  }
  return n;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  const membrane::ScenarioConfig cfg = membrane::load_scenario(config_path);
  std::filesystem::create_directories(out_dir);

  auto mesh = std::make_shared<const membrane::EmbeddedMesh>(cfg.mesh);
  const membrane::Trajectory traj =
      membrane::run(mesh, cfg.initial_velocity, cfg.lagrangian,
                    cfg.options.total_time, cfg.options.dt, cfg.options);

  membrane::write_trajectory_jsonl(out_dir + "/trajectory.jsonl", traj,
                                   mesh->ambient_dim);
  membrane::write_diagnostics_csv(out_dir + "/diagnostics.csv", traj);

  const membrane::Diagnostics& first = traj.diagnostics.front();
  const membrane::Diagnostics& last = traj.diagnostics.back();
  double max_dev = 0.0, max_constraint = 0.0;
  for (const auto& d : traj.diagnostics) {
    max_dev = std::max(max_dev, d.max_density_deviation);
    max_constraint = std::max(max_constraint, d.constraint_residual_norm);
  }
  const double drift =
      first.kinetic_energy > 0.0
          ? std::abs(last.kinetic_energy - first.kinetic_energy) /
                first.kinetic_energy
          : std::abs(last.kinetic_energy - first.kinetic_energy);
  std::cout << "steps: " << traj.diagnostics.size() - 1 << "\n"
            << "final time: " << membrane::format_double(last.t) << "\n"
            << "relative energy drift: " << membrane::format_double(drift) << "\n"
            << "max |rho - 1|: " << membrane::format_double(max_dev) << "\n"
            << "max constraint residual: "
            << membrane::format_double(max_constraint) << "\n";
  return 0;
}

int cmd_decompose(const std::string& mesh_path, const std::string& field_path,
                  const std::string& out_path) {
  const membrane::EmbeddedMesh mesh = membrane::load_mesh(mesh_path);
  const membrane::AmbientField field =
      membrane::load_field_json(field_path, mesh);
  const membrane::OperatorPtr ops =
      membrane::build_operators(mesh, mesh.positions);
  const membrane::DecompositionResult result = membrane::decompose(*ops, field);
  membrane::write_decomposition_json(out_path, result, mesh.ambient_dim);
  std::cout << "constraint residual norm: "
            << membrane::format_double(result.constraint_residual_norm) << "\n"
            << "orthogonality defect: "
            << membrane::format_double(result.orthogonality_defect) << "\n";
  return 0;
}

int cmd_check(const std::string& report_path) {
  const std::vector<membrane::oracle::CheckResult> results =
      membrane::oracle::run_validation_suite();
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "[pass] " : "[FAIL] ") << r.name << " (measured "
              << membrane::format_double(r.measured) << ", threshold "
              << membrane::format_double(r.threshold) << ")\n";
    all = all && r.passed;
  }
  if (!report_path.empty()) membrane::write_check_report(report_path, results);
  return all ? 0 : 3;
}

int cmd_convergence(const std::string& spec_path, const std::string& report_path) {
  std::ifstream in(spec_path);
  if (!in)
    membrane::throw_error(membrane::ErrorKind::BadInput,
                          "cannot open spec " + spec_path);
  nlohmann::json spec;
  try {
    in >> spec;
  } catch (const std::exception& e) {
    membrane::throw_error(membrane::ErrorKind::BadInput,
                          std::string("spec parse error: ") + e.what());
  }
  const double radius = spec.value("radius", 1.0);
  std::vector<int> modes = spec.value("modes", std::vector<int>{1, 3, 5});
  std::vector<int> resolutions =
      spec.value("resolutions", std::vector<int>{64, 128, 256, 512});

  nlohmann::json runs = nlohmann::json::array();
  bool all = true;
  for (int k : modes) {
    const membrane::oracle::EllipticConvergence conv =
        membrane::oracle::manufactured_elliptic_check(radius, k, resolutions);
    nlohmann::json errors = nlohmann::json::array();
    for (size_t i = 0; i < conv.resolutions.size(); ++i)
      errors.push_back({{"V", conv.resolutions[i]},
                        {"l2_error", conv.l2_errors[i]}});
    const bool ok = k == 0 || std::abs(conv.fitted_order - 2.0) <= 0.2;
    all = all && ok;
    runs.push_back({{"k", k},
                    {"errors", errors},
                    {"fitted_order", conv.fitted_order},
                    {"passed", ok}});
    std::cout << (ok ? "[pass] " : "[FAIL] ") << "mode k=" << k
              << " fitted order " << membrane::format_double(conv.fitted_order)
              << "\n";
  }
  if (!report_path.empty()) {
    nlohmann::json report = {{"all_passed", all}, {"runs", runs}};
    std::ofstream out(report_path);
    out << report.dump(2) << "\n";
  }
  return all ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incompressible membrane dynamics"};
  app.require_subcommand(1);
  read_thread_cap();

  std::string config_path, out_dir = "out";
  CLI::App* simulate = app.add_subcommand("simulate", "run a scenario config");
  simulate->add_option("--config", config_path, "scenario JSON")->required();
  simulate->add_option("--out", out_dir, "output directory");

  std::string mesh_path, field_path, out_path = "decomposition.json";
  CLI::App* decompose =
      app.add_subcommand("decompose", "Helmholtz-Hodge split of a field");
  decompose->add_option("--mesh", mesh_path, "mesh file (.json curve / .obj)")
      ->required();
  decompose->add_option("--field", field_path, "field JSON")->required();
  decompose->add_option("--out", out_path, "result JSON path");

  std::string report_path;
  CLI::App* check = app.add_subcommand("check", "run the validation suite");
  check->add_option("--report", report_path, "write JSON report here");

  std::string spec_path, conv_report;
  CLI::App* convergence =
      app.add_subcommand("convergence", "manufactured-solution study");
  convergence->add_option("--spec", spec_path, "study spec JSON")->required();
  convergence->add_option("--report", conv_report, "write JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, out_dir);
    if (decompose->parsed()) return cmd_decompose(mesh_path, field_path, out_path);
    if (check->parsed()) return cmd_check(report_path);
    if (convergence->parsed()) return cmd_convergence(spec_path, conv_report);
  } catch (const membrane::Error& e) {
    std::cerr << e.what() << "\n";
    return e.kind() == membrane::ErrorKind::BadInput ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
