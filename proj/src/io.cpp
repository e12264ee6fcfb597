#include "membrane/io.hpp"

#include <cstdio>
#include <fstream>

#include "membrane/errors.hpp"

#include <json.hpp>

namespace membrane {

using nlohmann::json;

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw_error(ErrorKind::BadInput, "config field \"" + field + "\": " + why);
}

double require_positive(const json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_number())
    bad_field(field, "missing or not a number");
  const double x = j[field].get<double>();
  if (!(x > 0.0)) bad_field(field, "must be positive");
  return x;
}

Vec3 parse_vec(const json& j, const std::string& field, int expect_dim) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3))
    bad_field(field, "must be a 2- or 3-vector");
  if (expect_dim > 0 && static_cast<int>(j.size()) != expect_dim)
    bad_field(field, "dimension mismatch with mesh");
  Vec3 v = Vec3::Zero();
  for (size_t c = 0; c < j.size(); ++c) v[c] = j[c].get<double>();
  return v;
}

EmbeddedMesh parse_mesh(const json& j) {
  if (!j.contains("mesh") || !j["mesh"].is_object())
    bad_field("mesh", "missing object");
  const json& m = j["mesh"];
  if (m.contains("path")) return load_mesh(m["path"].get<std::string>());
  if (m.contains("circle")) {
    const json& c = m["circle"];
    const int v = c.value("vertices", 0);
    if (v < 4) bad_field("mesh.circle.vertices", "must be >= 4");
    return EmbeddedMesh::circle(v, c.value("radius", 1.0));
  }
  if (m.contains("icosphere")) {
    const json& c = m["icosphere"];
    return EmbeddedMesh::icosphere(c.value("subdivisions", 3),
                                   c.value("radius", 1.0));
  }
  bad_field("mesh", "needs \"path\", \"circle\" or \"icosphere\"");
}

AmbientField parse_velocity(const json& j, const EmbeddedMesh& mesh) {
  if (!j.contains("velocity") || !j["velocity"].is_object())
    bad_field("velocity", "missing object");
  const json& v = j["velocity"];
  const std::string type = v.value("type", "");
  const int n = mesh.num_vertices;

  if (type == "zero") return AmbientField(n);
  if (type == "rotation") {
    if (!v.contains("omega") || !v["omega"].is_number())
      bad_field("velocity.omega", "missing or not a number");
    const double omega = v["omega"].get<double>();
    Vec3 axis = Vec3::UnitZ();
    if (v.contains("axis")) axis = parse_vec(v["axis"], "velocity.axis", 3).normalized();
    Vec3 center = Vec3::Zero();
    if (v.contains("center"))
      center = parse_vec(v["center"], "velocity.center", mesh.ambient_dim);
    AmbientField f(n);
    for (int i = 0; i < n; ++i)
      f.set(i, omega * axis.cross(mesh.position(i) - center));
    return f;
  }
  if (type == "translation") {
    if (!v.contains("direction")) bad_field("velocity.direction", "missing");
    const Vec3 d = parse_vec(v["direction"], "velocity.direction", mesh.ambient_dim);
    return AmbientField::constant(n, d);
  }
  if (type == "file") {
    if (!v.contains("path")) bad_field("velocity.path", "missing");
    return load_field_json(v["path"].get<std::string>(), mesh);
  }
  bad_field("velocity.type", "must be zero|rotation|translation|file");
}

LagrangianDensity parse_lagrangian(const json& j) {
  if (!j.contains("lagrangian")) return LagrangianDensity::kinetic();
  const json& l = j["lagrangian"];
  const std::string kind = l.value("kind", "kinetic");
  if (kind != "kinetic")
    bad_field("lagrangian.kind", "only \"kinetic\" is available from configs");
  if (!l.contains("potential")) return LagrangianDensity::kinetic();
  const json& p = l["potential"];
  const std::string type = p.value("type", "none");
  if (type == "none") return LagrangianDensity::kinetic();
  if (type == "gravity") {
    const double g = p.value("g", 9.81);
    Vec3 axis = Vec3::UnitZ();
    if (p.contains("axis")) axis = parse_vec(p["axis"], "lagrangian.potential.axis", 0);
    return LagrangianDensity::kinetic(Potential::gravity(g, axis));
  }
  bad_field("lagrangian.potential.type", "must be none|gravity");
}

}  // namespace

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorKind::BadInput, "cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw_error(ErrorKind::BadInput,
                "config parse error in " + path + ": " + e.what());
  }

  ScenarioConfig cfg;
  cfg.mesh = parse_mesh(j);
  cfg.initial_velocity = parse_velocity(j, cfg.mesh);
  cfg.lagrangian = parse_lagrangian(j);

  cfg.options.dt = require_positive(j, "dt");
  if (!j.contains("T") || !j["T"].is_number())
    bad_field("T", "missing or not a number");
  cfg.options.total_time = j["T"].get<double>();
  if (cfg.options.total_time < 0.0) bad_field("T", "must be nonnegative");

  cfg.options.output_stride = j.value("output_stride", 1);
  if (cfg.options.output_stride < 1) bad_field("output_stride", "must be >= 1");
  cfg.options.renormalize_volume = j.value("renormalize_volume", true);

  const std::string scheme = j.value("scheme", "heun");
  if (scheme == "heun")
    cfg.options.scheme = StepScheme::ProjectedHeun;
  else if (scheme == "chorin")
    cfg.options.scheme = StepScheme::ChorinProjection;
  else
    bad_field("scheme", "must be heun|chorin");

  const std::string solver = j.value("solver", "auto");
  if (solver == "auto")
    cfg.options.solver = SolverKind::Auto;
  else if (solver == "direct")
    cfg.options.solver = SolverKind::Direct;
  else if (solver == "cg")
    cfg.options.solver = SolverKind::ConjugateGradient;
  else
    bad_field("solver", "must be auto|direct|cg");

  if (j.contains("vol_tol")) cfg.options.vol_tol = require_positive(j, "vol_tol");
  if (j.contains("tolerances")) {
    const json& tol = j["tolerances"];
    if (!tol.is_object()) bad_field("tolerances", "must be an object");
    if (tol.contains("vol_tol"))
      cfg.options.vol_tol = require_positive(tol, "vol_tol");
    if (tol.contains("max_newton_iterations")) {
      cfg.options.max_newton_iterations = tol["max_newton_iterations"].get<int>();
      if (cfg.options.max_newton_iterations < 1)
        bad_field("tolerances.max_newton_iterations", "must be >= 1");
    }
  }
  return cfg;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

void append_field_json(std::string& out, const Eigen::VectorXd& flat, int dim) {
  out += '[';
  const int n = static_cast<int>(flat.size()) / 3;
  for (int i = 0; i < n; ++i) {
    if (i) out += ',';
    out += '[';
    for (int c = 0; c < dim; ++c) {
      if (c) out += ',';
      out += format_double(flat[3 * i + c]);
    }
    out += ']';
  }
  out += ']';
}

}  // namespace

void write_trajectory_jsonl(const std::string& path, const Trajectory& traj,
                            int ambient_dim) {
  std::ofstream out(path);
  if (!out) throw_error(ErrorKind::BadInput, "cannot write " + path);
  for (const Frame& f : traj.frames) {
    std::string line = "{\"t\":" + format_double(f.t) +
                       ",\"step\":" + std::to_string(f.step) + ",\"positions\":";
    append_field_json(line, f.positions, ambient_dim);
    line += ",\"velocity\":";
    append_field_json(line, f.velocity.data, ambient_dim);
    line += ",\"pressure\":[";
    for (int i = 0; i < f.pressure.size(); ++i) {
      if (i) line += ',';
      line += format_double(f.pressure[i]);
    }
    line += "]}";
    out << line << "\n";
  }
}

void write_diagnostics_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw_error(ErrorKind::BadInput, "cannot write " + path);
  out << "t,kinetic_energy,max_density_deviation,constraint_residual_norm,"
         "pressure_min,pressure_mean,pressure_max,min_mean_curvature_norm\n";
  for (const Diagnostics& d : traj.diagnostics) {
    out << format_double(d.t) << ',' << format_double(d.kinetic_energy) << ','
        << format_double(d.max_density_deviation) << ','
        << format_double(d.constraint_residual_norm) << ','
        << format_double(d.pressure_min) << ',' << format_double(d.pressure_mean)
        << ',' << format_double(d.pressure_max) << ','
        << format_double(d.min_mean_curvature_norm) << "\n";
  }
}

void write_decomposition_json(const std::string& path,
                              const DecompositionResult& result,
                              int ambient_dim) {
  std::ofstream out(path);
  if (!out) throw_error(ErrorKind::BadInput, "cannot write " + path);
  std::string s = "{\n  \"pressure\": [";
  for (int i = 0; i < result.pressure.size(); ++i) {
    if (i) s += ',';
    s += format_double(result.pressure[i]);
  }
  s += "],\n  \"x_mu\": ";
  append_field_json(s, result.x_mu.data, ambient_dim);
  s += ",\n  \"constraint_residual_norm\": " +
       format_double(result.constraint_residual_norm);
  s += ",\n  \"orthogonality_defect\": " +
       format_double(result.orthogonality_defect);
  s += ",\n  \"reconstruction_error\": " +
       format_double(result.reconstruction_error);
  s += ",\n  \"solver_iterations\": " + std::to_string(result.solver_iterations);
  s += "\n}\n";
  out << s;
}

void write_check_report(const std::string& path,
                        const std::vector<oracle::CheckResult>& results) {
  json checks = json::array();
  bool all = true;
  for (const auto& r : results) {
    checks.push_back({{"name", r.name},
                      {"measured", r.measured},
                      {"threshold", r.threshold},
                      {"passed", r.passed}});
    all = all && r.passed;
  }
  json report = {{"all_passed", all}, {"checks", checks}};
  std::ofstream out(path);
  if (!out) throw_error(ErrorKind::BadInput, "cannot write " + path);
  out << report.dump(2) << "\n";
}

}  // namespace membrane
