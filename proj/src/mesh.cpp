#include "membrane/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "membrane/errors.hpp"
#include "membrane/geometry.hpp"

#include <json.hpp>

namespace membrane {

namespace {

// Union-find over vertices, used for connected components.
struct UnionFind {
  explicit UnionFind(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
  std::vector<int> parent;
};

void compute_components(EmbeddedMesh& mesh) {
  const int v = mesh.num_vertices;
  if (mesh.kind == MeshKind::CurveLoop) {
    mesh.component.assign(v, 0);
    mesh.num_components = 1;
    return;
  }
  UnionFind uf(v);
  for (const auto& t : mesh.triangles) {
    uf.unite(t[0], t[1]);
    uf.unite(t[1], t[2]);
  }
  mesh.component.assign(v, -1);
  int next = 0;
  std::map<int, int> label;
  for (int i = 0; i < v; ++i) {
    const int root = uf.find(i);
    auto it = label.find(root);
    if (it == label.end()) it = label.emplace(root, next++).first;
    mesh.component[i] = it->second;
  }
  mesh.num_components = next;
}

void finalize(EmbeddedMesh& mesh) {
  compute_components(mesh);
  mesh.reference_measure = lumped_measure(mesh, mesh.positions);
  for (int i = 0; i < mesh.num_vertices; ++i) {
    if (!(mesh.reference_measure[i] > 0.0))
      throw_error(ErrorKind::DegenerateGeometry,
                  "nonpositive reference measure at vertex " + std::to_string(i));
  }
}

Eigen::VectorXd flatten(const std::vector<Vec3>& points) {
  Eigen::VectorXd out(3 * points.size());
  for (size_t i = 0; i < points.size(); ++i) out.segment<3>(3 * i) = points[i];
  return out;
}

}  // namespace

EmbeddedMesh EmbeddedMesh::curve_loop(const std::vector<Vec3>& points,
                                      int ambient_dim) {
  if (ambient_dim != 2 && ambient_dim != 3)
    throw_error(ErrorKind::BadInput, "curve ambient dimension must be 2 or 3");
  const int v = static_cast<int>(points.size());
  if (v < 4)
    throw_error(ErrorKind::BadInput,
                "curve loop needs at least 4 vertices, got " + std::to_string(v));
  for (int i = 0; i < v; ++i) {
    const Vec3 d = points[(i + 1) % v] - points[i];
    if (d.norm() <= kEpsGeom)
      throw_error(ErrorKind::DegenerateGeometry,
                  "zero edge between vertices " + std::to_string(i) + " and " +
                      std::to_string((i + 1) % v));
    if (ambient_dim == 2 && points[i].z() != 0.0)
      throw_error(ErrorKind::BadInput, "2D curve with nonzero z component");
  }
  EmbeddedMesh mesh;
  mesh.kind = MeshKind::CurveLoop;
  mesh.ambient_dim = ambient_dim;
  mesh.num_vertices = v;
  mesh.positions = flatten(points);
  finalize(mesh);
  return mesh;
}

EmbeddedMesh EmbeddedMesh::triangle_mesh(
    const std::vector<Vec3>& points, const std::vector<std::array<int, 3>>& tris) {
  const int v = static_cast<int>(points.size());
  if (v < 4 || tris.size() < 4)
    throw_error(ErrorKind::BadInput, "triangle mesh too small");
  for (const auto& t : tris)
    for (int c : t)
      if (c < 0 || c >= v)
        throw_error(ErrorKind::BadInput, "triangle index out of range");

  // Closed orientable 2-manifold: every directed edge appears exactly once
  // and its opposite exactly once.
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : tris) {
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      if (a == b)
        throw_error(ErrorKind::DegenerateGeometry, "triangle with repeated vertex");
      if (++directed[{a, b}] > 1)
        throw_error(ErrorKind::NonManifold,
                    "directed edge (" + std::to_string(a) + "," +
                        std::to_string(b) + ") used twice; inconsistent orientation "
                        "or non-manifold edge");
    }
  }
  for (const auto& [edge, count] : directed) {
    auto opposite = directed.find({edge.second, edge.first});
    if (opposite == directed.end())
      throw_error(ErrorKind::NonManifold,
                  "boundary edge (" + std::to_string(edge.first) + "," +
                      std::to_string(edge.second) + "); mesh must be closed");
  }

  EmbeddedMesh mesh;
  mesh.kind = MeshKind::TriangleMesh;
  mesh.ambient_dim = 3;
  mesh.num_vertices = v;
  mesh.positions = flatten(points);
  mesh.triangles = tris;

  for (size_t t = 0; t < tris.size(); ++t) {
    const Vec3 u = points[tris[t][1]] - points[tris[t][0]];
    const Vec3 w = points[tris[t][2]] - points[tris[t][0]];
    if (0.5 * u.cross(w).norm() <= kEpsGeom)
      throw_error(ErrorKind::DegenerateGeometry,
                  "degenerate triangle " + std::to_string(t));
  }
  finalize(mesh);
  return mesh;
}

EmbeddedMesh EmbeddedMesh::circle(int num_vertices, double radius,
                                  const Vec3& center, double phase,
                                  double spacing_wobble) {
  if (num_vertices < 4)
    throw_error(ErrorKind::BadInput, "circle needs at least 4 vertices");
  if (radius <= 0.0) throw_error(ErrorKind::BadInput, "circle radius must be > 0");
  std::vector<Vec3> pts(num_vertices);
  for (int i = 0; i < num_vertices; ++i) {
    double theta = 2.0 * std::numbers::pi * i / num_vertices + phase;
    if (spacing_wobble != 0.0)
      theta += spacing_wobble * (2.0 * std::numbers::pi / num_vertices) *
               std::sin(2.0 * std::numbers::pi * i / num_vertices);
    pts[i] = center + radius * Vec3(std::cos(theta), std::sin(theta), 0.0);
  }
  return curve_loop(pts, 2);
}

EmbeddedMesh EmbeddedMesh::circle3d(int num_vertices, double radius,
                                    const Vec3& center, double phase) {
  EmbeddedMesh flat = circle(num_vertices, radius, center, phase);
  std::vector<Vec3> pts(num_vertices);
  for (int i = 0; i < num_vertices; ++i) pts[i] = flat.position(i);
  return curve_loop(pts, 3);
}

EmbeddedMesh EmbeddedMesh::icosphere(int subdivisions, double radius,
                                     const Vec3& center) {
  if (subdivisions < 0 || subdivisions > 7)
    throw_error(ErrorKind::BadInput, "icosphere subdivisions out of range");
  if (radius <= 0.0) throw_error(ErrorKind::BadInput, "icosphere radius must be > 0");

  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> pts = {
      {-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
  std::vector<std::array<int, 3>> tris = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (auto& p : pts) p.normalize();

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = (pts[a] + pts[b]).normalized();
      pts.push_back(m);
      const int idx = static_cast<int>(pts.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(4 * tris.size());
    for (const auto& t : tris) {
      const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }

  for (auto& p : pts) p = center + radius * p;
  return triangle_mesh(pts, tris);
}

// ---------------------------------------------------------------------------
// File IO
// ---------------------------------------------------------------------------

EmbeddedMesh load_curve_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorKind::BadInput, "cannot open mesh file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw_error(ErrorKind::BadInput, "mesh JSON parse error in " + path + ": " + e.what());
  }
  if (!j.contains("kind") || j["kind"] != "curve")
    throw_error(ErrorKind::BadInput, "mesh JSON must have \"kind\":\"curve\"");
  if (!j.contains("positions") || !j["positions"].is_array())
    throw_error(ErrorKind::BadInput, "mesh JSON missing \"positions\" array");

  std::vector<Vec3> pts;
  int dim = 0;
  for (const auto& row : j["positions"]) {
    if (!row.is_array() || (row.size() != 2 && row.size() != 3))
      throw_error(ErrorKind::BadInput, "curve positions must be [x,y] or [x,y,z]");
    if (dim == 0) dim = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != dim)
      throw_error(ErrorKind::BadInput, "inconsistent position dimensions");
    Vec3 p = Vec3::Zero();
    for (int c = 0; c < dim; ++c) p[c] = row[c].get<double>();
    pts.push_back(p);
  }
  return EmbeddedMesh::curve_loop(pts, dim);
}

EmbeddedMesh load_surface_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorKind::BadInput, "cannot open mesh file " + path);
  std::vector<Vec3> pts;
  std::vector<std::array<int, 3>> tris;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z()))
        throw_error(ErrorKind::BadInput,
                    "bad OBJ vertex at line " + std::to_string(lineno));
      pts.push_back(p);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // accept v, v/vt, v//vn, v/vt/vn
        const size_t slash = tok.find('/');
        idx.push_back(std::stoi(tok.substr(0, slash)) - 1);
      }
      if (idx.size() != 3)
        throw_error(ErrorKind::BadInput,
                    "only triangular faces supported (line " +
                        std::to_string(lineno) + ")");
      tris.push_back({idx[0], idx[1], idx[2]});
    }
  }
  return EmbeddedMesh::triangle_mesh(pts, tris);
}

EmbeddedMesh load_mesh(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".obj")
    return load_surface_obj(path);
  return load_curve_json(path);
}

AmbientField load_field_json(const std::string& path, const EmbeddedMesh& mesh) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorKind::BadInput, "cannot open field file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw_error(ErrorKind::BadInput, "field JSON parse error in " + path + ": " + e.what());
  }
  const nlohmann::json& rows = j.contains("values") ? j["values"] : j;
  if (!rows.is_array() || static_cast<int>(rows.size()) != mesh.num_vertices)
    throw_error(ErrorKind::BadInput,
                "field must have one vector per mesh vertex (" +
                    std::to_string(mesh.num_vertices) + ")");
  AmbientField f(mesh.num_vertices);
  for (int i = 0; i < mesh.num_vertices; ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || static_cast<int>(row.size()) != mesh.ambient_dim)
      throw_error(ErrorKind::BadInput,
                  "field row " + std::to_string(i) + " must have " +
                      std::to_string(mesh.ambient_dim) + " components");
    Vec3 v = Vec3::Zero();
    for (int c = 0; c < mesh.ambient_dim; ++c) v[c] = row[c].get<double>();
    f.set(i, v);
  }
  return f;
}

void save_field_json(const std::string& path, const AmbientField& field,
                     int ambient_dim) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < field.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    const Vec3 v = field.get(i);
    for (int c = 0; c < ambient_dim; ++c) row.push_back(v[c]);
    rows.push_back(row);
  }
  nlohmann::json j;
  j["values"] = rows;
  std::ofstream out(path);
  if (!out) throw_error(ErrorKind::BadInput, "cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace membrane
