#pragma once

#include <array>
#include <string>
#include <vector>

#include "membrane/types.hpp"

namespace membrane {

enum class MeshKind { CurveLoop, TriangleMesh };

/// Discrete closed manifold: a polyline loop (dimension 1) or an oriented
/// closed triangle mesh (dimension 2), together with the reference measure
/// mu frozen from the construction-time positions.  Connectivity and mu are
/// immutable; the positions stored here are the reference configuration and
/// simulations carry their own position vectors.
struct EmbeddedMesh {
  MeshKind kind = MeshKind::CurveLoop;
  int ambient_dim = 2;  // 2 or 3
  int num_vertices = 0;

  Eigen::VectorXd positions;  // reference configuration, flat 3V
  std::vector<std::array<int, 3>> triangles;

  Eigen::VectorXd reference_measure;  // mu_i > 0, frozen at construction
  std::vector<int> component;         // vertex -> connected component id
  int num_components = 1;

  Vec3 position(int i) const { return positions.segment<3>(3 * i); }

  double total_reference_volume() const { return reference_measure.sum(); }

  /// Curve loop through `points` in cyclic order.  `ambient_dim` is 2 or 3;
  /// for 2 the z components must vanish.
  static EmbeddedMesh curve_loop(const std::vector<Vec3>& points,
                                 int ambient_dim);

  /// Closed oriented triangle mesh in R^3.  Throws NonManifold if an edge is
  /// not shared by exactly two consistently oriented triangles.
  static EmbeddedMesh triangle_mesh(const std::vector<Vec3>& points,
                                    const std::vector<std::array<int, 3>>& tris);

  // --- generators used by tests, the CLI and the validation suite ---

  /// Regular (or smoothly graded, spacing_wobble in [0,1)) polygon inscribed
  /// in the circle of given radius.
  static EmbeddedMesh circle(int num_vertices, double radius = 1.0,
                             const Vec3& center = Vec3::Zero(),
                             double phase = 0.0, double spacing_wobble = 0.0);

  /// circle() lifted to R^3 (z = 0), so the curve has codimension 2.
  static EmbeddedMesh circle3d(int num_vertices, double radius = 1.0,
                               const Vec3& center = Vec3::Zero(),
                               double phase = 0.0);

  /// Icosphere: subdivided icosahedron projected to the sphere of given
  /// radius.  subdivisions = 0 gives the raw icosahedron (12 vertices).
  static EmbeddedMesh icosphere(int subdivisions, double radius = 1.0,
                                const Vec3& center = Vec3::Zero());
};

/// Mesh file IO per the external interface: curves as JSON
/// {"kind":"curve","positions":[[x,y],...]}, surfaces as Wavefront OBJ with
/// triangular faces.  The reference measure is always recomputed from the
/// file's positions.
EmbeddedMesh load_mesh(const std::string& path);
EmbeddedMesh load_curve_json(const std::string& path);
EmbeddedMesh load_surface_obj(const std::string& path);

AmbientField load_field_json(const std::string& path, const EmbeddedMesh& mesh);
void save_field_json(const std::string& path, const AmbientField& field,
                     int ambient_dim);

}  // namespace membrane
