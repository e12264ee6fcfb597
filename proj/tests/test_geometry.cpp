#include <doctest.h>

#include <numbers>
#include <random>

#include "membrane/errors.hpp"
#include "membrane/geometry.hpp"

using namespace membrane;

namespace {

AmbientField radial_field(const EmbeddedMesh& mesh) {
  AmbientField f(mesh.num_vertices);
  for (int i = 0; i < mesh.num_vertices; ++i)
    f.set(i, mesh.position(i).normalized());
  return f;
}

AmbientField random_field(const EmbeddedMesh& mesh, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  AmbientField f(mesh.num_vertices);
  for (int i = 0; i < mesh.num_vertices; ++i) {
    Vec3 x = Vec3::Zero();
    for (int c = 0; c < mesh.ambient_dim; ++c) x[c] = gauss(rng);
    f.set(i, x);
  }
  return f;
}

}  // namespace

TEST_CASE("unit circle curvature magnitude and direction") {
  const EmbeddedMesh mesh = EmbeddedMesh::circle(256);
  const GeometryCache g = build_geometry(mesh);
  for (int i = 0; i < mesh.num_vertices; ++i) {
    CHECK(g.mean_curvature[i].norm() == doctest::Approx(1.0).epsilon(2e-4));
    // inward radial direction
    const Vec3 inward = -mesh.position(i).normalized();
    CHECK(g.mean_curvature[i].normalized().dot(inward) ==
          doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("icosphere mean curvature approximates 2/R") {
  const EmbeddedMesh mesh = EmbeddedMesh::icosphere(3);
  CHECK(mesh.num_vertices == 642);
  const GeometryCache g = build_geometry(mesh);
  double mean = 0.0;
  for (int i = 0; i < mesh.num_vertices; ++i) {
    mean += g.mean_curvature[i].norm();
    const Vec3 inward = -mesh.position(i).normalized();
    CHECK(g.mean_curvature[i].normalized().dot(inward) > 0.99);
  }
  mean /= mesh.num_vertices;
  CHECK(mean == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("collinear triple has zero curvature at the middle vertex") {
  // stadium-like loop with a straight run on the bottom
  std::vector<Vec3> pts;
  for (int i = 0; i <= 4; ++i) pts.push_back(Vec3(i, 0, 0));  // 0..4 collinear
  pts.push_back(Vec3(4, 1, 0));
  pts.push_back(Vec3(2, 2, 0));
  pts.push_back(Vec3(0, 1, 0));
  const EmbeddedMesh mesh = EmbeddedMesh::curve_loop(pts, 2);
  const GeometryCache g = build_geometry(mesh);
  for (int i = 1; i <= 3; ++i)  // interior vertices of the straight run
    CHECK(g.mean_curvature[i].norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("surface H equals the cotangent Laplacian of the positions") {
  const EmbeddedMesh mesh = EmbeddedMesh::icosphere(2);
  const GeometryCache g = build_geometry(mesh);
  const int v = mesh.num_vertices;

  // assemble the classical cotan weights edge by edge
  std::vector<Vec3> lap(v, Vec3::Zero());
  for (const auto& t : mesh.triangles) {
    for (int corner = 0; corner < 3; ++corner) {
      const int i = t[corner], j = t[(corner + 1) % 3], k = t[(corner + 2) % 3];
      const Vec3 u = mesh.position(i) - mesh.position(k);
      const Vec3 w = mesh.position(j) - mesh.position(k);
      const double cot = u.dot(w) / u.cross(w).norm();
      // half-weight per triangle for edge (i,j)
      lap[i] += 0.5 * cot * (mesh.position(j) - mesh.position(i));
      lap[j] += 0.5 * cot * (mesh.position(i) - mesh.position(j));
    }
  }
  for (int i = 0; i < v; ++i)
    CHECK((lap[i] / g.mass[i] - g.mean_curvature[i]).norm() < 1e-12);
}

TEST_CASE("frames are orthonormal and H lies in the normal space") {
  auto check_cache = [](const EmbeddedMesh& mesh) {
    const GeometryCache g = build_geometry(mesh);
    for (int i = 0; i < mesh.num_vertices; ++i) {
      CHECK(std::abs(g.tangent[i].norm() - 1.0) < 1e-12);
      CHECK(std::abs(g.normal[i].norm() - 1.0) < 1e-12);
      CHECK(std::abs(g.tangent[i].dot(g.normal[i])) < 1e-10);
      if (g.intrinsic_dim == 2) {
        CHECK(std::abs(g.tangent2[i].norm() - 1.0) < 1e-12);
        CHECK(std::abs(g.tangent[i].dot(g.tangent2[i])) < 1e-10);
        CHECK(std::abs(g.tangent2[i].dot(g.normal[i])) < 1e-10);
      }
      if (g.codim == 2) {
        CHECK(std::abs(g.normal2[i].norm() - 1.0) < 1e-12);
        CHECK(std::abs(g.normal[i].dot(g.normal2[i])) < 1e-10);
        CHECK(std::abs(g.tangent[i].dot(g.normal2[i])) < 1e-10);
      }
      // tangential component of H
      const Vec3& h = g.mean_curvature[i];
      double tangential = std::abs(h.dot(g.tangent[i]));
      if (g.intrinsic_dim == 2) tangential += std::abs(h.dot(g.tangent2[i]));
      CHECK(tangential <=
            kTolGeom * std::max(h.norm(), kEpsMeanCurvature / g.mean_edge_length));
      CHECK(g.mass[i] > 0.0);
    }
  };
  check_cache(EmbeddedMesh::circle(128, 1.0, Vec3::Zero(), 0.1, 0.3));
  check_cache(EmbeddedMesh::circle3d(96, 2.0));
  check_cache(EmbeddedMesh::icosphere(2));
}

TEST_CASE("density of the reference configuration is exactly one") {
  const EmbeddedMesh mesh = EmbeddedMesh::circle(64, 1.0, Vec3::Zero(), 0.0, 0.4);
  const ScalarField rho = density(mesh, mesh.positions);
  for (int i = 0; i < mesh.num_vertices; ++i) CHECK(rho[i] == 1.0);
}

TEST_CASE("density under uniform scaling") {
  const EmbeddedMesh circle = EmbeddedMesh::circle(64);
  const ScalarField rho_curve = density(circle, 2.0 * circle.positions);
  for (int i = 0; i < circle.num_vertices; ++i)
    CHECK(rho_curve[i] == doctest::Approx(2.0).epsilon(1e-12));

  const EmbeddedMesh sphere = EmbeddedMesh::icosphere(2);
  const ScalarField rho_surf = density(sphere, 2.0 * sphere.positions);
  for (int i = 0; i < sphere.num_vertices; ++i)
    CHECK(rho_surf[i] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("density derivative: radial, translation, rotation fields") {
  const EmbeddedMesh mesh = EmbeddedMesh::circle(256);
  const GeometryCache g = build_geometry(mesh);
  const ScalarField rho = density(mesh, mesh.positions);

  const ScalarField radial = density_derivative(g, rho, radial_field(mesh));
  for (int i = 0; i < mesh.num_vertices; ++i)
    CHECK(radial[i] == doctest::Approx(1.0).epsilon(1e-12));

  const ScalarField translation = density_derivative(
      g, rho, AmbientField::constant(mesh.num_vertices, Vec3(0.3, -1.7, 0.0)));
  CHECK(translation.lpNorm<Eigen::Infinity>() == 0.0);  // bitwise

  AmbientField rot(mesh.num_vertices);
  for (int i = 0; i < mesh.num_vertices; ++i)
    rot.set(i, 2.0 * Vec3::UnitZ().cross(mesh.position(i)));
  CHECK(density_derivative(g, rho, rot).lpNorm<Eigen::Infinity>() < 1e-13);
}

TEST_CASE("density derivative matches central finite differences") {
  auto check = [](const EmbeddedMesh& mesh, unsigned seed) {
    const GeometryCache g = build_geometry(mesh);
    const ScalarField rho = density(mesh, mesh.positions);
    const AmbientField X = random_field(mesh, seed);
    const double eps = 1e-5;
    const ScalarField fd = (density(mesh, mesh.positions + eps * X.data) -
                            density(mesh, mesh.positions - eps * X.data)) /
                           (2.0 * eps);
    const ScalarField formula = density_derivative(g, rho, X);
    CHECK((fd - formula).norm() / formula.norm() < 1e-5);
  };
  check(EmbeddedMesh::circle(128), 7u);
  check(EmbeddedMesh::circle(256, 1.0, Vec3::Zero(), 0.0, 0.3), 8u);
  check(EmbeddedMesh::icosphere(2), 9u);
}

TEST_CASE("split into tangential and normal parts") {
  const EmbeddedMesh mesh = EmbeddedMesh::circle(64);
  const GeometryCache g = build_geometry(mesh);

  AmbientField tangential(mesh.num_vertices);
  for (int i = 0; i < mesh.num_vertices; ++i)
    tangential.set(i, 1.3 * g.tangent[i]);
  auto [tt, tn] = split_tangent_normal(g, tangential);
  CHECK((tt.data - tangential.data).lpNorm<Eigen::Infinity>() < 1e-14);
  CHECK(tn.data.lpNorm<Eigen::Infinity>() < 1e-14);

  AmbientField h(mesh.num_vertices);
  for (int i = 0; i < mesh.num_vertices; ++i) h.set(i, g.mean_curvature[i]);
  auto [ht, hn] = split_tangent_normal(g, h);
  CHECK(ht.data.lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((hn.data - h.data).lpNorm<Eigen::Infinity>() < 1e-12);

  const AmbientField X = random_field(mesh, 17u);
  auto [xt, xn] = split_tangent_normal(g, X);
  CHECK((xt.data + xn.data - X.data).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("curvature converges on graded circles and the sphere") {
  // graded spacing makes the truncation error genuinely O(h^2)
  double err_coarse = 0.0, err_fine = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const int v = pass == 0 ? 64 : 128;
    const EmbeddedMesh mesh = EmbeddedMesh::circle(v, 1.0, Vec3::Zero(), 0.0, 0.3);
    const GeometryCache g = build_geometry(mesh);
    double err = 0.0;
    for (int i = 0; i < v; ++i)
      err = std::max(err, std::abs(g.mean_curvature[i].norm() - 1.0));
    (pass == 0 ? err_coarse : err_fine) = err;
  }
  CHECK(err_coarse / err_fine >= 3.0);  // order >= 2 in h

  double sphere_err[2];
  for (int pass = 0; pass < 2; ++pass) {
    const EmbeddedMesh mesh = EmbeddedMesh::icosphere(pass == 0 ? 2 : 3);
    const GeometryCache g = build_geometry(mesh);
    double mean = 0.0;
    for (int i = 0; i < mesh.num_vertices; ++i)
      mean += g.mean_curvature[i].norm();
    sphere_err[pass] = std::abs(mean / mesh.num_vertices - 2.0);
  }
  CHECK(sphere_err[1] < sphere_err[0]);
}

TEST_CASE("degenerate geometry is rejected") {
  std::vector<Vec3> dup = {{0, 0, 0}, {1, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  CHECK_THROWS_AS(EmbeddedMesh::curve_loop(dup, 2), Error);

  // hairpin: the loop doubles back over itself; the mesh is storable but no
  // tangent frame exists at the turnaround
  std::vector<Vec3> hairpin = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0},
                               {2, 0, 0}, {1, 0, 0}};
  const EmbeddedMesh folded = EmbeddedMesh::curve_loop(hairpin, 2);
  CHECK_THROWS_AS(build_geometry(folded), Error);

  CHECK_THROWS_AS(EmbeddedMesh::curve_loop(
                      {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}, 2),
                  Error);  // V < 4
}

TEST_CASE("non-manifold surfaces are rejected") {
  // two tetrahedra glued along a face -> that face's edges appear 4 times
  std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}};
  std::vector<std::array<int, 3>> tris = {{0, 1, 2}, {0, 3, 1}, {1, 3, 2},
                                          {2, 3, 0}, {0, 1, 4}, {1, 2, 4},
                                          {2, 0, 4}};
  CHECK_THROWS_AS(EmbeddedMesh::triangle_mesh(pts, tris), Error);

  // flipped orientation on one face of a tetrahedron
  std::vector<Vec3> tet = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::vector<std::array<int, 3>> bad = {{0, 2, 1}, {0, 3, 1}, {1, 3, 2}, {2, 3, 0}};
  CHECK_THROWS_AS(EmbeddedMesh::triangle_mesh(tet, bad), Error);
}
