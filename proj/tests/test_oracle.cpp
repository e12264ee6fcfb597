#include <doctest.h>

#include <numbers>
#include <random>

#include "membrane/errors.hpp"
#include "membrane/oracle.hpp"

using namespace membrane;

namespace {

AmbientField random_field(int n, int dim, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  AmbientField f(n);
  for (int i = 0; i < n; ++i) {
    Vec3 x = Vec3::Zero();
    for (int c = 0; c < dim; ++c) x[c] = gauss(rng);
    f.set(i, x);
  }
  return f;
}

}  // namespace

TEST_CASE("dense projector on the 64-vertex circle") {
  const EmbeddedMesh mesh = EmbeddedMesh::circle(64);
  const oracle::DenseProjector p = oracle::dense_projector(mesh, mesh.positions);
  CHECK(p.idempotence_defect < 1e-9);
  CHECK(p.weighted_symmetry_defect < 1e-8);

  AmbientField radial(64);
  for (int i = 0; i < 64; ++i) radial.set(i, mesh.position(i).normalized());
  CHECK(oracle::apply_dense(p, radial).data.lpNorm<Eigen::Infinity>() < 1e-10);

  const AmbientField trans = AmbientField::constant(64, Vec3(1.0, 2.0, 0.0));
  CHECK((oracle::apply_dense(p, trans).data - trans.data).lpNorm<Eigen::Infinity>() <
        1e-10);
}

TEST_CASE("dense projector on a small icosphere") {
  const EmbeddedMesh mesh = EmbeddedMesh::icosphere(1);
  const oracle::DenseProjector p = oracle::dense_projector(mesh, mesh.positions);
  CHECK(p.idempotence_defect < 1e-9);
  CHECK(p.weighted_symmetry_defect < 1e-8);
}

TEST_CASE("dense projector refuses large meshes") {
  const EmbeddedMesh mesh = EmbeddedMesh::circle(600);
  CHECK_THROWS_AS(oracle::dense_projector(mesh, mesh.positions), Error);
}

TEST_CASE("finite-difference density check") {
  const EmbeddedMesh circle = EmbeddedMesh::circle(128);

  AmbientField radial(circle.num_vertices);
  for (int i = 0; i < circle.num_vertices; ++i)
    radial.set(i, circle.position(i).normalized());
  CHECK(oracle::fd_density_derivative_check(circle, circle.positions, radial,
                                            1e-5) < 1e-6);

  const EmbeddedMesh sphere = EmbeddedMesh::icosphere(2);
  const AmbientField X = random_field(sphere.num_vertices, 3, 3u);
  CHECK(oracle::fd_density_derivative_check(sphere, sphere.positions, X, 1e-5) <
        1e-5);

  const AmbientField zero(circle.num_vertices);
  CHECK(oracle::fd_density_derivative_check(circle, circle.positions, zero,
                                            1e-5) == 0.0);

  CHECK_THROWS_AS(
      oracle::fd_density_derivative_check(circle, circle.positions, X, 1.0),
      Error);
}

TEST_CASE("manufactured elliptic solutions converge at second order") {
  const std::vector<int> res = {64, 128, 256, 512};
  for (const auto& [radius, mode] :
       std::vector<std::pair<double, int>>{{1.0, 3.0}, {2.0, 1.0}}) {
    const oracle::EllipticConvergence conv =
        oracle::manufactured_elliptic_check(radius, mode, res);
    CHECK(conv.fitted_order == doctest::Approx(2.0).epsilon(0.1));
    for (size_t i = 1; i < conv.l2_errors.size(); ++i)
      CHECK(conv.l2_errors[i] < conv.l2_errors[i - 1]);
  }

  const oracle::EllipticConvergence flat =
      oracle::manufactured_elliptic_check(1.0, 0, res);
  for (double e : flat.l2_errors) CHECK(e < 1e-10);
}

TEST_CASE("rigid rotation reference values") {
  const auto still = oracle::rigid_rotation_reference(1.0, 0.0, 0.7, 32);
  CHECK(still.pressure.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(still.velocity.data.lpNorm<Eigen::Infinity>() == 0.0);

  const auto unit = oracle::rigid_rotation_reference(1.0, 1.0, 0.0, 32);
  for (int i = 0; i < 32; ++i) CHECK(unit.pressure[i] == 1.0);

  // p = omega^2 R^2
  const auto fast = oracle::rigid_rotation_reference(0.5, 2.0, 0.0, 32);
  for (int i = 0; i < 32; ++i) CHECK(fast.pressure[i] == doctest::Approx(1.0));

  const auto rotated = oracle::rigid_rotation_reference(2.0, 0.5, 1.0, 8);
  CHECK(rotated.positions.segment<3>(0).norm() == doctest::Approx(2.0));
  CHECK(rotated.velocity.get(0).norm() == doctest::Approx(1.0));
  // velocity is tangential
  CHECK(std::abs(rotated.velocity.get(0).dot(
            rotated.positions.segment<3>(0).normalized())) < 1e-14);
}

TEST_CASE("validation suite passes on a healthy build") {
  const std::vector<oracle::CheckResult> results =
      oracle::run_validation_suite();
  CHECK(results.size() >= 10);
  for (const auto& r : results) {
    INFO(r.name, " measured ", r.measured, " threshold ", r.threshold);
    CHECK(r.passed);
  }
}

TEST_CASE("the suite's thresholds catch a curvature sign error") {
  // Simulate the classic regression: the curvature column of B assembled
  // with the opposite sign.  The radial density-derivative check and the
  // analytic decomposition checks must then fail by a wide margin.
  const EmbeddedMesh mesh = EmbeddedMesh::circle(64);
  const GeometryCache g = build_geometry(mesh);
  const ScalarField rho = density(mesh, mesh.positions);
  AmbientField radial(64);
  for (int i = 0; i < 64; ++i) radial.set(i, mesh.position(i).normalized());

  const ScalarField healthy = density_derivative(g, rho, radial);
  const ScalarField mutated = -healthy;  // the sign bug's output
  const double measured = (mutated.array() - 1.0).abs().maxCoeff();
  CHECK(measured > 1e-8);          // check threshold catches it
  CHECK((healthy.array() - 1.0).abs().maxCoeff() < 1e-8);

  // dense projector built from a sign-flipped B no longer matches project()
  Eigen::MatrixXd B_bad = Eigen::MatrixXd::Zero(3 * 64, 64);
  Eigen::VectorXd mass(64), mass3(3 * 64);
  std::vector<Vec3> e(64);
  Eigen::VectorXd len(64);
  for (int i = 0; i < 64; ++i) {
    const Vec3 d = mesh.position((i + 1) % 64) - mesh.position(i);
    len[i] = d.norm();
    e[i] = d / len[i];
  }
  for (int i = 0; i < 64; ++i) mass[i] = 0.5 * (len[(i + 63) % 64] + len[i]);
  for (int i = 0; i < 64; ++i) mass3.segment<3>(3 * i).setConstant(mass[i]);
  for (int j = 0; j < 64; ++j) {
    const double s = 0.5 / mass[j];
    // sign error: edge directions flipped
    B_bad.block<3, 1>(3 * j, (j + 63) % 64) += s * e[(j + 63) % 64];
    B_bad.block<3, 1>(3 * j, j) -= s * (e[j] - e[(j + 63) % 64]);
    B_bad.block<3, 1>(3 * j, (j + 1) % 64) -= s * e[j];
  }
  Eigen::MatrixXd A_bad = B_bad.transpose() * mass3.asDiagonal() * B_bad;
  Eigen::VectorXd w(64);
  for (int i = 0; i < 64; ++i) w[i] = (i % 2 ? -1.0 : 1.0) * mass[i];
  A_bad += (A_bad.diagonal().mean() / w.squaredNorm()) * w * w.transpose();
  const Eigen::MatrixXd P_bad =
      Eigen::MatrixXd::Identity(192, 192) -
      B_bad * Eigen::LDLT<Eigen::MatrixXd>(A_bad).solve(
                  B_bad.transpose() * mass3.asDiagonal());

  const OperatorPtr ops = build_operators(mesh, mesh.positions);
  const AmbientField X = random_field(64, 2, 11u);
  const AmbientField good = project(*ops, X);
  const Eigen::VectorXd bad = P_bad * X.data;
  // here B_bad = -B, so the projector happens to coincide; the *pressure*
  // is where the flipped sign shows up
  const ScalarField p_good = decompose(*ops, radial).pressure;
  Eigen::VectorXd rhs_bad = B_bad.transpose() * mass3.cwiseProduct(radial.data);
  Eigen::VectorXd p_bad = Eigen::LDLT<Eigen::MatrixXd>(A_bad).solve(rhs_bad);
  CHECK((p_good.array() + 1.0).abs().maxCoeff() < 1e-10);
  CHECK((p_bad.array() + 1.0).abs().maxCoeff() > 1e-8);
  CHECK((good.data - bad).norm() < 1e-8 * X.data.norm());
}
