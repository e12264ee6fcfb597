#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "membrane/decomposition.hpp"
#include "membrane/mesh.hpp"

namespace membrane {
namespace oracle {

/// Materialized projector P = I - B A^{-1} B^T Mw on a small mesh, built
/// from dense matrices assembled by code independent of the sparse path.
struct DenseProjector {
  Eigen::MatrixXd P;                 // 3V x 3V
  double idempotence_defect = 0.0;   // ||P^2 - P||_F
  double weighted_symmetry_defect = 0.0;  // ||Mw P - (Mw P)^T||_F
};

DenseProjector dense_projector(const EmbeddedMesh& mesh,
                               const Eigen::VectorXd& positions);

AmbientField apply_dense(const DenseProjector& proj, const AmbientField& X);

/// Central finite difference of the density map against the closed-form
/// derivative; returns the relative L2 error.
double fd_density_derivative_check(const EmbeddedMesh& mesh,
                                   const Eigen::VectorXd& positions,
                                   const AmbientField& X, double eps);

/// Manufactured solution p = cos(k theta) on the circle of radius R: builds
/// the analytic field grad p + p H, decomposes it with the discrete
/// operators, and reports the L2 pressure errors and the fitted order.
struct EllipticConvergence {
  std::vector<int> resolutions;
  std::vector<double> l2_errors;
  double fitted_order = 0.0;  // NaN when fewer than 2 resolutions
};

EllipticConvergence manufactured_elliptic_check(
    double radius, int mode, const std::vector<int>& resolutions);

/// Closed-form rigid-rotation geodesic of the circle: positions rotated by
/// omega*t, tangential speed omega*R, constant pressure omega^2 R^2.
struct RigidRotationReference {
  Eigen::VectorXd positions;
  AmbientField velocity;
  ScalarField pressure;
};

RigidRotationReference rigid_rotation_reference(double radius, double omega,
                                                double t, int num_vertices);

/// One entry of the validation suite run by the `check` CLI command.
struct CheckResult {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

std::vector<CheckResult> run_validation_suite();

}  // namespace oracle
}  // namespace membrane
