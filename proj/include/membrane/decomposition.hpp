#pragma once

#include "membrane/operators.hpp"

namespace membrane {

/// Outcome of the submanifold Helmholtz-Hodge split X = X_mu + Bp.
struct DecompositionResult {
  AmbientField x_mu;     // constrained part, c(x_mu) = 0 up to solver tol
  ScalarField pressure;  // p, gauge-fixed on even curve loops
  double constraint_residual_norm = 0.0;  // ||c(x_mu)||_{L2,Mw}
  double orthogonality_defect = 0.0;      // |<x_mu, Bp>_Mw|
  double reconstruction_error = 0.0;      // ||x_mu + Bp - X||_inf
  int solver_iterations = 0;              // 0 for the direct path
};

/// Split X into its volume-preserving part X_mu and the complement Bp by
/// solving the normal equations A p = B^T Mw X.  Requires mean curvature not
/// identically zero on every connected component (throws
/// MeanCurvatureVanishing otherwise).
DecompositionResult decompose(const OperatorSet& ops, const AmbientField& X,
                              SolverKind solver = SolverKind::Auto);

/// The Helmholtz-Hodge projector: the X_mu component alone.  Linear and
/// idempotent up to solver tolerance.
AmbientField project(const OperatorSet& ops, const AmbientField& X,
                     SolverKind solver = SolverKind::Auto);

/// Shared precondition: every component must carry some mean curvature.
void require_mean_curvature(const GeometryCache& geom);

}  // namespace membrane
