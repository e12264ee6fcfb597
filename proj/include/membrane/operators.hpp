#pragma once

#include <Eigen/SparseCore>

#include <memory>
#include <mutex>

#include "membrane/geometry.hpp"

namespace membrane {

inline constexpr double kTolSolve = 1e-12;    // relative solver tolerance
inline constexpr int kDenseDirectLimit = 2048;  // direct path above -> CG

enum class SolverKind { Auto, Direct, ConjugateGradient };

using GeometryPtr = std::shared_ptr<const GeometryCache>;

/// Discrete intrinsic operators at one configuration.
///
/// B : ScalarField -> AmbientField is the exact adjoint of the linearized
/// volume constraint: <Bp, X>_Mw = -<p, c(X)>_Mw for every p and X, where
/// c(X) = dm[X]/m is the exact derivative of the lumped measure.  Hence
/// B(1) = H identically, range(B) is the discrete Gamma_mu-orthogonal
/// complement, and rigid translations lie in ker(B^T Mw) to machine zero.
///
/// G is the tangential gradient, defined by the splitting Bp = Gp + (p~)H
/// with (p~) a per-element average of p; it annihilates constants and its
/// range is tangential (exactly so on curves, to discretization order on
/// surfaces).  div := -Mw^{-1} G^T Mw, so summation by parts is exact.
///
/// A := B^T Mw B is symmetric positive semidefinite; it is definite whenever
/// H does not vanish identically on a component, except for the alternating
/// gauge mode on even-length curve loops (see `gauge`), which the solver
/// pins to zero in the Mw inner product.
///
/// Immutable after assembly; the lazy factorization is guarded so exactly
/// one factorization is computed per OperatorSet.
class OperatorSet {
 public:
  explicit OperatorSet(GeometryPtr geometry);

  OperatorSet(const OperatorSet&) = delete;
  OperatorSet& operator=(const OperatorSet&) = delete;

  const GeometryCache& geom() const { return *geom_; }
  GeometryPtr geom_ptr() const { return geom_; }
  int num_vertices() const { return geom_->num_vertices; }

  const Eigen::SparseMatrix<double>& B() const { return B_; }
  const Eigen::SparseMatrix<double>& G() const { return G_; }
  const Eigen::SparseMatrix<double>& A() const { return A_; }
  const Eigen::VectorXd& mass() const { return geom_->mass; }
  const std::vector<Vec3>& mean_curvature() const {
    return geom_->mean_curvature;
  }

  bool has_gauge() const { return has_gauge_; }
  const Eigen::VectorXd& gauge() const { return gauge_; }

  AmbientField apply_B(const ScalarField& p) const;
  AmbientField apply_G(const ScalarField& p) const;

  /// B^T Mw X, assembled from per-element differences of X (equals
  /// -measure_derivative), so constant fields give bitwise zero.
  ScalarField bt_mw(const AmbientField& X) const;

  /// Remove the gauge component (Mw-orthogonal) from p.  No-op when the
  /// operator has no gauge mode.
  void fix_gauge(ScalarField& p) const;

  /// Solve A p = rhs to relative tolerance kTolSolve.  Auto picks a dense
  /// Cholesky factorization up to kDenseDirectLimit vertices and Jacobi-
  /// preconditioned CG beyond.  Throws SolverBreakdown on CG stagnation.
  ScalarField solve_spd(const ScalarField& rhs, SolverKind kind,
                        int* iterations = nullptr) const;

 private:
  struct DirectFactorization;

  const DirectFactorization& factorization() const;

  GeometryPtr geom_;
  Eigen::SparseMatrix<double> B_, G_, A_;
  bool has_gauge_ = false;
  Eigen::VectorXd gauge_;

  mutable std::once_flag fact_once_;
  mutable std::shared_ptr<const DirectFactorization> fact_;
};

using OperatorPtr = std::shared_ptr<const OperatorSet>;

OperatorPtr build_operators(GeometryPtr geometry);

inline OperatorPtr build_operators(const EmbeddedMesh& mesh,
                                   const Eigen::VectorXd& positions) {
  return build_operators(
      std::make_shared<const GeometryCache>(build_geometry(mesh, positions)));
}

/// div(Xt) = -Mw^{-1} G^T Mw Xt; together with G this satisfies the discrete
/// Stokes identity <Gp, X>_Mw = -<p, div X>_Mw to machine precision.
ScalarField divergence(const OperatorSet& ops, const AmbientField& Xt);

/// c(X) = div(X^T) - <X^perp, H> realized as the exact logarithmic measure
/// derivative; weak form Mw c(X) = -B^T Mw X holds identically.
ScalarField constraint_residual(const OperatorSet& ops, const AmbientField& X);

}  // namespace membrane
