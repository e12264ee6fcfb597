#pragma once

#include <array>
#include <vector>

#include "membrane/mesh.hpp"
#include "membrane/types.hpp"

namespace membrane {

// Geometry tolerances.
inline constexpr double kTolGeom = 1e-8;   // frame orthogonality / H normality
inline constexpr double kEpsGeom = 1e-12;  // element degeneracy threshold
inline constexpr double kEpsMeanCurvature = 1e-8;  // Emb^x condition

/// All metric data of a configuration: per-vertex mass weights (lumped
/// Riemannian volume), orthonormal tangent/normal frames, the mean-curvature
/// vector H (trace of the second fundamental form, realized as the discrete
/// Laplace-Beltrami of the inclusion; inward for convex bodies), and the
/// element quantities the variation kernels below are built from.
/// Immutable after construction; safe to share across threads.
struct GeometryCache {
  MeshKind kind = MeshKind::CurveLoop;
  int num_vertices = 0;
  int ambient_dim = 2;
  int intrinsic_dim = 1;  // 1 for curves, 2 for surfaces
  int codim = 1;

  Eigen::VectorXd positions;  // configuration this cache was built at (3V)

  Eigen::VectorXd mass;       // m_i > 0 (dual length / lumped area)
  Eigen::VectorXd mass3;      // mass repeated per coordinate, for field dots

  // Orthonormal frames.  tangent2 is used only for surfaces, normal2 only
  // for codimension-2 curves.
  std::vector<Vec3> tangent, tangent2;
  std::vector<Vec3> normal, normal2;

  std::vector<Vec3> mean_curvature;        // H_i, normal by construction
  Eigen::VectorXd mean_curvature_norm_sq;  // |H_i|^2

  // Element data (curves).
  std::vector<Vec3> edge_unit;  // unit vector vertex i -> i+1
  Eigen::VectorXd edge_length;

  // Element data (surfaces): per-triangle area and the gradient of that
  // area with respect to each corner position.
  Eigen::VectorXd tri_area;
  std::vector<std::array<Vec3, 3>> tri_area_grad;
  const std::vector<std::array<int, 3>>* triangles = nullptr;  // mesh-owned

  std::vector<int> component;
  int num_components = 1;

  double mean_edge_length = 0.0;

  double inner_mw(const AmbientField& x, const AmbientField& y) const {
    return x.data.dot(mass3.cwiseProduct(y.data));
  }
  double norm_mw(const AmbientField& x) const {
    return std::sqrt(inner_mw(x, x));
  }
  double scalar_inner_mw(const ScalarField& p, const ScalarField& q) const {
    return p.dot(mass.cwiseProduct(q));
  }
  double scalar_norm_mw(const ScalarField& p) const {
    return std::sqrt(scalar_inner_mw(p, p));
  }
};

/// Build the full metric cache at the given configuration.  Throws
/// DegenerateGeometry on zero edges, zero triangles or hairpin vertices.
GeometryCache build_geometry(const EmbeddedMesh& mesh,
                             const Eigen::VectorXd& positions);

inline GeometryCache build_geometry(const EmbeddedMesh& mesh) {
  return build_geometry(mesh, mesh.positions);
}

/// Current lumped measure m_i of the configuration (same arithmetic path as
/// the reference measure, so density(reference) == 1 exactly).
Eigen::VectorXd lumped_measure(const EmbeddedMesh& mesh,
                               const Eigen::VectorXd& positions);

/// rho_i = m_i(positions) / mu_i.
ScalarField density(const EmbeddedMesh& mesh, const Eigen::VectorXd& positions);

/// First variation of the lumped measure: dm_i[X], the exact derivative of
/// m_i under the vertex displacement field X.  Assembled from per-element
/// differences of X, so rigid translations give bitwise zero.
ScalarField measure_derivative(const GeometryCache& cache,
                               const AmbientField& X);

/// Second variation d^2 m_i[X,X] along the straight-line flow x + eps*X.
ScalarField measure_second_variation(const GeometryCache& cache,
                                     const AmbientField& X);

/// Logarithmic derivative of density: c(X)_i = dm_i[X]/m_i.  This is the
/// linearized volume-preservation constraint; X is divergence-admissible iff
/// c(X) = 0.  Pointwise it agrees with div(X^T) - <X^perp, H> up to the
/// discretization's own quadrature.
ScalarField constraint_kernel(const GeometryCache& cache,
                              const AmbientField& X);

/// d/deps [ c_{x+eps*X}(X) ] at eps = 0: the geometric (curvature) term of
/// the differentiated constraint, needed to keep d/dt c_x(v) = 0 along
/// trajectories.
ScalarField constraint_geometric_term(const GeometryCache& cache,
                                      const AmbientField& X);

/// rho_* X = c(X) * rho: the derivative of the density map at the cache's
/// configuration, given the density rho there.
ScalarField density_derivative(const GeometryCache& cache,
                               const ScalarField& rho, const AmbientField& X);

/// Exact split X = X_t + X_n with X_t in the tangent span and X_n = X - X_t.
std::pair<AmbientField, AmbientField> split_tangent_normal(
    const GeometryCache& cache, const AmbientField& X);

}  // namespace membrane
