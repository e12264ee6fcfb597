#include "membrane/decomposition.hpp"

#include <cmath>
#include <vector>

#include "membrane/errors.hpp"

namespace membrane {

void require_mean_curvature(const GeometryCache& g) {
  std::vector<double> max_h(g.num_components, 0.0);
  for (int i = 0; i < g.num_vertices; ++i)
    max_h[g.component[i]] =
        std::max(max_h[g.component[i]], g.mean_curvature[i].norm());
  for (int c = 0; c < g.num_components; ++c)
    if (max_h[c] <= kEpsMeanCurvature)
      throw_error(ErrorKind::MeanCurvatureVanishing,
                  "mean curvature vanishes identically on component " +
                      std::to_string(c));
}

DecompositionResult decompose(const OperatorSet& ops, const AmbientField& X,
                              SolverKind solver) {
  const GeometryCache& g = ops.geom();
  if (X.size() != g.num_vertices)
    throw_error(ErrorKind::BadInput, "field size mismatch");
  require_mean_curvature(g);

  DecompositionResult r;
  const ScalarField rhs = ops.bt_mw(X);
  r.pressure = ops.solve_spd(rhs, solver, &r.solver_iterations);

  const AmbientField bp = ops.apply_B(r.pressure);
  r.x_mu = X - bp;

  r.orthogonality_defect = std::abs(g.inner_mw(r.x_mu, bp));
  const ScalarField c = constraint_kernel(g, r.x_mu);
  r.constraint_residual_norm = g.scalar_norm_mw(c);
  r.reconstruction_error = ((r.x_mu.data + bp.data) - X.data).lpNorm<Eigen::Infinity>();
  return r;
}

AmbientField project(const OperatorSet& ops, const AmbientField& X,
                     SolverKind solver) {
  return decompose(ops, X, solver).x_mu;
}

}  // namespace membrane
