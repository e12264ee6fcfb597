#include "membrane/dynamics.hpp"

#include <cmath>

#include "membrane/errors.hpp"

namespace membrane {

namespace {

struct StageEval {
  GeometryPtr geom;
  OperatorPtr ops;
  AmbientField accel;
  ScalarField pressure;
};

ScalarField stage_pressure(const LagrangianDensity& L, const GeometryCache& geom,
                           const OperatorSet& ops, const Eigen::VectorXd& x,
                           const AmbientField& v, SolverKind solver,
                           AmbientField* force_out = nullptr) {
  const AmbientField F = applied_force(L, x, v);
  const ScalarField gamma = constraint_geometric_term(geom, v);
  const ScalarField cF = constraint_kernel(geom, F);
  const ScalarField rhs = geom.mass.cwiseProduct(gamma + cF);
  ScalarField p = ops.solve_spd(rhs, solver);
  if (force_out) *force_out = F;
  return p;
}

StageEval evaluate_stage(const LagrangianDensity& L,
                         std::shared_ptr<const EmbeddedMesh> mesh,
                         const Eigen::VectorXd& x, const AmbientField& v,
                         SolverKind solver, GeometryPtr geom = nullptr,
                         OperatorPtr ops = nullptr) {
  StageEval s;
  s.geom = geom ? std::move(geom)
                : std::make_shared<const GeometryCache>(build_geometry(*mesh, x));
  s.ops = ops ? std::move(ops) : build_operators(s.geom);
  require_mean_curvature(*s.geom);

  AmbientField F;
  s.pressure = stage_pressure(L, *s.geom, *s.ops, x, v, solver, &F);
  s.accel = F + s.ops->apply_B(s.pressure);
  return s;
}

// Newton renormalization on raw position/cache data; updates all three.
int renormalize_in_place(const EmbeddedMesh& mesh, Eigen::VectorXd& x,
                         GeometryPtr& geom, OperatorPtr& ops,
                         const SimOptions& opts) {
  ScalarField rho = geom->mass.cwiseQuotient(mesh.reference_measure);
  double dev = (rho.array() - 1.0).abs().maxCoeff();
  if (dev <= opts.vol_tol) return 0;
  if (dev >= 0.5)
    throw_error(ErrorKind::RenormalizationDiverged,
                "density deviation " + std::to_string(dev) +
                    " outside the Newton basin");
  for (int it = 1; it <= opts.max_newton_iterations; ++it) {
    const ScalarField rhs =
        geom->mass.cwiseProduct((rho.array() - 1.0).matrix().cwiseQuotient(rho));
    const ScalarField q = ops->solve_spd(rhs, opts.solver);
    x += ops->apply_B(q).data;
    geom = std::make_shared<const GeometryCache>(build_geometry(mesh, x));
    ops = build_operators(geom);
    rho = geom->mass.cwiseQuotient(mesh.reference_measure);
    dev = (rho.array() - 1.0).abs().maxCoeff();
    if (dev <= opts.vol_tol) return it;
  }
  throw_error(ErrorKind::RenormalizationDiverged,
              "volume Newton did not reach vol_tol within " +
                  std::to_string(opts.max_newton_iterations) + " iterations");
}

SimState finish_step(const SimState& state, const LagrangianDensity& L,
                     double dt, const SimOptions& opts, Eigen::VectorXd x_new,
                     AmbientField v_new, GeometryPtr geom_new, OperatorPtr ops_new,
                     const ScalarField* chorin_pressure) {
  if (opts.renormalize_volume)
    renormalize_in_place(*state.mesh, x_new, geom_new, ops_new, opts);

  // Final velocity projection at the end-of-step geometry keeps the
  // constraint residual at solver level after every accepted step.
  const DecompositionResult dec = decompose(*ops_new, v_new, opts.solver);

  SimState next;
  next.t = state.t + dt;
  next.step_index = state.step_index + 1;
  next.mesh = state.mesh;
  next.positions = std::move(x_new);
  next.velocity = dec.x_mu;
  next.geom = std::move(geom_new);
  next.ops = std::move(ops_new);
  if (chorin_pressure) {
    ScalarField p = *chorin_pressure - dec.pressure;  // total impulse removed
    p /= dt;
    next.ops->fix_gauge(p);
    next.pressure = std::move(p);
  } else {
    next.pressure = stage_pressure(L, *next.geom, *next.ops, next.positions,
                                   next.velocity, opts.solver);
  }
  return next;
}

SimState step_heun(const SimState& state, const LagrangianDensity& L, double dt,
                   const SimOptions& opts) {
  const StageEval s1 = evaluate_stage(L, state.mesh, state.positions,
                                      state.velocity, opts.solver, state.geom,
                                      state.ops);

  Eigen::VectorXd x_pred = state.positions + dt * state.velocity.data;
  AmbientField v_pred = state.velocity + dt * s1.accel;
  const StageEval s2 =
      evaluate_stage(L, state.mesh, x_pred, v_pred, opts.solver);

  Eigen::VectorXd x_new =
      state.positions + (0.5 * dt) * (state.velocity.data + v_pred.data);
  AmbientField v_new = state.velocity + (0.5 * dt) * (s1.accel + s2.accel);

  auto geom_new =
      std::make_shared<const GeometryCache>(build_geometry(*state.mesh, x_new));
  OperatorPtr ops_new = build_operators(geom_new);
  return finish_step(state, L, dt, opts, std::move(x_new), std::move(v_new),
                     std::move(geom_new), std::move(ops_new), nullptr);
}

SimState step_chorin(const SimState& state, const LagrangianDensity& L,
                     double dt, const SimOptions& opts) {
  const AmbientField F = applied_force(L, state.positions, state.velocity);
  const AmbientField v_star = state.velocity + dt * F;
  const DecompositionResult dec = decompose(*state.ops, v_star, opts.solver);

  Eigen::VectorXd x_new = state.positions + dt * dec.x_mu.data;
  auto geom_new =
      std::make_shared<const GeometryCache>(build_geometry(*state.mesh, x_new));
  OperatorPtr ops_new = build_operators(geom_new);

  // The reported pressure collects both multipliers of the step (kick
  // projection and geometry update), scaled so it converges to the
  // continuous pressure; the sign convention follows B, whose multiplier
  // enters the velocity update with a minus.
  const ScalarField minus_p_raw = -dec.pressure;
  return finish_step(state, L, dt, opts, std::move(x_new), dec.x_mu,
                     std::move(geom_new), std::move(ops_new), &minus_p_raw);
}

}  // namespace

ScalarField instantaneous_pressure(const LagrangianDensity& L,
                                   const GeometryCache& geom,
                                   const OperatorSet& ops,
                                   const Eigen::VectorXd& positions,
                                   const AmbientField& velocity,
                                   SolverKind solver) {
  return stage_pressure(L, geom, ops, positions, velocity, solver);
}

SimState initialize(std::shared_ptr<const EmbeddedMesh> mesh,
                    const AmbientField& v0, const SimOptions& opts) {
  if (!mesh) throw_error(ErrorKind::BadInput, "null mesh");
  SimState state;
  state.mesh = mesh;
  state.positions = mesh->positions;
  state.geom = std::make_shared<const GeometryCache>(build_geometry(*mesh));
  state.ops = build_operators(state.geom);
  require_mean_curvature(*state.geom);
  state.velocity = project(*state.ops, v0, opts.solver);
  state.pressure = ScalarField::Zero(mesh->num_vertices);
  return state;
}

SimState step(const SimState& state, const LagrangianDensity& L, double dt,
              const SimOptions& opts) {
  if (!(dt > 0.0)) throw_error(ErrorKind::BadInput, "dt must be positive");
  if (opts.scheme == StepScheme::ChorinProjection)
    return step_chorin(state, L, dt, opts);
  return step_heun(state, L, dt, opts);
}

SimState renormalize_volume(const SimState& state, const SimOptions& opts,
                            int* iterations) {
  SimState next = state;
  const int it = renormalize_in_place(*state.mesh, next.positions, next.geom,
                                      next.ops, opts);
  if (iterations) *iterations = it;
  return next;
}

Diagnostics compute_diagnostics(const SimState& state) {
  const GeometryCache& g = *state.geom;
  Diagnostics d;
  d.t = state.t;
  d.kinetic_energy = 0.5 * g.inner_mw(state.velocity, state.velocity);
  const ScalarField rho = g.mass.cwiseQuotient(state.mesh->reference_measure);
  d.max_density_deviation = (rho.array() - 1.0).abs().maxCoeff();
  d.constraint_residual_norm =
      g.scalar_norm_mw(constraint_kernel(g, state.velocity));
  d.pressure_min = state.pressure.minCoeff();
  d.pressure_max = state.pressure.maxCoeff();
  d.pressure_mean = state.pressure.mean();
  double min_h = std::numeric_limits<double>::infinity();
  for (const Vec3& h : g.mean_curvature) min_h = std::min(min_h, h.norm());
  d.min_mean_curvature_norm = min_h;
  return d;
}

Trajectory run(std::shared_ptr<const EmbeddedMesh> mesh, const AmbientField& v0,
               const LagrangianDensity& L, double total_time, double dt,
               const SimOptions& opts) {
  if (!(dt > 0.0)) throw_error(ErrorKind::BadInput, "dt must be positive");
  if (total_time < 0.0)
    throw_error(ErrorKind::BadInput, "total_time must be nonnegative");

  SimState state = initialize(mesh, v0, opts);
  state.pressure = stage_pressure(L, *state.geom, *state.ops, state.positions,
                                  state.velocity, opts.solver);

  Trajectory traj;
  auto snapshot = [&](const SimState& s) {
    traj.frames.push_back(
        {s.t, s.step_index, s.positions, s.velocity, s.pressure});
  };
  snapshot(state);
  traj.diagnostics.push_back(compute_diagnostics(state));

  const long steps = std::llround(total_time / dt);
  const int stride = std::max(1, opts.output_stride);
  for (long n = 1; n <= steps; ++n) {
    state = step(state, L, dt, opts);
    traj.diagnostics.push_back(compute_diagnostics(state));
    if (n % stride == 0 || n == steps) snapshot(state);
  }
  return traj;
}

}  // namespace membrane
