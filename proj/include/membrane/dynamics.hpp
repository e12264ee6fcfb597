#pragma once

#include <memory>
#include <vector>

#include "membrane/lagrangian.hpp"

namespace membrane {

inline constexpr double kVolTol = 1e-8;  // |rho - 1| kept below this
inline constexpr double kTolDyn = 1e-9;  // constraint residual after a step

enum class StepScheme {
  ProjectedHeun,     // default: two-stage scheme, stage pressures from the
                     // instantaneous constraint-consistency solve
  ChorinProjection,  // first-order kick + projection; pressure = multiplier/dt
};

struct SimOptions {
  double dt = 1e-3;
  double total_time = 1.0;
  int output_stride = 1;
  bool renormalize_volume = true;
  StepScheme scheme = StepScheme::ProjectedHeun;
  SolverKind solver = SolverKind::Auto;
  double vol_tol = kVolTol;
  int max_newton_iterations = 10;
};

struct SimState {
  double t = 0.0;
  long step_index = 0;
  Eigen::VectorXd positions;
  AmbientField velocity;  // lies in the discrete constraint space
  ScalarField pressure;   // instantaneous pressure at (positions, velocity)

  std::shared_ptr<const EmbeddedMesh> mesh;
  GeometryPtr geom;  // caches built at `positions`
  OperatorPtr ops;
};

/// Conserved/monitored quantities, always recomputed from the state.
struct Diagnostics {
  double t = 0.0;
  double kinetic_energy = 0.0;  // <v,v>_Mw / 2
  double max_density_deviation = 0.0;
  double constraint_residual_norm = 0.0;
  double pressure_min = 0.0, pressure_mean = 0.0, pressure_max = 0.0;
  double min_mean_curvature_norm = 0.0;
};

struct Frame {
  double t = 0.0;
  long step = 0;
  Eigen::VectorXd positions;
  AmbientField velocity;
  ScalarField pressure;
};

struct Trajectory {
  std::vector<Frame> frames;
  std::vector<Diagnostics> diagnostics;  // one per state incl. the initial one
};

/// Project v0 into the discrete constraint space and set up caches.
SimState initialize(std::shared_ptr<const EmbeddedMesh> mesh,
                    const AmbientField& v0, const SimOptions& opts);

/// Advance one step of length dt.
SimState step(const SimState& state, const LagrangianDensity& L, double dt,
              const SimOptions& opts);

/// Newton iteration pushing max|rho - 1| below opts.vol_tol by displacing
/// positions along range(B).  Throws RenormalizationDiverged outside the
/// basin (max|rho-1| >= 0.5) or when max_newton_iterations are exhausted.
SimState renormalize_volume(const SimState& state, const SimOptions& opts,
                            int* iterations = nullptr);

Diagnostics compute_diagnostics(const SimState& state);

Trajectory run(std::shared_ptr<const EmbeddedMesh> mesh, const AmbientField& v0,
               const LagrangianDensity& L, double total_time, double dt,
               const SimOptions& opts);

/// Pressure at a configuration/velocity pair: solves the weak form of the
/// pressure-determination equation, A p = Mw (gamma(x, v) + c(F)), so that
/// the acceleration F + Bp keeps d/dt c_x(v) = 0.
ScalarField instantaneous_pressure(const LagrangianDensity& L,
                                   const GeometryCache& geom,
                                   const OperatorSet& ops,
                                   const Eigen::VectorXd& positions,
                                   const AmbientField& velocity,
                                   SolverKind solver = SolverKind::Auto);

}  // namespace membrane
