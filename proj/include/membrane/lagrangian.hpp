#pragma once

#include <functional>
#include <optional>

#include "membrane/decomposition.hpp"
#include "membrane/operators.hpp"

namespace membrane {

inline constexpr double kFdStep = 1e-6;  // central differences for Custom L

/// Ambient potential V : R^n -> R with its gradient.
struct Potential {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> gradient;

  static Potential none();
  /// V(x) = g * <axis, x> (uniform field of strength g along axis).
  static Potential gravity(double g, const Vec3& axis);
  static Potential custom(std::function<double(const Vec3&)> value,
                          std::function<Vec3(const Vec3&)> gradient);
};

/// Lagrangian density L : TN -> R on flat ambient space, with its vertical
/// gradient (fiber derivative) and horizontal gradient (base derivative at
/// frozen velocity components; parallel transport is trivial in R^n).
class LagrangianDensity {
 public:
  enum class Kind { KineticPotential, Custom };

  /// L(x,v) = |v|^2/2 - V(x): grad_v = v and grad_h = -grad V, exactly.
  static LagrangianDensity kinetic(Potential potential = Potential::none());

  /// Custom density.  Missing gradients fall back to central finite
  /// differences of eval with step kFdStep.
  static LagrangianDensity custom(
      std::function<double(const Vec3&, const Vec3&)> eval,
      std::optional<std::function<Vec3(const Vec3&, const Vec3&)>> grad_v =
          std::nullopt,
      std::optional<std::function<Vec3(const Vec3&, const Vec3&)>> grad_h =
          std::nullopt);

  Kind kind() const { return kind_; }
  const Potential& potential() const { return potential_; }
  bool has_analytic_grad_v() const {
    return kind_ == Kind::KineticPotential || static_cast<bool>(grad_v_);
  }

  double eval(const Vec3& x, const Vec3& v) const;
  Vec3 grad_v(const Vec3& x, const Vec3& v) const;
  Vec3 grad_h(const Vec3& x, const Vec3& v) const;

 private:
  Kind kind_ = Kind::KineticPotential;
  Potential potential_;
  std::function<double(const Vec3&, const Vec3&)> eval_;
  std::function<Vec3(const Vec3&, const Vec3&)> grad_v_;
  std::function<Vec3(const Vec3&, const Vec3&)> grad_h_;
};

/// Pointwise Euler-Lagrange force d/dt[grad_v(f, v)] - grad_h(f, v), the
/// time derivative expanded along (v, a).  For the kinetic family this is
/// exactly a + grad V(f); for Custom densities the chain rule is evaluated
/// with finite differences of grad_v.
AmbientField el_force(const LagrangianDensity& L, const Eigen::VectorXd& f,
                      const AmbientField& v, const AmbientField& a);

/// The part of el_force that does not involve the acceleration, negated:
/// the explicit force driving the constrained dynamics.  Exactly -grad V(f)
/// for the kinetic family.
AmbientField applied_force(const LagrangianDensity& L, const Eigen::VectorXd& f,
                           const AmbientField& v);

/// Projected Euler-Lagrange residual; vanishes along solution trajectories.
AmbientField el_residual(const LagrangianDensity& L, const OperatorSet& ops,
                         const Eigen::VectorXd& f, const AmbientField& v,
                         const AmbientField& a);

/// Pressure recovered from kinematic data: the multiplier of the decomposition
/// of the Euler-Lagrange force.
ScalarField pressure_from_state(const LagrangianDensity& L,
                                const OperatorSet& ops, const Eigen::VectorXd& f,
                                const AmbientField& v, const AmbientField& a);

}  // namespace membrane
