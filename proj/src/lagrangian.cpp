#include "membrane/lagrangian.hpp"

#include "membrane/errors.hpp"

namespace membrane {

Potential Potential::none() {
  Potential p;
  p.value = [](const Vec3&) { return 0.0; };
  p.gradient = [](const Vec3&) { return Vec3::Zero(); };
  return p;
}

Potential Potential::gravity(double g, const Vec3& axis) {
  Potential p;
  const Vec3 grad = g * axis;
  p.value = [grad](const Vec3& x) { return grad.dot(x); };
  p.gradient = [grad](const Vec3&) { return grad; };
  return p;
}

Potential Potential::custom(std::function<double(const Vec3&)> value,
                            std::function<Vec3(const Vec3&)> gradient) {
  Potential p;
  p.value = std::move(value);
  p.gradient = std::move(gradient);
  return p;
}

LagrangianDensity LagrangianDensity::kinetic(Potential potential) {
  LagrangianDensity L;
  L.kind_ = Kind::KineticPotential;
  L.potential_ = std::move(potential);
  return L;
}

LagrangianDensity LagrangianDensity::custom(
    std::function<double(const Vec3&, const Vec3&)> eval,
    std::optional<std::function<Vec3(const Vec3&, const Vec3&)>> grad_v,
    std::optional<std::function<Vec3(const Vec3&, const Vec3&)>> grad_h) {
  if (!eval) throw_error(ErrorKind::BadInput, "custom Lagrangian needs eval");
  LagrangianDensity L;
  L.kind_ = Kind::Custom;
  L.eval_ = std::move(eval);
  if (grad_v) L.grad_v_ = std::move(*grad_v);
  if (grad_h) L.grad_h_ = std::move(*grad_h);
  return L;
}

double LagrangianDensity::eval(const Vec3& x, const Vec3& v) const {
  if (kind_ == Kind::KineticPotential)
    return 0.5 * v.squaredNorm() - potential_.value(x);
  return eval_(x, v);
}

Vec3 LagrangianDensity::grad_v(const Vec3& x, const Vec3& v) const {
  if (kind_ == Kind::KineticPotential) return v;
  if (grad_v_) return grad_v_(x, v);
  Vec3 g;
  for (int c = 0; c < 3; ++c) {
    Vec3 dv = Vec3::Zero();
    dv[c] = kFdStep;
    g[c] = (eval_(x, v + dv) - eval_(x, v - dv)) / (2.0 * kFdStep);
  }
  return g;
}

Vec3 LagrangianDensity::grad_h(const Vec3& x, const Vec3& v) const {
  if (kind_ == Kind::KineticPotential) return -potential_.gradient(x);
  if (grad_h_) return grad_h_(x, v);
  Vec3 g;
  for (int c = 0; c < 3; ++c) {
    Vec3 dx = Vec3::Zero();
    dx[c] = kFdStep;
    g[c] = (eval_(x + dx, v) - eval_(x - dx, v)) / (2.0 * kFdStep);
  }
  return g;
}

namespace {

// d/ds grad_v(x + s dx, v + s dv) at s = 0, central along the normalized
// direction.  When grad_v is itself a finite difference the step is widened
// to the usual second-derivative choice, balancing truncation against the
// inner gradient's rounding noise.
Vec3 grad_v_directional(const LagrangianDensity& L, const Vec3& x, const Vec3& v,
                        const Vec3& dx, const Vec3& dv) {
  const double scale = std::sqrt(dx.squaredNorm() + dv.squaredNorm());
  if (scale == 0.0) return Vec3::Zero();
  const double h = L.has_analytic_grad_v() ? kFdStep : 1e-3;
  const Vec3 ux = dx / scale, uv = dv / scale;
  return scale *
         (L.grad_v(x + h * ux, v + h * uv) - L.grad_v(x - h * ux, v - h * uv)) /
         (2.0 * h);
}

}  // namespace

AmbientField el_force(const LagrangianDensity& L, const Eigen::VectorXd& f,
                      const AmbientField& v, const AmbientField& a) {
  const int n = v.size();
  if (f.size() != 3 * n || a.size() != n)
    throw_error(ErrorKind::BadInput, "el_force shape mismatch");
  AmbientField out(n);
  if (L.kind() == LagrangianDensity::Kind::KineticPotential) {
    for (int i = 0; i < n; ++i)
      out.set(i, a.get(i) + L.potential().gradient(f.segment<3>(3 * i)));
    return out;
  }
  for (int i = 0; i < n; ++i) {
    const Vec3 x = f.segment<3>(3 * i);
    const Vec3 vi = v.get(i);
    const Vec3 ddt =
        grad_v_directional(L, x, vi, vi, a.get(i));  // chain rule in (x, v)
    out.set(i, ddt - L.grad_h(x, vi));
  }
  return out;
}

AmbientField applied_force(const LagrangianDensity& L, const Eigen::VectorXd& f,
                           const AmbientField& v) {
  const int n = v.size();
  AmbientField out(n);
  if (L.kind() == LagrangianDensity::Kind::KineticPotential) {
    for (int i = 0; i < n; ++i)
      out.set(i, -L.potential().gradient(f.segment<3>(3 * i)));
    return out;
  }
  for (int i = 0; i < n; ++i) {
    const Vec3 x = f.segment<3>(3 * i);
    const Vec3 vi = v.get(i);
    const Vec3 conv = grad_v_directional(L, x, vi, vi, Vec3::Zero());
    out.set(i, L.grad_h(x, vi) - conv);
  }
  return out;
}

AmbientField el_residual(const LagrangianDensity& L, const OperatorSet& ops,
                         const Eigen::VectorXd& f, const AmbientField& v,
                         const AmbientField& a) {
  return project(ops, el_force(L, f, v, a));
}

ScalarField pressure_from_state(const LagrangianDensity& L,
                                const OperatorSet& ops, const Eigen::VectorXd& f,
                                const AmbientField& v, const AmbientField& a) {
  return decompose(ops, el_force(L, f, v, a)).pressure;
}

}  // namespace membrane
