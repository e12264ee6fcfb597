#include "membrane/operators.hpp"

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include <cmath>
#include <vector>

#include "membrane/errors.hpp"

namespace membrane {

namespace {

int wrap(int i, int v) { return (i % v + v) % v; }

using Triplet = Eigen::Triplet<double>;

void push_block(std::vector<Triplet>& out, int row_vertex, int col, const Vec3& w) {
  for (int c = 0; c < 3; ++c)
    if (w[c] != 0.0) out.emplace_back(3 * row_vertex + c, col, w[c]);
}

Eigen::SparseMatrix<double> assemble_B(const GeometryCache& g) {
  const int v = g.num_vertices;
  std::vector<Triplet> trip;
  if (g.kind == MeshKind::CurveLoop) {
    trip.reserve(9 * v);
    for (int j = 0; j < v; ++j) {
      const Vec3& e_prev = g.edge_unit[wrap(j - 1, v)];
      const Vec3& e_next = g.edge_unit[j];
      const double s = 0.5 / g.mass[j];
      push_block(trip, j, wrap(j - 1, v), -s * e_prev);
      push_block(trip, j, j, s * (e_next - e_prev));
      push_block(trip, j, wrap(j + 1, v), s * e_next);
    }
  } else {
    const auto& tris = *g.triangles;
    trip.reserve(27 * tris.size());
    for (size_t t = 0; t < tris.size(); ++t) {
      for (int jc = 0; jc < 3; ++jc) {
        const int j = tris[t][jc];
        const Vec3 w = -g.tri_area_grad[t][jc] / (3.0 * g.mass[j]);
        for (int ic = 0; ic < 3; ++ic) push_block(trip, j, tris[t][ic], w);
      }
    }
  }
  Eigen::SparseMatrix<double> B(3 * v, v);
  B.setFromTriplets(trip.begin(), trip.end());
  B.makeCompressed();
  return B;
}

// Block-diagonal projector onto the tangent spaces.
Eigen::SparseMatrix<double> tangent_projector(const GeometryCache& g) {
  const int v = g.num_vertices;
  std::vector<Triplet> trip;
  trip.reserve(9 * v);
  for (int i = 0; i < v; ++i) {
    Eigen::Matrix3d P = g.tangent[i] * g.tangent[i].transpose();
    if (g.intrinsic_dim == 2) P += g.tangent2[i] * g.tangent2[i].transpose();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        if (P(r, c) != 0.0) trip.emplace_back(3 * i + r, 3 * i + c, P(r, c));
  }
  Eigen::SparseMatrix<double> P(3 * v, 3 * v);
  P.setFromTriplets(trip.begin(), trip.end());
  return P;
}

Eigen::SparseMatrix<double> curvature_diagonal(const GeometryCache& g) {
  const int v = g.num_vertices;
  std::vector<Triplet> trip;
  trip.reserve(3 * v);
  for (int i = 0; i < v; ++i) push_block(trip, i, i, g.mean_curvature[i]);
  Eigen::SparseMatrix<double> D(3 * v, v);
  D.setFromTriplets(trip.begin(), trip.end());
  return D;
}

}  // namespace

struct OperatorSet::DirectFactorization {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd w;  // Mw * gauge (empty if no gauge)
  double gamma = 0.0;
};

OperatorSet::OperatorSet(GeometryPtr geometry) : geom_(std::move(geometry)) {
  const GeometryCache& g = *geom_;
  const int v = g.num_vertices;

  B_ = assemble_B(g);
  G_ = tangent_projector(g) * (B_ - curvature_diagonal(g)).eval();
  G_.makeCompressed();

  Eigen::SparseMatrix<double> Bw = g.mass3.asDiagonal() * B_;
  Eigen::SparseMatrix<double> At = Eigen::SparseMatrix<double>(B_.transpose()) * Bw;
  // bitwise symmetric
  A_ = 0.5 * (At + Eigen::SparseMatrix<double>(At.transpose()));
  A_.makeCompressed();

  // The exact constraint Jacobian on an even-length loop cannot see the
  // alternating density pattern (the signed sum of dual lengths is an
  // invariant of every motion), so A has that one-dimensional kernel; the
  // pressure is pinned Mw-orthogonal to it.
  if (g.kind == MeshKind::CurveLoop && v % 2 == 0) {
    has_gauge_ = true;
    gauge_.resize(v);
    for (int i = 0; i < v; ++i) gauge_[i] = (i % 2 == 0) ? 1.0 : -1.0;
  }
}

AmbientField OperatorSet::apply_B(const ScalarField& p) const {
  AmbientField out(num_vertices());
  out.data = B_ * p;
  return out;
}

AmbientField OperatorSet::apply_G(const ScalarField& p) const {
  AmbientField out(num_vertices());
  out.data = G_ * p;
  return out;
}

ScalarField OperatorSet::bt_mw(const AmbientField& X) const {
  return -measure_derivative(*geom_, X);
}

void OperatorSet::fix_gauge(ScalarField& p) const {
  if (!has_gauge_) return;
  const Eigen::VectorXd w = geom_->mass.cwiseProduct(gauge_);
  p -= (w.dot(p) / w.dot(gauge_)) * gauge_;
}

const OperatorSet::DirectFactorization& OperatorSet::factorization() const {
  std::call_once(fact_once_, [this] {
    auto fact = std::make_shared<DirectFactorization>();
    Eigen::MatrixXd Ad(A_);
    if (has_gauge_) {
      fact->w = geom_->mass.cwiseProduct(gauge_);
      fact->gamma = Ad.diagonal().mean() / fact->w.squaredNorm();
      Ad.noalias() += fact->gamma * fact->w * fact->w.transpose();
    }
    fact->llt.compute(Ad);
    if (fact->llt.info() != Eigen::Success)
      throw_error(ErrorKind::SolverBreakdown,
                  "Cholesky factorization of A failed (operator not positive "
                  "definite; mean curvature may vanish somewhere)");
    fact_ = std::move(fact);
  });
  return *fact_;
}

ScalarField OperatorSet::solve_spd(const ScalarField& rhs, SolverKind kind,
                                   int* iterations) const {
  const int v = num_vertices();
  if (kind == SolverKind::Auto)
    kind = (v <= kDenseDirectLimit) ? SolverKind::Direct
                                    : SolverKind::ConjugateGradient;

  ScalarField p;
  int iters = 0;
  if (kind == SolverKind::Direct) {
    const DirectFactorization& f = factorization();
    p = f.llt.solve(rhs);
    // One round of iterative refinement keeps the residual at rounding level.
    ScalarField r = rhs - A_ * p;
    if (has_gauge_) r -= f.gamma * f.w * f.w.dot(p);
    p += f.llt.solve(r);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper>
        cg;
    cg.setTolerance(kTolSolve);
    cg.setMaxIterations(10 * v);
    cg.compute(A_);
    p = cg.solve(rhs);
    iters = static_cast<int>(cg.iterations());
    const double rhs_norm = rhs.norm();
    if (rhs_norm > 0.0 && (A_ * p - rhs).norm() > 1e-9 * rhs_norm)
      throw_error(ErrorKind::SolverBreakdown,
                  "conjugate gradient stagnated after " +
                      std::to_string(iters) + " iterations");
  }
  fix_gauge(p);
  if (iterations) *iterations = iters;
  return p;
}

OperatorPtr build_operators(GeometryPtr geometry) {
  return std::make_shared<const OperatorSet>(std::move(geometry));
}

ScalarField divergence(const OperatorSet& ops, const AmbientField& Xt) {
  const GeometryCache& g = ops.geom();
  ScalarField gt = ops.G().transpose() * g.mass3.cwiseProduct(Xt.data);
  return -gt.cwiseQuotient(g.mass);
}

ScalarField constraint_residual(const OperatorSet& ops, const AmbientField& X) {
  return constraint_kernel(ops.geom(), X);
}

}  // namespace membrane
