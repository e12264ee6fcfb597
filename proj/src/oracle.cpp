#include "membrane/oracle.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "membrane/errors.hpp"
#include "membrane/geometry.hpp"

namespace membrane {
namespace oracle {

namespace {

int wrap(int i, int v) { return (i % v + v) % v; }

// Dense assembly of Mw (per coordinate) and B, written against the mesh
// directly so it shares nothing with the sparse operator path.
void assemble_dense(const EmbeddedMesh& mesh, const Eigen::VectorXd& x,
                    Eigen::VectorXd& mass, Eigen::MatrixXd& B) {
  const int v = mesh.num_vertices;
  mass = Eigen::VectorXd::Zero(v);
  B = Eigen::MatrixXd::Zero(3 * v, v);

  if (mesh.kind == MeshKind::CurveLoop) {
    Eigen::VectorXd len(v);
    std::vector<Vec3> e(v);
    for (int i = 0; i < v; ++i) {
      const Vec3 d = x.segment<3>(3 * wrap(i + 1, v)) - x.segment<3>(3 * i);
      len[i] = d.norm();
      e[i] = d / len[i];
    }
    for (int i = 0; i < v; ++i) mass[i] = 0.5 * (len[wrap(i - 1, v)] + len[i]);
    // (Bp)_j = [ (p_j + p_{j+1}) e_j - (p_{j-1} + p_j) e_{j-1} ] / (2 m_j)
    for (int j = 0; j < v; ++j) {
      const double s = 0.5 / mass[j];
      B.block<3, 1>(3 * j, wrap(j - 1, v)) -= s * e[wrap(j - 1, v)];
      B.block<3, 1>(3 * j, j) += s * (e[j] - e[wrap(j - 1, v)]);
      B.block<3, 1>(3 * j, wrap(j + 1, v)) += s * e[j];
    }
  } else {
    const auto& tris = mesh.triangles;
    std::vector<std::array<Vec3, 3>> grads(tris.size());
    Eigen::VectorXd area(tris.size());
    for (size_t t = 0; t < tris.size(); ++t) {
      const Vec3 a = x.segment<3>(3 * tris[t][0]);
      const Vec3 b = x.segment<3>(3 * tris[t][1]);
      const Vec3 c = x.segment<3>(3 * tris[t][2]);
      const Vec3 n = (b - a).cross(c - a);
      area[t] = 0.5 * n.norm();
      const Vec3 nh = n.normalized();
      grads[t] = {0.5 * nh.cross(c - b), 0.5 * nh.cross(a - c),
                  0.5 * nh.cross(b - a)};
      for (int corner = 0; corner < 3; ++corner)
        mass[tris[t][corner]] += area[t] / 3.0;
    }
    for (size_t t = 0; t < tris.size(); ++t)
      for (int jc = 0; jc < 3; ++jc) {
        const int j = tris[t][jc];
        const Vec3 w = -grads[t][jc] / (3.0 * mass[j]);
        for (int ic = 0; ic < 3; ++ic)
          B.block<3, 1>(3 * j, tris[t][ic]) += w;
      }
  }
}

double fit_slope(const std::vector<double>& logx, const std::vector<double>& logy) {
  const int n = static_cast<int>(logx.size());
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += logx[i];
    my += logy[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < n; ++i) {
    sxy += (logx[i] - mx) * (logy[i] - my);
    sxx += (logx[i] - mx) * (logx[i] - mx);
  }
  return sxy / sxx;
}

AmbientField random_field(int v, int dim, std::mt19937& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  AmbientField f(v);
  for (int i = 0; i < v; ++i) {
    Vec3 x = Vec3::Zero();
    for (int c = 0; c < dim; ++c) x[c] = gauss(rng);
    f.set(i, x);
  }
  return f;
}

}  // namespace

DenseProjector dense_projector(const EmbeddedMesh& mesh,
                               const Eigen::VectorXd& positions) {
  const int v = mesh.num_vertices;
  if (v > 512)
    throw_error(ErrorKind::BadInput, "dense projector limited to V <= 512");

  Eigen::VectorXd mass;
  Eigen::MatrixXd B;
  assemble_dense(mesh, positions, mass, B);

  const Eigen::VectorXd h_flat = B * Eigen::VectorXd::Ones(v);
  double max_h = 0.0;
  for (int i = 0; i < v; ++i)
    max_h = std::max(max_h, h_flat.segment<3>(3 * i).norm());
  if (max_h <= kEpsMeanCurvature)
    throw_error(ErrorKind::MeanCurvatureVanishing,
                "mean curvature vanishes identically");

  Eigen::VectorXd mass3(3 * v);
  for (int i = 0; i < v; ++i) mass3.segment<3>(3 * i).setConstant(mass[i]);

  Eigen::MatrixXd A = B.transpose() * mass3.asDiagonal() * B;
  if (mesh.kind == MeshKind::CurveLoop && v % 2 == 0) {
    Eigen::VectorXd w(v);
    for (int i = 0; i < v; ++i) w[i] = (i % 2 == 0 ? 1.0 : -1.0) * mass[i];
    A += (A.diagonal().mean() / w.squaredNorm()) * w * w.transpose();
  }

  DenseProjector out;
  const Eigen::MatrixXd Ainv_BtM =
      Eigen::LDLT<Eigen::MatrixXd>(A).solve(B.transpose() * mass3.asDiagonal());
  out.P = Eigen::MatrixXd::Identity(3 * v, 3 * v) - B * Ainv_BtM;
  out.idempotence_defect = (out.P * out.P - out.P).norm();
  const Eigen::MatrixXd MP = mass3.asDiagonal() * out.P;
  out.weighted_symmetry_defect = (MP - MP.transpose()).norm();
  return out;
}

AmbientField apply_dense(const DenseProjector& proj, const AmbientField& X) {
  AmbientField out;
  out.data = proj.P * X.data;
  return out;
}

double fd_density_derivative_check(const EmbeddedMesh& mesh,
                                   const Eigen::VectorXd& positions,
                                   const AmbientField& X, double eps) {
  if (!(eps >= 1e-8 && eps <= 1e-3))
    throw_error(ErrorKind::BadInput, "eps must lie in [1e-8, 1e-3]");
  const ScalarField rho_plus = density(mesh, positions + eps * X.data);
  const ScalarField rho_minus = density(mesh, positions - eps * X.data);
  const ScalarField fd = (rho_plus - rho_minus) / (2.0 * eps);

  const GeometryCache geom = build_geometry(mesh, positions);
  const ScalarField rho = density(mesh, positions);
  const ScalarField formula = density_derivative(geom, rho, X);

  const double scale = formula.norm();
  if (scale == 0.0) return fd.norm();
  return (fd - formula).norm() / scale;
}

EllipticConvergence manufactured_elliptic_check(
    double radius, int mode, const std::vector<int>& resolutions) {
  if (radius <= 0.0 || mode < 0)
    throw_error(ErrorKind::BadInput, "need radius > 0 and mode >= 0");
  EllipticConvergence out;
  std::vector<double> log_h, log_e;
  for (int v : resolutions) {
    const EmbeddedMesh mesh = EmbeddedMesh::circle(v, radius);
    const OperatorPtr ops = build_operators(mesh, mesh.positions);

    ScalarField p_exact(v);
    AmbientField X(v);
    for (int i = 0; i < v; ++i) {
      const double theta = 2.0 * std::numbers::pi * i / v;
      const Vec3 er(std::cos(theta), std::sin(theta), 0.0);
      const Vec3 et(-std::sin(theta), std::cos(theta), 0.0);
      p_exact[i] = std::cos(mode * theta);
      // grad p + p H with the analytic curvature H = -e_r / R
      X.set(i, -(mode / radius) * std::sin(mode * theta) * et -
                   (p_exact[i] / radius) * er);
    }
    ScalarField p_exact_gauged = p_exact;
    ops->fix_gauge(p_exact_gauged);

    const DecompositionResult dec = decompose(*ops, X);
    const GeometryCache& g = ops->geom();
    const double denom = std::max(g.scalar_norm_mw(p_exact_gauged), 1e-300);
    const double err =
        g.scalar_norm_mw(dec.pressure - p_exact_gauged) / denom;
    out.resolutions.push_back(v);
    out.l2_errors.push_back(err);
    log_h.push_back(std::log(2.0 * radius * std::sin(std::numbers::pi / v)));
    log_e.push_back(std::log(std::max(err, 1e-300)));
  }
  out.fitted_order = (log_h.size() >= 2)
                         ? fit_slope(log_h, log_e)
                         : std::numeric_limits<double>::quiet_NaN();
  return out;
}

RigidRotationReference rigid_rotation_reference(double radius, double omega,
                                                double t, int num_vertices) {
  if (radius <= 0.0) throw_error(ErrorKind::BadInput, "radius must be > 0");
  RigidRotationReference ref;
  ref.positions.resize(3 * num_vertices);
  ref.velocity = AmbientField(num_vertices);
  for (int i = 0; i < num_vertices; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / num_vertices + omega * t;
    ref.positions.segment<3>(3 * i) =
        radius * Vec3(std::cos(theta), std::sin(theta), 0.0);
    ref.velocity.set(i,
                     omega * radius * Vec3(-std::sin(theta), std::cos(theta), 0.0));
  }
  ref.pressure = ScalarField::Constant(num_vertices, omega * omega * radius * radius);
  return ref;
}

std::vector<CheckResult> run_validation_suite() {
  std::vector<CheckResult> results;
  auto record = [&](const std::string& name, double measured, double threshold) {
    results.push_back({name, measured, threshold, measured < threshold});
  };
  std::mt19937 rng(20240817u);

  {  // dense projector self-consistency and agreement with the sparse path
    const EmbeddedMesh mesh = EmbeddedMesh::circle(64);
    const DenseProjector dense = dense_projector(mesh, mesh.positions);
    record("dense_projector_idempotence", dense.idempotence_defect, 1e-9);
    record("dense_projector_weighted_symmetry", dense.weighted_symmetry_defect,
           1e-8);
    const OperatorPtr ops = build_operators(mesh, mesh.positions);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const AmbientField X = random_field(mesh.num_vertices, 2, rng);
      const AmbientField sparse = project(*ops, X);
      const AmbientField densed = apply_dense(dense, X);
      worst = std::max(worst,
                       (sparse.data - densed.data).norm() / X.data.norm());
    }
    record("projector_sparse_vs_dense", worst, 1e-8);
  }

  {  // density derivative versus finite differences
    const EmbeddedMesh circle = EmbeddedMesh::circle(256);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const AmbientField X = random_field(circle.num_vertices, 2, rng);
      worst = std::max(
          worst, fd_density_derivative_check(circle, circle.positions, X, 1e-5));
    }
    record("density_derivative_fd_circle", worst, 1e-5);

    const EmbeddedMesh sphere = EmbeddedMesh::icosphere(2);
    worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const AmbientField X = random_field(sphere.num_vertices, 3, rng);
      worst = std::max(
          worst, fd_density_derivative_check(sphere, sphere.positions, X, 1e-5));
    }
    record("density_derivative_fd_icosphere", worst, 1e-5);

    AmbientField radial(circle.num_vertices);
    for (int i = 0; i < circle.num_vertices; ++i)
      radial.set(i, circle.position(i).normalized());
    const GeometryCache g = build_geometry(circle);
    const ScalarField d = density_derivative(
        g, density(circle, circle.positions), radial);
    record("density_derivative_radial_is_one",
           (d.array() - 1.0).abs().maxCoeff(), 1e-8);
  }

  {  // manufactured elliptic solutions
    const std::vector<int> res = {64, 128, 256, 512};
    for (int k : {1, 3, 5}) {
      const EllipticConvergence conv = manufactured_elliptic_check(1.0, k, res);
      record("elliptic_order_k" + std::to_string(k),
             std::abs(conv.fitted_order - 2.0), 0.2);
    }
    const EllipticConvergence flat = manufactured_elliptic_check(1.0, 0, res);
    double worst = 0.0;
    for (double e : flat.l2_errors) worst = std::max(worst, e);
    record("elliptic_constant_mode_exact", worst, 1e-10);
  }

  {  // analytic decomposition and rotation reference
    const EmbeddedMesh mesh = EmbeddedMesh::circle(128);
    const OperatorPtr ops = build_operators(mesh, mesh.positions);
    AmbientField radial(mesh.num_vertices);
    for (int i = 0; i < mesh.num_vertices; ++i)
      radial.set(i, mesh.position(i).normalized());
    const DecompositionResult dec = decompose(*ops, radial);
    record("decompose_radial_pressure",
           (dec.pressure.array() + 1.0).abs().maxCoeff(), 1e-10);
    record("decompose_radial_xmu", dec.x_mu.data.lpNorm<Eigen::Infinity>(),
           1e-10);

    const RigidRotationReference ref =
        rigid_rotation_reference(1.0, 1.0, 0.0, 128);
    AmbientField centripetal(mesh.num_vertices);
    for (int i = 0; i < mesh.num_vertices; ++i)
      centripetal.set(i, -mesh.position(i));  // -omega^2 R e_r
    const DecompositionResult acc = decompose(*ops, centripetal);
    record("rotation_reference_pressure",
           (acc.pressure - ref.pressure).lpNorm<Eigen::Infinity>(), 1e-10);
  }

  return results;
}

}  // namespace oracle
}  // namespace membrane
