#include "membrane/geometry.hpp"

#include <cmath>

#include "membrane/errors.hpp"

namespace membrane {

namespace {

constexpr double kHairpinTol = 1e-6;

int wrap(int i, int v) { return (i % v + v) % v; }

Vec3 rot90(const Vec3& t) { return Vec3(-t.y(), t.x(), 0.0); }

// Axis least aligned with d, for seeding orthonormal frames.
Vec3 seed_axis(const Vec3& d) {
  const Vec3 a = d.cwiseAbs();
  if (a.x() <= a.y() && a.x() <= a.z()) return Vec3::UnitX();
  if (a.y() <= a.z()) return Vec3::UnitY();
  return Vec3::UnitZ();
}

// Gradient of triangle area with respect to each corner.  The three vectors
// sum to zero identically; kernels below rely on that and are written in
// difference form so rigid translations drop out bitwise.
void triangle_area_gradients(const Vec3& a, const Vec3& b, const Vec3& c,
                             double& area, std::array<Vec3, 3>& grad) {
  const Vec3 n = (b - a).cross(c - a);
  const double nn = n.norm();
  area = 0.5 * nn;
  const Vec3 nhat = n / nn;
  grad[0] = 0.5 * nhat.cross(c - b);
  grad[1] = 0.5 * nhat.cross(a - c);
  grad[2] = 0.5 * nhat.cross(b - a);
}

void build_curve(const EmbeddedMesh& mesh, const Eigen::VectorXd& x,
                 GeometryCache& g) {
  const int v = mesh.num_vertices;
  g.intrinsic_dim = 1;
  g.codim = mesh.ambient_dim - 1;

  g.edge_unit.resize(v);
  g.edge_length.resize(v);
  for (int i = 0; i < v; ++i) {
    const Vec3 d = x.segment<3>(3 * wrap(i + 1, v)) - x.segment<3>(3 * i);
    const double len = d.norm();
    if (len <= kEpsGeom)
      throw_error(ErrorKind::DegenerateGeometry,
                  "zero edge at vertex " + std::to_string(i));
    g.edge_length[i] = len;
    g.edge_unit[i] = d / len;
  }
  g.mean_edge_length = g.edge_length.mean();

  g.mass.resize(v);
  g.tangent.resize(v);
  g.normal.resize(v);
  g.mean_curvature.resize(v);
  if (g.codim == 2) g.normal2.resize(v);

  for (int i = 0; i < v; ++i) {
    const Vec3& e_prev = g.edge_unit[wrap(i - 1, v)];
    const Vec3& e_next = g.edge_unit[i];
    g.mass[i] = 0.5 * (g.edge_length[wrap(i - 1, v)] + g.edge_length[i]);

    const Vec3 bisector = e_prev + e_next;
    if (bisector.norm() <= kHairpinTol)
      throw_error(ErrorKind::DegenerateGeometry,
                  "hairpin vertex " + std::to_string(i) +
                      " (adjacent edges antiparallel)");
    g.tangent[i] = bisector.normalized();

    // Second derivative of position in arc length.  Orthogonal to the
    // bisector tangent identically: (e-e')·(e+e') = |e|^2-|e'|^2 = 0.
    g.mean_curvature[i] = (e_next - e_prev) / g.mass[i];
  }

  if (g.codim == 1) {
    for (int i = 0; i < v; ++i) g.normal[i] = rot90(g.tangent[i]);
  } else {
    // Codimension 2: propagate a normal frame along the loop so it varies
    // continuously (up to the seam).
    Vec3 n1 = seed_axis(g.tangent[0]);
    n1 = (n1 - n1.dot(g.tangent[0]) * g.tangent[0]).normalized();
    for (int i = 0; i < v; ++i) {
      Vec3 proj = n1 - n1.dot(g.tangent[i]) * g.tangent[i];
      if (proj.norm() <= kHairpinTol)
        throw_error(ErrorKind::DegenerateGeometry,
                    "tangent turns too sharply at vertex " + std::to_string(i) +
                        " to propagate the normal frame");
      n1 = proj.normalized();
      g.normal[i] = n1;
      g.normal2[i] = g.tangent[i].cross(n1);
    }
  }
}

void build_surface(const EmbeddedMesh& mesh, const Eigen::VectorXd& x,
                   GeometryCache& g) {
  const int v = mesh.num_vertices;
  const auto& tris = mesh.triangles;
  g.intrinsic_dim = 2;
  g.codim = 1;
  g.triangles = &mesh.triangles;

  g.tri_area.resize(tris.size());
  g.tri_area_grad.resize(tris.size());
  std::vector<Vec3> area_weighted_normal(v, Vec3::Zero());
  double edge_sum = 0.0;

  for (size_t t = 0; t < tris.size(); ++t) {
    const Vec3 a = x.segment<3>(3 * tris[t][0]);
    const Vec3 b = x.segment<3>(3 * tris[t][1]);
    const Vec3 c = x.segment<3>(3 * tris[t][2]);
    const Vec3 n = (b - a).cross(c - a);
    const double nn = n.norm();
    if (0.5 * nn <= kEpsGeom)
      throw_error(ErrorKind::DegenerateGeometry,
                  "degenerate triangle " + std::to_string(t));
    triangle_area_gradients(a, b, c, g.tri_area[t], g.tri_area_grad[t]);
    for (int corner = 0; corner < 3; ++corner)
      area_weighted_normal[tris[t][corner]] += 0.5 * n;
    edge_sum += (b - a).norm() + (c - b).norm() + (a - c).norm();
  }
  g.mean_edge_length = edge_sum / (3.0 * tris.size());

  g.mass = Eigen::VectorXd::Zero(v);
  std::vector<Vec3> area_grad_sum(v, Vec3::Zero());
  for (size_t t = 0; t < tris.size(); ++t) {
    for (int corner = 0; corner < 3; ++corner) {
      g.mass[tris[t][corner]] += g.tri_area[t] / 3.0;
      area_grad_sum[tris[t][corner]] += g.tri_area_grad[t][corner];
    }
  }

  g.tangent.resize(v);
  g.tangent2.resize(v);
  g.normal.resize(v);
  g.mean_curvature.resize(v);

  for (int i = 0; i < v; ++i) {
    // H = -grad_i(total area)/m_i, the cotangent Laplacian of the inclusion.
    g.mean_curvature[i] = -area_grad_sum[i] / g.mass[i];

    Vec3 n_avg = area_weighted_normal[i];
    if (n_avg.norm() <= kEpsGeom)
      throw_error(ErrorKind::DegenerateGeometry,
                  "vanishing vertex normal at vertex " + std::to_string(i));
    n_avg.normalize();

    // Frame normal from H itself where H is usable, so the cache invariant
    // "H lies in the normal space" holds by construction; sign follows the
    // orientation-consistent face average.
    Vec3 n = n_avg;
    const Vec3& h = g.mean_curvature[i];
    const double hn = h.norm();
    if (hn * g.mean_edge_length > 1e-10 && std::abs(h.dot(n_avg)) > 1e-12 * hn) {
      n = (h.dot(n_avg) >= 0.0 ? 1.0 : -1.0) * (h / hn);
    }
    g.normal[i] = n;
    Vec3 t1 = seed_axis(n);
    t1 = (t1 - t1.dot(n) * n).normalized();
    g.tangent[i] = t1;
    g.tangent2[i] = n.cross(t1);
  }
}

}  // namespace

Eigen::VectorXd lumped_measure(const EmbeddedMesh& mesh,
                               const Eigen::VectorXd& positions) {
  const int v = mesh.num_vertices;
  Eigen::VectorXd m(v);
  if (mesh.kind == MeshKind::CurveLoop) {
    Eigen::VectorXd len(v);
    for (int i = 0; i < v; ++i) {
      len[i] =
          (positions.segment<3>(3 * wrap(i + 1, v)) - positions.segment<3>(3 * i))
              .norm();
      if (len[i] <= kEpsGeom)
        throw_error(ErrorKind::DegenerateGeometry,
                    "zero edge at vertex " + std::to_string(i));
    }
    for (int i = 0; i < v; ++i) m[i] = 0.5 * (len[wrap(i - 1, v)] + len[i]);
  } else {
    m.setZero();
    for (const auto& t : mesh.triangles) {
      const Vec3 a = positions.segment<3>(3 * t[0]);
      const Vec3 b = positions.segment<3>(3 * t[1]);
      const Vec3 c = positions.segment<3>(3 * t[2]);
      const double area = 0.5 * (b - a).cross(c - a).norm();
      if (area <= kEpsGeom)
        throw_error(ErrorKind::DegenerateGeometry, "degenerate triangle");
      for (int corner = 0; corner < 3; ++corner) m[t[corner]] += area / 3.0;
    }
  }
  return m;
}

GeometryCache build_geometry(const EmbeddedMesh& mesh,
                             const Eigen::VectorXd& positions) {
  if (positions.size() != 3 * mesh.num_vertices)
    throw_error(ErrorKind::BadInput, "positions size mismatch");

  GeometryCache g;
  g.kind = mesh.kind;
  g.num_vertices = mesh.num_vertices;
  g.ambient_dim = mesh.ambient_dim;
  g.positions = positions;
  g.component = mesh.component;
  g.num_components = mesh.num_components;

  if (mesh.kind == MeshKind::CurveLoop)
    build_curve(mesh, positions, g);
  else
    build_surface(mesh, positions, g);

  const int v = g.num_vertices;
  g.mass3.resize(3 * v);
  for (int i = 0; i < v; ++i) g.mass3.segment<3>(3 * i).setConstant(g.mass[i]);

  g.mean_curvature_norm_sq.resize(v);
  for (int i = 0; i < v; ++i)
    g.mean_curvature_norm_sq[i] = g.mean_curvature[i].squaredNorm();

  return g;
}

ScalarField density(const EmbeddedMesh& mesh, const Eigen::VectorXd& positions) {
  const Eigen::VectorXd m = lumped_measure(mesh, positions);
  return m.cwiseQuotient(mesh.reference_measure);
}

ScalarField measure_derivative(const GeometryCache& g, const AmbientField& X) {
  const int v = g.num_vertices;
  if (X.size() != v) throw_error(ErrorKind::BadInput, "field size mismatch");
  ScalarField dm = ScalarField::Zero(v);

  if (g.kind == MeshKind::CurveLoop) {
    // dl_j = e_j . (X_{j+1} - X_j); dm_i = (dl_{i-1} + dl_i)/2
    Eigen::VectorXd dl(v);
    for (int j = 0; j < v; ++j)
      dl[j] = g.edge_unit[j].dot(X.get(wrap(j + 1, v)) - X.get(j));
    for (int i = 0; i < v; ++i) dm[i] = 0.5 * (dl[wrap(i - 1, v)] + dl[i]);
  } else {
    const auto& tris = *g.triangles;
    for (size_t t = 0; t < tris.size(); ++t) {
      const auto& grad = g.tri_area_grad[t];
      const Vec3 xc = X.get(tris[t][2]);
      // grad[0]+grad[1]+grad[2] = 0, so dA only sees relative displacements.
      const double dA = grad[0].dot(X.get(tris[t][0]) - xc) +
                        grad[1].dot(X.get(tris[t][1]) - xc);
      for (int corner = 0; corner < 3; ++corner) dm[tris[t][corner]] += dA / 3.0;
    }
  }
  return dm;
}

ScalarField measure_second_variation(const GeometryCache& g,
                                     const AmbientField& X) {
  const int v = g.num_vertices;
  if (X.size() != v) throw_error(ErrorKind::BadInput, "field size mismatch");
  ScalarField d2m = ScalarField::Zero(v);

  if (g.kind == MeshKind::CurveLoop) {
    Eigen::VectorXd d2l(v);
    for (int j = 0; j < v; ++j) {
      const Vec3 delta = X.get(wrap(j + 1, v)) - X.get(j);
      const double along = g.edge_unit[j].dot(delta);
      d2l[j] = (delta.squaredNorm() - along * along) / g.edge_length[j];
    }
    for (int i = 0; i < v; ++i) d2m[i] = 0.5 * (d2l[wrap(i - 1, v)] + d2l[i]);
  } else {
    const auto& tris = *g.triangles;
    const Eigen::VectorXd& x = g.positions;
    for (size_t t = 0; t < tris.size(); ++t) {
      const Vec3 a = x.segment<3>(3 * tris[t][0]);
      const Vec3 b = x.segment<3>(3 * tris[t][1]);
      const Vec3 c = x.segment<3>(3 * tris[t][2]);
      const Vec3 du = X.get(tris[t][1]) - X.get(tris[t][0]);
      const Vec3 dw = X.get(tris[t][2]) - X.get(tris[t][0]);
      const Vec3 n = (b - a).cross(c - a);
      const double nn = n.norm();
      const Vec3 dn = du.cross(c - a) + (b - a).cross(dw);
      const double ndn = n.dot(dn);
      const double d2A = (dn.squaredNorm() + 2.0 * n.dot(du.cross(dw))) / (2.0 * nn) -
                         ndn * ndn / (2.0 * nn * nn * nn);
      for (int corner = 0; corner < 3; ++corner)
        d2m[tris[t][corner]] += d2A / 3.0;
    }
  }
  return d2m;
}

ScalarField constraint_kernel(const GeometryCache& g, const AmbientField& X) {
  return measure_derivative(g, X).cwiseQuotient(g.mass);
}

ScalarField constraint_geometric_term(const GeometryCache& g,
                                      const AmbientField& X) {
  const ScalarField dm = measure_derivative(g, X);
  const ScalarField d2m = measure_second_variation(g, X);
  ScalarField out(g.num_vertices);
  for (int i = 0; i < g.num_vertices; ++i) {
    const double m = g.mass[i];
    out[i] = d2m[i] / m - (dm[i] / m) * (dm[i] / m);
  }
  return out;
}

ScalarField density_derivative(const GeometryCache& g, const ScalarField& rho,
                               const AmbientField& X) {
  if (rho.size() != g.num_vertices)
    throw_error(ErrorKind::BadInput, "density size mismatch");
  return constraint_kernel(g, X).cwiseProduct(rho);
}

std::pair<AmbientField, AmbientField> split_tangent_normal(
    const GeometryCache& g, const AmbientField& X) {
  const int v = g.num_vertices;
  if (X.size() != v) throw_error(ErrorKind::BadInput, "field size mismatch");
  AmbientField xt(v), xn(v);
  for (int i = 0; i < v; ++i) {
    const Vec3 x = X.get(i);
    Vec3 t = x.dot(g.tangent[i]) * g.tangent[i];
    if (g.intrinsic_dim == 2) t += x.dot(g.tangent2[i]) * g.tangent2[i];
    xt.set(i, t);
    xn.set(i, x - t);
  }
  return {xt, xn};
}

}  // namespace membrane
