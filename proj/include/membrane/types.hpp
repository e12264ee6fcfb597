#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace membrane {

using Vec3 = Eigen::Vector3d;
using ScalarField = Eigen::VectorXd;

/// One ambient vector per vertex, stored flat as (x0,y0,z0, x1,y1,z1, ...).
/// Meshes embedded in R^2 keep the z component identically zero.
struct AmbientField {
  AmbientField() = default;
  explicit AmbientField(int num_vertices)
      : data(Eigen::VectorXd::Zero(3 * num_vertices)) {}

  Eigen::VectorXd data;

  int size() const { return static_cast<int>(data.size()) / 3; }

  Vec3 get(int i) const { return data.segment<3>(3 * i); }
  void set(int i, const Vec3& v) { data.segment<3>(3 * i) = v; }
  void add(int i, const Vec3& v) { data.segment<3>(3 * i) += v; }

  static AmbientField constant(int num_vertices, const Vec3& v) {
    AmbientField f(num_vertices);
    for (int i = 0; i < num_vertices; ++i) f.set(i, v);
    return f;
  }
};

inline AmbientField operator+(const AmbientField& a, const AmbientField& b) {
  AmbientField r;
  r.data = a.data + b.data;
  return r;
}

inline AmbientField operator-(const AmbientField& a, const AmbientField& b) {
  AmbientField r;
  r.data = a.data - b.data;
  return r;
}

inline AmbientField operator*(double s, const AmbientField& a) {
  AmbientField r;
  r.data = s * a.data;
  return r;
}

}  // namespace membrane
