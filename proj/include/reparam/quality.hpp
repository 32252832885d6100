#pragma once

#include "reparam/param.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>

namespace reparam {

using Jacobian = Eigen::Matrix<double, 3, 2>;

/// Constant Jacobian dx/d(u,v) of the affine map sending the UV triangle to
/// the 3D triangle.
inline Jacobian triangle_jacobian(const std::array<Vec3, 3>& x, const std::array<Vec2, 3>& uv) {
  Eigen::Matrix2d duv;
  duv.col(0) = uv[1] - uv[0];
  duv.col(1) = uv[2] - uv[0];
  const double det = duv.determinant();
  const double scale = duv.cwiseAbs().maxCoeff();
  if (!(std::abs(det) > 1e-300) || !(std::abs(det) > 1e-14 * scale * scale))
    throw Error(ErrorKind::InvalidArgument, "degenerate UV triangle");
  Jacobian dx;
  dx.col(0) = x[1] - x[0];
  dx.col(1) = x[2] - x[0];
  return dx * duv.inverse();
}

struct SingularValues {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  bool rank_deficient = false;

  double conformity() const { return sigma1 > 0.0 ? sigma2 / sigma1 : 0.0; }
};

/// Eigenvalues of a symmetric 2x2 matrix [[a,b],[b,c]], larger first.
inline std::array<double, 2> symmetric_eigenvalues(double a, double b, double c) {
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  const double hi = mean + radius;
  // product form avoids cancellation in the small eigenvalue
  const double det = a * c - b * b;
  const double lo = hi > 0.0 ? det / hi : mean - radius;
  return {hi, lo};
}

/// Singular values of J from the eigenvalues of the Gram matrix J^T J.
inline SingularValues singular_values(const Jacobian& j) {
  const Eigen::Matrix2d g = j.transpose() * j;
  const auto ev = symmetric_eigenvalues(g(0, 0), g(0, 1), g(1, 1));
  SingularValues s;
  s.sigma1 = std::sqrt(std::max(ev[0], 0.0));
  s.sigma2 = std::sqrt(std::max(ev[1], 0.0));
  s.rank_deficient = !(s.sigma2 > 1e-14 * s.sigma1);
  if (s.rank_deficient) s.sigma2 = 0.0;
  return s;
}

/// Riemannian metric J^T J / h^2 of the parameter plane for target size h.
inline Eigen::Matrix2d metric_tensor(const Jacobian& j, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "target size must be positive");
  if (singular_values(j).rank_deficient) throw Error(ErrorKind::InvalidArgument, "rank-deficient Jacobian");
  return j.transpose() * j / (h * h);
}

struct QualityReport {
  std::vector<double> sigma1;
  std::vector<double> sigma2;
  std::vector<double> conformity;
  int rank_deficient = 0;
  double min_conformity = 0.0;
  double max_conformity = 0.0;
  double mean_conformity = 0.0;
  /// Ten equal bins over [0, 1].
  std::array<int, 10> histogram{};
};

/// Per-triangle SVD statistics of a parametrized patch. Folded or
/// degenerate UV triangles count as conformity 0.
inline QualityReport analyze_quality(const Patch& patch, const Parametrization& param) {
  QualityReport q;
  const int nt = patch.num_triangles();
  q.sigma1.resize(nt);
  q.sigma2.resize(nt);
  q.conformity.resize(nt);
  double sum = 0.0;
  for (int t = 0; t < nt; ++t) {
    const Tri& f = patch.mesh.triangles[t];
    SingularValues s;
    try {
      s = singular_values(triangle_jacobian({patch.mesh.vertices[f[0]], patch.mesh.vertices[f[1]], patch.mesh.vertices[f[2]]},
                                            {param.uv[f[0]], param.uv[f[1]], param.uv[f[2]]}));
    } catch (const Error&) {
      s.rank_deficient = true;
    }
    if (s.rank_deficient) ++q.rank_deficient;
    q.sigma1[t] = s.sigma1;
    q.sigma2[t] = s.sigma2;
    q.conformity[t] = s.rank_deficient ? 0.0 : s.conformity();
    sum += q.conformity[t];
    q.histogram[std::min(9, static_cast<int>(q.conformity[t] * 10.0))]++;
  }
  if (nt > 0) {
    q.min_conformity = *std::min_element(q.conformity.begin(), q.conformity.end());
    q.max_conformity = *std::max_element(q.conformity.begin(), q.conformity.end());
    q.mean_conformity = sum / nt;
  }
  return q;
}

}  // namespace reparam
