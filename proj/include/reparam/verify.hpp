#pragma once

// Laplace convergence harness on the unit square.

#include "reparam/mesh.hpp"
#include "reparam/planar.hpp"
#include "reparam/scheme.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <random>

namespace reparam {

/// sin(2 pi x) cosh(2 pi y), harmonic on the plane.
inline double manufactured_solution(double x, double y) {
  return std::sin(2.0 * kPi * x) * std::cosh(2.0 * kPi * y);
}

inline Vec2 manufactured_gradient(double x, double y) {
  const double w = 2.0 * kPi;
  return {w * std::cos(w * x) * std::cosh(w * y), w * std::sin(w * x) * std::sinh(w * y)};
}

inline double manufactured_mixed_derivative(double x, double y) {
  const double w = 2.0 * kPi;
  return w * w * std::cos(w * x) * std::sinh(w * y);
}

enum class SquareMeshKind { Structured, Delaunay };

inline const char* to_string(SquareMeshKind k) { return k == SquareMeshKind::Structured ? "structured" : "delaunay"; }

inline SquareMeshKind parse_square_mesh_kind(std::string_view name) {
  if (name == "structured") return SquareMeshKind::Structured;
  if (name == "delaunay") return SquareMeshKind::Delaunay;
  throw Error(ErrorKind::InvalidArgument, "unknown mesh family '" + std::string(name) + "'");
}

inline constexpr std::uint32_t kDefaultMeshSeed = 42;

/// Triangulation of [0,1]^2 in the z = 0 plane with n cells per side.
/// Structured: grid cells cut along the (i,j)-(i+1,j+1) diagonal.
/// Delaunay: the (n+1)^2 grid points with interior points jittered by up to
/// h/4 per axis, constrained Delaunay triangulation of the boundary loop.
inline Triangulation build_square_mesh(SquareMeshKind kind, int n, std::uint32_t seed = kDefaultMeshSeed) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "square mesh needs n >= 2");
  const double h = 1.0 / n;
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  Triangulation out;
  std::vector<Vec2> points;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.25 * h, 0.25 * h);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      Vec2 p(i * h, j * h);
      if (i == n) p.x() = 1.0;
      if (j == n) p.y() = 1.0;
      if (kind == SquareMeshKind::Delaunay && i > 0 && j > 0 && i < n && j < n) {
        const double dx = jitter(rng);
        const double dy = jitter(rng);
        p += Vec2(dx, dy);
      }
      points.push_back(p);
    }
  }
  if (kind == SquareMeshKind::Structured) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        out.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        out.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      }
    }
  } else {
    std::vector<int> loop;
    for (int i = 0; i < n; ++i) loop.push_back(id(i, 0));
    for (int j = 0; j < n; ++j) loop.push_back(id(n, j));
    for (int i = n; i > 0; --i) loop.push_back(id(i, n));
    for (int j = n; j > 0; --j) loop.push_back(id(0, j));
    out.triangles = triangulate_polygons(points, {loop});
    std::sort(out.triangles.begin(), out.triangles.end());
  }
  for (const Vec2& p : points) out.vertices.emplace_back(p.x(), p.y(), 0.0);
  return out;
}

inline std::vector<Vec2> planar_points(const Triangulation& mesh) {
  std::vector<Vec2> p;
  p.reserve(mesh.vertices.size());
  for (const Vec3& v : mesh.vertices) p.emplace_back(v.x(), v.y());
  return p;
}

/// Vertices on the boundary of the triangulation.
inline std::vector<bool> boundary_vertices(const Triangulation& mesh) {
  const Adjacency adj(mesh);
  std::vector<bool> on(mesh.num_vertices(), false);
  for (int e = 0; e < adj.num_edges(); ++e) {
    if (adj.edge_triangles(e).size() != 1) continue;
    for (int v : adj.edge(e)) on[v] = true;
  }
  return on;
}

/// Per-vertex residual sum_j lambda_ij (f_i - f_j); zero on the boundary.
inline std::vector<double> stencil_residual(const Stencil& st, std::span<const double> field,
                                            const std::vector<bool>& boundary) {
  std::vector<double> r(field.size(), 0.0);
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (boundary[i]) continue;
    for (const Coupling& c : st.rows[i]) r[i] += c.weight * (field[i] - field[c.node]);
  }
  return r;
}

/// Discrete harmonic field with Dirichlet data `g` on every boundary vertex.
inline std::vector<double> solve_laplace(const Triangulation& mesh, Scheme scheme,
                                         const std::function<double(double, double)>& g = manufactured_solution) {
  const std::vector<Vec2> pts = planar_points(mesh);
  const Stencil st = assemble_stencil<Vec2>(pts, mesh.triangles, scheme);
  const std::vector<bool> boundary = boundary_vertices(mesh);
  const int nv = mesh.num_vertices();
  std::vector<double> field(nv, 0.0);
  std::vector<int> unknown(nv, -1);
  int nu = 0;
  for (int v = 0; v < nv; ++v) {
    if (boundary[v])
      field[v] = g(pts[v].x(), pts[v].y());
    else
      unknown[v] = nu++;
  }
  if (nu == 0) return field;
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nu);
  for (int v = 0; v < nv; ++v) {
    const int r = unknown[v];
    if (r < 0) continue;
    double diag = 0.0;
    for (const Coupling& c : st.rows[v]) {
      diag += c.weight;
      if (unknown[c.node] >= 0)
        entries.emplace_back(r, unknown[c.node], -c.weight);
      else
        rhs[r] += c.weight * field[c.node];
    }
    entries.emplace_back(r, r, diag);
  }
  Eigen::SparseMatrix<double> a(nu, nu);
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::Solver, "Laplace factorization failed");
  const Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw Error(ErrorKind::Solver, "Laplace solve failed");
  for (int v = 0; v < nv; ++v)
    if (unknown[v] >= 0) field[v] = x[unknown[v]];
  return field;
}

struct ErrorNorms {
  double l2 = 0.0;
  double h1 = 0.0;  // seminorm
};

/// L2 and H1-seminorm errors of the piecewise linear interpolant of `field`
/// against the exact solution, with the three-point mid-edge rule.
inline ErrorNorms error_norms(std::span<const double> field, const Triangulation& mesh,
                              const std::function<double(double, double)>& f = manufactured_solution,
                              const std::function<Vec2(double, double)>& grad = manufactured_gradient) {
  const std::vector<Vec2> pts = planar_points(mesh);
  double l2 = 0.0, h1 = 0.0;
  for (const Tri& t : mesh.triangles) {
    const Vec2 &a = pts[t[0]], &b = pts[t[1]], &c = pts[t[2]];
    const double area2 = orient2d(a, b, c);
    const double area = 0.5 * std::abs(area2);
    // gradient of the linear interpolant
    const Vec2 g = (field[t[0]] * Vec2(b.y() - c.y(), c.x() - b.x()) + field[t[1]] * Vec2(c.y() - a.y(), a.x() - c.x()) +
                    field[t[2]] * Vec2(a.y() - b.y(), b.x() - a.x())) /
                   area2;
    for (int k = 0; k < 3; ++k) {
      const int i = t[k], j = t[(k + 1) % 3];
      const Vec2 m = 0.5 * (pts[i] + pts[j]);
      const double e = 0.5 * (field[i] + field[j]) - f(m.x(), m.y());
      l2 += area / 3.0 * e * e;
      h1 += area / 3.0 * (g - grad(m.x(), m.y())).squaredNorm();
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

struct ConvergenceLevel {
  int n = 0;
  double h = 0.0;
  int vertices = 0;
  int triangles = 0;
  ErrorNorms error;
};

struct ConvergenceResult {
  SquareMeshKind kind = SquareMeshKind::Structured;
  Scheme scheme = Scheme::Mvc;
  std::vector<ConvergenceLevel> levels;
  double l2_slope = 0.0;
  double h1_slope = 0.0;
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  return denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
}

inline const std::vector<int>& default_levels() {
  static const std::vector<int> levels{8, 16, 32, 64, 128};
  return levels;
}

inline ConvergenceResult convergence_study(Scheme scheme, SquareMeshKind kind,
                                           std::span<const int> levels = default_levels(),
                                           std::uint32_t seed = kDefaultMeshSeed) {
  if (levels.size() < 4) throw Error(ErrorKind::InvalidArgument, "convergence study needs at least 4 levels");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] <= levels[i - 1]) throw Error(ErrorKind::InvalidArgument, "levels must be strictly increasing");
  ConvergenceResult out;
  out.kind = kind;
  out.scheme = scheme;
  std::vector<double> hs, l2, h1;
  for (int n : levels) {
    const Triangulation mesh = build_square_mesh(kind, n, seed);
    const std::vector<double> field = solve_laplace(mesh, scheme);
    ConvergenceLevel level{n, 1.0 / n, mesh.num_vertices(), mesh.num_triangles(), error_norms(field, mesh)};
    out.levels.push_back(level);
    hs.push_back(level.h);
    l2.push_back(level.error.l2);
    h1.push_back(level.error.h1);
  }
  out.l2_slope = loglog_slope(hs, l2);
  out.h1_slope = loglog_slope(hs, h1);
  return out;
}

}  // namespace reparam
