#pragma once

#include "reparam/patch.hpp"
#include "reparam/scheme.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

namespace reparam {

/// How interior boundaries (holes) of a patch enter the scheme.
enum class HolePolicy {
  Auto,     // fill holes with at most `hole_threshold` vertices, Neumann otherwise
  Neumann,  // hole vertices are ordinary unknowns
  Fill,     // always close holes with a pseudo-center
};

inline const char* to_string(HolePolicy p) {
  switch (p) {
    case HolePolicy::Auto: return "auto";
    case HolePolicy::Neumann: return "neumann";
    case HolePolicy::Fill: return "fill";
  }
  return "?";
}

inline HolePolicy parse_hole_policy(std::string_view name) {
  if (name == "auto") return HolePolicy::Auto;
  if (name == "neumann") return HolePolicy::Neumann;
  if (name == "fill") return HolePolicy::Fill;
  throw Error(ErrorKind::InvalidArgument, "unknown hole policy '" + std::string(name) + "'");
}

struct ParamOptions {
  Scheme scheme = Scheme::Mvc;
  HolePolicy hole_policy = HolePolicy::Auto;
  int hole_threshold = 100;
  double solver_tolerance = 1e-12;    // relative, iterative fallback
  double residual_tolerance = 1e-10;  // scheme residual relative to row weight
};

/// Dirichlet data on the outer loop: unit-circle positions at angles
/// proportional to cumulative 3D arc length, first loop vertex at angle 0.
struct BoundaryAssignment {
  int outer_loop = -1;
  std::vector<int> vertices;
  std::vector<double> angles;
  std::vector<Vec2> uv;
};

inline double loop_perimeter(const Patch& patch, const std::vector<int>& loop) {
  double len = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i)
    len += (patch.mesh.vertices[loop[(i + 1) % loop.size()]] - patch.mesh.vertices[loop[i]]).norm();
  return len;
}

/// Index of the loop with the largest 3D perimeter (first one on ties).
inline int select_outer_loop(const Patch& patch) {
  if (patch.boundary_loops.empty()) throw Error(ErrorKind::Topology, "patch has no boundary loop");
  int best = 0;
  double best_len = -1.0;
  for (int l = 0; l < static_cast<int>(patch.boundary_loops.size()); ++l) {
    const double len = loop_perimeter(patch, patch.boundary_loops[l]);
    if (len > best_len) {
      best_len = len;
      best = l;
    }
  }
  return best;
}

inline BoundaryAssignment apply_boundary(const Patch& patch) {
  BoundaryAssignment out;
  out.outer_loop = select_outer_loop(patch);
  const auto& loop = patch.boundary_loops[out.outer_loop];
  if (loop.size() < 3) throw Error(ErrorKind::Topology, "outer loop has fewer than 3 vertices");
  const double perimeter = loop_perimeter(patch, loop);
  if (!(perimeter > 0.0)) throw Error(ErrorKind::InvalidMesh, "outer loop has zero length");
  double arc = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const double theta = 2.0 * kPi * arc / perimeter;
    out.vertices.push_back(loop[i]);
    out.angles.push_back(theta);
    out.uv.emplace_back(std::cos(theta), std::sin(theta));
    arc += (patch.mesh.vertices[loop[(i + 1) % loop.size()]] - patch.mesh.vertices[loop[i]]).norm();
  }
  return out;
}

/// Auxiliary unknown closing a hole: the hole is treated as a circle whose
/// circumference equals its perimeter, fanned by virtual isosceles triangles.
struct PseudoCenter {
  int loop = -1;  // index into Patch::boundary_loops
  int node = -1;  // stencil node id (>= number of patch vertices)
  double radius = 0.0;
  std::vector<double> alpha;  // apex angle per hole edge
};

/// Assembled difference scheme over the patch vertices followed by the
/// pseudo-center nodes.
struct SchemeWeights {
  Scheme scheme = Scheme::Mvc;
  Stencil stencil;
  int num_vertices = 0;
  std::vector<int> hole_loops;
  std::vector<HolePolicy> hole_treatment;  // Neumann or Fill, per hole
  std::vector<PseudoCenter> centers;

  int num_nodes() const { return static_cast<int>(stencil.rows.size()); }
};

struct LinearSystem {
  SchemeWeights weights;
  BoundaryAssignment boundary;
  Eigen::SparseMatrix<double> matrix;
  Eigen::MatrixX2d rhs;
  std::vector<int> unknown_of_node;  // -1 on Dirichlet nodes
  std::vector<int> node_of_unknown;
  std::vector<Vec2> dirichlet;       // per node, meaningful on Dirichlet nodes
};

namespace detail {

/// Adds the virtual triangles (c, v_j, v_{j+1}) of a filled hole.
inline void add_pseudo_center(const Patch& patch, const std::vector<int>& loop, PseudoCenter& pc, Scheme scheme,
                              std::vector<std::vector<Coupling>>& rows, int& clamped) {
  const std::size_t k = loop.size();
  std::vector<double> len(k);
  double perimeter = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    len[j] = (patch.mesh.vertices[loop[(j + 1) % k]] - patch.mesh.vertices[loop[j]]).norm();
    if (!(len[j] > 0.0)) throw Error(ErrorKind::InvalidMesh, "zero-length hole edge");
    perimeter += len[j];
  }
  pc.radius = perimeter / (2.0 * kPi);
  const int c = pc.node;
  for (std::size_t j = 0; j < k; ++j) {
    const double alpha = clamp_angle(len[j] / pc.radius, clamped);
    const double beta = clamp_angle(0.5 * (kPi - alpha), clamped);
    pc.alpha.push_back(alpha);
    const int a = loop[j], b = loop[(j + 1) % k];
    if (scheme == Scheme::Mvc) {
      const double tc = std::tan(0.5 * alpha) / pc.radius;
      rows[c].push_back({a, tc});
      rows[c].push_back({b, tc});
      const double tb = std::tan(0.5 * beta);
      rows[a].push_back({c, tb / pc.radius});
      rows[a].push_back({b, tb / len[j]});
      rows[b].push_back({c, tb / pc.radius});
      rows[b].push_back({a, tb / len[j]});
    } else {
      const double base = 0.5 * std::cos(alpha) / std::sin(alpha);
      const double leg = 0.5 * std::cos(beta) / std::sin(beta);
      rows[a].push_back({b, base});
      rows[b].push_back({a, base});
      rows[c].push_back({a, leg});
      rows[a].push_back({c, leg});
      rows[c].push_back({b, leg});
      rows[b].push_back({c, leg});
    }
  }
}

}  // namespace detail

/// Builds the scheme rows and the sparse system for the free nodes. The
/// outer loop is eliminated as Dirichlet data; the u and v right-hand sides
/// are the two columns of `rhs`.
inline LinearSystem assemble_system(const Patch& patch, const ParamOptions& options = {}) {
  if (patch.boundary_loops.empty()) throw Error(ErrorKind::Topology, "cannot parametrize a patch without boundary");
  LinearSystem sys;
  sys.boundary = apply_boundary(patch);

  SchemeWeights& w = sys.weights;
  w.scheme = options.scheme;
  w.num_vertices = patch.num_vertices();
  w.stencil = assemble_stencil<Vec3>(patch.mesh.vertices, patch.mesh.triangles, options.scheme);

  for (int l = 0; l < static_cast<int>(patch.boundary_loops.size()); ++l) {
    if (l == sys.boundary.outer_loop) continue;
    const int size = static_cast<int>(patch.boundary_loops[l].size());
    bool fill = options.hole_policy == HolePolicy::Fill ||
                (options.hole_policy == HolePolicy::Auto && size <= options.hole_threshold);
    fill = fill && size >= 3;
    w.hole_loops.push_back(l);
    w.hole_treatment.push_back(fill ? HolePolicy::Fill : HolePolicy::Neumann);
    if (fill) {
      PseudoCenter pc;
      pc.loop = l;
      pc.node = w.num_vertices + static_cast<int>(w.centers.size());
      w.centers.push_back(pc);
    }
  }
  if (!w.centers.empty()) {
    auto& rows = w.stencil.rows;
    rows.resize(w.num_vertices + w.centers.size());
    for (auto& row : rows) row.reserve(row.size() + 4);
    // re-open rows for the virtual contributions, then merge again
    for (PseudoCenter& pc : w.centers)
      detail::add_pseudo_center(patch, patch.boundary_loops[pc.loop], pc, options.scheme, rows,
                                w.stencil.clamped_angles);
    detail::finalize_rows(rows);
  }

  const int nodes = w.num_nodes();
  sys.unknown_of_node.assign(nodes, 0);
  sys.dirichlet.assign(nodes, Vec2::Zero());
  for (std::size_t i = 0; i < sys.boundary.vertices.size(); ++i) {
    sys.unknown_of_node[sys.boundary.vertices[i]] = -1;
    sys.dirichlet[sys.boundary.vertices[i]] = sys.boundary.uv[i];
  }
  for (int n = 0; n < nodes; ++n) {
    if (sys.unknown_of_node[n] < 0) continue;
    if (n < w.num_vertices && w.stencil.rows[n].empty()) {
      sys.unknown_of_node[n] = -1;  // unreferenced vertex
      continue;
    }
    sys.unknown_of_node[n] = static_cast<int>(sys.node_of_unknown.size());
    sys.node_of_unknown.push_back(n);
  }

  const int nu = static_cast<int>(sys.node_of_unknown.size());
  std::vector<Eigen::Triplet<double>> trips;
  sys.rhs = Eigen::MatrixX2d::Zero(nu, 2);
  for (int r = 0; r < nu; ++r) {
    const int i = sys.node_of_unknown[r];
    double diag = 0.0;
    for (const Coupling& c : w.stencil.rows[i]) {
      diag += c.weight;
      const int col = sys.unknown_of_node[c.node];
      if (col >= 0)
        trips.emplace_back(r, col, -c.weight);
      else
        sys.rhs.row(r) += c.weight * sys.dirichlet[c.node].transpose();
    }
    trips.emplace_back(r, r, diag);
  }
  sys.matrix.resize(nu, nu);
  sys.matrix.setFromTriplets(trips.begin(), trips.end());
  sys.matrix.makeCompressed();
  return sys;
}

/// Per-vertex (u,v) map of a patch.
struct Parametrization {
  std::vector<Vec2> uv;         // per patch vertex
  std::vector<Vec2> center_uv;  // per pseudo-center
  std::vector<double> signed_areas;
  std::vector<int> flipped;     // triangles with signed UV area <= 0
  bool injective = false;
  double residual = 0.0;        // max scheme residual / max row weight
  int outer_loop = -1;
  std::vector<int> hole_loops;
  std::vector<HolePolicy> hole_treatment;
  int clamped_angles = 0;
  bool used_iterative = false;

  double min_area() const {
    return signed_areas.empty() ? 0.0 : *std::min_element(signed_areas.begin(), signed_areas.end());
  }
  double total_area() const {
    double s = 0.0;
    for (double a : signed_areas) s += a;
    return s;
  }
};

/// Infinity norm of the scheme equations over the free nodes divided by the
/// largest row weight.
inline double scheme_residual(const LinearSystem& sys, std::span<const Vec2> node_uv) {
  double worst = 0.0, scale = 0.0;
  for (int n : sys.node_of_unknown) {
    Vec2 r = Vec2::Zero();
    double diag = 0.0;
    for (const Coupling& c : sys.weights.stencil.rows[n]) {
      r += c.weight * (node_uv[n] - node_uv[c.node]);
      diag += std::abs(c.weight);
    }
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
    scale = std::max(scale, diag);
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

/// Solves the u and v systems with one sparse LU factorization, falling back
/// to BiCGSTAB with a diagonal preconditioner.
inline Parametrization solve(const LinearSystem& sys, const ParamOptions& options = {}) {
  const SchemeWeights& w = sys.weights;
  std::vector<Vec2> node_uv(sys.dirichlet);
  const int nu = static_cast<int>(sys.node_of_unknown.size());
  Parametrization out;
  if (nu > 0) {
    Eigen::MatrixX2d x;
    bool solved = false;
    {
      Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
      lu.compute(sys.matrix);
      if (lu.info() == Eigen::Success) {
        x = lu.solve(sys.rhs);
        solved = lu.info() == Eigen::Success && x.allFinite();
      }
    }
    if (!solved) {
      Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::DiagonalPreconditioner<double>> it;
      it.setTolerance(options.solver_tolerance);
      it.setMaxIterations(std::max(1000, 10 * nu));
      it.compute(sys.matrix);
      x.resize(nu, 2);
      for (int d = 0; d < 2; ++d) x.col(d) = it.solve(sys.rhs.col(d));
      out.used_iterative = true;
      if (it.info() != Eigen::Success || !x.allFinite())
        throw Error(ErrorKind::Solver, "linear solver did not converge");
    }
    for (int r = 0; r < nu; ++r) node_uv[sys.node_of_unknown[r]] = x.row(r).transpose();
  }
  out.residual = scheme_residual(sys, node_uv);
  if (!(out.residual <= options.residual_tolerance)) {
    std::ostringstream msg;
    msg << "scheme residual " << out.residual << " above tolerance";
    throw Error(ErrorKind::Solver, msg.str());
  }
  out.uv.assign(node_uv.begin(), node_uv.begin() + w.num_vertices);
  out.center_uv.assign(node_uv.begin() + w.num_vertices, node_uv.end());
  out.outer_loop = sys.boundary.outer_loop;
  out.hole_loops = w.hole_loops;
  out.hole_treatment = w.hole_treatment;
  out.clamped_angles = w.stencil.clamped_angles;
  return out;
}

/// Fills the signed UV areas; the map is injective iff all are positive.
inline void check_injectivity(const Patch& patch, Parametrization& param) {
  param.signed_areas.resize(patch.num_triangles());
  param.flipped.clear();
  for (int t = 0; t < patch.num_triangles(); ++t) {
    const Tri& f = patch.mesh.triangles[t];
    param.signed_areas[t] = signed_area(param.uv[f[0]], param.uv[f[1]], param.uv[f[2]]);
    if (!(param.signed_areas[t] > 0.0)) param.flipped.push_back(t);
  }
  param.injective = param.flipped.empty();
}

/// Boundary, assembly, solve and injectivity check in one call. Solver
/// failures throw; a folded map is reported through `injective`.
inline Parametrization parametrize(const Patch& patch, const ParamOptions& options = {}) {
  const LinearSystem sys = assemble_system(patch, options);
  Parametrization param = solve(sys, options);
  check_injectivity(patch, param);
  return param;
}

/// Largest interior angle of a hole polygon in UV. `loop` is a boundary loop
/// with the surface on its left, so the hole lies on its right; the polygon
/// is convex when the result does not exceed pi.
inline double max_hole_interior_angle(const std::vector<int>& loop, std::span<const Vec2> uv) {
  const std::size_t k = loop.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const Vec2& prev = uv[loop[(i + 1) % k]];  // reversed traversal: hole on the left
    const Vec2& cur = uv[loop[i]];
    const Vec2& next = uv[loop[(i + k - 1) % k]];
    const Vec2 a = cur - prev, b = next - cur;
    const double turn = std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
    worst = std::max(worst, kPi - turn);
  }
  return worst;
}

/// Text dump "local_id model_id u v", one vertex per line.
inline std::string format_uv_dump(const Patch& patch, const Parametrization& param) {
  std::ostringstream out;
  out.precision(17);
  out << "# local_id model_id u v\n";
  for (int v = 0; v < patch.num_vertices(); ++v)
    out << v << ' ' << patch.global_vertex[v] << ' ' << param.uv[v].x() << ' ' << param.uv[v].y() << '\n';
  return out.str();
}

}  // namespace reparam
