#pragma once

#include "reparam/mesh.hpp"

#include <algorithm>
#include <span>
#include <vector>

namespace reparam {

/// A set of model triangles re-indexed as a standalone triangulation.
///
/// Local vertex ids follow ascending model vertex ids; vertices created
/// later by refinement are appended and map to -1. `parent_triangle` maps
/// every local triangle to the model triangle containing it.
struct Patch {
  Triangulation mesh;
  std::vector<int> global_vertex;
  std::vector<int> parent_triangle;
  std::vector<std::vector<int>> boundary_loops;  // local ids, surface on the left
  TopologyInfo topology;

  int num_triangles() const { return mesh.num_triangles(); }
  int num_vertices() const { return mesh.num_vertices(); }

  /// Model triangle ids, ascending and unique.
  std::vector<int> model_triangles() const {
    std::vector<int> ids(parent_triangle);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }
};

/// Recomputes loops and topology after the local mesh changed.
inline void refresh_patch(Patch& patch) {
  Adjacency adj(patch.mesh);
  patch.boundary_loops = extract_boundary_loops(patch.mesh.triangles, adj);
  patch.topology = compute_topology(patch.mesh.triangles, adj);
}

/// Builds a patch from the given triangles of `model`. Order of
/// `triangle_ids` is kept for the local triangles.
inline Patch make_patch(const Triangulation& model, std::span<const int> triangle_ids) {
  Patch patch;
  std::vector<int> verts;
  verts.reserve(triangle_ids.size() * 3);
  for (int t : triangle_ids)
    for (int v : model.triangles[t]) verts.push_back(v);
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  patch.global_vertex = verts;
  patch.mesh.vertices.reserve(verts.size());
  for (int v : verts) patch.mesh.vertices.push_back(model.vertices[v]);
  auto local = [&](int v) {
    return static_cast<int>(std::lower_bound(verts.begin(), verts.end(), v) - verts.begin());
  };
  patch.mesh.triangles.reserve(triangle_ids.size());
  for (int t : triangle_ids) {
    const Tri& f = model.triangles[t];
    patch.mesh.triangles.push_back({local(f[0]), local(f[1]), local(f[2])});
    patch.parent_triangle.push_back(t);
  }
  refresh_patch(patch);
  return patch;
}

/// Builds a patch from a subset of another patch's local triangles, keeping
/// the back-references to the model.
inline Patch make_subpatch(const Patch& parent, std::span<const int> local_triangles) {
  Patch patch;
  std::vector<int> verts;
  for (int t : local_triangles)
    for (int v : parent.mesh.triangles[t]) verts.push_back(v);
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  for (int v : verts) {
    patch.mesh.vertices.push_back(parent.mesh.vertices[v]);
    patch.global_vertex.push_back(parent.global_vertex[v]);
  }
  auto local = [&](int v) {
    return static_cast<int>(std::lower_bound(verts.begin(), verts.end(), v) - verts.begin());
  };
  for (int t : local_triangles) {
    const Tri& f = parent.mesh.triangles[t];
    patch.mesh.triangles.push_back({local(f[0]), local(f[1]), local(f[2])});
    patch.parent_triangle.push_back(parent.parent_triangle[t]);
  }
  refresh_patch(patch);
  return patch;
}

/// Result of the topological parametrizability test.
struct EulerCheck {
  TopologyInfo topology;
  /// Genus solved from #t = 2(#p-1) + 2(#b-1) - #h + 4g; empty when the
  /// right-hand side does not give a non-negative integer.
  std::optional<int> formula_genus;
  bool connected = true;
  bool parametrizable = false;
};

inline EulerCheck euler_check(std::span<const Tri> triangles, const Adjacency& adj) {
  for (int e = 0; e < adj.num_edges(); ++e)
    if (adj.edge_valence(e) > 2) throw Error(ErrorKind::Topology, "euler_check on a non-manifold patch");
  EulerCheck check;
  check.topology = compute_topology(triangles, adj);
  const TopologyInfo& ti = check.topology;
  const int four_g = ti.t - 2 * (ti.p - 1) - 2 * (ti.b - 1) + ti.h;
  if (four_g >= 0 && four_g % 4 == 0) check.formula_genus = four_g / 4;
  check.connected = count_components(triangles, adj) == 1;
  check.parametrizable = check.formula_genus == 0 && ti.b >= 1 && check.connected;
  return check;
}

inline EulerCheck euler_check(const Patch& patch) {
  Adjacency adj(patch.mesh);
  return euler_check(patch.mesh.triangles, adj);
}

inline EulerCheck euler_check(const Triangulation& tri) {
  Adjacency adj(tri);
  return euler_check(tri.triangles, adj);
}

}  // namespace reparam
