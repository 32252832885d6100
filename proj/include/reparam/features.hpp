#pragma once

#include "reparam/patch.hpp"

#include <cmath>
#include <limits>

namespace reparam {

inline constexpr double kDefaultFeatureAngle = 40.0;

/// Per-edge feature flags over an Adjacency's edge ids.
struct FeatureEdgeSet {
  double threshold_deg = kDefaultFeatureAngle;
  std::vector<char> is_feature;
  /// Angle between the unit normals of the two adjacent triangles, NaN for
  /// boundary and non-manifold edges.
  std::vector<double> dihedral_deg;

  int count() const { return static_cast<int>(std::count(is_feature.begin(), is_feature.end(), 1)); }

  std::vector<int> edges() const {
    std::vector<int> out;
    for (int e = 0; e < static_cast<int>(is_feature.size()); ++e)
      if (is_feature[e]) out.push_back(e);
    return out;
  }
};

/// Tags every boundary edge, and every interior edge whose adjacent normals
/// are separated by more than `threshold_deg`. Concave and convex creases
/// are treated alike. A threshold of 180 disables interior detection.
inline FeatureEdgeSet detect_feature_edges(const Triangulation& tri, const Adjacency& adj,
                                           double threshold_deg = kDefaultFeatureAngle) {
  if (!(threshold_deg > 0.0 && threshold_deg <= 180.0))
    throw Error(ErrorKind::InvalidArgument, "feature angle must lie in (0, 180] degrees");
  FeatureEdgeSet out;
  out.threshold_deg = threshold_deg;
  out.is_feature.assign(adj.num_edges(), 0);
  out.dihedral_deg.assign(adj.num_edges(), std::numeric_limits<double>::quiet_NaN());
  auto unit_normal = [&](int t) {
    const Tri& f = tri.triangles[t];
    return triangle_normal(tri.vertices[f[0]], tri.vertices[f[1]], tri.vertices[f[2]]).normalized();
  };
  for (int e = 0; e < adj.num_edges(); ++e) {
    if (adj.edge_valence(e) != 2) {
      out.is_feature[e] = 1;
      continue;
    }
    auto tris = adj.edge_triangles(e);
    const double c = std::clamp(unit_normal(tris[0]).dot(unit_normal(tris[1])), -1.0, 1.0);
    const double angle = std::acos(c) * 180.0 / kPi;
    out.dihedral_deg[e] = angle;
    if (angle > threshold_deg) out.is_feature[e] = 1;
  }
  return out;
}

/// Partition of the model triangles into feature-bounded patches.
struct PatchSet {
  std::vector<int> patch_of_triangle;
  int count = 0;
  /// Per patch, boundary loops as model vertex ids (surface on the left).
  std::vector<std::vector<std::vector<int>>> boundary_loops;
  /// Tagged edges whose two sides ended up in the same patch (dangling
  /// creases); they do not bound anything and are ignored downstream.
  std::vector<int> dangling_features;

  std::vector<std::vector<int>> triangles_by_patch() const {
    std::vector<std::vector<int>> out(count);
    for (int t = 0; t < static_cast<int>(patch_of_triangle.size()); ++t) out[patch_of_triangle[t]].push_back(t);
    return out;
  }
};

/// Maximal edge-connected triangle sets that do not cross feature edges.
/// Patch ids are assigned in order of each patch's smallest triangle id.
inline PatchSet segment_patches(const Triangulation& tri, const Adjacency& adj, const FeatureEdgeSet& features) {
  PatchSet out;
  const int nt = tri.num_triangles();
  out.patch_of_triangle.assign(nt, -1);
  std::vector<int> stack;
  for (int seed = 0; seed < nt; ++seed) {
    if (out.patch_of_triangle[seed] >= 0) continue;
    const int id = out.count++;
    out.patch_of_triangle[seed] = id;
    stack.push_back(seed);
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      for (int k = 0; k < 3; ++k) {
        const int e = adj.triangle_edge(t, k);
        if (features.is_feature[e] || adj.edge_valence(e) != 2) continue;
        const int n = adj.neighbor(t, k);
        if (out.patch_of_triangle[n] < 0) {
          out.patch_of_triangle[n] = id;
          stack.push_back(n);
        }
      }
    }
  }
  for (int e = 0; e < adj.num_edges(); ++e) {
    if (!features.is_feature[e] || adj.edge_valence(e) != 2) continue;
    auto tris = adj.edge_triangles(e);
    if (out.patch_of_triangle[tris[0]] == out.patch_of_triangle[tris[1]]) out.dangling_features.push_back(e);
  }
  const auto groups = out.triangles_by_patch();
  out.boundary_loops.resize(out.count);
  for (int p = 0; p < out.count; ++p) {
    const Patch patch = make_patch(tri, groups[p]);
    for (const auto& loop : patch.boundary_loops) {
      std::vector<int> global;
      for (int v : loop) global.push_back(patch.global_vertex[v]);
      out.boundary_loops[p].push_back(std::move(global));
    }
  }
  return out;
}

}  // namespace reparam
