#pragma once

#include "reparam/patch.hpp"

#include <unordered_map>

namespace reparam {

struct RefineOptions {
  /// Edges longer than this are tagged. Non-positive selects the mean
  /// boundary-edge length of the patch.
  double threshold = 0.0;
  int max_rounds = 10;
  /// Also split boundary edges. Off in the pipeline: boundary edges are
  /// shared with neighbouring faces.
  bool split_boundary = false;
};

struct RefineReport {
  double threshold = 0.0;
  int rounds = 0;
  int splits = 0;
  bool converged = false;  // no tagged edge left
  std::vector<double> max_length;  // max tagged-class edge length before each round, then final
};

inline double mean_boundary_edge_length(const Patch& patch) {
  double sum = 0.0;
  int count = 0;
  for (const auto& loop : patch.boundary_loops) {
    for (std::size_t i = 0; i < loop.size(); ++i) {
      sum += (patch.mesh.vertices[loop[(i + 1) % loop.size()]] - patch.mesh.vertices[loop[i]]).norm();
      ++count;
    }
  }
  return count ? sum / count : 0.0;
}

namespace detail {

/// Mutable edge -> incident triangles map used while bisecting.
class EdgeTriangles {
 public:
  explicit EdgeTriangles(const std::vector<Tri>& tris) {
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) add(tris[t], t);
  }

  void add(const Tri& f, int t) {
    for (int k = 0; k < 3; ++k) map_[edge_key(f[k], f[(k + 1) % 3])].push_back(t);
  }

  void remove(const Tri& f, int t) {
    for (int k = 0; k < 3; ++k) {
      auto it = map_.find(edge_key(f[k], f[(k + 1) % 3]));
      auto& v = it->second;
      v.erase(std::find(v.begin(), v.end(), t));
      if (v.empty()) map_.erase(it);
    }
  }

  const std::vector<int>* find(int a, int b) const {
    auto it = map_.find(edge_key(a, b));
    return it == map_.end() ? nullptr : &it->second;
  }

 private:
  std::unordered_map<std::uint64_t, std::vector<int>> map_;
};

}  // namespace detail

/// Splits edge (a,b) at its midpoint, bisecting every incident triangle.
/// Returns the new vertex id, or -1 when the edge no longer exists.
inline int split_edge(Patch& patch, detail::EdgeTriangles& edges, int a, int b) {
  const auto* found = edges.find(a, b);
  if (!found) return -1;
  const std::vector<int> tris = *found;
  auto& mesh = patch.mesh;
  const int m = mesh.num_vertices();
  mesh.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
  patch.global_vertex.push_back(-1);
  for (int t : tris) {
    const Tri f = mesh.triangles[t];
    int k = 0;
    while (!((f[k] == a && f[(k + 1) % 3] == b) || (f[k] == b && f[(k + 1) % 3] == a))) ++k;
    const int p = f[k], q = f[(k + 1) % 3], r = f[(k + 2) % 3];
    edges.remove(f, t);
    const Tri first{p, m, r};
    const Tri second{m, q, r};
    mesh.triangles[t] = first;
    edges.add(first, t);
    const int nt = mesh.num_triangles();
    mesh.triangles.push_back(second);
    patch.parent_triangle.push_back(patch.parent_triangle[t]);
    if (mesh.tagged()) mesh.patch_tags.push_back(mesh.patch_tags[t]);
    edges.add(second, nt);
  }
  return m;
}

/// Longest-edge bisection: each round tags the edges longer than the
/// threshold and splits them longest first. Geometry is unchanged since new
/// vertices are edge midpoints.
inline RefineReport longest_edge_bisection(Patch& patch, const RefineOptions& options = {}) {
  RefineReport report;
  report.threshold = options.threshold > 0.0 ? options.threshold : mean_boundary_edge_length(patch);
  if (!(report.threshold > 0.0)) throw Error(ErrorKind::InvalidArgument, "refinement threshold must be positive");
  struct Tagged {
    double length;
    int a, b;
  };
  for (int round = 0;; ++round) {
    Adjacency adj(patch.mesh);
    std::vector<Tagged> tagged;
    double longest = 0.0;
    for (int e = 0; e < adj.num_edges(); ++e) {
      if (adj.is_boundary(e) && !options.split_boundary) continue;
      auto [a, b] = adj.edge(e);
      const double len = (patch.mesh.vertices[a] - patch.mesh.vertices[b]).norm();
      longest = std::max(longest, len);
      if (len > report.threshold) tagged.push_back({len, a, b});
    }
    report.max_length.push_back(longest);
    if (tagged.empty()) {
      report.converged = true;
      break;
    }
    if (round == options.max_rounds) break;
    std::sort(tagged.begin(), tagged.end(), [](const Tagged& x, const Tagged& y) {
      if (x.length != y.length) return x.length > y.length;
      return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    detail::EdgeTriangles edges(patch.mesh.triangles);
    for (const Tagged& t : tagged)
      if (split_edge(patch, edges, t.a, t.b) >= 0) ++report.splits;
    ++report.rounds;
  }
  refresh_patch(patch);
  return report;
}

}  // namespace reparam
