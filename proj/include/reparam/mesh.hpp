#pragma once

#include "reparam/core.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace reparam {

/// Indexed surface triangulation. Triangles are counter-clockwise with
/// respect to the outward normal. `patch_tags` is either empty or holds one
/// tag per triangle.
struct Triangulation {
  std::vector<Vec3> vertices;
  std::vector<Tri> triangles;
  std::vector<int> patch_tags;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  bool tagged() const { return !patch_tags.empty(); }
};

inline Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  return (b - a).cross(c - a);
}

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * triangle_normal(a, b, c).norm();
}

inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

inline double triangle_area(const Triangulation& tri, int t) {
  const Tri& f = tri.triangles[t];
  return triangle_area(tri.vertices[f[0]], tri.vertices[f[1]], tri.vertices[f[2]]);
}

inline double total_area(const Triangulation& tri) {
  double area = 0.0;
  for (int t = 0; t < tri.num_triangles(); ++t) area += triangle_area(tri, t);
  return area;
}

inline Eigen::AlignedBox3d bounding_box(std::span<const Vec3> points) {
  Eigen::AlignedBox3d box;
  for (const Vec3& p : points) box.extend(p);
  return box;
}

inline double bbox_diagonal(const Triangulation& tri) {
  if (tri.vertices.empty()) return 0.0;
  return bounding_box(tri.vertices).diagonal().norm();
}

/// Edge and vertex-star tables of a triangle soup. Edge ids follow the order
/// of sorted vertex pairs, so construction is deterministic.
class Adjacency {
 public:
  Adjacency() = default;

  Adjacency(int num_vertices, std::span<const Tri> triangles) { build(num_vertices, triangles); }

  explicit Adjacency(const Triangulation& tri) { build(tri.num_vertices(), tri.triangles); }

  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_triangles() const { return static_cast<int>(tri_edges_.size()); }
  int num_vertices() const { return static_cast<int>(vstar_offsets_.size()) - 1; }

  std::array<int, 2> edge(int e) const {
    return {key_first(edges_[e]), key_second(edges_[e])};
  }

  std::span<const int> edge_triangles(int e) const {
    return {edge_tris_.data() + edge_offsets_[e],
            static_cast<std::size_t>(edge_offsets_[e + 1] - edge_offsets_[e])};
  }

  int edge_valence(int e) const { return edge_offsets_[e + 1] - edge_offsets_[e]; }
  bool is_boundary(int e) const { return edge_valence(e) == 1; }

  /// Edge id of (a,b), or -1.
  int find_edge(int a, int b) const {
    const std::uint64_t key = edge_key(a, b);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
    if (it == edges_.end() || *it != key) return -1;
    return static_cast<int>(it - edges_.begin());
  }

  /// Edge id of the triangle side running from corner k to corner k+1.
  int triangle_edge(int t, int k) const { return tri_edges_[t][k]; }

  /// Triangle across side k of t, or -1 on boundary / non-manifold edges.
  int neighbor(int t, int k) const {
    const int e = tri_edges_[t][k];
    if (edge_valence(e) != 2) return -1;
    auto tris = edge_triangles(e);
    return tris[0] == t ? tris[1] : tris[0];
  }

  std::span<const int> vertex_triangles(int v) const {
    return {vstar_.data() + vstar_offsets_[v],
            static_cast<std::size_t>(vstar_offsets_[v + 1] - vstar_offsets_[v])};
  }

 private:
  void build(int num_vertices, std::span<const Tri> triangles) {
    struct Entry {
      std::uint64_t key;
      int tri;
      int slot;
    };
    std::vector<Entry> entries;
    entries.reserve(triangles.size() * 3);
    for (int t = 0; t < static_cast<int>(triangles.size()); ++t)
      for (int k = 0; k < 3; ++k)
        entries.push_back({edge_key(triangles[t][k], triangles[t][(k + 1) % 3]), t, k});
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return a.key != b.key ? a.key < b.key : a.tri < b.tri;
    });

    tri_edges_.assign(triangles.size(), {-1, -1, -1});
    edges_.clear();
    edge_offsets_.assign(1, 0);
    edge_tris_.clear();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (i == 0 || entries[i].key != entries[i - 1].key) {
        if (i != 0) edge_offsets_.push_back(static_cast<int>(edge_tris_.size()));
        edges_.push_back(entries[i].key);
      }
      edge_tris_.push_back(entries[i].tri);
      tri_edges_[entries[i].tri][entries[i].slot] = static_cast<int>(edges_.size()) - 1;
    }
    if (!entries.empty()) edge_offsets_.push_back(static_cast<int>(edge_tris_.size()));

    vstar_offsets_.assign(num_vertices + 1, 0);
    for (const Tri& f : triangles)
      for (int v : f) ++vstar_offsets_[v + 1];
    std::partial_sum(vstar_offsets_.begin(), vstar_offsets_.end(), vstar_offsets_.begin());
    vstar_.assign(vstar_offsets_.back(), 0);
    std::vector<int> fill(vstar_offsets_.begin(), vstar_offsets_.end() - 1);
    for (int t = 0; t < static_cast<int>(triangles.size()); ++t)
      for (int v : triangles[t]) vstar_[fill[v]++] = t;
  }

  std::vector<std::uint64_t> edges_;
  std::vector<int> edge_offsets_;
  std::vector<int> edge_tris_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<int> vstar_offsets_{0};
  std::vector<int> vstar_;
};

/// Boundary loops as vertex cycles following the triangle winding (the
/// surface lies to the left). Each loop starts at its smallest vertex id and
/// loops are sorted by that vertex.
inline std::vector<std::vector<int>> extract_boundary_loops(std::span<const Tri> triangles,
                                                            const Adjacency& adj) {
  // half-edges a->b of boundary edges, grouped by start vertex
  std::vector<std::pair<int, int>> half;
  for (int e = 0; e < adj.num_edges(); ++e) {
    if (!adj.is_boundary(e)) continue;
    const int t = adj.edge_triangles(e)[0];
    for (int k = 0; k < 3; ++k) {
      if (adj.triangle_edge(t, k) == e) {
        half.emplace_back(triangles[t][k], triangles[t][(k + 1) % 3]);
        break;
      }
    }
  }
  std::sort(half.begin(), half.end());
  std::vector<char> used(half.size(), 0);
  auto next_from = [&](int v) -> int {
    auto it = std::lower_bound(half.begin(), half.end(), std::make_pair(v, -1));
    for (; it != half.end() && it->first == v; ++it) {
      const auto idx = static_cast<std::size_t>(it - half.begin());
      if (!used[idx]) return static_cast<int>(idx);
    }
    return -1;
  };

  std::vector<std::vector<int>> loops;
  for (std::size_t i = 0; i < half.size(); ++i) {
    if (used[i]) continue;
    std::vector<int> loop;
    int cur = static_cast<int>(i);
    while (cur >= 0 && !used[cur]) {
      used[cur] = 1;
      loop.push_back(half[cur].first);
      cur = next_from(half[cur].second);
    }
    auto smallest = std::min_element(loop.begin(), loop.end());
    std::rotate(loop.begin(), smallest, loop.end());
    loops.push_back(std::move(loop));
  }
  std::sort(loops.begin(), loops.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return loops;
}

struct ValidationReport {
  bool indices_valid = true;
  bool manifold = true;         // every edge has 1 or 2 triangles
  bool vertex_manifold = true;  // every vertex star is a single fan
  bool orientation_consistent = true;
  bool watertight = false;
  int boundary_loops = 0;
  int boundary_edges = 0;
  int isolated_vertices = 0;
  std::vector<int> invalid_triangles;
  std::vector<int> degenerate_triangles;
  std::vector<std::array<int, 2>> non_manifold_edges;
  std::vector<std::array<int, 2>> misoriented_edges;
  std::vector<int> non_manifold_vertices;

  /// True when the mesh can enter the pipeline.
  bool ok() const {
    return indices_valid && manifold && vertex_manifold && orientation_consistent &&
           degenerate_triangles.empty();
  }
};

/// Relative area below which a triangle is reported as degenerate, scaled by
/// the squared bounding-box diagonal.
inline constexpr double kDegenerateAreaFactor = 1e-14;

inline ValidationReport validate(const Triangulation& tri) {
  ValidationReport report;
  const int nv = tri.num_vertices();
  for (int t = 0; t < tri.num_triangles(); ++t) {
    const Tri& f = tri.triangles[t];
    bool ok = true;
    for (int v : f) ok = ok && v >= 0 && v < nv;
    ok = ok && f[0] != f[1] && f[1] != f[2] && f[0] != f[2];
    if (!ok) report.invalid_triangles.push_back(t);
  }
  if (!report.invalid_triangles.empty()) {
    report.indices_valid = false;
    report.manifold = false;
    return report;
  }

  const double diag = bbox_diagonal(tri);
  const double min_area = kDegenerateAreaFactor * diag * diag;
  for (int t = 0; t < tri.num_triangles(); ++t)
    if (!(triangle_area(tri, t) >= min_area)) report.degenerate_triangles.push_back(t);

  Adjacency adj(tri);
  for (int e = 0; e < adj.num_edges(); ++e) {
    const int valence = adj.edge_valence(e);
    if (valence > 2) {
      report.manifold = false;
      report.non_manifold_edges.push_back(adj.edge(e));
    } else if (valence == 1) {
      ++report.boundary_edges;
    } else {
      auto tris = adj.edge_triangles(e);
      auto start = [&](int t) {
        for (int k = 0; k < 3; ++k)
          if (adj.triangle_edge(t, k) == e) return tri.triangles[t][k];
        return -1;
      };
      if (start(tris[0]) == start(tris[1])) {
        report.orientation_consistent = false;
        report.misoriented_edges.push_back(adj.edge(e));
      }
    }
  }

  // vertex fans: triangles around v joined through edges incident to v
  for (int v = 0; v < nv; ++v) {
    auto star = adj.vertex_triangles(v);
    if (star.empty()) {
      ++report.isolated_vertices;
      continue;
    }
    std::vector<int> parent(star.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (std::size_t i = 0; i < star.size(); ++i) {
      for (std::size_t j = i + 1; j < star.size(); ++j) {
        const Tri& a = tri.triangles[star[i]];
        const Tri& b = tri.triangles[star[j]];
        int shared = 0;
        for (int x : a)
          if (x != v && std::find(b.begin(), b.end(), x) != b.end()) ++shared;
        if (shared > 0) parent[find(static_cast<int>(i))] = find(static_cast<int>(j));
      }
    }
    int roots = 0;
    for (std::size_t i = 0; i < star.size(); ++i)
      if (find(static_cast<int>(i)) == static_cast<int>(i)) ++roots;
    if (roots > 1) {
      report.vertex_manifold = false;
      report.non_manifold_vertices.push_back(v);
    }
  }

  if (report.manifold) report.boundary_loops = static_cast<int>(extract_boundary_loops(tri.triangles, adj).size());
  report.watertight = report.ok() && report.boundary_edges == 0;
  return report;
}

/// Counts describing the topology of a manifold triangulation.
struct TopologyInfo {
  int p = 0;  // vertices referenced by triangles
  int e = 0;  // edges
  int t = 0;  // triangles
  int b = 0;  // boundary loops
  int h = 0;  // distinct boundary vertices
  int g = 0;  // genus from the Euler characteristic

  int euler_characteristic() const { return p - e + t; }
};

inline TopologyInfo compute_topology(std::span<const Tri> triangles, const Adjacency& adj) {
  TopologyInfo info;
  std::vector<char> used(adj.num_vertices(), 0), on_boundary(adj.num_vertices(), 0);
  for (const Tri& f : triangles)
    for (int v : f) used[v] = 1;
  info.p = static_cast<int>(std::count(used.begin(), used.end(), 1));
  info.e = adj.num_edges();
  info.t = static_cast<int>(triangles.size());
  for (int e = 0; e < adj.num_edges(); ++e) {
    if (!adj.is_boundary(e)) continue;
    auto [a, b] = adj.edge(e);
    on_boundary[a] = on_boundary[b] = 1;
  }
  info.h = static_cast<int>(std::count(on_boundary.begin(), on_boundary.end(), 1));
  info.b = static_cast<int>(extract_boundary_loops(triangles, adj).size());
  // chi = 2 - 2g - b; integer division floors toward zero which is fine for
  // the even values produced by orientable manifolds
  info.g = (2 - info.b - info.euler_characteristic()) / 2;
  return info;
}

/// Number of edge-connected components of the triangle set.
inline int count_components(std::span<const Tri> triangles, const Adjacency& adj) {
  const int nt = static_cast<int>(triangles.size());
  std::vector<int> seen(nt, 0);
  int components = 0;
  std::vector<int> stack;
  for (int s = 0; s < nt; ++s) {
    if (seen[s]) continue;
    ++components;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      for (int k = 0; k < 3; ++k) {
        for (int n : adj.edge_triangles(adj.triangle_edge(t, k))) {
          if (!seen[n]) {
            seen[n] = 1;
            stack.push_back(n);
          }
        }
      }
    }
  }
  return components;
}

}  // namespace reparam
