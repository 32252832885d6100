#pragma once

#include "reparam/brep.hpp"
#include "reparam/features.hpp"
#include "reparam/parallel.hpp"
#include "reparam/param.hpp"

#include <deque>
#include <map>
#include <optional>

namespace reparam {

/// Why a patch was bisected on its way into the atlas.
enum class SplitReason {
  Genus,           // closed, multiply connected or otherwise not a disk
  Size,            // more triangles than the limit
  DegenerateArea,  // trial map has (near) zero or negative UV area
  Aspect,          // trial map has a needle-like UV triangle
  Solver,          // trial map could not be computed
};

inline const char* to_string(SplitReason r) {
  switch (r) {
    case SplitReason::Genus: return "genus";
    case SplitReason::Size: return "size";
    case SplitReason::DegenerateArea: return "degenerate-area";
    case SplitReason::Aspect: return "aspect";
    case SplitReason::Solver: return "solver";
  }
  return "?";
}

struct AtlasOptions {
  int max_triangles = 100000;
  double degenerate_area_factor = 1e-12;
  double aspect_limit = 1e6;
  ParamOptions trial;  // scheme and hole handling of the trial map
  int threads = 1;
};

/// A final atlas patch with the split reasons of its ancestors, outermost
/// first.
struct AtlasPatch {
  Patch patch;
  std::vector<SplitReason> reasons;
  int feature_patch = -1;
};

/// Longest UV edge over the altitude onto it.
inline double uv_triangle_aspect(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double area = std::abs(signed_area(a, b, c));
  const double longest = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
  if (!(area > 0.0)) return std::numeric_limits<double>::infinity();
  return longest * longest / (2.0 * area);
}

/// Runs the checks in order: topology, size, trial parametrization.
inline std::optional<SplitReason> atlas_check(const Patch& patch, const AtlasOptions& options) {
  if (!euler_check(patch).parametrizable) return SplitReason::Genus;
  if (patch.num_triangles() > options.max_triangles) return SplitReason::Size;
  Parametrization trial;
  try {
    trial = parametrize(patch, options.trial);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Solver || e.kind() == ErrorKind::InvalidMesh) return SplitReason::Solver;
    throw;
  }
  const double mean = trial.total_area() / patch.num_triangles();
  if (!(trial.min_area() > options.degenerate_area_factor * mean)) return SplitReason::DegenerateArea;
  for (const Tri& f : patch.mesh.triangles)
    if (uv_triangle_aspect(trial.uv[f[0]], trial.uv[f[1]], trial.uv[f[2]]) > options.aspect_limit)
      return SplitReason::Aspect;
  return std::nullopt;
}

namespace detail {

/// Dual-graph neighbours across manifold edges.
inline std::vector<std::vector<int>> dual_graph(const Patch& patch) {
  Adjacency adj(patch.mesh);
  std::vector<std::vector<int>> nbr(patch.num_triangles());
  for (int t = 0; t < patch.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int n = adj.neighbor(t, k);
      if (n >= 0) nbr[t].push_back(n);
    }
    std::sort(nbr[t].begin(), nbr[t].end());
  }
  return nbr;
}

/// BFS distances from `seed`; -1 for unreachable triangles.
inline std::vector<int> bfs_distances(const std::vector<std::vector<int>>& nbr, int seed) {
  std::vector<int> dist(nbr.size(), -1);
  std::deque<int> queue{seed};
  dist[seed] = 0;
  while (!queue.empty()) {
    const int t = queue.front();
    queue.pop_front();
    for (int n : nbr[t]) {
      if (dist[n] < 0) {
        dist[n] = dist[t] + 1;
        queue.push_back(n);
      }
    }
  }
  return dist;
}

inline int farthest(const std::vector<int>& dist) {
  int best = 0;
  for (int t = 0; t < static_cast<int>(dist.size()); ++t)
    if (dist[t] > dist[best]) best = t;
  return best;
}

/// Local triangle sets of the edge-connected components, ordered by their
/// smallest triangle.
inline std::vector<std::vector<int>> components(const std::vector<std::vector<int>>& nbr) {
  std::vector<int> comp(nbr.size(), -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < static_cast<int>(nbr.size()); ++s) {
    if (comp[s] >= 0) continue;
    const auto dist = bfs_distances(nbr, s);
    out.emplace_back();
    for (int t = 0; t < static_cast<int>(nbr.size()); ++t) {
      if (dist[t] >= 0) {
        comp[t] = static_cast<int>(out.size()) - 1;
        out.back().push_back(t);
      }
    }
  }
  return out;
}

}  // namespace detail

/// Splits a patch in two by balanced breadth-first growth on the dual graph
/// from an approximate diameter pair. The smaller region grows next.
inline std::pair<Patch, Patch> bisect_patch(const Patch& patch) {
  const int nt = patch.num_triangles();
  if (nt < 2) throw Error(ErrorKind::Topology, "cannot bisect a patch with fewer than 2 triangles");
  const auto nbr = detail::dual_graph(patch);
  const auto comps = detail::components(nbr);
  if (comps.size() > 1) {
    std::vector<int> rest;
    for (std::size_t c = 1; c < comps.size(); ++c) rest.insert(rest.end(), comps[c].begin(), comps[c].end());
    std::sort(rest.begin(), rest.end());
    return {make_subpatch(patch, comps[0]), make_subpatch(patch, rest)};
  }
  const int s1 = detail::farthest(detail::bfs_distances(nbr, 0));
  const int s2 = detail::farthest(detail::bfs_distances(nbr, s1));

  std::vector<int> owner(nt, -1);
  std::deque<int> queue[2];
  int size[2] = {0, 0};
  const int seeds[2] = {s1, s2};
  for (int r = 0; r < 2; ++r) {
    owner[seeds[r]] = r;
    size[r] = 1;
    for (int n : nbr[seeds[r]]) queue[r].push_back(n);
  }
  int assigned = 2;
  while (assigned < nt) {
    int r = size[0] <= size[1] ? 0 : 1;
    // drop stale candidates; a blocked region yields to the other one
    for (int attempt = 0; attempt < 2; ++attempt) {
      while (!queue[r].empty() && owner[queue[r].front()] >= 0) queue[r].pop_front();
      if (!queue[r].empty()) break;
      r = 1 - r;
    }
    if (queue[r].empty()) break;
    const int t = queue[r].front();
    queue[r].pop_front();
    owner[t] = r;
    ++size[r];
    ++assigned;
    for (int n : nbr[t])
      if (owner[n] < 0) queue[r].push_back(n);
  }
  std::vector<int> part[2];
  for (int t = 0; t < nt; ++t) part[owner[t] == 1 ? 1 : 0].push_back(t);
  return {make_subpatch(patch, part[0]), make_subpatch(patch, part[1])};
}

/// Bisects until every piece passes `atlas_check`. Pieces come back ordered
/// by their smallest model triangle.
inline std::vector<AtlasPatch> make_parametrizable(const Patch& patch, const AtlasOptions& options = {}) {
  std::vector<AtlasPatch> done;
  std::deque<AtlasPatch> queue;
  {
    const auto comps = detail::components(detail::dual_graph(patch));
    if (comps.size() == 1) {
      queue.push_back({patch, {}, -1});
    } else {
      for (const auto& c : comps) queue.push_back({make_subpatch(patch, c), {}, -1});
    }
  }
  while (!queue.empty()) {
    AtlasPatch item = std::move(queue.front());
    queue.pop_front();
    const auto reason = atlas_check(item.patch, options);
    if (!reason) {
      done.push_back(std::move(item));
      continue;
    }
    if (item.patch.num_triangles() < 2)
      throw Error(ErrorKind::Topology, std::string("single triangle fails the atlas check: ") + to_string(*reason));
    auto [a, b] = bisect_patch(item.patch);
    auto reasons = item.reasons;
    reasons.push_back(*reason);
    queue.push_back({std::move(a), reasons, item.feature_patch});
    queue.push_back({std::move(b), std::move(reasons), item.feature_patch});
  }
  auto first_triangle = [](const AtlasPatch& p) {
    return *std::min_element(p.patch.parent_triangle.begin(), p.patch.parent_triangle.end());
  };
  std::sort(done.begin(), done.end(),
            [&](const AtlasPatch& x, const AtlasPatch& y) { return first_triangle(x) < first_triangle(y); });
  return done;
}

namespace detail {

struct BrepEdge {
  int a, b;  // oriented as the lower face traverses it
  std::pair<int, int> faces;  // (lower, upper) or (face, -1)
};

}  // namespace detail

/// Boundary representation of a model whose triangles carry face ids in
/// `patch_tags`. Curves are maximal chains of face-boundary edges between
/// the same pair of faces; corner points are where chains meet.
inline BRep build_brep(const Triangulation& model, const Adjacency& adj, const FeatureEdgeSet* features = nullptr) {
  if (!model.tagged()) throw Error(ErrorKind::InvalidArgument, "build_brep needs face tags");
  BRep brep;
  const int nv = model.num_vertices();
  int num_faces = 0;
  for (int tag : model.patch_tags) num_faces = std::max(num_faces, tag + 1);
  brep.faces.resize(num_faces);

  // face-boundary edges
  std::vector<detail::BrepEdge> bedges;
  std::vector<int> bedge_of(adj.num_edges(), -1);
  for (int e = 0; e < adj.num_edges(); ++e) {
    auto tris = adj.edge_triangles(e);
    if (tris.size() > 2) throw Error(ErrorKind::InvalidMesh, "non-manifold edge in build_brep");
    int lower = tris[0];
    std::pair<int, int> faces{model.patch_tags[tris[0]], -1};
    if (tris.size() == 2) {
      const int fa = model.patch_tags[tris[0]], fb = model.patch_tags[tris[1]];
      if (fa == fb) continue;
      faces = {std::min(fa, fb), std::max(fa, fb)};
      lower = fa < fb ? tris[0] : tris[1];
    }
    const Tri& f = model.triangles[lower];
    auto [u, v] = adj.edge(e);
    int a = u, b = v;
    for (int k = 0; k < 3; ++k) {
      if (edge_key(f[k], f[(k + 1) % 3]) == edge_key(u, v)) {
        a = f[k];
        b = f[(k + 1) % 3];
      }
    }
    bedge_of[e] = static_cast<int>(bedges.size());
    bedges.push_back({a, b, faces});
  }

  // per-vertex incident face-boundary edges
  std::vector<std::vector<int>> at(nv);
  for (int i = 0; i < static_cast<int>(bedges.size()); ++i) {
    at[bedges[i].a].push_back(i);
    at[bedges[i].b].push_back(i);
  }
  std::vector<int> point_of(nv, -1);
  for (int v = 0; v < nv; ++v) {
    const auto& inc = at[v];
    if (inc.empty()) continue;
    if (inc.size() != 2 || bedges[inc[0]].faces != bedges[inc[1]].faces) {
      point_of[v] = brep.num_points();
      brep.points.push_back({v});
    }
  }

  std::vector<int> curve_of(bedges.size(), -1);
  auto other = [&](int i, int v) { return bedges[i].a == v ? bedges[i].b : bedges[i].a; };
  auto next_edge = [&](int i, int v) {
    for (int j : at[v])
      if (j != i) return j;
    return -1;
  };
  auto emit = [&](std::vector<int> verts, std::vector<int> chain, bool closed) {
    const detail::BrepEdge& first = bedges[chain.front()];
    // follow the lower face's winding
    if (!(first.a == verts[0] && first.b == verts[1])) {
      std::reverse(verts.begin(), verts.end());
      if (closed) std::rotate(verts.begin(), verts.end() - 1, verts.end());
    }
    BRepCurve c;
    c.vertices = std::move(verts);
    c.closed = closed;
    if (!closed) c.points = {point_of[c.vertices.front()], point_of[c.vertices.back()]};
    c.faces.push_back(first.faces.first);
    if (first.faces.second >= 0) c.faces.push_back(first.faces.second);
    c.feature = true;
    for (int i : chain) {
      const int e = adj.find_edge(bedges[i].a, bedges[i].b);
      if (!features || adj.edge_valence(e) != 2 || !features->is_feature[e]) c.feature = false;
      curve_of[i] = brep.num_curves();
    }
    brep.curves.push_back(std::move(c));
  };

  // open chains, walked from corners in ascending vertex order
  for (const BRepPoint& p : brep.points) {
    std::vector<int> inc = at[p.vertex];
    std::sort(inc.begin(), inc.end(), [&](int x, int y) { return other(x, p.vertex) < other(y, p.vertex); });
    for (int start : inc) {
      if (curve_of[start] >= 0) continue;
      std::vector<int> verts{p.vertex}, chain;
      int i = start, v = p.vertex;
      while (true) {
        chain.push_back(i);
        curve_of[i] = -2;
        v = other(i, v);
        verts.push_back(v);
        if (point_of[v] >= 0) break;
        i = next_edge(i, v);
      }
      emit(std::move(verts), std::move(chain), false);
    }
  }
  // closed chains without corners
  for (int s = 0; s < static_cast<int>(bedges.size()); ++s) {
    if (curve_of[s] != -1) continue;
    std::vector<int> chain;
    std::vector<int> verts;
    int i = s, v = bedges[s].a;
    do {
      chain.push_back(i);
      curve_of[i] = -2;
      verts.push_back(v);
      v = other(i, v);
      i = next_edge(i, v);
    } while (i != s);
    // start at the smallest vertex, keeping the traversal direction
    const auto pos = std::min_element(verts.begin(), verts.end()) - verts.begin();
    std::rotate(verts.begin(), verts.begin() + pos, verts.end());
    std::rotate(chain.begin(), chain.begin() + pos, chain.end());
    emit(std::move(verts), std::move(chain), true);
  }

  // face loops as cycles of oriented curves
  std::vector<std::vector<int>> face_triangles(num_faces);
  for (int t = 0; t < model.num_triangles(); ++t) face_triangles[model.patch_tags[t]].push_back(t);
  for (int f = 0; f < num_faces; ++f) {
    std::vector<Tri> tris;
    for (int t : face_triangles[f]) tris.push_back(model.triangles[t]);
    Adjacency fadj(nv, tris);
    for (const auto& loop : extract_boundary_loops(tris, fadj)) {
      const int n = static_cast<int>(loop.size());
      auto curve_at = [&](int k) {
        const int e = adj.find_edge(loop[k], loop[(k + 1) % n]);
        const int b = e >= 0 ? bedge_of[e] : -1;
        if (b < 0 || curve_of[b] < 0) throw Error(ErrorKind::Internal, "face loop edge is not on a curve");
        return curve_of[b];
      };
      int start = -1;
      for (int k = 0; k < n && start < 0; ++k)
        if (point_of[loop[k]] >= 0 || curve_at((k + n - 1) % n) != curve_at(k)) start = k;
      std::vector<OrientedCurve> cycle;
      if (start < 0) {
        const int c = curve_at(0);
        const auto& cv = brep.curves[c].vertices;
        const auto pos = std::find(cv.begin(), cv.end(), loop[0]) - cv.begin();
        cycle.push_back({c, cv[(pos + 1) % cv.size()] != loop[1 % n]});
      } else {
        for (int k = 0; k < n; ++k) {
          const int i = (start + k) % n;
          const bool breaks = point_of[loop[i]] >= 0 || curve_at((i + n - 1) % n) != curve_at(i);
          if (k != 0 && !breaks) continue;
          const int c = curve_at(i);
          const auto& cv = brep.curves[c].vertices;
          cycle.push_back({c, !(cv.front() == loop[i] && cv[1] == loop[(i + 1) % n])});
        }
      }
      brep.faces[f].loops.push_back(std::move(cycle));
    }
  }
  return brep;
}

/// Feature detection, segmentation, splitting and BREP assembly for a whole
/// model.
struct Atlas {
  Triangulation model;  // input with patch_tags set to the final face ids
  FeatureEdgeSet features;
  PatchSet segmentation;
  std::vector<AtlasPatch> patches;  // index = face id
  BRep brep;
};

inline Atlas build_atlas(const Triangulation& input, double feature_angle = kDefaultFeatureAngle,
                         const AtlasOptions& options = {}) {
  const ValidationReport report = validate(input);
  if (!report.indices_valid || !report.manifold)
    throw Error(ErrorKind::InvalidMesh, "input is not a manifold triangulation");
  if (!report.orientation_consistent) throw Error(ErrorKind::InvalidMesh, "inconsistent triangle orientation");
  if (!report.degenerate_triangles.empty())
    throw Error(ErrorKind::InvalidMesh,
                "degenerate triangle " + std::to_string(report.degenerate_triangles.front()));
  Atlas atlas;
  atlas.model = input;
  atlas.model.patch_tags.clear();
  Adjacency adj(atlas.model);
  atlas.features = detect_feature_edges(atlas.model, adj, feature_angle);
  atlas.segmentation = segment_patches(atlas.model, adj, atlas.features);
  const auto groups = atlas.segmentation.triangles_by_patch();
  std::vector<std::vector<AtlasPatch>> pieces(groups.size());
  parallel_for(static_cast<int>(groups.size()), options.threads, [&](int p) {
    try {
      pieces[p] = make_parametrizable(make_patch(atlas.model, groups[p]), options);
    } catch (const Error& e) {
      throw Error(e.kind(), e.what(), p);
    }
    for (auto& piece : pieces[p]) piece.feature_patch = p;
  });
  for (auto& list : pieces)
    for (auto& piece : list) atlas.patches.push_back(std::move(piece));
  atlas.model.patch_tags.assign(atlas.model.num_triangles(), -1);
  for (int f = 0; f < static_cast<int>(atlas.patches.size()); ++f)
    for (int t : atlas.patches[f].patch.parent_triangle) atlas.model.patch_tags[t] = f;
  atlas.brep = build_brep(atlas.model, adj, &atlas.features);
  return atlas;
}

}  // namespace reparam
