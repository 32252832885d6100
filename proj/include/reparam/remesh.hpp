#pragma once

#include "reparam/brep.hpp"
#include "reparam/locator.hpp"
#include "reparam/planar.hpp"
#include "reparam/quality.hpp"

#include <Eigen/Cholesky>

#include <iterator>
#include <unordered_map>

namespace reparam {

/// Uniform target edge length in model units.
struct SizeField {
  double h = 1.0;
};

struct RemeshOptions {
  int passes = 10;
  double split_above = 1.4;
  double collapse_below = 0.7;
  int smooth_sweeps = 2;
};

/// A sample on a polyline: segment index, parameter on it and 3D point.
struct PolylineSample {
  int segment = 0;
  double t = 0.0;
  Vec3 position;
};

/// `segments` samples evenly spaced in arc length along a polyline. Open
/// polylines keep both end points exactly; closed ones return `segments`
/// samples starting at the first vertex.
inline std::vector<PolylineSample> sample_polyline(std::span<const Vec3> pts, bool closed, int segments) {
  const int nseg = static_cast<int>(pts.size()) - (closed ? 0 : 1);
  if (nseg < 1) throw Error(ErrorKind::InvalidArgument, "polyline needs at least one segment");
  std::vector<double> cum(nseg + 1, 0.0);
  for (int i = 0; i < nseg; ++i) cum[i + 1] = cum[i] + (pts[(i + 1) % pts.size()] - pts[i]).norm();
  const double total = cum.back();
  std::vector<PolylineSample> out;
  const int count = closed ? segments : segments + 1;
  int seg = 0;
  for (int k = 0; k < count; ++k) {
    if (!closed && k == segments) {
      out.push_back({nseg - 1, 1.0, pts[nseg]});
      break;
    }
    const double s = total * k / segments;
    while (seg + 1 < nseg && cum[seg + 1] <= s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? std::clamp((s - cum[seg]) / len, 0.0, 1.0) : 0.0;
    const Vec3& a = pts[seg];
    const Vec3& b = pts[(seg + 1) % pts.size()];
    out.push_back({seg, t, t == 0.0 ? a : Vec3((1.0 - t) * a + t * b)});
  }
  return out;
}

inline double polyline_length(std::span<const Vec3> pts, bool closed) {
  double len = 0.0;
  const std::size_t n = closed ? pts.size() : pts.size() - 1;
  for (std::size_t i = 0; i < n; ++i) len += (pts[(i + 1) % pts.size()] - pts[i]).norm();
  return len;
}

/// Samples spaced about h: max(1, round(L/h)) segments, at least 3 for a
/// closed curve.
inline std::vector<PolylineSample> discretize_curve(std::span<const Vec3> pts, bool closed, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "target size must be positive");
  const double len = polyline_length(pts, closed);
  int n = std::max(1, static_cast<int>(std::lround(len / h)));
  if (closed) n = std::max(n, 3);
  return sample_polyline(pts, closed, n);
}

/// Discretized BRep curves sharing one global vertex numbering: BRep points
/// first, then curve samples in curve order.
struct CurveSampling {
  struct Curve {
    std::vector<int> ids;
    std::vector<PolylineSample> samples;
  };
  std::vector<Curve> curves;
  std::vector<Vec3> positions;
  std::vector<std::vector<int>> faces_of;  // per global id, ascending
  std::vector<int> model_triangle;         // a model triangle containing each sample
};

inline CurveSampling discretize_curves(const Triangulation& model, const BRep& brep, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "target size must be positive");
  CurveSampling out;
  const int nc = brep.num_curves();
  std::vector<std::vector<Vec3>> polys(nc);
  std::vector<double> length(nc);
  std::vector<int> segs(nc);
  for (int c = 0; c < nc; ++c) {
    const BRepCurve& curve = brep.curves[c];
    for (int v : curve.vertices) polys[c].push_back(model.vertices[v]);
    length[c] = polyline_length(polys[c], curve.closed);
    int n = std::max(1, static_cast<int>(std::lround(length[c] / h)));
    if (curve.closed) n = std::max(n, 3);
    if (!curve.closed && curve.points[0] == curve.points[1]) n = std::max(n, 2);
    segs[c] = n;
  }
  // every face loop needs at least a triangle's worth of segments
  for (const BRepFace& face : brep.faces) {
    for (const auto& loop : face.loops) {
      while (true) {
        int total = 0;
        for (const OrientedCurve& oc : loop) total += segs[oc.curve];
        if (total >= 3) break;
        int pick = loop.front().curve;
        for (const OrientedCurve& oc : loop)
          if (length[oc.curve] / segs[oc.curve] > length[pick] / segs[pick]) pick = oc.curve;
        ++segs[pick];
      }
    }
  }

  Adjacency adj(model);
  auto edge_triangle = [&](int a, int b) {
    const int e = adj.find_edge(a, b);
    return e >= 0 ? adj.edge_triangles(e)[0] : -1;
  };
  for (const BRepPoint& p : brep.points) {
    out.positions.push_back(model.vertices[p.vertex]);
    out.model_triangle.push_back(adj.vertex_triangles(p.vertex)[0]);
  }
  out.curves.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const BRepCurve& curve = brep.curves[c];
    auto& dc = out.curves[c];
    dc.samples = sample_polyline(polys[c], curve.closed, segs[c]);
    for (std::size_t k = 0; k < dc.samples.size(); ++k) {
      const bool first = k == 0, last = k + 1 == dc.samples.size();
      if (!curve.closed && (first || last)) {
        dc.ids.push_back(curve.points[first ? 0 : 1]);
        if (first && last) throw Error(ErrorKind::Internal, "open curve with one sample");
        continue;
      }
      const PolylineSample& s = dc.samples[k];
      const int a = curve.vertices[s.segment];
      const int b = curve.vertices[(s.segment + 1) % curve.vertices.size()];
      dc.ids.push_back(static_cast<int>(out.positions.size()));
      out.positions.push_back(s.position);
      out.model_triangle.push_back(edge_triangle(a, b));
    }
  }
  out.faces_of.resize(out.positions.size());
  for (int c = 0; c < nc; ++c)
    for (int id : out.curves[c].ids)
      for (int f : brep.curves[c].faces) out.faces_of[id].push_back(f);
  for (auto& f : out.faces_of) {
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
  }
  return out;
}

/// Fixed vertex of a face's UV boundary.
struct BoundaryNode {
  Vec2 uv;
  Vec3 xyz;
  int global = -1;
  std::vector<int> other_faces;  // neighbouring faces that also own this vertex
};

/// UV position of a curve sample in a face parametrization, by linear
/// interpolation along the patch edge carrying it.
inline std::vector<std::vector<BoundaryNode>> face_boundary(const BRep& brep, const CurveSampling& sampling, int face,
                                                            const Patch& patch, const Parametrization& param) {
  std::unordered_map<int, int> local;
  for (int v = 0; v < patch.num_vertices(); ++v)
    if (patch.global_vertex[v] >= 0) local.emplace(patch.global_vertex[v], v);
  auto uv_of = [&](int model_vertex) {
    auto it = local.find(model_vertex);
    if (it == local.end()) throw Error(ErrorKind::Internal, "curve vertex missing from face patch", face);
    return param.uv[it->second];
  };
  auto node = [&](int curve, int k) {
    const BRepCurve& c = brep.curves[curve];
    const PolylineSample& s = sampling.curves[curve].samples[k];
    BoundaryNode n;
    const Vec2 a = uv_of(c.vertices[s.segment]);
    const Vec2 b = uv_of(c.vertices[(s.segment + 1) % c.vertices.size()]);
    n.uv = s.t == 0.0 ? a : (s.t == 1.0 ? b : Vec2((1.0 - s.t) * a + s.t * b));
    n.global = sampling.curves[curve].ids[k];
    n.xyz = sampling.positions[n.global];
    for (int f : sampling.faces_of[n.global])
      if (f != face) n.other_faces.push_back(f);
    return n;
  };
  std::vector<std::vector<BoundaryNode>> loops;
  for (const auto& loop : brep.faces[face].loops) {
    std::vector<BoundaryNode> nodes;
    for (const OrientedCurve& oc : loop) {
      const int m = static_cast<int>(sampling.curves[oc.curve].samples.size());
      const bool closed = brep.curves[oc.curve].closed;
      const int count = closed ? m : m - 1;  // the last point starts the next curve
      for (int i = 0; i < count; ++i) {
        int k = oc.reversed ? (closed ? (m - i) % m : m - 1 - i) : i;
        nodes.push_back(node(oc.curve, k));
      }
    }
    loops.push_back(std::move(nodes));
  }
  return loops;
}

/// Piecewise-constant metric J^T J / h^2 over the parametric triangles.
class MetricField {
 public:
  MetricField(const Patch& patch, const Parametrization& param, const UVLocator& locator, double h)
      : locator_(&locator) {
    metric_.reserve(patch.num_triangles());
    for (const Tri& f : patch.mesh.triangles) {
      Eigen::Matrix2d m = Eigen::Matrix2d::Identity() / (h * h);
      try {
        const Jacobian j = triangle_jacobian({patch.mesh.vertices[f[0]], patch.mesh.vertices[f[1]], patch.mesh.vertices[f[2]]},
                                             {param.uv[f[0]], param.uv[f[1]], param.uv[f[2]]});
        m = j.transpose() * j / (h * h);
      } catch (const Error&) {
      }
      metric_.push_back(m);
    }
  }

  const Eigen::Matrix2d& at(const Vec2& p) const {
    if (auto loc = locator_->locate(p)) return metric_[loc->triangle];
    auto near = locator_->nearest(p);
    return metric_[near ? near->first.triangle : 0];
  }

  /// Metric length of segment ab with the two-point Gauss rule.
  double length(const Vec2& a, const Vec2& b) const {
    const Vec2 e = b - a;
    const double g = 0.5 / std::sqrt(3.0);
    const Vec2 q1 = a + (0.5 - g) * e, q2 = a + (0.5 + g) * e;
    return 0.5 * (std::sqrt(std::max(0.0, e.dot(at(q1) * e))) + std::sqrt(std::max(0.0, e.dot(at(q2) * e))));
  }

 private:
  const UVLocator* locator_;
  std::vector<Eigen::Matrix2d> metric_;
};

struct RemeshStats {
  int splits = 0;
  int collapses = 0;
  int flips = 0;
  int moves = 0;
  int interior_edges = 0;
  int edges_in_band = 0;
  double min_uv_area = 0.0;

  double band_fraction() const { return interior_edges ? double(edges_in_band) / interior_edges : 1.0; }
};

/// Triangulated face: boundary nodes first, then inserted vertices.
struct FaceMesh {
  std::vector<Vec2> uv;
  std::vector<Vec3> xyz;
  std::vector<int> global;  // -1 for interior vertices
  std::vector<int> model_triangle;  // model triangle carrying each interior vertex
  std::vector<Tri> triangles;
  RemeshStats stats;
};

namespace detail {

/// Local-operation remesher on a planar triangulation with a fixed
/// boundary.
class PlanarRemesher {
 public:
  PlanarRemesher(const std::vector<std::vector<BoundaryNode>>& loops, const MetricField& metric,
                 const UVLocator& locator, const RemeshOptions& options)
      : metric_(metric), locator_(locator), opt_(options) {
    std::vector<std::vector<int>> idx;
    for (const auto& loop : loops) {
      idx.emplace_back();
      for (const BoundaryNode& n : loop) {
        idx.back().push_back(static_cast<int>(p_.size()));
        p_.push_back(n.uv);
        xyz_.push_back(n.xyz);
        global_.push_back(n.global);
        other_.push_back(n.other_faces);
      }
    }
    nb_ = static_cast<int>(p_.size());
    dead_.assign(p_.size(), 0);
    vt_.resize(p_.size());
    for (const Tri& f : triangulate_polygons(p_, idx)) add(f);
  }

  void run() {
    for (int pass = 0; pass < opt_.passes; ++pass) {
      const int before = stats_.splits + stats_.collapses + stats_.flips;
      split_pass();
      collapse_pass();
      flip_pass();
      for (int s = 0; s < opt_.smooth_sweeps; ++s) smooth_pass();
      if (stats_.splits + stats_.collapses + stats_.flips == before && pass > 0) break;
    }
    split_pass();
    collapse_pass();
    flip_pass();
    split_pass(true);
    flip_pass();
  }

  FaceMesh result() const {
    FaceMesh out;
    std::vector<int> remap(p_.size(), -1);
    for (int v = 0; v < static_cast<int>(p_.size()); ++v) {
      if (dead_[v]) continue;
      remap[v] = static_cast<int>(out.uv.size());
      out.uv.push_back(p_[v]);
      out.xyz.push_back(v < nb_ ? xyz_[v] : Vec3::Zero());
      out.global.push_back(v < nb_ ? global_[v] : -1);
    }
    out.model_triangle.assign(out.uv.size(), -1);
    out.stats = stats_;
    out.stats.min_uv_area = std::numeric_limits<double>::infinity();
    for (int t = 0; t < static_cast<int>(t_.size()); ++t) {
      if (!alive_[t]) continue;
      const Tri& f = t_[t];
      out.triangles.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
      out.stats.min_uv_area = std::min(out.stats.min_uv_area, area(f));
    }
    out.stats.interior_edges = out.stats.edges_in_band = 0;
    for (auto [a, b] : edges()) {
      if (edge_triangles(a, b).size() != 2) continue;
      ++out.stats.interior_edges;
      const double len = metric_.length(p_[a], p_[b]);
      if (len >= opt_.collapse_below && len <= opt_.split_above) ++out.stats.edges_in_band;
    }
    return out;
  }

 private:
  double area(const Tri& f) const { return orient2d(p_[f[0]], p_[f[1]], p_[f[2]]) * 0.5; }

  bool valid(const Tri& f) const {
    const double l = std::max({(p_[f[1]] - p_[f[0]]).squaredNorm(), (p_[f[2]] - p_[f[1]]).squaredNorm(),
                               (p_[f[0]] - p_[f[2]]).squaredNorm()});
    return area(f) > 1e-12 * l;
  }

  int add(const Tri& f) {
    const int t = static_cast<int>(t_.size());
    t_.push_back(f);
    alive_.push_back(1);
    for (int v : f) vt_[v].push_back(t);
    return t;
  }

  void unlink(int t, int v) {
    auto& list = vt_[v];
    list.erase(std::find(list.begin(), list.end(), t));
  }

  void kill(int t) {
    alive_[t] = 0;
    for (int v : t_[t]) unlink(t, v);
  }

  std::vector<int> edge_triangles(int a, int b) const {
    std::vector<int> out;
    for (int t : vt_[a])
      if (t_[t][0] == b || t_[t][1] == b || t_[t][2] == b) out.push_back(t);
    return out;
  }

  std::vector<int> neighbors(int v) const {
    std::vector<int> out;
    for (int t : vt_[v])
      for (int w : t_[t])
        if (w != v) out.push_back(w);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    for (int t = 0; t < static_cast<int>(t_.size()); ++t) {
      if (!alive_[t]) continue;
      for (int k = 0; k < 3; ++k) {
        const int a = t_[t][k], b = t_[t][(k + 1) % 3];
        out.emplace_back(std::min(a, b), std::max(a, b));
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool is_boundary_vertex(int v) const { return v < nb_; }

  /// Interior edge between two boundary vertices that another face also
  /// owns; kept out so the stitched mesh stays manifold.
  bool forbidden_chord(int a, int b) const {
    if (!is_boundary_vertex(a) || !is_boundary_vertex(b)) return false;
    const auto& fa = other_[a];
    const auto& fb = other_[b];
    for (int f : fa)
      if (std::find(fb.begin(), fb.end(), f) != fb.end()) return true;
    return false;
  }

  bool inside_domain(const Vec2& p) const { return locator_.locate(p).has_value(); }

  bool split(int a, int b) {
    const auto tris = edge_triangles(a, b);
    if (tris.size() != 2) return false;
    const Vec2 mid = 0.5 * (p_[a] + p_[b]);
    if (!inside_domain(mid)) return false;
    const int m = static_cast<int>(p_.size());
    p_.push_back(mid);
    dead_.push_back(0);
    vt_.emplace_back();
    for (int t : tris) {
      Tri f = t_[t];
      int k = 0;
      while (!((f[k] == a || f[k] == b) && (f[(k + 1) % 3] == a || f[(k + 1) % 3] == b))) ++k;
      const int u = f[k], w = f[(k + 1) % 3], c = f[(k + 2) % 3];
      kill(t);
      add({u, m, c});
      add({m, w, c});
    }
    ++stats_.splits;
    return true;
  }

  /// Removes interior vertex a by merging it into b.
  bool collapse(int a, int b) {
    if (is_boundary_vertex(a)) return false;
    const auto shared = edge_triangles(a, b);
    if (shared.size() != 2) return false;
    // link condition
    const auto na = neighbors(a), nbv = neighbors(b);
    std::vector<int> common;
    std::set_intersection(na.begin(), na.end(), nbv.begin(), nbv.end(), std::back_inserter(common));
    if (common.size() != 2) return false;
    for (int t : vt_[a]) {
      if (std::find(shared.begin(), shared.end(), t) != shared.end()) continue;
      Tri f = t_[t];
      for (int& v : f)
        if (v == a) v = b;
      if (!valid(f)) return false;
    }
    for (int c : na) {
      if (c == b) continue;
      if (metric_.length(p_[b], p_[c]) > opt_.split_above) return false;
      if (forbidden_chord(b, c) && std::find(common.begin(), common.end(), c) == common.end()) {
        // the edge b-c would be new and interior
        return false;
      }
    }
    const std::vector<int> star = vt_[a];
    for (int t : star) {
      if (std::find(shared.begin(), shared.end(), t) != shared.end()) {
        kill(t);
        continue;
      }
      Tri f = t_[t];
      kill(t);
      for (int& v : f)
        if (v == a) v = b;
      add(f);
    }
    dead_[a] = 1;
    ++stats_.collapses;
    return true;
  }

  /// Collapses an edge between two interior vertices at its midpoint.
  bool collapse_to_midpoint(int a, int b) {
    if (is_boundary_vertex(a) || is_boundary_vertex(b)) return false;
    const Vec2 old = p_[b];
    p_[b] = 0.5 * (p_[a] + p_[b]);
    bool ok = inside_domain(p_[b]);
    for (int t : vt_[b]) {
      const Tri& f = t_[t];
      if (std::find(f.begin(), f.end(), a) == f.end()) ok = ok && valid(f);
    }
    if (ok && collapse(a, b)) return true;
    p_[b] = old;
    return false;
  }

  /// Flips interior edge (a,b) when the metric Delaunay test asks for it,
  /// or unconditionally when `force` is set.
  bool flip(int a, int b, bool force) {
    const auto tris = edge_triangles(a, b);
    if (tris.size() != 2) return false;
    const int t1 = tris[0], t2 = tris[1];
    int k = 0;
    while (!((t_[t1][k] == a || t_[t1][k] == b) && (t_[t1][(k + 1) % 3] == a || t_[t1][(k + 1) % 3] == b))) ++k;
    const int u = t_[t1][k], w = t_[t1][(k + 1) % 3], c = t_[t1][(k + 2) % 3];
    int d = -1;
    for (int v : t_[t2])
      if (v != u && v != w) d = v;
    if (!edge_triangles(c, d).empty()) return false;
    if (forbidden_chord(c, d)) return false;
    const Tri n1{c, u, d}, n2{d, w, c};
    if (!valid(n1) || !valid(n2)) return false;
    if (!force) {
      const Eigen::Matrix2d m = metric_.at(0.5 * (p_[u] + p_[w]));
      Eigen::LLT<Eigen::Matrix2d> llt(m);
      if (llt.info() != Eigen::Success) return false;
      const Eigen::Matrix2d lt = llt.matrixU();
      const Vec2 pu = lt * p_[u], pw = lt * p_[w], pc = lt * p_[c], pd = lt * p_[d];
      const double s = std::max({(pu - pw).squaredNorm(), (pc - pd).squaredNorm(), 1e-300});
      if (!(incircle(pu, pw, pc, pd) > 1e-10 * s * s)) return false;
    }
    kill(t1);
    kill(t2);
    add(n1);
    add(n2);
    ++stats_.flips;
    return true;
  }

  void split_pass(bool chords_only = false) {
    struct Candidate {
      double len;
      int a, b;
    };
    std::vector<Candidate> list;
    for (auto [a, b] : edges()) {
      if (edge_triangles(a, b).size() != 2) continue;
      const double len = metric_.length(p_[a], p_[b]);
      const bool chord = forbidden_chord(a, b);
      if (chord || (!chords_only && len > opt_.split_above)) list.push_back({chord ? 1e300 : len, a, b});
    }
    std::sort(list.begin(), list.end(), [](const Candidate& x, const Candidate& y) {
      if (x.len != y.len) return x.len > y.len;
      return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    for (const Candidate& c : list) {
      if (forbidden_chord(c.a, c.b) && flip(c.a, c.b, true)) continue;
      split(c.a, c.b);
    }
  }

  void collapse_pass() {
    struct Candidate {
      double len;
      int a, b;
    };
    std::vector<Candidate> list;
    for (auto [a, b] : edges()) {
      if (edge_triangles(a, b).size() != 2) continue;
      const double len = metric_.length(p_[a], p_[b]);
      if (len < opt_.collapse_below) list.push_back({len, a, b});
    }
    std::sort(list.begin(), list.end(), [](const Candidate& x, const Candidate& y) {
      if (x.len != y.len) return x.len < y.len;
      return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    for (const Candidate& c : list) {
      if (dead_[c.a] || dead_[c.b]) continue;
      if (metric_.length(p_[c.a], p_[c.b]) >= opt_.collapse_below) continue;
      if (!collapse(c.b, c.a) && !collapse(c.a, c.b)) collapse_to_midpoint(c.a, c.b);
    }
  }

  void flip_pass() {
    for (int sweep = 0; sweep < 4; ++sweep) {
      int flips = 0;
      for (auto [a, b] : edges())
        if (flip(a, b, false)) ++flips;
      if (flips == 0) break;
    }
  }

  void smooth_pass() {
    for (int v = nb_; v < static_cast<int>(p_.size()); ++v) {
      if (dead_[v] || vt_[v].empty()) continue;
      const auto nbr = neighbors(v);
      Vec2 sum = Vec2::Zero();
      double wsum = 0.0;
      for (int w : nbr) {
        const double l = metric_.length(p_[v], p_[w]);
        sum += l * p_[w];
        wsum += l;
      }
      if (!(wsum > 0.0)) continue;
      const Vec2 old = p_[v];
      const Vec2 target = sum / wsum;
      bool moved = false;
      for (double step : {1.0, 0.5, 0.25}) {
        p_[v] = old + step * (target - old);
        bool ok = inside_domain(p_[v]);
        for (int t : vt_[v]) ok = ok && valid(t_[t]);
        if (ok) {
          moved = true;
          break;
        }
      }
      if (!moved) {
        p_[v] = old;
      } else {
        ++stats_.moves;
      }
    }
  }

  const MetricField& metric_;
  const UVLocator& locator_;
  RemeshOptions opt_;
  std::vector<Vec2> p_;
  std::vector<Vec3> xyz_;
  std::vector<int> global_;
  std::vector<std::vector<int>> other_;
  int nb_ = 0;
  std::vector<char> dead_;
  std::vector<Tri> t_;
  std::vector<char> alive_;
  std::vector<std::vector<int>> vt_;
  RemeshStats stats_;
};

}  // namespace detail

/// Meshes the UV domain bounded by `boundary` so that edges measure about
/// one in the induced metric. Interior vertices get their 3D position from
/// map_to_3d.
inline FaceMesh mesh_patch_uv(const Patch& patch, const Parametrization& param, const SizeField& size,
                              const std::vector<std::vector<BoundaryNode>>& boundary, const UVLocator& locator,
                              const RemeshOptions& options = {}) {
  if (!param.injective) throw Error(ErrorKind::InvalidArgument, "parametrization is not injective");
  if (!(size.h > 0.0)) throw Error(ErrorKind::InvalidArgument, "target size must be positive");
  for (const auto& loop : boundary)
    if (loop.size() < 3) throw Error(ErrorKind::InvalidArgument, "boundary loop with fewer than 3 vertices");
  const MetricField metric(patch, param, locator, size.h);
  detail::PlanarRemesher remesher(boundary, metric, locator, options);
  remesher.run();
  FaceMesh mesh = remesher.result();
  for (const Tri& f : mesh.triangles)
    if (!(signed_area(mesh.uv[f[0]], mesh.uv[f[1]], mesh.uv[f[2]]) > 0.0))
      throw Error(ErrorKind::Internal, "remesher produced a folded UV triangle");
  return mesh;
}

/// Places interior vertices on the patch: barycentric image of the UV point
/// in its parametric triangle. Boundary vertices keep their exact position.
inline void map_to_3d(FaceMesh& mesh, const Patch& patch, const UVLocator& locator) {
  for (std::size_t v = 0; v < mesh.uv.size(); ++v) {
    if (mesh.global[v] >= 0) continue;
    const auto loc = locator.locate(mesh.uv[v]);
    if (!loc) throw Error(ErrorKind::Locate, "UV vertex outside the parametric domain");
    const Tri& f = patch.mesh.triangles[loc->triangle];
    const auto& l = loc->bary;
    mesh.xyz[v] = l[0] * patch.mesh.vertices[f[0]] + l[1] * patch.mesh.vertices[f[1]] + l[2] * patch.mesh.vertices[f[2]];
    mesh.model_triangle[v] = patch.parent_triangle[loc->triangle];
  }
}

/// Merges face meshes: curve samples keep their global ids, interior
/// vertices are appended face by face. Triangles carry the face id.
inline Triangulation stitch(const std::vector<FaceMesh>& faces, const CurveSampling& sampling) {
  Triangulation out;
  out.vertices = sampling.positions;
  std::vector<char> used(sampling.positions.size(), 0);
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    const FaceMesh& m = faces[f];
    std::vector<int> id(m.uv.size());
    for (std::size_t v = 0; v < m.uv.size(); ++v) {
      if (m.global[v] >= 0) {
        if ((m.xyz[v] - sampling.positions[m.global[v]]).squaredNorm() != 0.0)
          throw Error(ErrorKind::Internal, "curve sample mismatch while stitching", f);
        id[v] = m.global[v];
        used[m.global[v]] = 1;
      } else {
        id[v] = static_cast<int>(out.vertices.size());
        out.vertices.push_back(m.xyz[v]);
      }
    }
    for (const Tri& t : m.triangles) {
      out.triangles.push_back({id[t[0]], id[t[1]], id[t[2]]});
      out.patch_tags.push_back(f);
    }
  }
  if (std::find(used.begin(), used.end(), 0) != used.end())
    throw Error(ErrorKind::Internal, "curve sample not referenced by any face");
  return out;
}

}  // namespace reparam
