#pragma once

#include "reparam/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <tuple>
#include <span>
#include <unordered_set>
#include <vector>

namespace reparam {

inline double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

/// Positive when d lies inside the circumcircle of the counter-clockwise
/// triangle (a,b,c).
inline double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady, bd = bdx * bdx + bdy * bdy, cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

namespace detail {

/// Incremental Delaunay triangulation with neighbour links, used to build
/// constrained triangulations of polygonal domains.
class Lawson {
 public:
  explicit Lawson(std::span<const Vec2> points) : p_(points.begin(), points.end()) {
    n_ = static_cast<int>(p_.size());
    Vec2 lo = p_.empty() ? Vec2::Zero() : p_[0], hi = lo;
    for (const Vec2& q : p_) {
      lo = lo.cwiseMin(q);
      hi = hi.cwiseMax(q);
    }
    scale_ = std::max((hi - lo).maxCoeff(), 1e-300);
    tol_ = 1e-12 * scale_;
    const Vec2 c = 0.5 * (lo + hi);
    const double r = 20.0 * scale_;
    p_.push_back(c + Vec2(-r * std::sqrt(3.0), -r));
    p_.push_back(c + Vec2(r * std::sqrt(3.0), -r));
    p_.push_back(c + Vec2(0.0, 2.0 * r));
    t_.push_back({n_, n_ + 1, n_ + 2});
    nb_.push_back({-1, -1, -1});
    vt_.assign(n_ + 3, 0);
  }

  void insert_all() {
    for (int i = 0; i < n_; ++i) insert(i);
  }

  void insert(int i) {
    const Vec2& q = p_[i];
    int tri = locate(q);
    std::array<double, 3> o;
    for (int k = 0; k < 3; ++k) o[k] = orient2d(p_[t_[tri][k]], p_[t_[tri][(k + 1) % 3]], q);
    int on_edge = -1, zeros = 0;
    for (int k = 0; k < 3; ++k) {
      const double len = (p_[t_[tri][(k + 1) % 3]] - p_[t_[tri][k]]).norm();
      if (std::abs(o[k]) <= tol_ * len) {
        on_edge = k;
        ++zeros;
      }
    }
    if (zeros >= 2) throw Error(ErrorKind::InvalidArgument, "duplicate point in triangulation");
    std::vector<std::pair<int, int>> stack;
    if (on_edge < 0) {
      split_triangle(tri, i, stack);
    } else {
      split_edge(tri, on_edge, i, stack);
    }
    legalize(stack);
  }

  /// Forces segment (a,b) into the triangulation by flipping crossing edges.
  void insert_constraint(int a, int b) {
    if (find_edge(a, b).first >= 0 || find_edge(b, a).first >= 0) return;
    std::deque<std::pair<int, int>> crossing = crossing_edges(a, b);
    const std::size_t limit = 1000 + 100 * crossing.size() * crossing.size();
    for (std::size_t iter = 0; !crossing.empty(); ++iter) {
      if (iter > limit) throw Error(ErrorKind::Internal, "constraint recovery did not terminate");
      auto [u, v] = crossing.front();
      crossing.pop_front();
      auto [tri, k] = find_edge(u, v);
      if (tri < 0) std::tie(tri, k) = find_edge(v, u);
      if (tri < 0) continue;  // already flipped away
      u = t_[tri][k];
      v = t_[tri][(k + 1) % 3];
      const int o = nb_[tri][k];
      const int x = t_[tri][(k + 2) % 3];
      const int y = opposite(o, u, v);
      if (!(orient2d(p_[x], p_[y], p_[u]) * orient2d(p_[x], p_[y], p_[v]) < 0.0) ||
          !(orient2d(p_[u], p_[v], p_[x]) * orient2d(p_[u], p_[v], p_[y]) < 0.0)) {
        crossing.emplace_back(u, v);  // non-convex quad, retry later
        continue;
      }
      flip(tri, k);
      if (x != a && x != b && y != a && y != b && segments_cross(a, b, x, y)) crossing.emplace_back(x, y);
    }
  }

  const std::vector<Tri>& triangles() const { return t_; }
  const std::vector<std::array<int, 3>>& neighbours() const { return nb_; }

  bool has_edge(int a, int b) const { return find_edge(a, b).first >= 0 || find_edge(b, a).first >= 0; }

  /// Triangles inside the constrained loops: parity of constraint crossings
  /// from the super triangle.
  std::vector<Tri> inside_triangles(const std::unordered_set<std::uint64_t>& constraints) const {
    const int nt = static_cast<int>(t_.size());
    std::vector<int> parity(nt, -1);
    std::deque<int> queue;
    for (int t = 0; t < nt; ++t) {
      if (touches_super(t)) {
        parity[t] = 0;
        queue.push_back(t);
        break;
      }
    }
    while (!queue.empty()) {
      const int t = queue.front();
      queue.pop_front();
      for (int k = 0; k < 3; ++k) {
        const int o = nb_[t][k];
        if (o < 0 || parity[o] >= 0) continue;
        const bool wall = constraints.count(edge_key(t_[t][k], t_[t][(k + 1) % 3])) > 0;
        parity[o] = wall ? 1 - parity[t] : parity[t];
        queue.push_back(o);
      }
    }
    std::vector<Tri> out;
    for (int t = 0; t < nt; ++t)
      if (parity[t] == 1 && !touches_super(t)) out.push_back(t_[t]);
    return out;
  }

 private:
  bool touches_super(int t) const { return t_[t][0] >= n_ || t_[t][1] >= n_ || t_[t][2] >= n_; }

  int locate(const Vec2& q) const {
    int tri = last_;
    const int limit = 4 * static_cast<int>(t_.size()) + 16;
    for (int step = 0; step < limit; ++step) {
      bool moved = false;
      for (int s = 0; s < 3; ++s) {
        const int k = (s + step) % 3;
        const double len = (p_[t_[tri][(k + 1) % 3]] - p_[t_[tri][k]]).norm();
        if (orient2d(p_[t_[tri][k]], p_[t_[tri][(k + 1) % 3]], q) < -tol_ * len && nb_[tri][k] >= 0) {
          tri = nb_[tri][k];
          moved = true;
          break;
        }
      }
      if (!moved) return tri;
    }
    // walk failed to settle; pick the triangle with the best worst orientation
    int best = 0;
    double best_o = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < static_cast<int>(t_.size()); ++t) {
      double m = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 3; ++k) {
        const double len = (p_[t_[t][(k + 1) % 3]] - p_[t_[t][k]]).norm();
        m = std::min(m, orient2d(p_[t_[t][k]], p_[t_[t][(k + 1) % 3]], q) / len);
      }
      if (m > best_o) {
        best_o = m;
        best = t;
      }
    }
    return best;
  }

  // points the link of `tri` across edge {u,v} at new_nb
  void set_nbr(int tri, int u, int v, int new_nb) {
    if (tri < 0) return;
    for (int k = 0; k < 3; ++k) {
      const int a = t_[tri][k], b = t_[tri][(k + 1) % 3];
      if ((a == u && b == v) || (a == v && b == u)) nb_[tri][k] = new_nb;
    }
  }

  int add_triangle(const Tri& f, const std::array<int, 3>& nb) {
    t_.push_back(f);
    nb_.push_back(nb);
    return static_cast<int>(t_.size()) - 1;
  }

  void touch(int tri) {
    for (int v : t_[tri]) vt_[v] = tri;
    last_ = tri;
  }

  // p lands at index 2 of every new triangle; edge 0 faces away from it
  void split_triangle(int tri, int q, std::vector<std::pair<int, int>>& stack) {
    const auto [a, b, c] = t_[tri];
    const auto [na, nb, nc] = nb_[tri];
    const int t0 = tri;
    const int t1 = static_cast<int>(t_.size());
    const int t2 = t1 + 1;
    t_[t0] = {a, b, q};
    nb_[t0] = {na, t1, t2};
    add_triangle({b, c, q}, {nb, t2, t0});
    add_triangle({c, a, q}, {nc, t0, t1});
    set_nbr(nb, b, c, t1);
    set_nbr(nc, c, a, t2);
    for (int t : {t0, t1, t2}) {
      touch(t);
      stack.emplace_back(t, 0);
    }
  }

  void split_edge(int tri, int k, int q, std::vector<std::pair<int, int>>& stack) {
    const int a = t_[tri][k], b = t_[tri][(k + 1) % 3], c = t_[tri][(k + 2) % 3];
    const int n_bc = nb_[tri][(k + 1) % 3], n_ca = nb_[tri][(k + 2) % 3];
    const int u = nb_[tri][k];
    if (u < 0) throw Error(ErrorKind::Internal, "point on the super triangle hull");
    int j = 0;
    while (!(t_[u][j] == b && t_[u][(j + 1) % 3] == a)) ++j;
    const int d = t_[u][(j + 2) % 3];
    const int n_ad = nb_[u][(j + 1) % 3], n_db = nb_[u][(j + 2) % 3];
    const int T0 = tri, T1 = u;
    const int U0 = static_cast<int>(t_.size()), U1 = U0 + 1;
    t_[T0] = {c, a, q};
    nb_[T0] = {n_ca, U1, -1};
    t_[T1] = {b, c, q};
    nb_[T1] = {n_bc, T0, U0};
    nb_[T0][2] = T1;
    add_triangle({d, b, q}, {n_db, T1, U1});
    add_triangle({a, d, q}, {n_ad, U0, T0});
    set_nbr(n_bc, b, c, T1);
    set_nbr(n_db, d, b, U0);
    set_nbr(n_ad, a, d, U1);
    for (int t : {T0, T1, U0, U1}) {
      touch(t);
      stack.emplace_back(t, 0);
    }
  }

  int opposite(int tri, int u, int v) const {
    for (int w : t_[tri])
      if (w != u && w != v) return w;
    return -1;
  }

  /// Replaces edge k of tri (u->v, apex x) and its twin (apex y) by x-y.
  /// tri becomes (x,u,y) and the twin (y,v,x).
  void flip(int tri, int k) {
    const int u = t_[tri][k], v = t_[tri][(k + 1) % 3], x = t_[tri][(k + 2) % 3];
    const int o = nb_[tri][k];
    int j = 0;
    while (!(t_[o][j] == v && t_[o][(j + 1) % 3] == u)) ++j;
    const int y = t_[o][(j + 2) % 3];
    const int n_xu = nb_[tri][(k + 2) % 3], n_vx = nb_[tri][(k + 1) % 3];
    const int n_uy = nb_[o][(j + 1) % 3], n_yv = nb_[o][(j + 2) % 3];
    t_[tri] = {x, u, y};
    nb_[tri] = {n_xu, n_uy, o};
    t_[o] = {y, v, x};
    nb_[o] = {n_yv, n_vx, tri};
    set_nbr(n_uy, u, y, tri);
    set_nbr(n_vx, v, x, o);
    touch(tri);
    touch(o);
  }

  void legalize(std::vector<std::pair<int, int>>& stack) {
    while (!stack.empty()) {
      auto [tri, k] = stack.back();
      stack.pop_back();
      const int o = nb_[tri][k];
      if (o < 0) continue;
      const int u = t_[tri][k], v = t_[tri][(k + 1) % 3], x = t_[tri][(k + 2) % 3];
      const int y = opposite(o, u, v);
      if (incircle(p_[u], p_[v], p_[x], p_[y]) <= 0.0) continue;
      // keep the quad convex so the flip stays valid
      if (!(orient2d(p_[x], p_[y], p_[u]) < 0.0 && orient2d(p_[x], p_[y], p_[v]) > 0.0)) continue;
      flip(tri, k);
      // x now sits at index 0 of tri and index 2 of o
      stack.emplace_back(tri, 1);
      stack.emplace_back(o, 0);
    }
  }

  /// (tri, k) with t_[tri][k] == a and t_[tri][k+1] == b, or (-1,-1).
  std::pair<int, int> find_edge(int a, int b) const {
    for (int tri : star(a)) {
      for (int k = 0; k < 3; ++k)
        if (t_[tri][k] == a && t_[tri][(k + 1) % 3] == b) return {tri, k};
    }
    return {-1, -1};
  }

  /// Triangles around vertex a (a is strictly inside the super triangle).
  std::vector<int> star(int a) const {
    std::vector<int> out;
    const int start = vt_[a];
    int tri = start;
    do {
      out.push_back(tri);
      int i = 0;
      while (t_[tri][i] != a) ++i;
      tri = nb_[tri][(i + 2) % 3];  // across edge (prev, a)
      if (tri < 0 || out.size() > t_.size()) break;
    } while (tri != start);
    return out;
  }

  bool segments_cross(int a, int b, int c, int d) const {
    const double o1 = orient2d(p_[a], p_[b], p_[c]), o2 = orient2d(p_[a], p_[b], p_[d]);
    const double o3 = orient2d(p_[c], p_[d], p_[a]), o4 = orient2d(p_[c], p_[d], p_[b]);
    return o1 * o2 < 0.0 && o3 * o4 < 0.0;
  }

  std::deque<std::pair<int, int>> crossing_edges(int a, int b) const {
    std::deque<std::pair<int, int>> out;
    // first triangle around a whose opposite edge is crossed by a->b
    int tri = -1, u = -1, v = -1;
    for (int t : star(a)) {
      int i = 0;
      while (t_[t][i] != a) ++i;
      const int p1 = t_[t][(i + 1) % 3], p2 = t_[t][(i + 2) % 3];
      if (segments_cross(a, b, p1, p2)) {
        tri = t;
        u = p1;
        v = p2;
        break;
      }
    }
    if (tri < 0) throw Error(ErrorKind::Internal, "constraint passes through a vertex");
    while (true) {
      out.emplace_back(u, v);
      // step across (u,v)
      int k = 0;
      while (!(t_[tri][k] == u && t_[tri][(k + 1) % 3] == v)) ++k;
      const int o = nb_[tri][k];
      const int w = opposite(o, u, v);
      if (w == b) break;
      tri = o;
      // o is (v,u,w) counter-clockwise; leave through u->w or w->v
      if (segments_cross(a, b, u, w)) {
        v = w;
      } else if (segments_cross(a, b, w, v)) {
        u = w;
      } else {
        throw Error(ErrorKind::Internal, "constraint passes through a vertex");
      }
    }
    return out;
  }

  std::vector<Vec2> p_;
  std::vector<Tri> t_;
  std::vector<std::array<int, 3>> nb_;
  std::vector<int> vt_;
  int n_ = 0;
  int last_ = 0;
  double scale_ = 1.0;
  double tol_ = 0.0;
};

}  // namespace detail

/// Constrained Delaunay triangulation of the region bounded by closed
/// polygons (counter-clockwise outer boundary, clockwise holes; only the
/// crossing parity matters). Returns counter-clockwise triangles over the
/// input point indices.
inline std::vector<Tri> triangulate_polygons(std::span<const Vec2> points,
                                             const std::vector<std::vector<int>>& loops) {
  detail::Lawson dt(points);
  dt.insert_all();
  std::unordered_set<std::uint64_t> constraints;
  for (const auto& loop : loops) {
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const int a = loop[i], b = loop[(i + 1) % loop.size()];
      dt.insert_constraint(a, b);
      constraints.insert(edge_key(a, b));
    }
  }
  return dt.inside_triangles(constraints);
}

}  // namespace reparam
