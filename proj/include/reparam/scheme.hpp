#pragma once

#include "reparam/core.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace reparam {

/// Difference scheme used to compute a discrete harmonic-like map.
enum class Scheme {
  Mvc,  // mean value coordinates, positive weights
  Fem,  // P1 Galerkin cotangent weights
};

inline const char* to_string(Scheme s) { return s == Scheme::Mvc ? "mvc" : "fem"; }

inline Scheme parse_scheme(std::string_view name) {
  if (name == "mvc") return Scheme::Mvc;
  if (name == "fem") return Scheme::Fem;
  throw Error(ErrorKind::InvalidArgument, "unknown scheme '" + std::string(name) + "'");
}

/// Corner angles outside [kMinAngle, pi - kMinAngle] are clamped during
/// assembly.
inline constexpr double kMinAngle = 1e-12;

namespace detail {

inline void require_open_angle(double theta) {
  if (!(theta > 0.0 && theta < kPi))
    throw Error(ErrorKind::InvalidArgument, "angle outside (0, pi): " + std::to_string(theta));
}

}  // namespace detail

/// One triangle's share of the MVC coefficient of edge (i,j): the corner
/// angle at i adjacent to the edge, divided by the edge length.
inline double mvc_half_weight(double theta, double length) {
  detail::require_open_angle(theta);
  if (!(length > 0.0)) throw Error(ErrorKind::InvalidArgument, "non-positive edge length");
  return std::tan(0.5 * theta) / length;
}

/// Mean value coefficient (tan(theta_k/2) + tan(theta_l/2)) / l_ij.
/// theta_k and theta_l are the angles at i between edge (i,j) and the
/// neighbouring edges of the two triangles sharing (i,j).
inline double mvc_weight(double theta_k, double theta_l, double length) {
  return mvc_half_weight(theta_k, length) + mvc_half_weight(theta_l, length);
}

/// Cotangent coefficient 1/2 (cot theta_k + cot theta_l), theta_k and
/// theta_l being the angles opposite to edge (i,j). Negative for obtuse
/// pairs.
inline double fem_weight(double theta_k, double theta_l) {
  detail::require_open_angle(theta_k);
  detail::require_open_angle(theta_l);
  return 0.5 * (std::cos(theta_k) / std::sin(theta_k) + std::cos(theta_l) / std::sin(theta_l));
}

/// Interior angle at `a` of triangle (a,b,c) via atan2(|u x v|, u.v).
template <class P>
double corner_angle(const P& a, const P& b, const P& c) {
  const P u = b - a;
  const P v = c - a;
  double cross;
  if constexpr (P::RowsAtCompileTime == 2) {
    cross = std::abs(u.x() * v.y() - u.y() * v.x());
  } else {
    cross = u.cross(v).norm();
  }
  return std::atan2(cross, u.dot(v));
}

struct Coupling {
  int node = -1;
  double weight = 0.0;
};

/// Directed edge coefficients lambda_ij, one row per vertex. Row i lists
/// its neighbours j in ascending order; contributions are summed in
/// triangle order so assembly is bit-reproducible.
struct Stencil {
  Scheme scheme = Scheme::Mvc;
  std::vector<std::vector<Coupling>> rows;
  int clamped_angles = 0;

  double weight(int i, int j) const {
    const auto& row = rows[i];
    auto it = std::lower_bound(row.begin(), row.end(), j, [](const Coupling& c, int n) { return c.node < n; });
    return it != row.end() && it->node == j ? it->weight : 0.0;
  }

  double row_sum(int i) const {
    double s = 0.0;
    for (const Coupling& c : rows[i]) s += c.weight;
    return s;
  }
};

namespace detail {

inline double clamp_angle(double theta, int& clamped) {
  if (theta < kMinAngle) {
    ++clamped;
    return kMinAngle;
  }
  if (theta > kPi - kMinAngle) {
    ++clamped;
    return kPi - kMinAngle;
  }
  return theta;
}

inline void finalize_rows(std::vector<std::vector<Coupling>>& rows) {
  for (auto& row : rows) {
    std::stable_sort(row.begin(), row.end(), [](const Coupling& a, const Coupling& b) { return a.node < b.node; });
    std::vector<Coupling> merged;
    for (const Coupling& c : row) {
      if (!merged.empty() && merged.back().node == c.node)
        merged.back().weight += c.weight;
      else
        merged.push_back(c);
    }
    row = std::move(merged);
  }
}

}  // namespace detail

/// Accumulates the per-triangle contributions of `scheme` for every vertex
/// of a triangulation embedded in R^2 or R^3.
template <class P>
Stencil assemble_stencil(std::span<const P> points, std::span<const Tri> triangles, Scheme scheme) {
  Stencil st;
  st.scheme = scheme;
  st.rows.assign(points.size(), {});
  for (const Tri& f : triangles) {
    double len[3];  // len[k]: edge from corner k to corner k+1
    double ang[3];  // ang[k]: angle at corner k
    for (int k = 0; k < 3; ++k) {
      len[k] = (points[f[(k + 1) % 3]] - points[f[k]]).norm();
      if (!(len[k] > 0.0)) throw Error(ErrorKind::InvalidMesh, "zero-length edge in stencil assembly");
    }
    for (int k = 0; k < 3; ++k)
      ang[k] = detail::clamp_angle(corner_angle(points[f[k]], points[f[(k + 1) % 3]], points[f[(k + 2) % 3]]),
                                   st.clamped_angles);
    for (int k = 0; k < 3; ++k) {
      const int i = f[k], j = f[(k + 1) % 3], m = f[(k + 2) % 3];
      if (scheme == Scheme::Mvc) {
        // at corner i: edges (i,j) and (i,m) share the angle ang[k]
        const double t = std::tan(0.5 * ang[k]);
        st.rows[i].push_back({j, t / len[k]});
        st.rows[i].push_back({m, t / len[(k + 2) % 3]});
      } else {
        // edge (i,j) is opposite corner m
        const double c = 0.5 * std::cos(ang[(k + 2) % 3]) / std::sin(ang[(k + 2) % 3]);
        st.rows[i].push_back({j, c});
        st.rows[j].push_back({i, c});
      }
    }
  }
  detail::finalize_rows(st.rows);
  return st;
}

}  // namespace reparam
