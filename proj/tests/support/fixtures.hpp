#pragma once

// Generated fixture suites shared by the tests and the acceptance binary.

#include "shapes.hpp"

#include <reparam/patch.hpp>
#include <reparam/planar.hpp>

#include <numeric>
#include <random>
#include <string>

namespace reparam::fixtures {

struct Fixture {
  std::string name;
  Triangulation mesh;
};

inline Patch whole_patch(const Triangulation& tri) {
  std::vector<int> ids(tri.num_triangles());
  std::iota(ids.begin(), ids.end(), 0);
  return make_patch(tri, ids);
}

inline Triangulation transformed(Triangulation t, const std::function<Vec3(const Vec3&)>& f) {
  for (Vec3& v : t.vertices) v = f(v);
  return t;
}

inline Triangulation scaled(Triangulation t, double sx, double sy, double sz = 1.0) {
  return transformed(std::move(t), [&](const Vec3& v) { return Vec3(sx * v.x(), sy * v.y(), sz * v.z()); });
}

/// Single triangle.
inline Triangulation triangle() {
  Triangulation t;
  t.vertices = {{0, 0, 0}, {1, 0, 0}, {0.3, 0.8, 0}};
  t.triangles = {{0, 1, 2}};
  return t;
}

/// Random star-shaped polygon with `nb` boundary vertices (radius varying
/// by up to `wobble`) and up to `ni` interior points, triangulated by the
/// constrained Delaunay code. Concave for large wobble.
inline Triangulation star_disk(std::uint32_t seed, int nb, int ni, double wobble) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vec2> pts;
  std::vector<double> radius(nb);
  for (int k = 0; k < nb; ++k) {
    radius[k] = 1.0 - wobble * unit(rng);
    const double a = 2.0 * kPi * k / nb;
    pts.emplace_back(radius[k] * std::cos(a), radius[k] * std::sin(a));
  }
  auto boundary_radius = [&](double a) {
    const double s = a / (2.0 * kPi) * nb;
    const int k = static_cast<int>(std::floor(s)) % nb;
    const double w = s - std::floor(s);
    return (1.0 - w) * radius[k] + w * radius[(k + 1) % nb];
  };
  for (int i = 0; i < ni; ++i) {
    const double a = 2.0 * kPi * unit(rng);
    const double r = std::sqrt(unit(rng)) * 0.85 * boundary_radius(a) * std::cos(kPi / nb);
    pts.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  std::vector<int> loop(nb);
  std::iota(loop.begin(), loop.end(), 0);
  Triangulation t;
  t.triangles = triangulate_polygons(pts, {loop});
  for (const Vec2& p : pts) t.vertices.emplace_back(p.x(), p.y(), 0.0);
  shapes::compact(t);
  return t;
}

/// Icosphere vertices above the plane z = z0, as a cap.
inline Triangulation sphere_cap(int level, double z0) {
  Triangulation s = shapes::icosphere(level);
  Triangulation t;
  t.vertices = s.vertices;
  for (const Tri& f : s.triangles) {
    const double zc = (s.vertices[f[0]].z() + s.vertices[f[1]].z() + s.vertices[f[2]].z()) / 3.0;
    if (zc > z0) t.triangles.push_back(f);
  }
  shapes::compact(t);
  return t;
}

inline std::function<bool(int, int)> all_cells() {
  return [](int, int) { return true; };
}

/// Disk-topology and holed fixtures for the parametrization suites: flat
/// and lifted grids, concave outlines, holes, high-aspect strips, cylinder
/// shells, sphere caps and random star-shaped polygons.
inline std::vector<Fixture> disk_suite() {
  std::vector<Fixture> out;
  auto add = [&](std::string name, Triangulation mesh) { out.push_back({std::move(name), std::move(mesh)}); };
  add("triangle", triangle());
  add("unit_square", shapes::unit_square());
  add("hexagon_fan", shapes::hexagon_fan());
  for (int n = 2; n <= 7; ++n) add("grid_" + std::to_string(n), shapes::grid_plate(n, n, all_cells()));

  // high-aspect strips
  add("strip_20x1", scaled(shapes::grid_plate(20, 1, all_cells()), 20.0, 1.0));
  add("strip_40x1", scaled(shapes::grid_plate(40, 1, all_cells()), 40.0, 1.0));
  add("strip_60x2", scaled(shapes::grid_plate(60, 2, all_cells()), 30.0, 1.0));
  add("strip_100x3_thin", scaled(shapes::grid_plate(100, 3, all_cells()), 100.0, 0.5));

  // concave outlines
  add("l_shape", shapes::grid_plate(8, 8, [](int i, int j) { return i < 3 || j < 3; }));
  add("u_shape", shapes::grid_plate(9, 9, [](int i, int j) { return !(i >= 3 && i < 6 && j >= 3); }));
  add("cross", shapes::grid_plate(9, 9, [](int i, int j) { return (i >= 3 && i < 6) || (j >= 3 && j < 6); }));
  add("comb", shapes::grid_plate(11, 8, [](int i, int j) { return j < 2 || i % 2 == 0; }));
  add("zigzag", shapes::grid_plate(12, 12, [](int i, int j) {
        const int band = j / 3;
        return band % 2 == 0 ? i < 9 : i >= 3;
      }));
  add("spiral", shapes::grid_plate(9, 9, [](int i, int j) {
        return j == 0 || i == 8 || j == 8 || (i == 0 && j >= 2) || (j == 2 && i >= 0 && i <= 6) ||
               (i == 6 && j >= 2 && j <= 6) || (j == 6 && i >= 2 && i <= 6) || (i == 2 && j >= 4 && j <= 6);
      }));

  // lifted surfaces
  add("paraboloid", shapes::grid_plate(10, 10, all_cells(),
                                       [](double x, double y) { return (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5); }));
  add("saddle", shapes::grid_plate(10, 10, all_cells(), [](double x, double y) { return (x - 0.5) * (y - 0.5); }));
  add("sine_bump", shapes::grid_plate(12, 12, all_cells(), [](double x, double y) {
        return 0.2 * std::sin(2.0 * kPi * x) * std::sin(2.0 * kPi * y);
      }));
  add("lifted_l", shapes::grid_plate(8, 8, [](int i, int j) { return i < 3 || j < 3; },
                                     [](double x, double y) { return 0.3 * x * y; }));
  add("rolled_sheet", transformed(shapes::grid_plate(16, 4, all_cells()), [](const Vec3& v) {
        const double a = 1.5 * kPi * v.x();
        return Vec3(std::cos(a), std::sin(a), v.y());
      }));

  // holes
  add("square_hole", shapes::square_hole_plate());
  add("concave_hole", shapes::concave_hole_plate());
  add("ring", shapes::grid_plate(10, 10, [](int i, int j) { return !(i >= 3 && i < 7 && j >= 3 && j < 7); }));
  add("two_holes", shapes::grid_plate(13, 7, [](int i, int j) {
        return !((j >= 2 && j < 5) && ((i >= 2 && i < 5) || (i >= 8 && i < 11)));
      }));
  add("cylinder_shell", shapes::cylinder_shell());
  add("cylinder_12x4", shapes::cylinder_shell(12, 4));
  add("cylinder_32x3_tall", shapes::cylinder_shell(32, 3, 1.0, 6.0));

  // caps
  add("hemisphere", sphere_cap(2, -0.05));
  add("polar_cap", sphere_cap(3, 0.5));

  // random star-shaped polygons, increasingly concave, some lifted
  for (std::uint32_t s = 1; s <= 20; ++s) {
    const int nb = 12 + static_cast<int>(s % 5) * 6;
    const int ni = 10 + static_cast<int>(s) * 7;
    const double wobble = 0.1 + 0.03 * s;
    Triangulation t = star_disk(s, nb, ni, wobble);
    if (s % 3 == 0)
      t = transformed(std::move(t), [](const Vec3& v) { return Vec3(v.x(), v.y(), 0.25 * (v.x() * v.x() - v.y() * v.y())); });
    add("star_" + std::to_string(s), std::move(t));
  }
  return out;
}

inline Triangulation by_name(const std::string& name) {
  for (Fixture& f : disk_suite())
    if (f.name == name) return std::move(f.mesh);
  throw Error(ErrorKind::InvalidArgument, "no fixture named " + name);
}

}  // namespace reparam::fixtures
