#pragma once

#include "reparam/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace reparam {

struct UVLocation {
  int triangle = -1;
  std::array<double, 3> bary{};  // sums to one
};

/// Point-in-triangle queries over a planar triangulation using a uniform
/// bucket grid.
class UVLocator {
 public:
  static constexpr double kTolerance = 1e-9;

  UVLocator() = default;

  UVLocator(std::span<const Vec2> points, std::span<const Tri> triangles)
      : points_(points.begin(), points.end()), triangles_(triangles.begin(), triangles.end()) {
    if (triangles_.empty()) return;
    lo_ = hi_ = points_[triangles_[0][0]];
    for (const Tri& f : triangles_)
      for (int v : f) {
        lo_ = lo_.cwiseMin(points_[v]);
        hi_ = hi_.cwiseMax(points_[v]);
      }
    const Vec2 ext = hi_ - lo_;
    scale_ = std::max({ext.x(), ext.y(), 1e-300});
    const double cells = std::max(1.0, std::sqrt(static_cast<double>(triangles_.size())));
    nx_ = std::max(1, static_cast<int>(std::ceil(cells * ext.x() / scale_)));
    ny_ = std::max(1, static_cast<int>(std::ceil(cells * ext.y() / scale_)));
    cell_ = Vec2(std::max(ext.x(), 1e-300) / nx_, std::max(ext.y(), 1e-300) / ny_);
    std::vector<std::vector<int>> buckets(static_cast<std::size_t>(nx_) * ny_);
    for (int t = 0; t < static_cast<int>(triangles_.size()); ++t) {
      Vec2 a = points_[triangles_[t][0]], b = a;
      for (int v : triangles_[t]) {
        a = a.cwiseMin(points_[v]);
        b = b.cwiseMax(points_[v]);
      }
      const auto [i0, j0] = cell_of(a);
      const auto [i1, j1] = cell_of(b);
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) buckets[j * nx_ + i].push_back(t);
    }
    offsets_.assign(buckets.size() + 1, 0);
    for (std::size_t c = 0; c < buckets.size(); ++c) offsets_[c + 1] = offsets_[c] + static_cast<int>(buckets[c].size());
    items_.reserve(offsets_.back());
    for (const auto& b : buckets) items_.insert(items_.end(), b.begin(), b.end());
  }

  int num_triangles() const { return static_cast<int>(triangles_.size()); }

  /// Barycentric coordinates of p in triangle t (unclamped).
  std::array<double, 3> barycentric(int t, const Vec2& p) const {
    const Tri& f = triangles_[t];
    const Vec2 &a = points_[f[0]], &b = points_[f[1]], &c = points_[f[2]];
    const double total = orient(a, b, c);
    return {orient(p, b, c) / total, orient(a, p, c) / total, orient(a, b, p) / total};
  }

  /// Containing triangle within the barycentric tolerance; among several
  /// candidates the one with the largest minimum coordinate wins, then the
  /// lowest id. Falls back to the nearest triangle when p is within the
  /// tolerance of the domain boundary.
  std::optional<UVLocation> locate(const Vec2& p) const {
    if (triangles_.empty()) return std::nullopt;
    UVLocation best;
    double best_min = -std::numeric_limits<double>::infinity();
    if (in_grid(p)) {
      const auto [i, j] = cell_of(p);
      const int c = j * nx_ + i;
      for (int k = offsets_[c]; k < offsets_[c + 1]; ++k) {
        const int t = items_[k];
        const auto l = barycentric(t, p);
        const double m = std::min({l[0], l[1], l[2]});
        if (m > best_min || (m == best_min && t < best.triangle)) {
          best_min = m;
          best = {t, l};
        }
      }
    }
    if (best.triangle >= 0 && best_min >= -kTolerance) return normalized(best);
    auto near = nearest(p);
    if (near && near->second <= kTolerance * scale_) return near->first;
    return std::nullopt;
  }

  /// Nearest triangle and the distance to it, with clamped barycentrics.
  std::optional<std::pair<UVLocation, double>> nearest(const Vec2& p) const {
    if (triangles_.empty()) return std::nullopt;
    const auto [ci, cj] = cell_of(p);
    double best_d = std::numeric_limits<double>::infinity();
    UVLocation best;
    const int maxr = std::max(nx_, ny_);
    for (int r = 0; r <= maxr; ++r) {
      for (int j = cj - r; j <= cj + r; ++j) {
        for (int i = ci - r; i <= ci + r; ++i) {
          if (std::max(std::abs(i - ci), std::abs(j - cj)) != r) continue;
          if (i < 0 || j < 0 || i >= nx_ || j >= ny_) continue;
          const int c = j * nx_ + i;
          for (int k = offsets_[c]; k < offsets_[c + 1]; ++k) {
            const int t = items_[k];
            auto [q, l] = closest_point(t, p);
            const double d = (q - p).norm();
            if (d < best_d || (d == best_d && t < best.triangle)) {
              best_d = d;
              best = {t, l};
            }
          }
        }
      }
      // ring r covers everything closer than r cell widths
      if (best.triangle >= 0 && best_d <= r * std::min(cell_.x(), cell_.y())) break;
    }
    if (best.triangle < 0) return std::nullopt;
    return std::make_pair(best, best_d);
  }

 private:
  static double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  }

  static UVLocation normalized(UVLocation loc) {
    double s = 0.0;
    for (double& l : loc.bary) {
      l = std::max(l, 0.0);
      s += l;
    }
    for (double& l : loc.bary) l /= s;
    return loc;
  }

  bool in_grid(const Vec2& p) const {
    const double pad = kTolerance * scale_;
    return p.x() >= lo_.x() - pad && p.y() >= lo_.y() - pad && p.x() <= hi_.x() + pad && p.y() <= hi_.y() + pad;
  }

  std::pair<int, int> cell_of(const Vec2& p) const {
    const int i = static_cast<int>(std::floor((p.x() - lo_.x()) / cell_.x()));
    const int j = static_cast<int>(std::floor((p.y() - lo_.y()) / cell_.y()));
    return {std::clamp(i, 0, nx_ - 1), std::clamp(j, 0, ny_ - 1)};
  }

  std::pair<Vec2, std::array<double, 3>> closest_point(int t, const Vec2& p) const {
    const auto l = barycentric(t, p);
    if (l[0] >= 0.0 && l[1] >= 0.0 && l[2] >= 0.0) return {p, l};
    const Tri& f = triangles_[t];
    Vec2 best_q;
    std::array<double, 3> best_l{};
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      const Vec2& a = points_[f[k]];
      const Vec2& b = points_[f[(k + 1) % 3]];
      const Vec2 ab = b - a;
      const double len2 = ab.squaredNorm();
      const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
      const Vec2 q = a + s * ab;
      const double d = (q - p).squaredNorm();
      if (d < best) {
        best = d;
        best_q = q;
        best_l = {0.0, 0.0, 0.0};
        best_l[k] = 1.0 - s;
        best_l[(k + 1) % 3] = s;
      }
    }
    return {best_q, best_l};
  }

  std::vector<Vec2> points_;
  std::vector<Tri> triangles_;
  Vec2 lo_ = Vec2::Zero(), hi_ = Vec2::Zero(), cell_ = Vec2::Ones();
  double scale_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<int> offsets_;
  std::vector<int> items_;
};

}  // namespace reparam
