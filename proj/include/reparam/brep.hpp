#pragma once

#include <array>
#include <vector>

namespace reparam {

/// Model corner; `vertex` indexes the triangulation the BRep was built on.
struct BRepPoint {
  int vertex = -1;
};

/// Polyline through triangulation vertices. Closed curves do not repeat
/// their first vertex and have no end points.
struct BRepCurve {
  std::vector<int> vertices;
  bool closed = false;
  std::array<int, 2> points{-1, -1};
  std::vector<int> faces;  // one (model boundary) or two entries, ascending
  bool feature = false;    // every edge was tagged by the dihedral detector
};

/// Reference to a curve inside a face loop; `reversed` means the face
/// traverses the curve against its stored vertex order.
struct OrientedCurve {
  int curve = -1;
  bool reversed = false;
};

struct BRepFace {
  std::vector<std::vector<OrientedCurve>> loops;
};

/// Boundary representation of an atlas: faces are patches (their triangles
/// carry the face id as patch tag), curves are the patch boundaries split at
/// corners.
struct BRep {
  std::vector<BRepPoint> points;
  std::vector<BRepCurve> curves;
  std::vector<BRepFace> faces;

  int num_points() const { return static_cast<int>(points.size()); }
  int num_curves() const { return static_cast<int>(curves.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
};

}  // namespace reparam
