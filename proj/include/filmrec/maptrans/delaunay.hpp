#pragma once

#include <span>
#include <vector>

#include "filmrec/core/vec.hpp"

namespace filmrec::maptrans {

struct Triangle {
  int v[3];  // vertex indices, counter-clockwise
};

// Delaunay triangulation by incremental insertion with Lawson edge flips.
// Built around a bounding super-triangle; flips are orientation-guarded so
// the mesh stays a valid triangulation even when an incircle test lands on
// a tie (regular lattices produce many exactly-cocircular quadruples).
class Delaunay {
 public:
  // Throws degenerate-geometry when fewer than 3 distinct points remain
  // after deduplication or when all of them are collinear.
  explicit Delaunay(std::span<const Vec2> points);

  const std::vector<Vec2>& points() const { return points_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }

  // Maps each input point to the smallest input index among its coincident
  // group; differs from the identity only for duplicates.
  const std::vector<int>& representative() const { return representative_; }

 private:
  std::vector<Vec2> points_;
  std::vector<Triangle> triangles_;
  std::vector<int> representative_;
};

}  // namespace filmrec::maptrans
