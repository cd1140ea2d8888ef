#pragma once

#include <vector>

#include "filmrec/core/raster.hpp"
#include "filmrec/core/vec.hpp"
#include "filmrec/maptrans/delaunay.hpp"

namespace filmrec::maptrans {

// One interpolation site: pos in target pixel-index coordinates (integer =
// pixel center), value an arbitrary 2-vector.
struct ScatterPoint {
  Vec2 pos;
  Vec2 value;
};

struct ScatterSet {
  std::vector<ScatterPoint> points;
};

// Piecewise-linear interpolant over the Delaunay triangulation of the sites:
// barycentric inside the hull, nearest site outside, exact at sites. When
// several sites share a position the one with the smallest index wins.
class ScatterInterpolant {
 public:
  explicit ScatterInterpolant(const ScatterSet& s);

  Vec2 eval(double x, double y) const;

  const Delaunay& triangulation() const { return tri_; }

 private:
  int cell_x(double x) const;
  int cell_y(double y) const;
  Vec2 nearest_value(double x, double y) const;

  Delaunay tri_;
  std::vector<Vec2> values_;
  double x0_ = 0, y0_ = 0;
  double cell_w_ = 1, cell_h_ = 1;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> tri_in_cell_;
  std::vector<std::vector<int>> site_in_cell_;
};

// Dense evaluation at the pixel centers of an out_w x out_h 2-channel raster.
Raster scattered_interpolate(const ScatterSet& s, int out_w, int out_h);

namespace ref {
Raster scattered_interpolate(const ScatterSet& s, int out_w, int out_h);
}

}  // namespace filmrec::maptrans
