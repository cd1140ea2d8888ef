#pragma once

#include <array>
#include <vector>

#include "filmrec/core/raster.hpp"
#include "filmrec/core/vec.hpp"

namespace filmrec::maptrans {

// Ordered outer boundary of the largest connected foreground region
// (mask >= 0.5, 8-connected), in pixel-index coordinates. Throws empty-mask
// when nothing is set.
std::vector<Vec2> trace_largest_contour(const Raster& mask);

// Indices of the 4 dominant contour vertices, ascending in contour order:
// farthest pair first, then twice the arc point with maximum perpendicular
// deviation from its chord. Throws corner-detection-failed when the contour
// is too short or the residual deviation says the shape has no 4 corners.
std::array<int, 4> dominant_quad_corners(const std::vector<Vec2>& contour);

}  // namespace filmrec::maptrans
