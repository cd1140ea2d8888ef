#pragma once

#include <array>
#include <vector>

#include "filmrec/core/raster.hpp"
#include "filmrec/core/vec.hpp"

namespace filmrec::estimator {

// Film boundary as 4 corners, clockwise in image coordinates starting from
// the top-left-most one, plus the 4 contour polylines between consecutive
// corners. edges[k] runs from corners[k] to corners[(k+1) % 4] and together
// they partition the full mask contour.
struct BoundaryQuad {
  std::array<Vec2, 4> corners;
  std::array<std::vector<Vec2>, 4> edges;
};

// Binary film mask from a plain photo: Otsu threshold on luminance, then
// the largest 8-connected component with its holes filled. Values {0,1}.
// Throws no-component-found when nothing exceeds the threshold.
Raster estimate_mask(const Raster& image);

// Contour of the mask reduced to its 4 dominant corners.
BoundaryQuad extract_quad(const Raster& mask);

// Inverse Coons-patch parameterization: every pixel inside the boundary
// polygon receives the (u, v) whose transfinite boundary blend lands on it.
// Solved per pixel by 2x2 Newton (<= 20 iterations, tol 1e-6 in parameter
// space) from a bilinear initialization; divergent pixels fall back to the
// bilinear quad inverse and their count is logged. Outside pixels stay 0.
Raster coons_uv(const BoundaryQuad& q, int out_w, int out_h);

// Retinex-style albedo: luminance divided by its mask-aware Gaussian local
// mean (sigma 15 px, normalized convolution), rescaled back to the masked
// luminance mean, clamped to [0,1]. Zero off the mask.
Raster deilluminate(const Raster& image, const Raster& mask);

struct StageTimings {
  double mask_s = 0, quad_s = 0, uv_s = 0, backward_s = 0, albedo_s = 0;
  double total_s = 0;
};

struct EstimatedMaps {
  Raster mask;      // 1ch {0,1}
  Raster uv;        // 2ch, zero where invalid
  Raster df;        // 2ch, uv minus normalized pixel coordinates
  Raster backward;  // 2ch, from merge_and_convert
  Raster albedo;    // 1ch
  StageTimings timings;
};

// Full non-learned pipeline: mask -> quad -> coons uv -> df -> merged
// backward map, plus the retinex albedo. Constituent errors are rethrown
// with the failing stage prefixed.
EstimatedMaps estimate_pipeline(const Raster& image);

}  // namespace filmrec::estimator
