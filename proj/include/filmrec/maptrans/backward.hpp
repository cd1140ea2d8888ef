#pragma once

#include "filmrec/core/raster.hpp"
#include "filmrec/maptrans/scatter.hpp"

namespace filmrec::maptrans {

// Triangulating much beyond this point count buys no accuracy at 256².
inline constexpr int kMaxScatterSites = 20000;

// Scatter sites for the UV -> backward role swap: one site per valid film
// pixel (mask >= 0.5 and nonzero uv), position = the uv value denormalized
// into target pixel space, value = the pixel's own normalized coordinates.
// Uniformly subsampled above kMaxScatterSites. Throws too-few-points when
// fewer than 3 pixels qualify.
ScatterSet backward_sites(const Raster& uv, const Raster& mask, int out_w,
                          int out_h);

// Dense backward map interpolated from backward_sites.
Raster uv_to_backward(const Raster& uv, const Raster& mask, int out_w,
                      int out_h);

// uv(x, y) = normalized(x, y) + df(x, y) on the mask, 0 elsewhere.
Raster uv_from_deformation(const Raster& df, const Raster& mask);

// Exactly 16 boundary sites (4 contour corners plus the 3 arc-length
// quarter points of each edge) carrying uv_aug values, role-swapped into
// backward space like backward_sites.
ScatterSet boundary_points(const Raster& uv_aug, const Raster& mask,
                           int out_w, int out_h);

// Backward map from the union of the dense UV sites and the 16 df-derived
// boundary sites; the latter only fill coverage the former lacks.
Raster merge_and_convert(const Raster& uv, const Raster& df,
                         const Raster& mask, int out_w, int out_h);

// Dewarp: out(p) = src read bilinearly at b(p) denormalized into source
// pixel coordinates; reads outside the source clamp to its edge.
Raster apply_backward(const Raster& b, const Raster& src);

// pred minus the masked mean of (pred - gt), per channel. The output has
// zero mean residual against gt over the mask.
Raster deshift(const Raster& pred, const Raster& gt, const Raster& mask);

namespace ref {
Raster apply_backward(const Raster& b, const Raster& src);
}

}  // namespace filmrec::maptrans
