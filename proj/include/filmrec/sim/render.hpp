#pragma once

#include <cstdint>

#include "filmrec/core/raster.hpp"
#include "filmrec/sim/mesh.hpp"
#include "filmrec/sim/texture.hpp"

namespace filmrec::sim {

// Per-sample constants that undo the map encodings: raw camera-space
// position = m3d_lo + m3d * m3d_scale, raw z = depth *(depth_scale) +
// depth_zmin - depth_delta.
struct SampleMeta {
  uint64_t seed = 0;
  Vec3 m3d_lo{};
  Vec3 m3d_scale{1, 1, 1};
  double depth_zmin = 0;
  double depth_scale = 1;
  double depth_delta = 0;
  SceneConfig scene;
  TextureConfig texture;
};

struct Sample {
  Raster image;        // 3ch composite over the procedural background
  Raster m3d;          // 3ch camera position, bbox-normalized to [0,1]
  Raster normal;       // 3ch, encoded (n+1)/2
  Raster depth;        // 1ch, strictly positive on film
  Raster uv;           // 2ch texture coordinates
  Raster albedo;       // 1ch texture content without lighting
  Raster bgmask;       // 1ch in {0,1}
  Raster backward_gt;  // 2ch, texture space -> normalized screen position
  SampleMeta meta;
};

// Normalized screen position of every texture-space pixel, by barycentric
// evaluation over the uv-space lattice of the same mesh the renderer draws.
// Throws fold-detected when the projection is not injective.
Raster gt_backward(const ControlMesh& mesh, const SceneConfig& scene,
                   int bw_w, int bw_h);

// Rasterizes the mesh with perspective-correct interpolation and fills all
// eight ground-truth maps plus the shaded composite.
Sample render_sample(const Raster& tex, const ControlMesh& mesh,
                     const SceneConfig& scene);

}  // namespace filmrec::sim
