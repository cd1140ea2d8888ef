#pragma once

#include <cstdint>

#include "filmrec/core/raster.hpp"

namespace filmrec::sim {

// Grid-of-phantoms film texture layout. Output size is
// (grid_cols*cell_px + 2*border_px) x (grid_rows*cell_px + 2*border_px).
struct TextureConfig {
  int grid_cols = 4;
  int grid_rows = 4;
  int cell_px = 56;
  int border_px = 16;
  uint64_t seed = 0;
};

// Bright frame border, light separator lines between cells, and a seeded
// multi-ellipse phantom on a dark background in each cell.
Raster gen_texture(const TextureConfig& cfg);

}  // namespace filmrec::sim
