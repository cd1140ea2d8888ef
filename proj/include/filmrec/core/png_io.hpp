#pragma once

#include <filesystem>

#include "filmrec/core/raster.hpp"

namespace filmrec {

// 8-bit PNG, grayscale or RGB. Samples are expected in [0,1] and quantized
// round-half-up; reading maps byte v back to v/255.
void image_write_png(const Raster& r, const std::filesystem::path& path);
Raster image_read_png(const std::filesystem::path& path);

}  // namespace filmrec
