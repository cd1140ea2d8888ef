#pragma once

#include <filesystem>

#include "filmrec/core/raster.hpp"

namespace filmrec {

// FMAP: the on-disk map format. Little-endian layout:
//   bytes  0..3   magic "FMAP"
//   bytes  4..7   version   u32 = 1
//   bytes  8..11  width     u32
//   bytes 12..15  height    u32
//   bytes 16..19  channels  u32
//   bytes 20..23  reserved  u32 = 0
//   then width*height*channels IEEE-754 binary32 samples, row-major,
//   channel-interleaved. Round-trips are bit-exact.
void fmap_write(const Raster& r, const std::filesystem::path& path);
Raster fmap_read(const std::filesystem::path& path);

}  // namespace filmrec
