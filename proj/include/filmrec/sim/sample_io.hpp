#pragma once

#include <filesystem>

#include "filmrec/sim/render.hpp"

namespace filmrec::sim {

// On-disk sample layout inside `dir`: image.png, {m3d,normal,depth,uv,
// albedo,bgmask,backward}.fmap, meta.json. The optional mesh is recorded in
// meta.json for inspection but is not needed to read the sample back.
void write_sample(const std::filesystem::path& dir, const Sample& s,
                  const ControlMesh* mesh = nullptr);

Sample read_sample(const std::filesystem::path& dir);

}  // namespace filmrec::sim
