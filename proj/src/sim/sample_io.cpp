#include "filmrec/sim/sample_io.hpp"

#include <fstream>

#include "json.hpp"

#include "filmrec/core/error.hpp"
#include "filmrec/core/fmap.hpp"
#include "filmrec/core/png_io.hpp"

namespace filmrec::sim {

namespace {

using nlohmann::json;

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json scene_json(const SceneConfig& s) {
  return {{"out_w", s.out_w},
          {"out_h", s.out_h},
          {"camera_f", s.camera_f},
          {"fill", s.fill},
          {"film_aspect", s.film_aspect},
          {"tilt_deg_max", s.tilt_deg_max},
          {"light_dir", vec3_json(s.light_dir)},
          {"ambient", s.ambient},
          {"diffuse", s.diffuse},
          {"tint", vec3_json(s.tint)},
          {"background_seed", s.background_seed},
          {"deform_modes", s.deform_modes},
          {"deform_amp", s.deform_amp},
          {"mesh_nx", s.mesh_nx},
          {"mesh_ny", s.mesh_ny}};
}

SceneConfig scene_from(const json& j) {
  SceneConfig s;
  s.out_w = j.at("out_w").get<int>();
  s.out_h = j.at("out_h").get<int>();
  s.camera_f = j.at("camera_f").get<double>();
  s.fill = j.at("fill").get<double>();
  s.film_aspect = j.at("film_aspect").get<double>();
  s.tilt_deg_max = j.at("tilt_deg_max").get<double>();
  s.light_dir = vec3_from(j.at("light_dir"));
  s.ambient = j.at("ambient").get<double>();
  s.diffuse = j.at("diffuse").get<double>();
  s.tint = vec3_from(j.at("tint"));
  s.background_seed = j.at("background_seed").get<uint64_t>();
  s.deform_modes = j.at("deform_modes").get<int>();
  s.deform_amp = j.at("deform_amp").get<double>();
  s.mesh_nx = j.at("mesh_nx").get<int>();
  s.mesh_ny = j.at("mesh_ny").get<int>();
  return s;
}

json texture_json(const TextureConfig& t) {
  return {{"grid_cols", t.grid_cols},
          {"grid_rows", t.grid_rows},
          {"cell_px", t.cell_px},
          {"border_px", t.border_px},
          {"seed", t.seed}};
}

TextureConfig texture_from(const json& j) {
  TextureConfig t;
  t.grid_cols = j.at("grid_cols").get<int>();
  t.grid_rows = j.at("grid_rows").get<int>();
  t.cell_px = j.at("cell_px").get<int>();
  t.border_px = j.at("border_px").get<int>();
  t.seed = j.at("seed").get<uint64_t>();
  return t;
}

}  // namespace

void write_sample(const std::filesystem::path& dir, const Sample& s,
                  const ControlMesh* mesh) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) raise(Errc::io, "cannot create " + dir.string());

  image_write_png(s.image, dir / "image.png");
  fmap_write(s.m3d, dir / "m3d.fmap");
  fmap_write(s.normal, dir / "normal.fmap");
  fmap_write(s.depth, dir / "depth.fmap");
  fmap_write(s.uv, dir / "uv.fmap");
  fmap_write(s.albedo, dir / "albedo.fmap");
  fmap_write(s.bgmask, dir / "bgmask.fmap");
  fmap_write(s.backward_gt, dir / "backward.fmap");

  json meta{{"seed", s.meta.seed},
            {"scene", scene_json(s.meta.scene)},
            {"texture", texture_json(s.meta.texture)},
            {"m3d_lo", vec3_json(s.meta.m3d_lo)},
            {"m3d_scale", vec3_json(s.meta.m3d_scale)},
            {"depth_zmin", s.meta.depth_zmin},
            {"depth_scale", s.meta.depth_scale},
            {"depth_delta", s.meta.depth_delta}};
  if (mesh != nullptr) {
    json verts = json::array();
    for (const auto& v : mesh->vertices) verts.push_back(vec3_json(v));
    meta["mesh"] = {{"nx", mesh->nx}, {"ny", mesh->ny}, {"vertices", verts}};
  }

  std::ofstream f(dir / "meta.json");
  f << meta.dump(2) << "\n";
  if (!f) raise(Errc::io, "cannot write " + (dir / "meta.json").string());
}

Sample read_sample(const std::filesystem::path& dir) {
  Sample s;
  s.image = image_read_png(dir / "image.png");
  s.m3d = fmap_read(dir / "m3d.fmap");
  s.normal = fmap_read(dir / "normal.fmap");
  s.depth = fmap_read(dir / "depth.fmap");
  s.uv = fmap_read(dir / "uv.fmap");
  s.albedo = fmap_read(dir / "albedo.fmap");
  s.bgmask = fmap_read(dir / "bgmask.fmap");
  s.backward_gt = fmap_read(dir / "backward.fmap");

  std::ifstream f(dir / "meta.json");
  if (!f) raise(Errc::io, "cannot read " + (dir / "meta.json").string());
  json meta;
  try {
    f >> meta;
    s.meta.seed = meta.at("seed").get<uint64_t>();
    s.meta.scene = scene_from(meta.at("scene"));
    s.meta.texture = texture_from(meta.at("texture"));
    s.meta.m3d_lo = vec3_from(meta.at("m3d_lo"));
    s.meta.m3d_scale = vec3_from(meta.at("m3d_scale"));
    s.meta.depth_zmin = meta.at("depth_zmin").get<double>();
    s.meta.depth_scale = meta.at("depth_scale").get<double>();
    s.meta.depth_delta = meta.at("depth_delta").get<double>();
  } catch (const json::exception& e) {
    raise(Errc::io, "malformed meta.json in " + dir.string() + ": " +
                        e.what());
  }
  return s;
}

}  // namespace filmrec::sim
