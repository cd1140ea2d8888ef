#pragma once

#include <cstdint>
#include <vector>

#include "filmrec/core/vec.hpp"

namespace filmrec::sim {

// Scene parameters. Lengths are in film widths unless marked as pixels;
// light_dir points from the surface toward the light and is normalized at
// use. fill is the projected film width as a fraction of the frame width.
struct SceneConfig {
  int out_w = 256;
  int out_h = 256;
  double camera_f = 340.0;  // pixels
  double fill = 0.82;
  double film_aspect = 1.0;  // film height / film width
  double tilt_deg_max = 12.0;
  Vec3 light_dir{0.3, -0.25, -0.91};
  double ambient = 0.35;
  double diffuse = 0.65;
  Vec3 tint{1.0, 1.0, 1.0};
  uint64_t background_seed = 0;
  int deform_modes = 4;
  double deform_amp = 0.08;
  int mesh_nx = 25;
  int mesh_ny = 25;
};

// Camera-space control lattice with its regular uv parameterization.
// Vertices are row-major, index j*nx + i; uv(i,j) = (i/(nx-1), j/(ny-1)).
struct ControlMesh {
  int nx = 0;
  int ny = 0;
  std::vector<Vec3> vertices;
  std::vector<Vec2> uvs;
};

// Pinhole projection shared by the renderer and the backward-map builder.
struct Camera {
  double f, cx, cy;
};
Camera camera_for(const SceneConfig& scene);
Vec2 project(const Camera& cam, const Vec3& p);

// Film depth along the optical axis for the configured fill.
double film_distance(const SceneConfig& scene);

// Deformed film mesh: low-frequency cosine relief capped at deform_amp,
// small in-plane jitter, then a random rigid tilt. Candidates are rejected
// until every projected triangle keeps its orientation; throws
// rejection-exhausted after 100 attempts.
ControlMesh gen_mesh(const SceneConfig& scene, uint64_t seed);

// True when all projected mesh triangles have the same orientation sign.
bool projects_without_folds(const ControlMesh& mesh, const Camera& cam);

}  // namespace filmrec::sim
