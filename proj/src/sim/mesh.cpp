#include "filmrec/sim/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "filmrec/core/error.hpp"
#include "filmrec/core/rng.hpp"

namespace filmrec::sim {

namespace {

constexpr double kPi = 3.141592653589793;

struct CosMode {
  double amp, fu, fv, phase;
};

Vec3 rodrigues(const Vec3& p, const Vec3& axis, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  const Vec3 k = axis.normalized();
  return p * c + k.cross(p) * s + k * (k.dot(p) * (1.0 - c));
}

}  // namespace

Camera camera_for(const SceneConfig& scene) {
  return {scene.camera_f, (scene.out_w - 1) / 2.0, (scene.out_h - 1) / 2.0};
}

Vec2 project(const Camera& cam, const Vec3& p) {
  return {cam.f * p.x / p.z + cam.cx, cam.f * p.y / p.z + cam.cy};
}

double film_distance(const SceneConfig& scene) {
  return scene.camera_f / (scene.fill * scene.out_w);
}

bool projects_without_folds(const ControlMesh& mesh, const Camera& cam) {
  const int nx = mesh.nx, ny = mesh.ny;
  std::vector<Vec2> s(mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    if (mesh.vertices[i].z < 1e-6) return false;  // behind the camera
    s[i] = project(cam, mesh.vertices[i]);
  }
  auto area2 = [&](int a, int b, int c) {
    return (s[b].x - s[a].x) * (s[c].y - s[a].y) -
           (s[b].y - s[a].y) * (s[c].x - s[a].x);
  };
  int sign = 0;
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const int v00 = j * nx + i, v10 = v00 + 1;
      const int v01 = v00 + nx, v11 = v01 + 1;
      for (const double a : {area2(v00, v10, v11), area2(v00, v11, v01)}) {
        if (std::abs(a) < 1e-12) return false;
        const int sa = a > 0 ? 1 : -1;
        if (sign == 0) sign = sa;
        if (sa != sign) return false;
      }
    }
  return true;
}

ControlMesh gen_mesh(const SceneConfig& scene, uint64_t seed) {
  if (scene.mesh_nx < 2 || scene.mesh_ny < 2)
    raise(Errc::invalid_config, "mesh needs at least 2x2 control vertices");
  if (scene.deform_amp < 0 || scene.deform_amp > 0.15)
    raise(Errc::invalid_config,
          "deform_amp must lie in [0, 0.15], got " +
              std::to_string(scene.deform_amp));
  if (scene.fill <= 0 || scene.fill > 1.0)
    raise(Errc::invalid_config, "fill must lie in (0, 1]");

  const Camera cam = camera_for(scene);
  const double z0 = film_distance(scene);
  const int nx = scene.mesh_nx, ny = scene.mesh_ny;

  for (int attempt = 0; attempt < 100; ++attempt) {
    Rng rng(Rng::mix(seed, 0xA11CE + attempt));

    std::vector<CosMode> modes(std::max(scene.deform_modes, 0));
    double amp_total = 0;
    for (auto& m : modes) {
      m.amp = rng.uniform(0.25, 1.0);
      m.fu = rng.uniform(0.4, 1.6) * (rng.bernoulli(0.5) ? 1 : -1);
      m.fv = rng.uniform(0.4, 1.6) * (rng.bernoulli(0.5) ? 1 : -1);
      m.phase = rng.uniform(0.0, 2 * kPi);
      amp_total += m.amp;
    }
    // Worst-case relief equals deform_amp times a random utilization.
    const double relief = scene.deform_amp * rng.uniform(0.6, 1.0);
    if (amp_total > 0)
      for (auto& m : modes) m.amp *= relief / amp_total;

    const double spacing = 1.0 / (nx - 1);
    const double jitter =
        std::min(scene.deform_amp / 2, 0.3 * spacing);

    ControlMesh mesh;
    mesh.nx = nx;
    mesh.ny = ny;
    mesh.vertices.resize(static_cast<size_t>(nx) * ny);
    mesh.uvs.resize(mesh.vertices.size());
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const double u = double(i) / (nx - 1);
        const double v = double(j) / (ny - 1);
        double z = 0;
        for (const auto& m : modes)
          z += m.amp * std::cos(2 * kPi * (m.fu * u + m.fv * v) + m.phase);
        const double jx = jitter == 0 ? 0 : rng.uniform(-jitter, jitter);
        const double jy = jitter == 0 ? 0 : rng.uniform(-jitter, jitter);
        mesh.uvs[static_cast<size_t>(j) * nx + i] = {u, v};
        mesh.vertices[static_cast<size_t>(j) * nx + i] = {
            u - 0.5 + jx, (v - 0.5) * scene.film_aspect + jy, z0 + z};
      }

    if (scene.tilt_deg_max > 0) {
      const double ax = rng.uniform(0.0, 2 * kPi);
      const double az = rng.uniform(-0.35, 0.35);
      const Vec3 axis{std::cos(ax), std::sin(ax), az};
      const double angle =
          rng.uniform(0.0, scene.tilt_deg_max) * kPi / 180.0;
      const Vec3 center{0, 0, z0};
      for (auto& p : mesh.vertices)
        p = center + rodrigues(p - center, axis, angle);
    }

    if (projects_without_folds(mesh, cam)) return mesh;
  }
  raise(Errc::rejection_exhausted,
        "no fold-free mesh in 100 attempts; relax deform_amp or tilt");
}

}  // namespace filmrec::sim
