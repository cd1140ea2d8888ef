#include "filmrec/sim/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "filmrec/core/error.hpp"
#include "filmrec/core/parallel.hpp"
#include "filmrec/core/rng.hpp"

namespace filmrec::sim {

namespace {

constexpr double kPi = 3.141592653589793;

struct TriRec {
  int v[3];
  Vec2 s[3];       // projected screen positions
  double inv_z[3];
  int x0, x1, y0, y1;  // clamped screen bbox
};

// Mesh triangles in a fixed order; the z-test breaks ties toward the first.
std::vector<TriRec> build_tris(const ControlMesh& mesh, const Camera& cam,
                               int w, int h) {
  std::vector<TriRec> tris;
  tris.reserve(static_cast<size_t>(mesh.nx - 1) * (mesh.ny - 1) * 2);
  auto add = [&](int a, int b, int c) {
    TriRec t;
    t.v[0] = a;
    t.v[1] = b;
    t.v[2] = c;
    double lx = 1e30, hx = -1e30, ly = 1e30, hy = -1e30;
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = mesh.vertices[t.v[k]];
      t.s[k] = project(cam, p);
      t.inv_z[k] = 1.0 / p.z;
      lx = std::min(lx, t.s[k].x);
      hx = std::max(hx, t.s[k].x);
      ly = std::min(ly, t.s[k].y);
      hy = std::max(hy, t.s[k].y);
    }
    t.x0 = std::max(0, static_cast<int>(std::ceil(lx)));
    t.x1 = std::min(w - 1, static_cast<int>(std::floor(hx)));
    t.y0 = std::max(0, static_cast<int>(std::ceil(ly)));
    t.y1 = std::min(h - 1, static_cast<int>(std::floor(hy)));
    if (t.x0 <= t.x1 && t.y0 <= t.y1) tris.push_back(t);
  };
  for (int j = 0; j + 1 < mesh.ny; ++j)
    for (int i = 0; i + 1 < mesh.nx; ++i) {
      const int v00 = j * mesh.nx + i, v10 = v00 + 1;
      const int v01 = v00 + mesh.nx, v11 = v01 + 1;
      add(v00, v10, v11);
      add(v00, v11, v01);
    }
  return tris;
}

// Area-weighted vertex normals, all oriented toward the camera (-z side).
std::vector<Vec3> vertex_normals(const ControlMesh& mesh) {
  std::vector<Vec3> n(mesh.vertices.size());
  auto accumulate = [&](int a, int b, int c) {
    const Vec3 e1 = mesh.vertices[b] - mesh.vertices[a];
    const Vec3 e2 = mesh.vertices[c] - mesh.vertices[a];
    Vec3 g = e1.cross(e2);
    if (g.z > 0) g = g * -1.0;
    n[a] += g;
    n[b] += g;
    n[c] += g;
  };
  for (int j = 0; j + 1 < mesh.ny; ++j)
    for (int i = 0; i + 1 < mesh.nx; ++i) {
      const int v00 = j * mesh.nx + i, v10 = v00 + 1;
      const int v01 = v00 + mesh.nx, v11 = v01 + 1;
      accumulate(v00, v10, v11);
      accumulate(v00, v11, v01);
    }
  for (auto& v : n) v = v.normalized();
  return n;
}

struct RawBuffers {
  std::vector<double> z, u, v, px, py, pz, nx, ny, nz;
  std::vector<uint8_t> cover;
};

void validate(const Raster& tex, const ControlMesh& mesh,
              const SceneConfig& scene) {
  if (tex.channels() != 1)
    raise(Errc::shape_mismatch, "texture must be 1-channel");
  if (scene.out_w <= 0 || scene.out_h <= 0)
    raise(Errc::invalid_config, "output size must be positive");
  if (mesh.nx < 2 || mesh.ny < 2 ||
      mesh.vertices.size() != static_cast<size_t>(mesh.nx) * mesh.ny ||
      mesh.uvs.size() != mesh.vertices.size())
    raise(Errc::invalid_config, "control mesh is inconsistent");
}

}  // namespace

Raster gt_backward(const ControlMesh& mesh, const SceneConfig& scene,
                   int bw_w, int bw_h) {
  if (bw_w <= 0 || bw_h <= 0)
    raise(Errc::invalid_dimension, "backward map size must be positive");
  const Camera cam = camera_for(scene);
  if (!projects_without_folds(mesh, cam))
    raise(Errc::fold_detected, "mesh projection is not injective");

  std::vector<Vec2> s(mesh.vertices.size());
  for (size_t i = 0; i < s.size(); ++i) s[i] = project(cam, mesh.vertices[i]);

  const int nx = mesh.nx, ny = mesh.ny;
  Raster out(bw_w, bw_h, 2);
  parallel::for_n(bw_h, [&](int ty) {
    for (int tx = 0; tx < bw_w; ++tx) {
      const double su = norm_coord(tx, bw_w) * (nx - 1);
      const double sv = norm_coord(ty, bw_h) * (ny - 1);
      const int i = std::min(static_cast<int>(su), nx - 2);
      const int j = std::min(static_cast<int>(sv), ny - 2);
      const double fu = su - i, fv = sv - j;
      const int v00 = j * nx + i, v10 = v00 + 1;
      const int v01 = v00 + nx, v11 = v01 + 1;
      // Same diagonal split as the renderer: (v00,v10,v11) under it,
      // (v00,v11,v01) above.
      Vec3 p;
      if (fu >= fv) {
        p = mesh.vertices[v00] * (1 - fu) + mesh.vertices[v10] * (fu - fv) +
            mesh.vertices[v11] * fv;
      } else {
        p = mesh.vertices[v00] * (1 - fv) + mesh.vertices[v11] * fu +
            mesh.vertices[v01] * (fv - fu);
      }
      const Vec2 sp = project(cam, p);
      out.at(tx, ty, 0) = static_cast<float>(norm_coord(sp.x, scene.out_w));
      out.at(tx, ty, 1) = static_cast<float>(norm_coord(sp.y, scene.out_h));
    }
  });
  return out;
}

Sample render_sample(const Raster& tex, const ControlMesh& mesh,
                     const SceneConfig& scene) {
  validate(tex, mesh, scene);
  const Camera cam = camera_for(scene);
  if (!projects_without_folds(mesh, cam))
    raise(Errc::fold_detected, "mesh projection is not injective");

  const int w = scene.out_w, h = scene.out_h;
  const size_t npix = static_cast<size_t>(w) * h;
  const auto tris = build_tris(mesh, cam, w, h);
  const auto normals = vertex_normals(mesh);

  RawBuffers raw;
  raw.z.assign(npix, std::numeric_limits<double>::max());
  for (auto* b : {&raw.u, &raw.v, &raw.px, &raw.py, &raw.pz, &raw.nx, &raw.ny,
                  &raw.nz})
    b->assign(npix, 0.0);
  raw.cover.assign(npix, 0);

  parallel::for_n(h, [&](int y) {
    for (const auto& t : tris) {
      if (y < t.y0 || y > t.y1) continue;
      const Vec2 &a = t.s[0], &b = t.s[1], &c = t.s[2];
      const double area =
          (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
      if (area == 0) continue;
      for (int x = t.x0; x <= t.x1; ++x) {
        const double w0 =
            ((c.x - b.x) * (y - b.y) - (c.y - b.y) * (x - b.x)) / area;
        const double w1 =
            ((a.x - c.x) * (y - c.y) - (a.y - c.y) * (x - c.x)) / area;
        const double w2 = 1.0 - w0 - w1;
        if (w0 < 0 || w1 < 0 || w2 < 0) continue;
        const double denom =
            w0 * t.inv_z[0] + w1 * t.inv_z[1] + w2 * t.inv_z[2];
        const double z = 1.0 / denom;
        const size_t p = static_cast<size_t>(y) * w + x;
        if (z >= raw.z[p] - 1e-12) continue;  // first triangle wins ties
        raw.z[p] = z;
        raw.cover[p] = 1;
        // Perspective-correct weights for vertex attributes.
        const double q0 = w0 * t.inv_z[0] / denom;
        const double q1 = w1 * t.inv_z[1] / denom;
        const double q2 = w2 * t.inv_z[2] / denom;
        auto mix3 = [&](auto get) {
          return q0 * get(t.v[0]) + q1 * get(t.v[1]) + q2 * get(t.v[2]);
        };
        raw.u[p] = mix3([&](int i) { return mesh.uvs[i].x; });
        raw.v[p] = mix3([&](int i) { return mesh.uvs[i].y; });
        raw.px[p] = mix3([&](int i) { return mesh.vertices[i].x; });
        raw.py[p] = mix3([&](int i) { return mesh.vertices[i].y; });
        raw.pz[p] = mix3([&](int i) { return mesh.vertices[i].z; });
        raw.nx[p] = mix3([&](int i) { return normals[i].x; });
        raw.ny[p] = mix3([&](int i) { return normals[i].y; });
        raw.nz[p] = mix3([&](int i) { return normals[i].z; });
      }
    }
  });

  // Normalization constants from the mesh itself, not the covered pixels,
  // so they are stable under resolution changes.
  Vec3 lo = mesh.vertices[0], hi = mesh.vertices[0];
  for (const auto& p : mesh.vertices) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const Vec3 scale{std::max(hi.x - lo.x, 1e-9),
                   std::max(hi.y - lo.y, 1e-9),
                   std::max(hi.z - lo.z, 1e-9)};
  const double zrange = hi.z - lo.z;
  const double delta = std::max(0.01 * zrange, 1e-6);

  Sample out;
  out.meta.m3d_lo = lo;
  out.meta.m3d_scale = scale;
  out.meta.depth_zmin = lo.z;
  out.meta.depth_scale = zrange + delta;
  out.meta.depth_delta = delta;
  out.meta.scene = scene;

  out.image = Raster(w, h, 3);
  out.m3d = Raster(w, h, 3);
  out.normal = Raster(w, h, 3);
  out.depth = Raster(w, h, 1);
  out.uv = Raster(w, h, 2);
  out.albedo = Raster(w, h, 1);
  out.bgmask = Raster(w, h, 1);

  const Vec3 light = scene.light_dir.normalized();
  Rng bg_rng(Rng::mix(scene.background_seed, 0xB6));
  const double bf1x = bg_rng.uniform(0.6, 1.8), bf1y = bg_rng.uniform(0.6, 1.8);
  const double bp1 = bg_rng.uniform(0.0, 2 * kPi);
  const double bf2x = bg_rng.uniform(1.2, 2.6), bf2y = bg_rng.uniform(1.2, 2.6);
  const double bp2 = bg_rng.uniform(0.0, 2 * kPi);

  parallel::for_n(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const size_t p = static_cast<size_t>(y) * w + x;
      if (!raw.cover[p]) {
        const double gx = norm_coord(x, w), gy = norm_coord(y, h);
        const double base =
            0.33 + 0.10 * std::cos(2 * kPi * (bf1x * gx + bf1y * gy) + bp1) +
            0.07 * std::cos(2 * kPi * (bf2x * gx + bf2y * gy) + bp2);
        const double v = std::clamp(base, 0.05, 0.6);
        out.image.at(x, y, 0) = static_cast<float>(0.93 * v);
        out.image.at(x, y, 1) = static_cast<float>(0.89 * v);
        out.image.at(x, y, 2) = static_cast<float>(0.84 * v);
        continue;
      }
      out.bgmask.at(x, y) = 1.0f;
      out.uv.at(x, y, 0) = static_cast<float>(raw.u[p]);
      out.uv.at(x, y, 1) = static_cast<float>(raw.v[p]);
      out.m3d.at(x, y, 0) = static_cast<float>((raw.px[p] - lo.x) / scale.x);
      out.m3d.at(x, y, 1) = static_cast<float>((raw.py[p] - lo.y) / scale.y);
      out.m3d.at(x, y, 2) = static_cast<float>((raw.pz[p] - lo.z) / scale.z);
      out.depth.at(x, y) =
          static_cast<float>((raw.z[p] - lo.z + delta) / (zrange + delta));

      Vec3 n{raw.nx[p], raw.ny[p], raw.nz[p]};
      n = n.normalized();
      out.normal.at(x, y, 0) = static_cast<float>((n.x + 1) / 2);
      out.normal.at(x, y, 1) = static_cast<float>((n.y + 1) / 2);
      out.normal.at(x, y, 2) = static_cast<float>((n.z + 1) / 2);

      const float alb = bilinear_at(tex, denorm_coord(raw.u[p], tex.width()),
                                    denorm_coord(raw.v[p], tex.height()), 0);
      out.albedo.at(x, y) = alb;

      const double shade = std::clamp(
          scene.ambient + scene.diffuse * std::max(0.0, n.dot(light)), 0.0,
          1.0);
      out.image.at(x, y, 0) =
          static_cast<float>(std::clamp(scene.tint.x * alb * shade, 0.0, 1.0));
      out.image.at(x, y, 1) =
          static_cast<float>(std::clamp(scene.tint.y * alb * shade, 0.0, 1.0));
      out.image.at(x, y, 2) =
          static_cast<float>(std::clamp(scene.tint.z * alb * shade, 0.0, 1.0));
    }
  });

  out.backward_gt = gt_backward(mesh, scene, w, h);
  return out;
}

}  // namespace filmrec::sim
