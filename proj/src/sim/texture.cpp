#include "filmrec/sim/texture.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "filmrec/core/error.hpp"
#include "filmrec/core/rng.hpp"

namespace filmrec::sim {

namespace {

constexpr float kCellBg = 0.08f;
constexpr float kBorder = 1.0f;
constexpr float kSeparator = 0.75f;

struct Ellipse {
  double cx, cy, a, b, cos_t, sin_t;
  float value;
};

// Seeded nested-ellipse phantom, drawn into the cell rectangle.
void draw_cell(Raster& tex, int x0, int y0, int cell, Rng& rng) {
  const int n = 3 + rng.uniform_int(4);
  std::vector<Ellipse> shapes;
  shapes.reserve(n);
  for (int i = 0; i < n; ++i) {
    // Later (nested) shapes shrink and get brighter or darker bands.
    const double scale = 1.0 - 0.18 * i;
    Ellipse e;
    e.cx = x0 + cell * rng.uniform(0.35, 0.65);
    e.cy = y0 + cell * rng.uniform(0.35, 0.65);
    e.a = cell * scale * rng.uniform(0.18, 0.38);
    e.b = cell * scale * rng.uniform(0.18, 0.38);
    const double t = rng.uniform(0.0, 3.141592653589793);
    e.cos_t = std::cos(t);
    e.sin_t = std::sin(t);
    e.value = static_cast<float>(rng.uniform(0.25, 0.92));
    shapes.push_back(e);
  }
  for (int y = y0; y < y0 + cell; ++y)
    for (int x = x0; x < x0 + cell; ++x) {
      float v = kCellBg;
      for (const auto& e : shapes) {
        const double dx = x - e.cx, dy = y - e.cy;
        const double lx = (dx * e.cos_t + dy * e.sin_t) / e.a;
        const double ly = (-dx * e.sin_t + dy * e.cos_t) / e.b;
        if (lx * lx + ly * ly <= 1.0) v = e.value;
      }
      tex.at(x, y) = v;
    }
}

}  // namespace

Raster gen_texture(const TextureConfig& cfg) {
  if (cfg.grid_cols < 1 || cfg.grid_rows < 1)
    raise(Errc::invalid_config, "texture grid must be at least 1x1");
  if (cfg.cell_px < 16)
    raise(Errc::invalid_config,
          "cell_px must be >= 16, got " + std::to_string(cfg.cell_px));
  if (cfg.border_px < 0)
    raise(Errc::invalid_config, "border_px must be non-negative");

  const int w = cfg.grid_cols * cfg.cell_px + 2 * cfg.border_px;
  const int h = cfg.grid_rows * cfg.cell_px + 2 * cfg.border_px;
  Raster tex(w, h, 1, kBorder);

  for (int r = 0; r < cfg.grid_rows; ++r)
    for (int c = 0; c < cfg.grid_cols; ++c) {
      Rng rng(Rng::mix(cfg.seed, static_cast<uint64_t>(r) * cfg.grid_cols + c));
      draw_cell(tex, cfg.border_px + c * cfg.cell_px,
                cfg.border_px + r * cfg.cell_px, cfg.cell_px, rng);
    }

  // Light separator lines on the interior cell boundaries.
  const int b = cfg.border_px;
  for (int c = 1; c < cfg.grid_cols; ++c) {
    const int x = b + c * cfg.cell_px;
    for (int y = b; y < h - b; ++y) {
      tex.at(x - 1, y) = kSeparator;
      tex.at(x, y) = kSeparator;
    }
  }
  for (int r = 1; r < cfg.grid_rows; ++r) {
    const int y = b + r * cfg.cell_px;
    for (int x = b; x < w - b; ++x) {
      tex.at(x, y - 1) = kSeparator;
      tex.at(x, y) = kSeparator;
    }
  }
  return tex;
}

}  // namespace filmrec::sim
