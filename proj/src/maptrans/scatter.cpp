#include "filmrec/maptrans/scatter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "filmrec/core/error.hpp"
#include "filmrec/core/parallel.hpp"

namespace filmrec::maptrans {

namespace {

std::vector<Vec2> positions_of(const ScatterSet& s) {
  std::vector<Vec2> pos(s.points.size());
  for (size_t i = 0; i < s.points.size(); ++i) pos[i] = s.points[i].pos;
  return pos;
}

}  // namespace

ScatterInterpolant::ScatterInterpolant(const ScatterSet& s)
    : tri_(positions_of(s)) {
  values_.resize(s.points.size());
  for (size_t i = 0; i < s.points.size(); ++i) values_[i] = s.points[i].value;

  const auto& pts = tri_.points();
  double x1 = pts[0].x, y1 = pts[0].y;
  x0_ = x1;
  y0_ = y1;
  for (const auto& p : pts) {
    x0_ = std::min(x0_, p.x);
    y0_ = std::min(y0_, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }

  const auto& tris = tri_.triangles();
  const int n = std::clamp(
      static_cast<int>(std::ceil(std::sqrt(double(tris.size())))), 1, 512);
  nx_ = ny_ = n;
  cell_w_ = std::max((x1 - x0_) / nx_, 1e-12);
  cell_h_ = std::max((y1 - y0_) / ny_, 1e-12);
  tri_in_cell_.assign(static_cast<size_t>(nx_) * ny_, {});
  site_in_cell_.assign(static_cast<size_t>(nx_) * ny_, {});

  for (size_t t = 0; t < tris.size(); ++t) {
    const Vec2& a = pts[tris[t].v[0]];
    const Vec2& b = pts[tris[t].v[1]];
    const Vec2& c = pts[tris[t].v[2]];
    const int cx0 = cell_x(std::min({a.x, b.x, c.x}));
    const int cx1 = cell_x(std::max({a.x, b.x, c.x}));
    const int cy0 = cell_y(std::min({a.y, b.y, c.y}));
    const int cy1 = cell_y(std::max({a.y, b.y, c.y}));
    for (int cy = cy0; cy <= cy1; ++cy)
      for (int cx = cx0; cx <= cx1; ++cx)
        tri_in_cell_[static_cast<size_t>(cy) * nx_ + cx].push_back(
            static_cast<int>(t));
  }
  for (size_t i = 0; i < pts.size(); ++i) {
    if (tri_.representative()[i] != static_cast<int>(i)) continue;
    site_in_cell_[static_cast<size_t>(cell_y(pts[i].y)) * nx_ + cell_x(pts[i].x)]
        .push_back(static_cast<int>(i));
  }
}

int ScatterInterpolant::cell_x(double x) const {
  return std::clamp(static_cast<int>((x - x0_) / cell_w_), 0, nx_ - 1);
}

int ScatterInterpolant::cell_y(double y) const {
  return std::clamp(static_cast<int>((y - y0_) / cell_h_), 0, ny_ - 1);
}

Vec2 ScatterInterpolant::eval(double x, double y) const {
  const auto& pts = tri_.points();
  const auto& tris = tri_.triangles();
  const auto& cell =
      tri_in_cell_[static_cast<size_t>(cell_y(y)) * nx_ + cell_x(x)];
  for (int t : cell) {
    const auto& tr = tris[t];
    const Vec2& a = pts[tr.v[0]];
    const Vec2& b = pts[tr.v[1]];
    const Vec2& c = pts[tr.v[2]];
    const double area =
        (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (area <= 0) continue;
    const double w0 =
        ((c.x - b.x) * (y - b.y) - (c.y - b.y) * (x - b.x)) / area;
    const double w1 =
        ((a.x - c.x) * (y - c.y) - (a.y - c.y) * (x - c.x)) / area;
    const double w2 = 1.0 - w0 - w1;
    const double tol = -1e-9;
    if (w0 < tol || w1 < tol || w2 < tol) continue;
    const Vec2& va = values_[tr.v[0]];
    const Vec2& vb = values_[tr.v[1]];
    const Vec2& vc = values_[tr.v[2]];
    return {w0 * va.x + w1 * vb.x + w2 * vc.x,
            w0 * va.y + w1 * vb.y + w2 * vc.y};
  }
  return nearest_value(x, y);
}

Vec2 ScatterInterpolant::nearest_value(double x, double y) const {
  const auto& pts = tri_.points();
  const int cx = cell_x(x), cy = cell_y(y);
  const double min_cell = std::min(cell_w_, cell_h_);
  double best_d2 = std::numeric_limits<double>::max();
  int best = -1;
  const int max_r = std::max(nx_, ny_);
  for (int r = 0; r <= max_r; ++r) {
    if (best >= 0) {
      const double ring_min = (r - 1) * min_cell;
      if (ring_min > 0 && ring_min * ring_min > best_d2) break;
    }
    for (int gy = cy - r; gy <= cy + r; ++gy) {
      if (gy < 0 || gy >= ny_) continue;
      for (int gx = cx - r; gx <= cx + r; ++gx) {
        if (gx < 0 || gx >= nx_) continue;
        if (std::max(std::abs(gx - cx), std::abs(gy - cy)) != r) continue;
        for (int i : site_in_cell_[static_cast<size_t>(gy) * nx_ + gx]) {
          const double dx = pts[i].x - x, dy = pts[i].y - y;
          const double d2 = dx * dx + dy * dy;
          if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
          }
        }
      }
    }
  }
  return values_[best];
}

namespace {

Raster rasterize(const ScatterSet& s, int out_w, int out_h,
                 bool force_serial) {
  if (out_w <= 0 || out_h <= 0)
    raise(Errc::invalid_dimension,
          "interpolation target must be positive, got " +
              std::to_string(out_w) + "x" + std::to_string(out_h));
  const ScatterInterpolant interp(s);
  Raster out(out_w, out_h, 2);
  parallel::for_n(
      out_h,
      [&](int y) {
        for (int x = 0; x < out_w; ++x) {
          const Vec2 v = interp.eval(x, y);
          out.at(x, y, 0) = static_cast<float>(v.x);
          out.at(x, y, 1) = static_cast<float>(v.y);
        }
      },
      force_serial);
  return out;
}

}  // namespace

Raster scattered_interpolate(const ScatterSet& s, int out_w, int out_h) {
  return rasterize(s, out_w, out_h, false);
}

namespace ref {
Raster scattered_interpolate(const ScatterSet& s, int out_w, int out_h) {
  return rasterize(s, out_w, out_h, true);
}
}  // namespace ref

}  // namespace filmrec::maptrans
