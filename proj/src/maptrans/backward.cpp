#include "filmrec/maptrans/backward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "filmrec/core/error.hpp"
#include "filmrec/core/parallel.hpp"
#include "filmrec/maptrans/contour.hpp"

namespace filmrec::maptrans {

namespace {

void require_map_and_mask(const Raster& map, const Raster& mask,
                          const char* what) {
  if (map.channels() != 2)
    raise(Errc::shape_mismatch, std::string(what) + " must have 2 channels");
  if (mask.channels() != 1 || mask.width() != map.width() ||
      mask.height() != map.height())
    raise(Errc::shape_mismatch,
          std::string(what) + " and mask dimensions disagree");
}

bool valid_uv_pixel(const Raster& uv, const Raster& mask, int x, int y) {
  if (mask.at(x, y) < 0.5f) return false;
  return std::abs(uv.at(x, y, 0)) > 1e-6f || std::abs(uv.at(x, y, 1)) > 1e-6f;
}

ScatterPoint role_swap(double u, double v, double x, double y, int w, int h,
                       int out_w, int out_h) {
  return {{denorm_coord(u, out_w), denorm_coord(v, out_h)},
          {norm_coord(x, w), norm_coord(y, h)}};
}

}  // namespace

ScatterSet backward_sites(const Raster& uv, const Raster& mask, int out_w,
                          int out_h) {
  require_map_and_mask(uv, mask, "uv");
  const int w = uv.width(), h = uv.height();

  int count = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (valid_uv_pixel(uv, mask, x, y)) ++count;
  if (count < 3)
    raise(Errc::too_few_points,
          "uv map has " + std::to_string(count) + " usable pixels, need 3");

  const int step = (count + kMaxScatterSites - 1) / kMaxScatterSites;
  ScatterSet s;
  s.points.reserve(count / step + 1);
  int idx = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!valid_uv_pixel(uv, mask, x, y)) continue;
      if (idx++ % step != 0) continue;
      s.points.push_back(role_swap(uv.at(x, y, 0), uv.at(x, y, 1), x, y, w, h,
                                   out_w, out_h));
    }
  return s;
}

Raster uv_to_backward(const Raster& uv, const Raster& mask, int out_w,
                      int out_h) {
  return scattered_interpolate(backward_sites(uv, mask, out_w, out_h), out_w,
                               out_h);
}

Raster uv_from_deformation(const Raster& df, const Raster& mask) {
  require_map_and_mask(df, mask, "df");
  Raster out(df.width(), df.height(), 2);
  for (int y = 0; y < df.height(); ++y)
    for (int x = 0; x < df.width(); ++x) {
      if (mask.at(x, y) < 0.5f) continue;
      out.at(x, y, 0) =
          static_cast<float>(norm_coord(x, df.width())) + df.at(x, y, 0);
      out.at(x, y, 1) =
          static_cast<float>(norm_coord(y, df.height())) + df.at(x, y, 1);
    }
  return out;
}

ScatterSet boundary_points(const Raster& uv_aug, const Raster& mask,
                           int out_w, int out_h) {
  require_map_and_mask(uv_aug, mask, "uv");
  const auto contour = trace_largest_contour(mask);
  const auto corners = dominant_quad_corners(contour);
  const int n = static_cast<int>(contour.size());

  std::vector<std::pair<int, int>> picks;  // contour pixel coordinates
  auto add = [&](const Vec2& p) {
    picks.emplace_back(static_cast<int>(p.x), static_cast<int>(p.y));
  };
  for (int e = 0; e < 4; ++e) {
    const int c0 = corners[e];
    const int c1 = corners[(e + 1) % 4];
    add(contour[c0]);

    // Walk the arc once for its length, again for the quarter points.
    const int len = (c1 - c0 + n) % n;
    double arc = 0;
    for (int k = 0; k < len; ++k) {
      const Vec2& a = contour[(c0 + k) % n];
      const Vec2& b = contour[(c0 + k + 1) % n];
      arc += std::hypot(b.x - a.x, b.y - a.y);
    }
    double walked = 0;
    int next_frac = 1;
    for (int k = 0; k < len && next_frac <= 3; ++k) {
      const Vec2& a = contour[(c0 + k) % n];
      const Vec2& b = contour[(c0 + k + 1) % n];
      walked += std::hypot(b.x - a.x, b.y - a.y);
      while (next_frac <= 3 && walked >= arc * (0.25 * next_frac)) {
        add(b);
        ++next_frac;
      }
    }
    while (next_frac <= 3) {  // degenerate short arc: repeat the endpoint
      add(contour[c1]);
      ++next_frac;
    }
  }

  ScatterSet s;
  for (const auto& [x, y] : picks)
    s.points.push_back(role_swap(uv_aug.at(x, y, 0), uv_aug.at(x, y, 1), x, y,
                                 uv_aug.width(), uv_aug.height(), out_w,
                                 out_h));
  return s;
}

Raster merge_and_convert(const Raster& uv, const Raster& df,
                         const Raster& mask, int out_w, int out_h) {
  Raster::require_same_shape(uv, df, "uv/df");
  ScatterSet s = backward_sites(uv, mask, out_w, out_h);
  const ScatterSet edge =
      boundary_points(uv_from_deformation(df, mask), mask, out_w, out_h);
  s.points.insert(s.points.end(), edge.points.begin(), edge.points.end());
  return scattered_interpolate(s, out_w, out_h);
}

namespace {

Raster apply_backward_impl(const Raster& b, const Raster& src,
                           bool force_serial) {
  if (b.channels() != 2)
    raise(Errc::shape_mismatch, "backward map must have 2 channels");
  Raster out(b.width(), b.height(), src.channels());
  parallel::for_n(
      b.height(),
      [&](int y) {
        for (int x = 0; x < b.width(); ++x) {
          const double sx = denorm_coord(b.at(x, y, 0), src.width());
          const double sy = denorm_coord(b.at(x, y, 1), src.height());
          for (int c = 0; c < src.channels(); ++c)
            out.at(x, y, c) = bilinear_at(src, sx, sy, c);
        }
      },
      force_serial);
  return out;
}

}  // namespace

Raster apply_backward(const Raster& b, const Raster& src) {
  return apply_backward_impl(b, src, false);
}

namespace ref {
Raster apply_backward(const Raster& b, const Raster& src) {
  return apply_backward_impl(b, src, true);
}
}  // namespace ref

Raster deshift(const Raster& pred, const Raster& gt, const Raster& mask) {
  Raster::require_same_shape(pred, gt, "pred/gt");
  if (mask.width() != pred.width() || mask.height() != pred.height() ||
      mask.channels() != 1)
    raise(Errc::shape_mismatch, "mask dimensions disagree with maps");

  const int nc = pred.channels();
  std::vector<double> mu(nc, 0.0);
  size_t count = 0;
  for (int y = 0; y < pred.height(); ++y)
    for (int x = 0; x < pred.width(); ++x) {
      if (mask.at(x, y) < 0.5f) continue;
      ++count;
      for (int c = 0; c < nc; ++c)
        mu[c] += double(pred.at(x, y, c)) - double(gt.at(x, y, c));
    }
  if (count == 0) raise(Errc::empty_mask, "deshift mask is empty");
  for (auto& m : mu) m /= double(count);

  Raster out = pred;
  for (int y = 0; y < pred.height(); ++y)
    for (int x = 0; x < pred.width(); ++x)
      for (int c = 0; c < nc; ++c)
        out.at(x, y, c) = static_cast<float>(double(pred.at(x, y, c)) - mu[c]);
  return out;
}

}  // namespace filmrec::maptrans
