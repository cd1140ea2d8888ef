#include "filmrec/estimator/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "filmrec/core/error.hpp"
#include "filmrec/core/log.hpp"
#include "filmrec/core/parallel.hpp"
#include "filmrec/maptrans/backward.hpp"
#include "filmrec/maptrans/contour.hpp"

namespace filmrec::estimator {

namespace {

// ---------------------------------------------------------------- masking

int otsu_threshold_bin(const std::vector<size_t>& hist, size_t total) {
  double sum_all = 0;
  for (int i = 0; i < 256; ++i) sum_all += double(i) * double(hist[i]);
  double best = -1.0;
  int best_t = 0;
  double w0 = 0, sum0 = 0;
  for (int t = 0; t < 255; ++t) {
    w0 += double(hist[t]);
    sum0 += double(t) * double(hist[t]);
    const double w1 = double(total) - w0;
    if (w0 <= 0 || w1 <= 0) continue;
    const double mu0 = sum0 / w0;
    const double mu1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

// Largest 8-connected foreground component, in place.
void keep_largest_component(Raster& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<int> label(static_cast<size_t>(w) * h, -1);
  int best_label = -1;
  size_t best_size = 0;
  int next = 0;
  std::deque<int> queue;
  for (int sy = 0; sy < h; ++sy)
    for (int sx = 0; sx < w; ++sx) {
      const size_t sp = static_cast<size_t>(sy) * w + sx;
      if (mask.samples()[sp] < 0.5f || label[sp] >= 0) continue;
      size_t size = 0;
      label[sp] = next;
      queue.push_back(static_cast<int>(sp));
      while (!queue.empty()) {
        const int p = queue.front();
        queue.pop_front();
        ++size;
        const int px = p % w, py = p / w;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = px + dx, ny = py + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const size_t np = static_cast<size_t>(ny) * w + nx;
            if (mask.samples()[np] < 0.5f || label[np] >= 0) continue;
            label[np] = next;
            queue.push_back(static_cast<int>(np));
          }
      }
      if (size > best_size) {
        best_size = size;
        best_label = next;
      }
      ++next;
    }
  for (size_t p = 0; p < label.size(); ++p)
    mask.samples()[p] = label[p] == best_label ? 1.0f : 0.0f;
}

// Fills enclosed background: anything not reachable from the image border
// through background pixels becomes foreground.
void fill_holes(Raster& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<uint8_t> outside(static_cast<size_t>(w) * h, 0);
  std::deque<int> queue;
  auto seed = [&](int x, int y) {
    const size_t p = static_cast<size_t>(y) * w + x;
    if (mask.samples()[p] < 0.5f && !outside[p]) {
      outside[p] = 1;
      queue.push_back(static_cast<int>(p));
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  constexpr int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const int p = queue.front();
    queue.pop_front();
    const int px = p % w, py = p / w;
    for (int k = 0; k < 4; ++k) {
      const int nx = px + dx[k], ny = py + dy[k];
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      const size_t np = static_cast<size_t>(ny) * w + nx;
      if (mask.samples()[np] >= 0.5f || outside[np]) continue;
      outside[np] = 1;
      queue.push_back(static_cast<int>(np));
    }
  }
  for (size_t p = 0; p < outside.size(); ++p)
    if (!outside[p]) mask.samples()[p] = 1.0f;
}

// ------------------------------------------------------------ coons patch

// Arc-length parameterized polyline: eval(0) is the first point, eval(1)
// the last, constant speed along the chain.
struct EdgeCurve {
  std::vector<Vec2> pts;
  std::vector<double> cum;
  double len = 0;

  explicit EdgeCurve(std::vector<Vec2> p) : pts(std::move(p)) {
    cum.resize(pts.size(), 0.0);
    for (size_t i = 1; i < pts.size(); ++i) {
      cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
    }
    len = cum.back();
  }

  Vec2 eval(double t) const {
    if (pts.size() < 2 || len <= 0) return pts.front();
    const double s = std::clamp(t, 0.0, 1.0) * len;
    const auto it = std::upper_bound(cum.begin(), cum.end(), s);
    size_t i = std::min(static_cast<size_t>(it - cum.begin()),
                        pts.size() - 1);
    if (i == 0) i = 1;
    const double seg = cum[i] - cum[i - 1];
    const double f = seg > 0 ? (s - cum[i - 1]) / seg : 0.0;
    return pts[i - 1] + (pts[i] - pts[i - 1]) * f;
  }

  Vec2 deriv(double t) const {
    if (pts.size() < 2 || len <= 0) return {0, 0};
    const double s = std::clamp(t, 0.0, 1.0) * len;
    const auto it = std::upper_bound(cum.begin(), cum.end(), s);
    size_t i = std::min(static_cast<size_t>(it - cum.begin()),
                        pts.size() - 1);
    if (i == 0) i = 1;
    const double seg = cum[i] - cum[i - 1];
    if (seg <= 0) return {0, 0};
    return (pts[i] - pts[i - 1]) * (len / seg);
  }
};

struct CoonsPatch {
  EdgeCurve top, right, bottom, left;  // bottom: c3->c2, left: c0->c3
  Vec2 c00, c10, c01, c11;             // corners 0..3 remapped to uv space

  Vec2 eval(double u, double v) const {
    const Vec2 lerp_v = top.eval(u) * (1 - v) + bottom.eval(u) * v;
    const Vec2 lerp_u = left.eval(v) * (1 - u) + right.eval(v) * u;
    const Vec2 bil = c00 * ((1 - u) * (1 - v)) + c10 * (u * (1 - v)) +
                     c01 * ((1 - u) * v) + c11 * (u * v);
    return lerp_v + lerp_u - bil;
  }

  Vec2 du(double u, double v) const {
    return top.deriv(u) * (1 - v) + bottom.deriv(u) * v +
           right.eval(v) - left.eval(v) -
           (c10 - c00) * (1 - v) - (c11 - c01) * v;
  }

  Vec2 dv(double u, double v) const {
    return bottom.eval(u) - top.eval(u) + left.deriv(v) * (1 - u) +
           right.deriv(v) * u - (c01 - c00) * (1 - u) - (c11 - c10) * u;
  }
};

std::vector<Vec2> reversed(std::vector<Vec2> v) {
  std::reverse(v.begin(), v.end());
  return v;
}

// Newton inverse of the plain bilinear corner map; initializer and
// fallback for the Coons solve.
Vec2 bilinear_inverse(const std::array<Vec2, 4>& c, const Vec2& p) {
  double u = 0.5, v = 0.5;
  for (int it = 0; it < 12; ++it) {
    const Vec2 pos = c[0] * ((1 - u) * (1 - v)) + c[1] * (u * (1 - v)) +
                     c[2] * (u * v) + c[3] * ((1 - u) * v);
    const Vec2 r = pos - p;
    const Vec2 ju = (c[1] - c[0]) * (1 - v) + (c[2] - c[3]) * v;
    const Vec2 jv = (c[3] - c[0]) * (1 - u) + (c[2] - c[1]) * u;
    const double det = ju.x * jv.y - ju.y * jv.x;
    if (std::abs(det) < 1e-12) break;
    const double du = (r.x * jv.y - r.y * jv.x) / det;
    const double dv = (ju.x * r.y - ju.y * r.x) / det;
    u = std::clamp(u - du, -0.5, 1.5);
    v = std::clamp(v - dv, -0.5, 1.5);
    if (std::abs(du) + std::abs(dv) < 1e-9) break;
  }
  return {std::clamp(u, 0.0, 1.0), std::clamp(v, 0.0, 1.0)};
}

// Even-odd scanline spans of the closed polygon at row y; returns sorted
// crossing x positions.
std::vector<double> row_crossings(const std::vector<Vec2>& poly, double y) {
  std::vector<double> xs;
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if ((a.y <= y && y < b.y) || (b.y <= y && y < a.y))
      xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
  }
  std::sort(xs.begin(), xs.end());
  return xs;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

template <class Fn>
auto staged(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    raise(e.code(), std::string(stage) + ": " + e.what());
  }
}

}  // namespace

Raster estimate_mask(const Raster& image) {
  if (image.width() < 3 || image.height() < 3)
    raise(Errc::invalid_dimension, "image too small for mask estimation");
  const Raster lum = luminance(image);

  std::vector<size_t> hist(256, 0);
  for (const float v : lum.samples()) {
    const int bin = std::clamp(static_cast<int>(v * 255.0f + 0.5f), 0, 255);
    ++hist[bin];
  }
  const int t = otsu_threshold_bin(hist, lum.size());

  // Classify by histogram bin so the split matches the statistic the
  // threshold optimized; comparing raw values against t/255 misplaces
  // pixels whose value rounds across the bin edge.
  Raster mask(lum.width(), lum.height(), 1);
  size_t on = 0;
  for (size_t p = 0; p < lum.size(); ++p) {
    const int bin = std::clamp(
        static_cast<int>(lum.samples()[p] * 255.0f + 0.5f), 0, 255);
    const bool fg = bin > t;
    mask.samples()[p] = fg ? 1.0f : 0.0f;
    on += fg;
  }
  if (on == 0)
    raise(Errc::no_component_found, "no pixels above the Otsu threshold");

  keep_largest_component(mask);
  fill_holes(mask);
  return mask;
}

BoundaryQuad extract_quad(const Raster& mask) {
  std::vector<Vec2> contour = maptrans::trace_largest_contour(mask);
  std::array<int, 4> idx = maptrans::dominant_quad_corners(contour);
  const int n = static_cast<int>(contour.size());

  // Contour order must be clockwise in image coordinates (y down) so that
  // uv (0,0) -> (1,0) runs along the top edge.
  double area2 = 0;
  for (int k = 0; k < 4; ++k) {
    const Vec2& a = contour[idx[k]];
    const Vec2& b = contour[idx[(k + 1) % 4]];
    area2 += a.x * b.y - b.x * a.y;
  }
  if (area2 < 0) {
    std::reverse(contour.begin(), contour.end());
    std::array<int, 4> r;
    for (int k = 0; k < 4; ++k) r[k] = n - 1 - idx[3 - k];
    idx = r;
  }

  // Rotate so the top-left-most corner (smallest x+y, then y) leads.
  int start = 0;
  auto key = [&](int k) {
    const Vec2& c = contour[idx[k]];
    return std::pair<double, double>(c.x + c.y, c.y);
  };
  for (int k = 1; k < 4; ++k)
    if (key(k) < key(start)) start = k;

  BoundaryQuad q;
  for (int k = 0; k < 4; ++k) {
    const int a = idx[(start + k) % 4];
    const int b = idx[(start + k + 1) % 4];
    q.corners[k] = contour[a];
    std::vector<Vec2>& edge = q.edges[k];
    for (int i = a;; i = (i + 1) % n) {
      edge.push_back(contour[i]);
      if (i == b) break;
    }
  }
  return q;
}

Raster coons_uv(const BoundaryQuad& q, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0)
    raise(Errc::invalid_dimension, "coons_uv output size must be positive");
  for (const auto& e : q.edges)
    if (e.size() < 2)
      raise(Errc::degenerate_geometry, "boundary edge with fewer than 2 points");

  const CoonsPatch patch{EdgeCurve(q.edges[0]), EdgeCurve(q.edges[1]),
                         EdgeCurve(reversed(q.edges[2])),
                         EdgeCurve(reversed(q.edges[3])),
                         q.corners[0], q.corners[1], q.corners[3],
                         q.corners[2]};

  std::vector<Vec2> poly;
  for (const auto& e : q.edges)
    for (size_t i = 0; i + 1 < e.size(); ++i) poly.push_back(e[i]);

  Raster uv(out_w, out_h, 2);
  std::vector<uint8_t> solved(static_cast<size_t>(out_w) * out_h, 0);
  auto solve_at = [&](int x, int y) {
    const Vec2 p(x, y);
    Vec2 est = bilinear_inverse(q.corners, p);
    double u = est.x, v = est.y;
    bool converged = false;
    for (int it = 0; it < 20; ++it) {
      const Vec2 r = patch.eval(u, v) - p;
      const Vec2 ju = patch.du(u, v);
      const Vec2 jv = patch.dv(u, v);
      const double det = ju.x * jv.y - ju.y * jv.x;
      if (std::abs(det) < 1e-12) break;
      const double du = (r.x * jv.y - r.y * jv.x) / det;
      const double dv = (ju.x * r.y - ju.y * r.x) / det;
      u -= du;
      v -= dv;
      if (u < -0.5 || u > 1.5 || v < -0.5 || v > 1.5) break;
      if (std::abs(du) + std::abs(dv) < 1e-6) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      u = est.x;
      v = est.y;
    }
    uv.at(x, y, 0) = static_cast<float>(std::clamp(u, 0.0, 1.0));
    uv.at(x, y, 1) = static_cast<float>(std::clamp(v, 0.0, 1.0));
    solved[static_cast<size_t>(y) * out_w + x] = 1;
    return converged;
  };

  std::vector<int> fallbacks(out_h, 0);
  parallel::for_n(out_h, [&](int y) {
    const auto xs = row_crossings(poly, y);
    for (size_t s = 0; s + 1 < xs.size(); s += 2) {
      const int x0 = std::max(0, static_cast<int>(std::ceil(xs[s])));
      const int x1 = std::min(out_w - 1,
                              static_cast<int>(std::floor(xs[s + 1])));
      for (int x = x0; x <= x1; ++x) fallbacks[y] += !solve_at(x, y);
    }
  });

  // The half-open scanline can skip boundary pixels the polygon only
  // touches (corners, tangent rows). One dilation round reaches every
  // contour pixel, which is a polygon vertex by construction.
  std::vector<std::pair<int, int>> rim;
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) {
      if (solved[static_cast<size_t>(y) * out_w + x]) continue;
      bool adjacent = false;
      for (int dy = -1; dy <= 1 && !adjacent; ++dy)
        for (int dx = -1; dx <= 1 && !adjacent; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= out_w || ny >= out_h) continue;
          adjacent = solved[static_cast<size_t>(ny) * out_w + nx] != 0;
        }
      if (adjacent) rim.emplace_back(x, y);
    }
  std::vector<uint8_t> rim_fell(rim.size(), 0);
  parallel::for_n(static_cast<int>(rim.size()), [&](int i) {
    rim_fell[i] = !solve_at(rim[i].first, rim[i].second);
  });

  int total_fallbacks = 0;
  for (const int f : fallbacks) total_fallbacks += f;
  for (const uint8_t f : rim_fell) total_fallbacks += f;
  if (total_fallbacks > 0)
    log::debug("coons_uv: " + std::to_string(total_fallbacks) +
               " pixels fell back to the bilinear inverse");
  return uv;
}

Raster deilluminate(const Raster& image, const Raster& mask) {
  const Raster lum = luminance(image);
  if (mask.channels() != 1 || mask.width() != lum.width() ||
      mask.height() != lum.height())
    raise(Errc::shape_mismatch, "mask dimensions disagree with the image");

  const int w = lum.width(), h = lum.height();
  size_t on = 0;
  for (const float v : mask.samples()) on += v >= 0.5f;
  if (on == 0) raise(Errc::empty_mask, "deilluminate mask is empty");

  constexpr double kSigma = 15.0;
  const int radius = static_cast<int>(std::ceil(3 * kSigma));
  std::vector<double> kernel(2 * radius + 1);
  double ksum = 0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-double(i) * i / (2 * kSigma * kSigma));
    ksum += kernel[i + radius];
  }
  for (double& k : kernel) k /= ksum;

  // Normalized convolution: blur value*mask and mask with zero padding,
  // then divide, so off-mask pixels never bleed in.
  std::vector<double> num(static_cast<size_t>(w) * h);
  std::vector<double> den(static_cast<size_t>(w) * h);
  for (size_t p = 0; p < num.size(); ++p) {
    const double m = mask.samples()[p] >= 0.5f ? 1.0 : 0.0;
    num[p] = double(lum.samples()[p]) * m;
    den[p] = m;
  }
  auto blur = [&](std::vector<double>& f) {
    std::vector<double> tmp(f.size(), 0.0);
    parallel::for_n(h, [&](int y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0;
        const int i0 = std::max(-radius, -x), i1 = std::min(radius, w - 1 - x);
        for (int i = i0; i <= i1; ++i)
          acc += kernel[i + radius] * f[static_cast<size_t>(y) * w + x + i];
        tmp[static_cast<size_t>(y) * w + x] = acc;
      }
    });
    parallel::for_n(h, [&](int y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0;
        const int i0 = std::max(-radius, -y), i1 = std::min(radius, h - 1 - y);
        for (int i = i0; i <= i1; ++i)
          acc += kernel[i + radius] * tmp[static_cast<size_t>(y + i) * w + x];
        f[static_cast<size_t>(y) * w + x] = acc;
      }
    });
  };
  blur(num);
  blur(den);

  Raster out(w, h, 1);
  double lum_sum = 0, ratio_sum = 0;
  for (size_t p = 0; p < num.size(); ++p) {
    if (mask.samples()[p] < 0.5f) continue;
    const double illum = den[p] > 1e-9 ? num[p] / den[p] : 0.0;
    const double ratio = illum > 1e-6 ? double(lum.samples()[p]) / illum : 0.0;
    out.samples()[p] = static_cast<float>(ratio);
    lum_sum += lum.samples()[p];
    ratio_sum += ratio;
  }
  const double scale = ratio_sum > 1e-12 ? lum_sum / ratio_sum : 1.0;
  for (size_t p = 0; p < num.size(); ++p) {
    if (mask.samples()[p] < 0.5f) continue;
    out.samples()[p] = static_cast<float>(
        std::clamp(double(out.samples()[p]) * scale, 0.0, 1.0));
  }
  return out;
}

EstimatedMaps estimate_pipeline(const Raster& image) {
  const auto t0 = std::chrono::steady_clock::now();
  EstimatedMaps maps;

  auto t = t0;
  maps.mask = staged("estimate_mask", [&] { return estimate_mask(image); });
  maps.timings.mask_s = seconds_since(t);

  t = std::chrono::steady_clock::now();
  const BoundaryQuad quad =
      staged("extract_quad", [&] { return extract_quad(maps.mask); });
  maps.timings.quad_s = seconds_since(t);

  t = std::chrono::steady_clock::now();
  Raster uv = staged("coons_uv", [&] {
    return coons_uv(quad, image.width(), image.height());
  });
  // Restrict to the mask so downstream validity rules see one region.
  maps.df = Raster(image.width(), image.height(), 2);
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) {
      if (maps.mask.at(x, y) < 0.5f) {
        uv.at(x, y, 0) = 0.0f;
        uv.at(x, y, 1) = 0.0f;
        continue;
      }
      // The patch corner legitimately solves to uv (0, 0); on the mask
      // the deformation is defined everywhere, so no sentinel check here.
      maps.df.at(x, y, 0) =
          static_cast<float>(uv.at(x, y, 0) - norm_coord(x, image.width()));
      maps.df.at(x, y, 1) =
          static_cast<float>(uv.at(x, y, 1) - norm_coord(y, image.height()));
    }
  maps.uv = std::move(uv);
  maps.timings.uv_s = seconds_since(t);

  t = std::chrono::steady_clock::now();
  maps.backward = staged("merge_and_convert", [&] {
    return maptrans::merge_and_convert(maps.uv, maps.df, maps.mask,
                                       image.width(), image.height());
  });
  maps.timings.backward_s = seconds_since(t);

  t = std::chrono::steady_clock::now();
  maps.albedo =
      staged("deilluminate", [&] { return deilluminate(image, maps.mask); });
  maps.timings.albedo_s = seconds_since(t);

  maps.timings.total_s = seconds_since(t0);
  return maps;
}

}  // namespace filmrec::estimator
