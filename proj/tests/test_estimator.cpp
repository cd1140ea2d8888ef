#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"

#include "filmrec/core/error.hpp"
#include "filmrec/core/parallel.hpp"
#include "filmrec/core/raster.hpp"
#include "filmrec/estimator/estimator.hpp"
#include "filmrec/maptrans/backward.hpp"
#include "filmrec/metrics/metrics.hpp"
#include "filmrec/sim/mesh.hpp"
#include "filmrec/sim/render.hpp"
#include "filmrec/sim/texture.hpp"
#include "testutil.hpp"

using filmrec::Errc;
using filmrec::Error;
using filmrec::Raster;
using filmrec::Vec2;
using namespace filmrec::estimator;

namespace {

Raster flat_image(int w, int h, float value) { return Raster(w, h, 3, value); }

void fill_rect(Raster& img, int x0, int y0, int x1, int y1, float value) {
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      for (int c = 0; c < img.channels(); ++c) img.at(x, y, c) = value;
}

Raster rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
  Raster m(w, h, 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) m.at(x, y) = 1.0f;
  return m;
}

double iou(const Raster& a, const Raster& b) {
  size_t inter = 0, uni = 0;
  for (size_t p = 0; p < a.size(); ++p) {
    const bool pa = a.samples()[p] >= 0.5f;
    const bool pb = b.samples()[p] >= 0.5f;
    inter += pa && pb;
    uni += pa || pb;
  }
  return uni == 0 ? 1.0 : double(inter) / double(uni);
}

double masked_pearson(const Raster& a, const Raster& b, const Raster& mask) {
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  size_t n = 0;
  for (size_t p = 0; p < mask.size(); ++p) {
    if (mask.samples()[p] < 0.5f) continue;
    const double va = a.samples()[p], vb = b.samples()[p];
    sa += va;
    sb += vb;
    saa += va * va;
    sbb += vb * vb;
    sab += va * vb;
    ++n;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double var_a = saa / n - (sa / n) * (sa / n);
  const double var_b = sbb / n - (sb / n) * (sb / n);
  return cov / std::sqrt(var_a * var_b);
}

// Plane projective map of the unit square onto a quadrilateral; the
// analytic model of a tilted flat film under a pinhole camera.
struct Homography {
  double a, b, c, d, e, f, g, h;

  Vec2 map(double u, double v) const {
    const double w = g * u + h * v + 1.0;
    return {(a * u + b * v + c) / w, (d * u + e * v + f) / w};
  }
};

// Corners in film order (0,0), (1,0), (1,1), (0,1).
Homography square_to_quad(const std::array<Vec2, 4>& p) {
  const double sx = p[0].x - p[1].x + p[2].x - p[3].x;
  const double sy = p[0].y - p[1].y + p[2].y - p[3].y;
  const double a00 = p[1].x - p[2].x, a01 = p[3].x - p[2].x;
  const double a10 = p[1].y - p[2].y, a11 = p[3].y - p[2].y;
  const double det = a00 * a11 - a01 * a10;
  const double g = (sx * a11 - a01 * sy) / det;
  const double h = (a00 * sy - sx * a10) / det;
  return {p[1].x * (1 + g) - p[0].x, p[3].x * (1 + h) - p[0].x, p[0].x,
          p[1].y * (1 + g) - p[0].y, p[3].y * (1 + h) - p[0].y, p[0].y,
          g, h};
}

bool inside_convex_quad(const std::array<Vec2, 4>& corners, const Vec2& p) {
  for (int k = 0; k < 4; ++k) {
    const Vec2 edge = corners[(k + 1) % 4] - corners[k];
    const Vec2 rel = p - corners[k];
    if (edge.x * rel.y - edge.y * rel.x < 0) return false;
  }
  return true;
}

// Arc-length polyline evaluator, written independently of the library so
// the Newton inverse can be checked against a second opinion.
struct TestCurve {
  std::vector<Vec2> pts;
  std::vector<double> cum{0.0};

  explicit TestCurve(const std::vector<Vec2>& p) : pts(p) {
    for (size_t i = 1; i < pts.size(); ++i)
      cum.push_back(cum.back() + (pts[i] - pts[i - 1]).norm());
  }

  Vec2 eval(double t) const {
    const double s = std::clamp(t, 0.0, 1.0) * cum.back();
    size_t i = 1;
    while (i + 1 < cum.size() && cum[i] < s) ++i;
    const double seg = cum[i] - cum[i - 1];
    const double f = seg > 0 ? (s - cum[i - 1]) / seg : 0.0;
    return pts[i - 1] + (pts[i] - pts[i - 1]) * f;
  }
};

Vec2 coons_eval(const BoundaryQuad& q, double u, double v) {
  const TestCurve top(q.edges[0]);
  const TestCurve right(q.edges[1]);
  std::vector<Vec2> brev(q.edges[2].rbegin(), q.edges[2].rend());
  std::vector<Vec2> lrev(q.edges[3].rbegin(), q.edges[3].rend());
  const TestCurve bottom(brev);
  const TestCurve left(lrev);
  const Vec2 c00 = q.corners[0], c10 = q.corners[1];
  const Vec2 c11 = q.corners[2], c01 = q.corners[3];
  return top.eval(u) * (1 - v) + bottom.eval(u) * v +
         left.eval(v) * (1 - u) + right.eval(v) * u -
         (c00 * ((1 - u) * (1 - v)) + c10 * (u * (1 - v)) +
          c01 * ((1 - u) * v) + c11 * (u * v));
}

filmrec::sim::Sample lit_sample(uint64_t seed, double ambient, double diffuse,
                                double deform, double tilt, int res = 128) {
  filmrec::sim::SceneConfig scene;
  scene.out_w = scene.out_h = res;
  scene.fill = 0.7;
  scene.ambient = ambient;
  scene.diffuse = diffuse;
  scene.deform_amp = deform;
  scene.tilt_deg_max = tilt;
  const Raster tex = filmrec::sim::gen_texture({4, 4, 24, 8, seed});
  filmrec::sim::Sample s = filmrec::sim::render_sample(
      tex, filmrec::sim::gen_mesh(scene, seed), scene);
  s.meta.seed = seed;
  return s;
}

// Pixels on the mask whose full (2r+1)^2 neighborhood is also on it.
bool deep_inside(const Raster& mask, int x, int y, int r) {
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const int nx = x + dx, ny = y + dy;
      if (nx < 0 || ny < 0 || nx >= mask.width() || ny >= mask.height())
        return false;
      if (mask.at(nx, ny) < 0.5f) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("estimate_mask recovers a bright rectangle exactly") {
  Raster img = flat_image(64, 64, 0.1f);
  fill_rect(img, 16, 20, 47, 43, 0.9f);
  const Raster mask = estimate_mask(img);
  const Raster expected = rect_mask(64, 64, 16, 20, 47, 43);
  CHECK(testutil::bit_identical(mask, expected));
  for (const float v : mask.samples()) CHECK((v == 0.0f || v == 1.0f));
}

TEST_CASE("estimate_mask keeps the largest component and fills holes") {
  Raster img = flat_image(96, 96, 0.08f);
  fill_rect(img, 10, 10, 60, 70, 0.85f);
  fill_rect(img, 25, 30, 40, 45, 0.12f);
  fill_rect(img, 70, 8, 90, 20, 0.85f);
  const Raster mask = estimate_mask(img);
  const Raster expected = rect_mask(96, 96, 10, 10, 60, 70);
  CHECK(testutil::bit_identical(mask, expected));
}

TEST_CASE("estimate_mask rejects images with no foreground") {
  const Raster black = flat_image(32, 32, 0.0f);
  CHECK_THROWS_AS(estimate_mask(black), Error);
  try {
    estimate_mask(black);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_component_found);
  }
  CHECK_THROWS_AS(estimate_mask(flat_image(2, 2, 0.5f)), Error);
}

TEST_CASE("estimate_mask is idempotent on binary input") {
  const Raster rect = rect_mask(48, 40, 7, 5, 39, 33);
  CHECK(testutil::bit_identical(estimate_mask(rect), rect));

  const filmrec::sim::Sample s = lit_sample(11, 0.55, 0.45, 0.05, 10);
  CHECK(testutil::bit_identical(estimate_mask(s.bgmask), s.bgmask));
}

TEST_CASE("estimate_mask agrees with the simulator ground truth") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const filmrec::sim::Sample s = lit_sample(seed, 0.55, 0.45, 0.05, 12);
    const Raster mask = estimate_mask(s.image);
    CHECK(iou(mask, s.bgmask) >= 0.95);
  }
}

TEST_CASE("extract_quad finds exact corners of an axis-aligned rectangle") {
  const Raster mask = rect_mask(96, 96, 12, 20, 83, 75);
  const BoundaryQuad q = extract_quad(mask);
  CHECK(q.corners[0].x == 12.0);
  CHECK(q.corners[0].y == 20.0);
  CHECK(q.corners[1].x == 83.0);
  CHECK(q.corners[1].y == 20.0);
  CHECK(q.corners[2].x == 83.0);
  CHECK(q.corners[2].y == 75.0);
  CHECK(q.corners[3].x == 12.0);
  CHECK(q.corners[3].y == 75.0);

  // Edges partition the contour: consecutive endpoints coincide with the
  // corner ring.
  for (int k = 0; k < 4; ++k) {
    CHECK(q.edges[k].front().x == q.corners[k].x);
    CHECK(q.edges[k].front().y == q.corners[k].y);
    CHECK(q.edges[k].back().x == q.corners[(k + 1) % 4].x);
    CHECK(q.edges[k].back().y == q.corners[(k + 1) % 4].y);
    CHECK(q.edges[k].size() >= 2);
  }
}

TEST_CASE("extract_quad recovers rotated rectangle corners within 2 px") {
  const double th = 30.0 * std::acos(-1.0) / 180.0;
  const double cs = std::cos(th), sn = std::sin(th);
  const Vec2 center{48.0, 48.0};
  const double ha = 30.0, hb = 18.0;

  Raster mask(96, 96, 1);
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x) {
      const double rx = (x - center.x) * cs + (y - center.y) * sn;
      const double ry = -(x - center.x) * sn + (y - center.y) * cs;
      if (std::abs(rx) <= ha && std::abs(ry) <= hb) mask.at(x, y) = 1.0f;
    }

  auto corner = [&](double ax, double ay) {
    return Vec2{center.x + ax * cs - ay * sn, center.y + ax * sn + ay * cs};
  };
  const std::array<Vec2, 4> expected = {corner(-ha, -hb), corner(ha, -hb),
                                        corner(ha, hb), corner(-ha, hb)};

  const BoundaryQuad q = extract_quad(mask);
  for (int k = 0; k < 4; ++k)
    CHECK((q.corners[k] - expected[k]).norm() <= 2.0);
}

TEST_CASE("extract_quad rejects a circle") {
  Raster mask(96, 96, 1);
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x)
      if ((x - 48.0) * (x - 48.0) + (y - 48.0) * (y - 48.0) <= 35.0 * 35.0)
        mask.at(x, y) = 1.0f;
  try {
    extract_quad(mask);
    CHECK_MESSAGE(false, "expected corner_detection_failed");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::corner_detection_failed);
  }
}

TEST_CASE("coons_uv reproduces the identity parameterization on a rectangle") {
  const int x0 = 12, y0 = 20, x1 = 83, y1 = 75;
  const Raster mask = rect_mask(96, 96, x0, y0, x1, y1);
  const BoundaryQuad q = extract_quad(mask);
  const Raster uv = coons_uv(q, 96, 96);

  double worst = 0.0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double u = double(x - x0) / (x1 - x0);
      const double v = double(y - y0) / (y1 - y0);
      worst = std::max(worst, std::abs(uv.at(x, y, 0) - u));
      worst = std::max(worst, std::abs(uv.at(x, y, 1) - v));
    }
  CHECK(worst <= 1e-4);

  // Pixels outside the quad stay at the zero default.
  CHECK(uv.at(2, 2, 0) == 0.0f);
  CHECK(uv.at(95, 95, 1) == 0.0f);
}

TEST_CASE("coons_uv round-trips through an independent patch evaluation") {
  const std::array<Vec2, 4> corners = {Vec2{10, 12}, Vec2{85, 10},
                                       Vec2{88, 80}, Vec2{8, 84}};
  BoundaryQuad q;
  q.corners = corners;
  for (int k = 0; k < 4; ++k) {
    const Vec2 a = corners[k], b = corners[(k + 1) % 4];
    const Vec2 dir = b - a;
    const Vec2 n = Vec2{-dir.y, dir.x} * (1.0 / dir.norm());
    const int m = 40;
    for (int i = 0; i <= m; ++i) {
      const double t = double(i) / m;
      q.edges[k].push_back(a + dir * t +
                           n * (4.0 * std::sin(std::acos(-1.0) * t)));
    }
  }

  std::vector<Vec2> poly;
  for (const auto& e : q.edges)
    for (size_t i = 0; i + 1 < e.size(); ++i) poly.push_back(e[i]);
  auto boundary_dist = [&](const Vec2& p) {
    double best = 1e9;
    for (size_t i = 0; i < poly.size(); ++i) {
      const Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
      const Vec2 ab = b - a;
      const double t =
          std::clamp((p - a).dot(ab) / ab.norm2(), 0.0, 1.0);
      best = std::min(best, (p - (a + ab * t)).norm());
    }
    return best;
  };

  const Raster uv = coons_uv(q, 96, 96);
  size_t checked = 0;
  double worst_interior = 0.0, worst_any = 0.0;
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x) {
      const float u = uv.at(x, y, 0), v = uv.at(x, y, 1);
      if (u == 0.0f && v == 0.0f) continue;
      const Vec2 back = coons_eval(q, u, v);
      const double err = (back - Vec2(x, y)).norm();
      worst_any = std::max(worst_any, err);
      if (boundary_dist(Vec2(x, y)) >= 1.5) {
        worst_interior = std::max(worst_interior, err);
        ++checked;
      }
    }
  CHECK(checked > 4000);
  CHECK(worst_interior <= 1e-3);
  // Rim pixels clamp to the patch edge or fall back to the bilinear
  // inverse, which ignores the 4 px edge bulges; stay within that scale.
  CHECK(worst_any <= 6.0);
}

TEST_CASE("coons_uv validates its inputs") {
  const Raster mask = rect_mask(32, 32, 4, 4, 27, 27);
  const BoundaryQuad q = extract_quad(mask);
  CHECK_THROWS_AS(coons_uv(q, 0, 32), Error);

  BoundaryQuad broken = q;
  broken.edges[2] = {broken.corners[2]};
  try {
    coons_uv(broken, 32, 32);
    CHECK_MESSAGE(false, "expected degenerate_geometry");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate_geometry);
  }
}

TEST_CASE("estimated backward map matches an analytic homography") {
  const int res = 256;
  const std::array<Vec2, 4> quad = {Vec2{36, 32}, Vec2{220, 38},
                                    Vec2{212, 212}, Vec2{30, 207}};
  const Homography H = square_to_quad(quad);
  CHECK((H.map(1, 1) - quad[2]).norm() <= 1e-9);

  Raster img = flat_image(res, res, 0.06f);
  for (int y = 0; y < res; ++y)
    for (int x = 0; x < res; ++x)
      if (inside_convex_quad(quad, Vec2(x, y)))
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = 0.85f;

  const EstimatedMaps maps = estimate_pipeline(img);
  double worst = 0.0, sum = 0.0;
  for (int ty = 0; ty < res; ++ty)
    for (int tx = 0; tx < res; ++tx) {
      const Vec2 truth = H.map(filmrec::norm_coord(tx, res),
                               filmrec::norm_coord(ty, res));
      const Vec2 est{filmrec::denorm_coord(maps.backward.at(tx, ty, 0), res),
                     filmrec::denorm_coord(maps.backward.at(tx, ty, 1), res)};
      const double err = (est - truth).norm();
      worst = std::max(worst, err);
      sum += err;
    }
  CHECK(worst <= 2.0);
  CHECK(sum / (double(res) * res) <= 1.0);
}

TEST_CASE("coons uv tracks the ground truth on a tilt-dominant sample") {
  const filmrec::sim::Sample s = lit_sample(5, 0.6, 0.4, 0.015, 10);
  const Raster mask = estimate_mask(s.image);
  const Raster uv = coons_uv(extract_quad(mask), s.image.width(),
                             s.image.height());

  double sum = 0.0;
  size_t n = 0;
  for (int y = 0; y < s.image.height(); ++y)
    for (int x = 0; x < s.image.width(); ++x) {
      if (!deep_inside(mask, x, y, 6)) continue;
      if (s.uv.at(x, y, 0) == 0.0f && s.uv.at(x, y, 1) == 0.0f) continue;
      const Vec2 d{uv.at(x, y, 0) - s.uv.at(x, y, 0),
                   uv.at(x, y, 1) - s.uv.at(x, y, 1)};
      sum += d.norm();
      ++n;
    }
  CHECK(n > 1000);
  CHECK(sum / double(n) <= 0.02);
}

TEST_CASE("deilluminate keeps a constant image constant") {
  const Raster img = flat_image(128, 128, 0.5f);
  const Raster mask(128, 128, 1, 1.0f);
  const Raster out = deilluminate(img, mask);
  float lo = 1.0f, hi = 0.0f;
  for (const float v : out.samples()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi - lo <= 1e-6f);
  CHECK(lo == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("deilluminate recovers albedo up to scale under ambient light") {
  // The ratio against the sigma-15 blur removes whatever low-frequency
  // content the albedo itself has, so the attainable correlation depends
  // on the texture granularity. A 6x6 grid of 16 px cells keeps features
  // below the blur scale; measured minimum 0.977 over 10 seeds.
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    filmrec::sim::SceneConfig scene;
    scene.out_w = scene.out_h = 128;
    scene.fill = 0.7;
    scene.ambient = 1.0;
    scene.diffuse = 0.0;
    scene.deform_amp = 0.05;
    scene.tilt_deg_max = 8;
    const Raster tex = filmrec::sim::gen_texture({6, 6, 16, 6, seed});
    const filmrec::sim::Sample s = filmrec::sim::render_sample(
        tex, filmrec::sim::gen_mesh(scene, seed), scene);
    const Raster out = deilluminate(s.image, s.bgmask);
    CHECK(masked_pearson(out, s.albedo, s.bgmask) >= 0.97);
  }
}

TEST_CASE("deilluminate flattens a smooth shading gradient") {
  const int w = 128, h = 128;
  Raster img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float shade = 0.6f + 0.2f * float(x) / (w - 1);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = 0.8f * shade;
    }
  const Raster mask(w, h, 1, 1.0f);
  const Raster out = deilluminate(img, mask);

  // Flat away from a 2-sigma border band where the blur window is clipped.
  double lo = 1e9, hi = 0.0, sum = 0.0;
  size_t n = 0;
  for (int y = 30; y < h - 30; ++y)
    for (int x = 30; x < w - 30; ++x) {
      const double v = out.at(x, y);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
      ++n;
    }
  CHECK((hi - lo) / (sum / double(n)) <= 0.05);

  // The rescale step preserves the masked mean of the luminance.
  double mean_in = 0.0, mean_out = 0.0;
  const Raster lum = filmrec::luminance(img);
  for (size_t p = 0; p < lum.size(); ++p) {
    mean_in += lum.samples()[p];
    mean_out += out.samples()[p];
  }
  CHECK(mean_out / lum.size() ==
        doctest::Approx(mean_in / lum.size()).epsilon(1e-6));
}

TEST_CASE("deilluminate validates the mask") {
  const Raster img = flat_image(32, 32, 0.5f);
  try {
    deilluminate(img, Raster(32, 32, 1));
    CHECK_MESSAGE(false, "expected empty_mask");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_mask);
  }
  CHECK_THROWS_AS(deilluminate(img, Raster(16, 32, 1, 1.0f)), Error);
}

TEST_CASE("estimate_pipeline is deterministic across thread counts") {
  const filmrec::sim::Sample s = lit_sample(9, 0.55, 0.45, 0.04, 10, 96);

  filmrec::parallel::set_max_threads(4);
  const EstimatedMaps a = estimate_pipeline(s.image);
  filmrec::parallel::set_max_threads(1);
  const EstimatedMaps b = estimate_pipeline(s.image);
  filmrec::parallel::set_max_threads(0);

  CHECK(testutil::bit_identical(a.mask, b.mask));
  CHECK(testutil::bit_identical(a.uv, b.uv));
  CHECK(testutil::bit_identical(a.df, b.df));
  CHECK(testutil::bit_identical(a.backward, b.backward));
  CHECK(testutil::bit_identical(a.albedo, b.albedo));
}

TEST_CASE("estimate_pipeline labels the failing stage") {
  try {
    estimate_pipeline(flat_image(64, 64, 0.0f));
    CHECK_MESSAGE(false, "expected no_component_found");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_component_found);
    CHECK(std::string(e.what()).find("estimate_mask") != std::string::npos);
  }
}

TEST_CASE("estimate_pipeline recovers more content than a plain crop") {
  int wins = 0;
  double gap = 0.0;
  for (uint64_t seed = 31; seed <= 35; ++seed) {
    const filmrec::sim::Sample s = lit_sample(seed, 0.5, 0.5, 0.03, 10);
    const int w = s.image.width(), h = s.image.height();
    const EstimatedMaps maps = estimate_pipeline(s.image);

    const Raster reference =
        filmrec::maptrans::apply_backward(s.backward_gt, s.albedo);
    const Raster recovered =
        filmrec::maptrans::apply_backward(maps.backward, maps.albedo);

    // Baseline: crop the film bounding box without any dewarping.
    int x0 = w, y0 = h, x1 = 0, y1 = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (s.bgmask.at(x, y) >= 0.5f) {
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          x1 = std::max(x1, x);
          y1 = std::max(y1, y);
        }
    Raster crop_map(w, h, 2);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double sx = x0 + filmrec::norm_coord(x, w) * (x1 - x0 + 1) - 0.5;
        const double sy = y0 + filmrec::norm_coord(y, h) * (y1 - y0 + 1) - 0.5;
        crop_map.at(x, y, 0) = float(filmrec::norm_coord(sx, w));
        crop_map.at(x, y, 1) = float(filmrec::norm_coord(sy, h));
      }
    const Raster baseline = filmrec::maptrans::apply_backward(
        crop_map, filmrec::luminance(s.image));

    const double p_rec = filmrec::metrics::psnr(recovered, reference);
    const double p_base = filmrec::metrics::psnr(baseline, reference);
    wins += p_rec > p_base;
    gap += p_rec - p_base;
  }
  CHECK(wins >= 4);
  CHECK(gap > 0.0);
}

TEST_CASE("estimate_pipeline reports stage timings") {
  const filmrec::sim::Sample s = lit_sample(2, 0.55, 0.45, 0.03, 8, 256);
  const EstimatedMaps maps = estimate_pipeline(s.image);
  CHECK(maps.timings.mask_s >= 0.0);
  CHECK(maps.timings.quad_s >= 0.0);
  CHECK(maps.timings.uv_s >= 0.0);
  CHECK(maps.timings.backward_s >= 0.0);
  CHECK(maps.timings.albedo_s >= 0.0);
  CHECK(maps.timings.total_s >= maps.timings.uv_s);
  CHECK(maps.timings.total_s < 5.0);
  CHECK(maps.uv.width() == 256);
  CHECK(maps.backward.channels() == 2);
}
