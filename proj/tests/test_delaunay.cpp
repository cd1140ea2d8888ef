// Triangulation checked against independent oracles: hull area from a
// monotone-chain hull, and a brute-force empty-circumcircle test built on the
// circumcenter formula rather than the incircle determinant.
#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "filmrec/core/error.hpp"
#include "filmrec/core/rng.hpp"
#include "filmrec/maptrans/delaunay.hpp"

using filmrec::Errc;
using filmrec::Error;
using filmrec::Rng;
using filmrec::Vec2;
using filmrec::maptrans::Delaunay;

namespace {

double cross3(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Monotone chain; strictly convex corners only.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) {
                          return a.x == b.x && a.y == b.y;
                        }),
            pts.end());
  const int n = static_cast<int>(pts.size());
  if (n < 3) return pts;
  std::vector<Vec2> hull(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && cross3(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (int i = n - 2, lower = k + 1; i >= 0; --i) {
    while (k >= lower && cross3(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(const std::vector<Vec2>& poly) {
  double acc = 0;
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    acc += a.x * b.y - a.y * b.x;
  }
  return acc / 2;
}

double tri_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return cross3(a, b, c) / 2;
}

struct Circum {
  long double x, y, r2;
};

Circum circumcircle(const Vec2& a, const Vec2& b, const Vec2& c) {
  const long double ax = a.x, ay = a.y, bx = b.x, by = b.y, cx = c.x, cy = c.y;
  const long double d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
  const long double a2 = ax * ax + ay * ay;
  const long double b2 = bx * bx + by * by;
  const long double c2 = cx * cx + cy * cy;
  const long double ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
  const long double uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
  const long double dx = ux - ax, dy = uy - ay;
  return {ux, uy, dx * dx + dy * dy};
}

double span_of(const std::vector<Vec2>& pts) {
  double lo_x = pts[0].x, hi_x = pts[0].x, lo_y = pts[0].y, hi_y = pts[0].y;
  for (const auto& p : pts) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  return std::max(hi_x - lo_x, hi_y - lo_y);
}

// Checks the three structural oracles: positive-area CCW triangles, edge
// multiplicity at most 2, and triangle areas summing to the hull area.
void check_tessellation(const Delaunay& d) {
  const auto& pts = d.points();
  const auto& tris = d.triangles();
  REQUIRE(!tris.empty());

  const double span = span_of(pts);
  double tri_sum = 0;
  std::vector<std::pair<int, int>> edges;
  for (const auto& t : tris) {
    for (int i = 0; i < 3; ++i) {
      REQUIRE(t.v[i] >= 0);
      REQUIRE(t.v[i] < static_cast<int>(pts.size()));
      const int a = t.v[i], b = t.v[(i + 1) % 3];
      edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    const double area = tri_area(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]]);
    CHECK(area > 0);
    tri_sum += area;
  }

  std::sort(edges.begin(), edges.end());
  for (size_t i = 0; i + 2 < edges.size(); ++i)
    CHECK((edges[i] != edges[i + 1] || edges[i + 1] != edges[i + 2]));

  std::vector<Vec2> live;
  for (size_t i = 0; i < pts.size(); ++i)
    if (d.representative()[i] == static_cast<int>(i)) live.push_back(pts[i]);
  const double hull_area = polygon_area(convex_hull(live));
  CHECK(tri_sum == doctest::Approx(hull_area).epsilon(1e-9));
  CHECK(span > 0);
}

// Brute-force Delaunay check: no live point strictly inside any circumcircle.
// Slack absorbs the builder's cocircular tie handling and rounding.
void check_empty_circles(const Delaunay& d) {
  const auto& pts = d.points();
  const auto& tris = d.triangles();
  const long double span = span_of(pts);
  const long double slack = 1e-7L * span * span;
  for (const auto& t : tris) {
    const Circum cc =
        circumcircle(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]]);
    for (size_t i = 0; i < pts.size(); ++i) {
      const int rep = d.representative()[i];
      if (rep == t.v[0] || rep == t.v[1] || rep == t.v[2]) continue;
      const long double dx = pts[i].x - cc.x, dy = pts[i].y - cc.y;
      CHECK(dx * dx + dy * dy >= cc.r2 - slack);
    }
  }
}

std::vector<Vec2> random_points(int n, uint64_t seed, double scale) {
  Rng rng(seed);
  std::vector<Vec2> pts(n);
  for (auto& p : pts) p = {rng.uniform(0.0, scale), rng.uniform(0.0, scale)};
  return pts;
}

}  // namespace

TEST_CASE("triangulation of a unit square is two triangles covering it") {
  const std::vector<Vec2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  Delaunay d(pts);
  CHECK(d.triangles().size() == 2);
  check_tessellation(d);
  check_empty_circles(d);
}

TEST_CASE("random point sets satisfy hull cover and empty circumcircles") {
  for (uint64_t seed : {1u, 2u, 3u, 4u}) {
    const auto pts = random_points(60, seed, 100.0);
    Delaunay d(pts);
    check_tessellation(d);
    check_empty_circles(d);
    // General position: every point shows up in the mesh.
    const size_t expect_tris = 2 * pts.size() - 2 - convex_hull(pts).size();
    CHECK(d.triangles().size() == expect_tris);
  }
}

TEST_CASE("larger random set keeps the invariants") {
  const auto pts = random_points(400, 77, 1.0);
  Delaunay d(pts);
  check_tessellation(d);
}

TEST_CASE("exact lattice triangulates despite cocircular quadruples") {
  std::vector<Vec2> pts;
  for (int j = 0; j <= 16; ++j)
    for (int i = 0; i <= 16; ++i)
      pts.push_back({i * 16.0, j * 16.0});
  Delaunay d(pts);
  // 289 points, 64 on the boundary: Euler gives 512 triangles.
  CHECK(d.triangles().size() == 512);
  check_tessellation(d);
  check_empty_circles(d);
}

TEST_CASE("points on a circle are one fan of the convex polygon") {
  std::vector<Vec2> pts;
  for (int i = 0; i < 24; ++i) {
    const double a = 2 * 3.141592653589793 * i / 24;
    pts.push_back({std::cos(a) * 50, std::sin(a) * 50});
  }
  Delaunay d(pts);
  CHECK(d.triangles().size() == 22);
  check_tessellation(d);
}

TEST_CASE("duplicate points collapse onto one representative") {
  auto pts = random_points(50, 9, 10.0);
  const auto base = pts;
  pts.insert(pts.end(), base.begin(), base.end());
  Delaunay d(pts);
  for (int i = 0; i < 50; ++i) {
    CHECK(d.representative()[i] == d.representative()[i + 50]);
    CHECK(d.representative()[i] < 50);
  }
  check_tessellation(d);
  check_empty_circles(d);
}

TEST_CASE("degenerate inputs are rejected") {
  const std::vector<Vec2> two{{0, 0}, {1, 1}};
  CHECK_THROWS_AS(Delaunay{two}, Error);

  std::vector<Vec2> collinear;
  for (int i = 0; i < 10; ++i) collinear.push_back({i * 1.0, i * 2.0});
  try {
    Delaunay d(collinear);
    FAIL("collinear input must throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate_geometry);
  }

  const std::vector<Vec2> bad{{0, 0}, {1, 0}, {0, std::nan("")}};
  CHECK_THROWS_AS(Delaunay{bad}, Error);
}
