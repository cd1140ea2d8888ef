#include "filmrec/maptrans/contour.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "filmrec/core/error.hpp"

namespace filmrec::maptrans {

namespace {

// Clockwise 8-neighborhood in y-down image coordinates, starting west.
constexpr int kDx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

bool fg(const Raster& mask, int x, int y) {
  if (x < 0 || y < 0 || x >= mask.width() || y >= mask.height()) return false;
  return mask.at(x, y) >= 0.5f;
}

// Label grid for the largest 8-connected component; returns its first
// pixel in row-major order, or (-1,-1) when the mask is empty.
std::pair<int, int> largest_component(const Raster& mask,
                                      std::vector<char>& keep) {
  const int w = mask.width(), h = mask.height();
  std::vector<int> label(static_cast<size_t>(w) * h, -1);
  int best_label = -1, best_size = 0, next = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!fg(mask, x, y) || label[static_cast<size_t>(y) * w + x] >= 0)
        continue;
      int size = 0;
      std::queue<std::pair<int, int>> q;
      q.push({x, y});
      label[static_cast<size_t>(y) * w + x] = next;
      while (!q.empty()) {
        const auto [cx, cy] = q.front();
        q.pop();
        ++size;
        for (int k = 0; k < 8; ++k) {
          const int nx = cx + kDx[k], ny = cy + kDy[k];
          if (!fg(mask, nx, ny)) continue;
          int& l = label[static_cast<size_t>(ny) * w + nx];
          if (l >= 0) continue;
          l = next;
          q.push({nx, ny});
        }
      }
      if (size > best_size) {
        best_size = size;
        best_label = next;
      }
      ++next;
    }
  }
  if (best_label < 0) return {-1, -1};
  keep.assign(static_cast<size_t>(w) * h, 0);
  std::pair<int, int> first{-1, -1};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (label[static_cast<size_t>(y) * w + x] == best_label) {
        keep[static_cast<size_t>(y) * w + x] = 1;
        if (first.first < 0) first = {x, y};
      }
  return first;
}

}  // namespace

std::vector<Vec2> trace_largest_contour(const Raster& mask) {
  std::vector<char> keep;
  const auto [sx, sy] = largest_component(mask, keep);
  if (sx < 0) raise(Errc::empty_mask, "mask has no foreground pixels");
  const int w = mask.width();
  auto on = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < w && y < mask.height() &&
           keep[static_cast<size_t>(y) * w + x];
  };

  // Moore neighbor tracing with Jacob's stopping criterion. The start pixel
  // is the row-major first, so its west neighbor is guaranteed background.
  std::vector<Vec2> contour;
  int cx = sx, cy = sy;
  int back = 0;  // direction from current pixel toward the backtrack cell
  contour.push_back({double(sx), double(sy)});
  auto dir_index = [](int vx, int vy) {
    for (int k = 0; k < 8; ++k)
      if (kDx[k] == vx && kDy[k] == vy) return k;
    return 0;
  };
  const size_t cap = 8 * keep.size() + 16;
  for (size_t step = 0; step < cap; ++step) {
    int found = -1, prev = back;
    for (int k = 1; k <= 8; ++k) {
      const int dir = (back + k) % 8;
      if (on(cx + kDx[dir], cy + kDy[dir])) {
        found = dir;
        break;
      }
      prev = dir;
    }
    if (found < 0) break;  // isolated pixel
    // The last background neighbor scanned becomes the new backtrack; ring
    // neighbors are 8-adjacent, so the difference is again a direction.
    const int nb = dir_index(kDx[prev] - kDx[found], kDy[prev] - kDy[found]);
    cx += kDx[found];
    cy += kDy[found];
    back = nb;
    if (cx == sx && cy == sy) break;
    contour.push_back({double(cx), double(cy)});
  }
  return contour;
}

namespace {

double perp_dist(const Vec2& a, const Vec2& b, const Vec2& p) {
  const double ex = b.x - a.x, ey = b.y - a.y;
  const double len = std::sqrt(ex * ex + ey * ey);
  if (len < 1e-12) return std::hypot(p.x - a.x, p.y - a.y);
  return std::abs(ex * (p.y - a.y) - ey * (p.x - a.x)) / len;
}

// Max-deviation vertex on the open arc between corner indices i and j
// (cyclic). Returns {-1, 0} for empty arcs.
std::pair<int, double> arc_peak(const std::vector<Vec2>& c, int i, int j) {
  const int n = static_cast<int>(c.size());
  int best = -1;
  double best_d = 0;
  for (int k = (i + 1) % n; k != j; k = (k + 1) % n) {
    const double d = perp_dist(c[i], c[j], c[k]);
    if (d > best_d) {
      best_d = d;
      best = k;
    }
  }
  return {best, best_d};
}

}  // namespace

std::array<int, 4> dominant_quad_corners(const std::vector<Vec2>& contour) {
  const int n = static_cast<int>(contour.size());
  if (n < 8)
    raise(Errc::corner_detection_failed,
          "contour has only " + std::to_string(n) + " points");

  // Farthest pair seeds the first two corners.
  int p0 = 0, p1 = 1;
  double best = -1;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dx = contour[i].x - contour[j].x;
      const double dy = contour[i].y - contour[j].y;
      const double d = dx * dx + dy * dy;
      if (d > best) {
        best = d;
        p0 = i;
        p1 = j;
      }
    }
  const double diameter = std::sqrt(best);
  if (diameter < 4)
    raise(Errc::corner_detection_failed, "region too small for corners");

  std::vector<int> corners{p0, p1};
  while (corners.size() < 4) {
    std::sort(corners.begin(), corners.end());
    int best_k = -1;
    double best_d = -1;
    const int m = static_cast<int>(corners.size());
    for (int e = 0; e < m; ++e) {
      const auto [k, d] =
          arc_peak(contour, corners[e], corners[(e + 1) % m]);
      if (k >= 0 && d > best_d) {
        best_d = d;
        best_k = k;
      }
    }
    if (best_k < 0)
      raise(Errc::corner_detection_failed, "degenerate contour arcs");
    corners.push_back(best_k);
  }
  std::sort(corners.begin(), corners.end());

  // A quadrilateral leaves nearly straight arcs between corners; a smooth
  // blob keeps bulging and is rejected.
  double residual = 0;
  for (int e = 0; e < 4; ++e)
    residual = std::max(
        residual, arc_peak(contour, corners[e], corners[(e + 1) % 4]).second);
  if (residual > 0.10 * diameter)
    raise(Errc::corner_detection_failed,
          "boundary is not quadrilateral (residual deviation " +
              std::to_string(residual) + " px)");

  return {corners[0], corners[1], corners[2], corners[3]};
}

}  // namespace filmrec::maptrans
