#include "filmrec/maptrans/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "filmrec/core/error.hpp"
#include "filmrec/core/rng.hpp"

namespace filmrec::maptrans {

namespace {

// Working triangle: v[i] CCW, n[i] = neighbor across the edge opposite v[i].
struct WorkTri {
  int v[3];
  int n[3];
  bool alive = true;
};

struct P {
  long double x, y;
};

// > 0 when (a,b,c) is counter-clockwise.
long double orient(const P& a, const P& b, const P& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// > 0 when d lies strictly inside the circumcircle of CCW triangle (a,b,c).
long double incircle(const P& a, const P& b, const P& c, const P& d) {
  const long double adx = a.x - d.x, ady = a.y - d.y;
  const long double bdx = b.x - d.x, bdy = b.y - d.y;
  const long double cdx = c.x - d.x, cdy = c.y - d.y;
  const long double ad2 = adx * adx + ady * ady;
  const long double bd2 = bdx * bdx + bdy * bdy;
  const long double cd2 = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd2 - cdy * bd2) - ady * (bdx * cd2 - cdx * bd2) +
         ad2 * (bdx * cdy - cdx * bdy);
}

class Builder {
 public:
  Builder(std::span<const Vec2> input, std::vector<int>& representative)
      : n_input_(static_cast<int>(input.size())) {
    // Translate into a local frame around the centroid-ish bbox center to
    // keep predicate magnitudes small.
    long double lo_x = std::numeric_limits<long double>::max(), lo_y = lo_x;
    long double hi_x = -lo_x, hi_y = -lo_x;
    for (const auto& p : input) {
      lo_x = std::min<long double>(lo_x, p.x);
      lo_y = std::min<long double>(lo_y, p.y);
      hi_x = std::max<long double>(hi_x, p.x);
      hi_y = std::max<long double>(hi_y, p.y);
    }
    const long double cx = (lo_x + hi_x) / 2, cy = (lo_y + hi_y) / 2;
    span_ = std::max<long double>({hi_x - lo_x, hi_y - lo_y, 1e-9L});
    pts_.resize(input.size());
    for (size_t i = 0; i < input.size(); ++i)
      pts_[i] = {static_cast<long double>(input[i].x) - cx,
                 static_cast<long double>(input[i].y) - cy};

    // Super-triangle well clear of the data.
    const long double r = 1024 * span_;
    const int s0 = add_point({0, -2 * r});
    const int s1 = add_point({2 * r, 2 * r});
    const int s2 = add_point({-2 * r, 2 * r});
    super_base_ = s0;
    tris_.push_back({{s0, s1, s2}, {-1, -1, -1}, true});

    // Deterministic shuffled insertion order for the expected O(n log n).
    std::vector<int> order(n_input_);
    for (int i = 0; i < n_input_; ++i) order[i] = i;
    Rng rng(0x5eedf00d);
    for (int i = n_input_ - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_int(i + 1)]);

    representative.assign(n_input_, -1);
    for (int idx : order) representative[idx] = insert(idx);
    // Duplicates point at the vertex that actually entered the mesh.
    for (int i = 0; i < n_input_; ++i)
      if (representative[i] != i) representative[i] = representative[representative[i]];
  }

  void finalize(std::span<const Vec2> input, std::vector<Vec2>& points,
                std::vector<Triangle>& triangles) const {
    points.assign(input.begin(), input.end());
    triangles.clear();
    for (const auto& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= super_base_ || t.v[1] >= super_base_ ||
          t.v[2] >= super_base_)
        continue;
      triangles.push_back({{t.v[0], t.v[1], t.v[2]}});
    }
    if (triangles.empty())
      raise(Errc::degenerate_geometry,
            "all interpolation sites are collinear or coincident");
  }

 private:
  int add_point(P p) {
    pts_.push_back(p);
    return static_cast<int>(pts_.size()) - 1;
  }

  // Inserts input point idx; returns the representative vertex (idx itself,
  // or an earlier coincident vertex).
  int insert(int idx) {
    const P p = pts_[idx];
    int t = locate(p);

    // Coincident with an existing vertex: drop.
    const long double merge_tol = 1e-12L * span_;
    for (int i = 0; i < 3; ++i) {
      const P& q = pts_[tris_[t].v[i]];
      if (std::abs(q.x - p.x) <= merge_tol && std::abs(q.y - p.y) <= merge_tol)
        return tris_[t].v[i];
    }

    // On-edge split when the point is (numerically) on one edge of t.
    const long double edge_tol = 1e-12L * span_ * span_;
    int on_edge = -1;
    for (int i = 0; i < 3; ++i) {
      const P& a = pts_[tris_[t].v[(i + 1) % 3]];
      const P& b = pts_[tris_[t].v[(i + 2) % 3]];
      if (std::abs(orient(a, b, p)) <= edge_tol) {
        on_edge = i;
        break;
      }
    }

    if (on_edge >= 0 && tris_[t].n[on_edge] >= 0)
      split_edge(t, on_edge, idx);
    else
      split_triangle(t, idx);
    return idx;
  }

  // Walk toward p by repeatedly crossing the first edge that has p strictly
  // on its outer side. Falls back to a scan if the walk cycles.
  int locate(const P& p) const {
    int t = hint_;
    if (t < 0 || !tris_[t].alive) t = first_alive();
    const size_t max_steps = 4 * tris_.size() + 64;
    int prev = -1;
    for (size_t step = 0; step < max_steps; ++step) {
      int next = -1;
      for (int i = 0; i < 3; ++i) {
        const int nb = tris_[t].n[i];
        if (nb < 0 || nb == prev) continue;
        const P& a = pts_[tris_[t].v[(i + 1) % 3]];
        const P& b = pts_[tris_[t].v[(i + 2) % 3]];
        if (orient(a, b, p) < 0) {
          next = nb;
          break;
        }
      }
      if (next < 0) return t;
      prev = t;
      t = next;
    }
    return scan_locate(p);
  }

  int scan_locate(const P& p) const {
    for (size_t i = 0; i < tris_.size(); ++i) {
      if (!tris_[i].alive) continue;
      bool inside = true;
      for (int e = 0; e < 3 && inside; ++e) {
        const P& a = pts_[tris_[i].v[(e + 1) % 3]];
        const P& b = pts_[tris_[i].v[(e + 2) % 3]];
        if (orient(a, b, p) < -1e-9L * span_ * span_) inside = false;
      }
      if (inside) return static_cast<int>(i);
    }
    return first_alive();  // unreachable for points inside the super-triangle
  }

  int first_alive() const {
    for (size_t i = 0; i < tris_.size(); ++i)
      if (tris_[i].alive) return static_cast<int>(i);
    return 0;
  }

  int edge_in(int t, int neighbor) const {
    for (int i = 0; i < 3; ++i)
      if (tris_[t].n[i] == neighbor) return i;
    return -1;
  }

  void set_neighbor(int t, int edge, int nb) {
    if (t >= 0) tris_[t].n[edge] = nb;
  }

  void relink(int nb, int old_tri, int new_tri) {
    if (nb < 0) return;
    const int e = edge_in(nb, old_tri);
    if (e >= 0) tris_[nb].n[e] = new_tri;
  }

  int new_tri(int a, int b, int c, int na, int nb, int nc) {
    tris_.push_back({{a, b, c}, {na, nb, nc}, true});
    return static_cast<int>(tris_.size()) - 1;
  }

  // 1 -> 3 split of triangle t by interior point v.
  void split_triangle(int t, int v) {
    const auto old = tris_[t];
    tris_[t].alive = false;
    const int a = old.v[0], b = old.v[1], c = old.v[2];
    const int t0 = new_tri(a, b, v, -1, -1, old.n[2]);
    const int t1 = new_tri(b, c, v, -1, -1, old.n[0]);
    const int t2 = new_tri(c, a, v, -1, -1, old.n[1]);
    tris_[t0].n[0] = t1;  // across edge (b, v)
    tris_[t0].n[1] = t2;  // across edge (v, a)
    tris_[t1].n[0] = t2;
    tris_[t1].n[1] = t0;
    tris_[t2].n[0] = t0;
    tris_[t2].n[1] = t1;
    relink(old.n[2], t, t0);
    relink(old.n[0], t, t1);
    relink(old.n[1], t, t2);
    hint_ = t0;
    legalize(t0, 2);
    legalize(t1, 2);
    legalize(t2, 2);
  }

  // 2 -> 4 split when v lands on the edge opposite corner `edge` of t.
  void split_edge(int t, int edge, int v) {
    const int u = tris_[t].n[edge];
    const auto told = tris_[t];
    const auto uold = tris_[u];
    const int c = told.v[edge];
    const int a = told.v[(edge + 1) % 3];
    const int b = told.v[(edge + 2) % 3];
    const int ue = edge_in(u, t);
    const int d = uold.v[ue];  // apex on the far side of edge (a, b)

    tris_[t].alive = false;
    tris_[u].alive = false;
    const int t0 = new_tri(v, b, c, told.n[(edge + 1) % 3], -1, -1);
    const int t1 = new_tri(v, c, a, told.n[(edge + 2) % 3], -1, -1);
    const int t2 = new_tri(v, a, d, uold.n[(ue + 1) % 3], -1, -1);
    const int t3 = new_tri(v, d, b, uold.n[(ue + 2) % 3], -1, -1);
    tris_[t0].n[1] = t1;  // across (c, v)
    tris_[t0].n[2] = t3;  // across (v, b)
    tris_[t1].n[1] = t2;
    tris_[t1].n[2] = t0;
    tris_[t2].n[1] = t3;
    tris_[t2].n[2] = t1;
    tris_[t3].n[1] = t0;
    tris_[t3].n[2] = t2;
    relink(told.n[(edge + 1) % 3], t, t0);
    relink(told.n[(edge + 2) % 3], t, t1);
    relink(uold.n[(ue + 1) % 3], u, t2);
    relink(uold.n[(ue + 2) % 3], u, t3);
    hint_ = t0;
    legalize(t0, 0);
    legalize(t1, 0);
    legalize(t2, 0);
    legalize(t3, 0);
  }

  // Lawson legalization of the edge opposite corner `apex` of triangle t,
  // recursing over edges exposed by each flip.
  void legalize(int t, int apex) {
    struct Item {
      int tri, apex;
    };
    std::vector<Item> stack{{t, apex}};
    while (!stack.empty()) {
      const auto [ti, ai] = stack.back();
      stack.pop_back();
      if (!tris_[ti].alive) continue;
      const int u = tris_[ti].n[ai];
      if (u < 0) continue;

      const int p = tris_[ti].v[ai];
      const int a = tris_[ti].v[(ai + 1) % 3];
      const int b = tris_[ti].v[(ai + 2) % 3];
      const int ue = edge_in(u, ti);
      if (ue < 0) continue;
      const int d = tris_[u].v[ue];

      // Strictly-inside test; exact cocircularity keeps the current diagonal.
      if (incircle(pts_[p], pts_[a], pts_[b], pts_[d]) <= 0) continue;
      // Refuse flips that would create inverted triangles.
      if (orient(pts_[p], pts_[a], pts_[d]) <= 0) continue;
      if (orient(pts_[p], pts_[d], pts_[b]) <= 0) continue;

      const auto told = tris_[ti];
      const auto uold = tris_[u];
      tris_[ti].alive = false;
      tris_[u].alive = false;
      const int t0 = new_tri(p, a, d, uold.n[(ue + 1) % 3], -1, told.n[(ai + 2) % 3]);
      const int t1 = new_tri(p, d, b, uold.n[(ue + 2) % 3], told.n[(ai + 1) % 3], -1);
      tris_[t0].n[1] = t1;
      tris_[t1].n[2] = t0;
      relink(uold.n[(ue + 1) % 3], u, t0);
      relink(told.n[(ai + 2) % 3], ti, t0);
      relink(uold.n[(ue + 2) % 3], u, t1);
      relink(told.n[(ai + 1) % 3], ti, t1);
      hint_ = t0;
      stack.push_back({t0, 0});
      stack.push_back({t1, 0});
    }
  }

  int n_input_;
  int super_base_ = -1;
  int hint_ = 0;
  long double span_ = 1;
  std::vector<P> pts_;
  std::vector<WorkTri> tris_;
};

}  // namespace

Delaunay::Delaunay(std::span<const Vec2> points) {
  if (points.size() < 3)
    raise(Errc::degenerate_geometry,
          "triangulation needs at least 3 points, got " +
              std::to_string(points.size()));
  for (const auto& p : points)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      raise(Errc::degenerate_geometry, "non-finite interpolation site");
  Builder builder(points, representative_);
  builder.finalize(points, points_, triangles_);

  // Canonicalize coincident groups onto their smallest input index so that
  // duplicate resolution does not depend on insertion order.
  std::vector<int> canon(points_.size());
  for (size_t i = 0; i < points_.size(); ++i) canon[i] = static_cast<int>(i);
  for (size_t i = 0; i < points_.size(); ++i)
    canon[representative_[i]] =
        std::min(canon[representative_[i]], static_cast<int>(i));
  for (auto& r : representative_) r = canon[r];
  for (auto& t : triangles_)
    for (int k = 0; k < 3; ++k) t.v[k] = canon[t.v[k]];
}

}  // namespace filmrec::maptrans
