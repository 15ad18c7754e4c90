#include "core/delaunay.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <utility>

#include "core/predicates.hpp"
#include "core/rng.hpp"

namespace gva {

bool circumsphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, Vec3* center,
                  double* radius) {
  const Vec3 u = b - a, v = c - a, w = d - a;
  Mat3 m;
  m.row(0) = 2.0 * u;
  m.row(1) = 2.0 * v;
  m.row(2) = 2.0 * w;
  const double det = m.determinant();
  const double scale = u.norm() * v.norm() * w.norm();
  if (!(std::abs(det) > 8.0 * 1e-12 * scale)) return false;
  const Vec3 rhs(u.squaredNorm(), v.squaredNorm(), w.squaredNorm());
  // Cramer's rule keeps the solve deterministic.
  Mat3 mx = m, my = m, mz = m;
  mx.col(0) = rhs;
  my.col(1) = rhs;
  mz.col(2) = rhs;
  const Vec3 local(mx.determinant() / det, my.determinant() / det, mz.determinant() / det);
  if (!local.allFinite()) return false;
  if (center) *center = a + local;
  if (radius) *radius = local.norm();
  return true;
}

namespace {

constexpr int kInf = -1;  // symbolic vertex at infinity
constexpr int kNone = -1;

struct Cell {
  std::array<int, 4> v;    // kInf only ever in slot 3
  std::array<int, 4> adj;  // neighbor opposite v[i]
  bool alive = true;
  uint32_t stamp = 0;      // insertion round of the last conflict test
  bool conflicts = false;  // valid when stamp matches the current round
};

// Outward-oriented facet opposite each slot of a positively oriented cell.
constexpr int kFacet[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

class Builder {
 public:
  explicit Builder(std::vector<Vec3> pts) : points_(std::move(pts)) {}

  void run() {
    if (points_.size() < 4) throw GeometryError("delaunay3d: fewer than 4 distinct points");
    seed();
    Rng rng(0xD31A);
    std::vector<int> order;
    order.reserve(points_.size());
    for (int i = 0; i < static_cast<int>(points_.size()); ++i)
      if (!is_seed(i)) order.push_back(i);
    rng.shuffle(order);
    for (int idx : order) insert(idx);
  }

  std::vector<DelaunayCell> finite_cells() const {
    std::vector<DelaunayCell> out;
    for (const Cell& c : cells_) {
      if (!c.alive || c.v[3] == kInf) continue;
      out.push_back(DelaunayCell{c.v});
    }
    return out;
  }

 private:
  const Vec3& pt(int i) const { return points_[i]; }
  bool is_seed(int i) const {
    return i == seed_[0] || i == seed_[1] || i == seed_[2] || i == seed_[3];
  }

  // Synthetic off-plane apex for in-plane circumcircle tests on hull facets.
  static Vec3 facet_apex(const Vec3& a, const Vec3& b, const Vec3& c) {
    return a + (b - a).cross(c - a);
  }

  bool cell_conflicts(int ci, int p) {
    Cell& cell = cells_[ci];
    if (cell.stamp == round_) return cell.conflicts;
    cell.stamp = round_;
    bool hit;
    if (cell.v[3] == kInf) {
      const Vec3 &a = pt(cell.v[0]), &b = pt(cell.v[1]), &c = pt(cell.v[2]);
      const int o = orient3d(a, b, c, pt(p));
      if (o > 0) {
        hit = true;
      } else if (o < 0) {
        hit = false;
      } else {
        // Coplanar with the hull facet: inside its circumcircle? Lift the
        // test off the plane with a synthetic apex.
        const Vec3 apex = facet_apex(a, b, c);
        const int orient = orient3d(a, b, c, apex);
        const int side =
            insphere_perturbed(a, b, c, apex, pt(p), cell.v[0], cell.v[1], cell.v[2],
                               std::numeric_limits<int>::max(), p);
        hit = side * orient > 0;
      }
    } else {
      const int side = insphere_perturbed(pt(cell.v[0]), pt(cell.v[1]), pt(cell.v[2]),
                                          pt(cell.v[3]), pt(p), cell.v[0], cell.v[1], cell.v[2],
                                          cell.v[3], p);
      hit = side > 0;  // cells are positively oriented
    }
    cell.conflicts = hit;
    return hit;
  }

  // Walk toward p through finite cells; may end on an infinite cell or give
  // up (kNone) on a cycle, in which case the caller scans.
  int locate(int p) const {
    int cur = hint_;
    if (cur == kNone || !cells_[cur].alive) return kNone;
    const size_t cap = 4 * cells_.size() + 16;
    for (size_t step = 0; step < cap; ++step) {
      const Cell& cell = cells_[cur];
      if (cell.v[3] == kInf) return cur;
      int next = kNone;
      for (int s = 0; s < 4 && next == kNone; ++s) {
        const Vec3& a = pt(cell.v[kFacet[s][0]]);
        const Vec3& b = pt(cell.v[kFacet[s][1]]);
        const Vec3& c = pt(cell.v[kFacet[s][2]]);
        if (orient3d(a, b, c, pt(p)) > 0) next = cell.adj[s];
      }
      if (next == kNone) return cur;  // inside or on the boundary
      cur = next;
    }
    return kNone;
  }

  int find_conflict(int p) {
    const int located = locate(p);
    if (located != kNone && cell_conflicts(located, p)) return located;
    for (int ci = 0; ci < static_cast<int>(cells_.size()); ++ci)
      if (cells_[ci].alive && cell_conflicts(ci, p)) return ci;
    throw GeometryError("delaunay3d: no conflicting cell found (duplicate point?)");
  }

  int new_cell(const std::array<int, 4>& v) {
    cells_.push_back(Cell{v, {kNone, kNone, kNone, kNone}, true, 0, false});
    return static_cast<int>(cells_.size()) - 1;
  }

  int slot_of_missing(const Cell& cell, const std::array<int, 3>& facet) const {
    for (int s = 0; s < 4; ++s) {
      const int vv = cell.v[s];
      if (vv != facet[0] && vv != facet[1] && vv != facet[2]) return s;
    }
    throw GeometryError("delaunay3d: adjacency bookkeeping corrupted");
  }

  void insert(int p) {
    ++round_;
    const int first = find_conflict(p);

    // Flood the conflict region and collect its boundary facets.
    std::vector<int> region{first};
    struct Boundary {
      int inside;   // conflicting cell (to die)
      int slot;     // facet slot within it
      int outside;  // surviving neighbor
    };
    std::vector<Boundary> boundary;
    for (size_t qi = 0; qi < region.size(); ++qi) {
      const int ci = region[qi];
      for (int s = 0; s < 4; ++s) {
        const int nb = cells_[ci].adj[s];
        const bool seen = cells_[nb].stamp == round_;
        if (cell_conflicts(nb, p)) {
          if (!seen) region.push_back(nb);
        } else {
          boundary.push_back({ci, s, nb});
        }
      }
    }

    // One new cell per boundary facet.
    std::vector<int> fresh;
    fresh.reserve(boundary.size());
    std::map<std::pair<int, int>, std::pair<int, int>> ridge;  // edge -> (cell, slot)
    int finite_hint = kNone;
    for (const Boundary& bf : boundary) {
      const Cell& dying = cells_[bf.inside];
      std::array<int, 3> facet = {dying.v[kFacet[bf.slot][0]], dying.v[kFacet[bf.slot][1]],
                                  dying.v[kFacet[bf.slot][2]]};
      int ni;
      if (facet[0] != kInf && facet[1] != kInf && facet[2] != kInf) {
        // Finite fill cell; orient so that p closes it positively.
        if (orient3d(pt(facet[0]), pt(facet[1]), pt(facet[2]), pt(p)) < 0)
          std::swap(facet[1], facet[2]);
        if (orient3d(pt(facet[0]), pt(facet[1]), pt(facet[2]), pt(p)) <= 0)
          throw GeometryError("delaunay3d: degenerate fill cell");
        ni = new_cell({facet[0], facet[1], facet[2], p});
        finite_hint = ni;
      } else {
        // The facet contains the infinite vertex, so the fill cell is a new
        // hull cell. Its hull facet (e0, e1, p) inherits orientation from
        // the surviving neighbor's hull facet: shared edges must be
        // traversed in opposite directions.
        const Cell& outside = cells_[bf.outside];
        const int missing = slot_of_missing(outside, facet);  // real vertex not shared
        std::array<int, 2> edge;
        switch (missing) {
          case 0: edge = {outside.v[2], outside.v[1]}; break;
          case 1: edge = {outside.v[0], outside.v[2]}; break;
          case 2: edge = {outside.v[1], outside.v[0]}; break;
          default: throw GeometryError("delaunay3d: infinite facet shared with a finite cell");
        }
        ni = new_cell({edge[0], edge[1], p, kInf});
      }

      // Wire the new cell to the surviving neighbor across the old facet.
      Cell& made = cells_[ni];
      const int my_slot = slot_of_missing(made, facet);
      made.adj[my_slot] = bf.outside;
      Cell& outside = cells_[bf.outside];
      outside.adj[slot_of_missing(outside, facet)] = ni;

      // Pair the three p-facets with sibling fill cells via their ridges.
      for (int s = 0; s < 4; ++s) {
        if (s == my_slot) continue;
        std::array<int, 2> r{0, 0};
        int out = 0;
        for (int k = 0; k < 3; ++k) {
          const int vv = made.v[kFacet[s][k]];
          if (vv != p) r[out++] = vv;
        }
        if (out != 2) throw GeometryError("delaunay3d: fill facet missing the new vertex");
        if (r[0] > r[1]) std::swap(r[0], r[1]);
        const auto key = std::make_pair(r[0], r[1]);
        const auto it = ridge.find(key);
        if (it == ridge.end()) {
          ridge.emplace(key, std::make_pair(ni, s));
        } else {
          cells_[ni].adj[s] = it->second.first;
          cells_[it->second.first].adj[it->second.second] = ni;
          ridge.erase(it);
        }
      }
      fresh.push_back(ni);
    }
    if (!ridge.empty()) throw GeometryError("delaunay3d: conflict region boundary did not close");

    for (int ci : region) cells_[ci].alive = false;
    hint_ = finite_hint != kNone ? finite_hint : (fresh.empty() ? hint_ : fresh.front());
  }

  void seed() {
    const int n = static_cast<int>(points_.size());
    seed_[0] = 0;
    seed_[1] = 1;  // points are deduplicated, so 0 and 1 differ
    seed_[2] = kNone;
    for (int i = 2; i < n && seed_[2] == kNone; ++i)
      if (!collinear(pt(0), pt(1), pt(i))) seed_[2] = i;
    if (seed_[2] == kNone) throw GeometryError("delaunay3d: all points are collinear");
    seed_[3] = kNone;
    for (int i = 2; i < n && seed_[3] == kNone; ++i)
      if (i != seed_[2] && orient3d(pt(0), pt(1), pt(seed_[2]), pt(i)) != 0) seed_[3] = i;
    if (seed_[3] == kNone) throw GeometryError("delaunay3d: all points are coplanar");

    std::array<int, 4> v = {seed_[0], seed_[1], seed_[2], seed_[3]};
    if (orient3d(pt(v[0]), pt(v[1]), pt(v[2]), pt(v[3])) < 0) std::swap(v[2], v[3]);
    const int t0 = new_cell(v);
    for (int s = 0; s < 4; ++s) {
      const int hull = new_cell(
          {cells_[t0].v[kFacet[s][0]], cells_[t0].v[kFacet[s][1]], cells_[t0].v[kFacet[s][2]], kInf});
      cells_[t0].adj[s] = hull;
      cells_[hull].adj[3] = t0;
    }
    // Stitch the four hull cells to each other along their shared edges.
    std::map<std::pair<int, int>, std::pair<int, int>> ridge;
    for (int ci = 1; ci <= 4; ++ci) {
      for (int s = 0; s < 3; ++s) {  // slots whose facet keeps the infinite vertex
        std::array<int, 2> r{0, 0};
        int out = 0;
        for (int k = 0; k < 3; ++k) {
          const int vv = cells_[ci].v[kFacet[s][k]];
          if (vv != kInf) r[out++] = vv;
        }
        if (r[0] > r[1]) std::swap(r[0], r[1]);
        const auto key = std::make_pair(r[0], r[1]);
        const auto it = ridge.find(key);
        if (it == ridge.end()) {
          ridge.emplace(key, std::make_pair(ci, s));
        } else {
          cells_[ci].adj[s] = it->second.first;
          cells_[it->second.first].adj[it->second.second] = ci;
        }
      }
    }
    hint_ = t0;
  }

  std::vector<Vec3> points_;
  std::vector<Cell> cells_;
  std::array<int, 4> seed_ = {kNone, kNone, kNone, kNone};
  int hint_ = kNone;
  uint32_t round_ = 0;
};

}  // namespace

Delaunay3D delaunay3d(const std::vector<Vec3>& input) {
  Delaunay3D out;
  std::map<std::array<double, 3>, int> seen;
  for (size_t i = 0; i < input.size(); ++i) {
    const Vec3& p = input[i];
    if (!p.allFinite()) throw InvalidArgumentError("delaunay3d: non-finite point");
    const std::array<double, 3> key = {p.x(), p.y(), p.z()};
    if (seen.emplace(key, static_cast<int>(out.points.size())).second) {
      out.points.push_back(p);
      out.source_index.push_back(static_cast<int>(i));
    }
  }
  Builder builder(out.points);
  builder.run();
  out.cells = builder.finite_cells();
  return out;
}

}  // namespace gva
