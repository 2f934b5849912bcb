#pragma once

#include <algorithm>
#include <array>
#include <climits>
#include <cstdlib>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "thermo.hpp"

namespace dimervar {

/// Unit square [x, x+1] x [y, y+1]. White iff x + y is even.
struct Cell {
  int x = 0, y = 0;
  auto operator<=>(const Cell&) const = default;
};

/// Lattice point (corner of cells).
struct Vertex {
  int x = 0, y = 0;
  auto operator<=>(const Vertex&) const = default;
};

inline bool is_white(Cell c) { return ((c.x + c.y) & 1) == 0; }

/// Oriented lattice edge from `u` to `v` (eastward or northward).
/// `delta` is h(v) - h(u) when no domino crosses the edge; a crossing
/// domino changes it to -3 * delta. `left`/`right` are the cells on either
/// side (-1 outside the region).
struct LatticeEdge {
  int u = -1, v = -1;
  int delta = 0;
  int left = -1, right = -1;
  bool crossable() const { return left >= 0 && right >= 0; }
};

/// Finite, edge-connected, simply connected set of cells with a based
/// boundary vertex. Immutable after construction.
class Region {
 public:
  Region() = default;

  Region(std::vector<Cell> cells, Vertex base_vertex, int base_height = 0)
      : cells_(std::move(cells)), base_vertex_(base_vertex), base_height_(base_height) {
    build();
  }

  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<LatticeEdge>& edges() const { return edges_; }
  Vertex base_vertex() const { return base_vertex_; }
  int base_height() const { return base_height_; }
  int base_index() const { return base_index_; }
  std::size_t area() const { return cells_.size(); }

  int xmin() const { return x0_; }
  int ymin() const { return y0_; }
  int width() const { return w_; }
  int height() const { return h_; }

  int cell_index(Cell c) const {
    if (c.x < x0_ || c.y < y0_ || c.x >= x0_ + w_ || c.y >= y0_ + h_) return -1;
    return cell_grid_[static_cast<std::size_t>(c.y - y0_) * w_ + (c.x - x0_)];
  }
  bool contains(Cell c) const { return cell_index(c) >= 0; }

  int vertex_index(Vertex p) const {
    if (p.x < x0_ || p.y < y0_ || p.x > x0_ + w_ || p.y > y0_ + h_) return -1;
    return vertex_grid_[static_cast<std::size_t>(p.y - y0_) * (w_ + 1) + (p.x - x0_)];
  }

  /// All four cells around the vertex belong to the region.
  bool is_interior(int v) const { return interior_[v]; }
  bool is_boundary(int v) const { return !interior_[v]; }

  /// Indices of edges incident to vertex v.
  const std::vector<int>& incident(int v) const { return incident_[v]; }

  /// Neighbours of vertex v in the order east, north, west, south (-1 if absent).
  const std::array<int, 4>& neighbours(int v) const { return nbr_[v]; }

  int white_count() const { return whites_; }
  int black_count() const { return static_cast<int>(cells_.size()) - whites_; }

 private:
  void build() {
    if (cells_.empty()) throw InvalidRegion("region has no cells");
    std::sort(cells_.begin(), cells_.end());
    if (std::adjacent_find(cells_.begin(), cells_.end()) != cells_.end())
      throw InvalidRegion("duplicate cell");
    int x1 = INT_MIN, y1 = INT_MIN;
    x0_ = INT_MAX, y0_ = INT_MAX;
    for (auto c : cells_) {
      if (std::abs(c.x) > 1'000'000 || std::abs(c.y) > 1'000'000)
        throw InvalidRegion("cell coordinates out of range");
      x0_ = std::min(x0_, c.x), y0_ = std::min(y0_, c.y);
      x1 = std::max(x1, c.x), y1 = std::max(y1, c.y);
    }
    w_ = x1 - x0_ + 1, h_ = y1 - y0_ + 1;
    if (static_cast<long long>(w_) * h_ > 50'000'000LL) throw InvalidRegion("bounding box too large");
    cell_grid_.assign(static_cast<std::size_t>(w_) * h_, -1);
    whites_ = 0;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      cell_grid_[static_cast<std::size_t>(cells_[i].y - y0_) * w_ + (cells_[i].x - x0_)] = static_cast<int>(i);
      whites_ += is_white(cells_[i]);
    }
    check_connected();
    check_simply_connected();

    vertex_grid_.assign(static_cast<std::size_t>(w_ + 1) * (h_ + 1), -1);
    for (int y = y0_; y <= y0_ + h_; ++y)
      for (int x = x0_; x <= x0_ + w_; ++x) {
        bool any = contains({x, y}) || contains({x - 1, y}) || contains({x, y - 1}) || contains({x - 1, y - 1});
        if (!any) continue;
        vertex_grid_[static_cast<std::size_t>(y - y0_) * (w_ + 1) + (x - x0_)] = static_cast<int>(vertices_.size());
        vertices_.push_back({x, y});
        interior_.push_back(contains({x, y}) && contains({x - 1, y}) && contains({x, y - 1}) &&
                            contains({x - 1, y - 1}));
      }
    incident_.assign(vertices_.size(), {});
    nbr_.assign(vertices_.size(), {-1, -1, -1, -1});
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      const Vertex p = vertices_[i];
      const bool odd = ((p.x + p.y) & 1) != 0;
      // East edge: cells above (left of travel) and below.
      int l = cell_index({p.x, p.y}), r = cell_index({p.x, p.y - 1});
      if (l >= 0 || r >= 0) add_edge(static_cast<int>(i), vertex_index({p.x + 1, p.y}), odd ? 1 : -1, l, r, 0);
      // North edge: cells to the west (left of travel) and east.
      l = cell_index({p.x - 1, p.y}), r = cell_index({p.x, p.y});
      if (l >= 0 || r >= 0) add_edge(static_cast<int>(i), vertex_index({p.x, p.y + 1}), odd ? -1 : 1, l, r, 1);
    }
    base_index_ = vertex_index(base_vertex_);
    if (base_index_ < 0 || interior_[base_index_])
      throw InvalidRegion("base vertex (" + std::to_string(base_vertex_.x) + ", " +
                          std::to_string(base_vertex_.y) + ") is not on the region boundary");
  }

  void add_edge(int u, int v, int delta, int l, int r, int dir) {
    const int id = static_cast<int>(edges_.size());
    edges_.push_back({u, v, delta, l, r});
    incident_[u].push_back(id);
    incident_[v].push_back(id);
    nbr_[u][dir] = v;
    nbr_[v][dir + 2] = u;
  }

  void check_connected() const {
    std::vector<char> seen(cells_.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      Cell c = cells_[stack.back()];
      stack.pop_back();
      for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        int j = cell_index({c.x + dx, c.y + dy});
        if (j >= 0 && !seen[j]) seen[j] = 1, ++count, stack.push_back(j);
      }
    }
    if (count != cells_.size()) throw InvalidRegion("region is not edge-connected");
  }

  // Every empty cell of the padded bounding box must reach the outside
  // through empty cells.
  void check_simply_connected() const {
    const int W = w_ + 2, H = h_ + 2;
    std::vector<char> seen(static_cast<std::size_t>(W) * H, 0);
    auto idx = [&](int x, int y) { return static_cast<std::size_t>(y) * W + x; };
    auto filled = [&](int x, int y) { return contains({x + x0_ - 1, y + y0_ - 1}); };
    std::vector<std::pair<int, int>> stack{{0, 0}};
    seen[idx(0, 0)] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
      auto [x, y] = stack.back();
      stack.pop_back();
      for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= W || ny >= H || seen[idx(nx, ny)] || filled(nx, ny)) continue;
        seen[idx(nx, ny)] = 1, ++reached, stack.push_back({nx, ny});
      }
    }
    if (reached + cells_.size() != static_cast<std::size_t>(W) * H)
      throw InvalidRegion("region has a hole (not simply connected)");
  }

  std::vector<Cell> cells_;
  Vertex base_vertex_;
  int base_height_ = 0;
  int base_index_ = -1;
  int x0_ = 0, y0_ = 0, w_ = 0, h_ = 0;
  int whites_ = 0;
  std::vector<int> cell_grid_, vertex_grid_;
  std::vector<Vertex> vertices_;
  std::vector<char> interior_;
  std::vector<LatticeEdge> edges_;
  std::vector<std::vector<int>> incident_;
  std::vector<std::array<int, 4>> nbr_;
};

/// A domino stored with its lower/left cell first.
struct Domino {
  Cell cell1, cell2;
  DominoClass cls = DominoClass::a;
  auto operator<=>(const Domino& o) const {
    if (auto c = cell1 <=> o.cell1; c != 0) return c;
    return cell2 <=> o.cell2;
  }
  bool operator==(const Domino& o) const { return cell1 == o.cell1 && cell2 == o.cell2; }
  bool horizontal() const { return cell1.y == cell2.y; }
};

inline Domino make_domino(Cell p, Cell q) {
  if (q < p) std::swap(p, q);
  const int dx = q.x - p.x, dy = q.y - p.y;
  if (!((dx == 1 && dy == 0) || (dx == 0 && dy == 1)))
    throw InvalidTiling("domino cells are not adjacent");
  DominoClass k;
  if (dy == 0) k = is_white(p) ? DominoClass::a : DominoClass::b;
  else k = is_white(p) ? DominoClass::c : DominoClass::d;
  return {p, q, k};
}

struct Tiling {
  std::vector<Domino> dominos;  // kept sorted
  bool operator==(const Tiling&) const = default;
  auto operator<=>(const Tiling& o) const { return dominos <=> o.dominos; }
};

inline Tiling make_tiling(std::vector<Domino> ds) {
  std::sort(ds.begin(), ds.end());
  return {std::move(ds)};
}

/// Integer heights indexed like Region::vertices().
struct HeightFunction {
  std::vector<int> values;
  bool operator==(const HeightFunction&) const = default;
  int operator[](std::size_t i) const { return values[i]; }
};

/// Partial height function on the boundary vertices.
struct BoundaryHeights {
  std::map<Vertex, int> values;
};

/// partner[i] = index of the cell sharing a domino with cell i.
inline std::vector<int> tiling_partners(const Region& region, const Tiling& tiling) {
  std::vector<int> partner(region.area(), -1);
  for (const auto& dm : tiling.dominos) {
    Domino canon = make_domino(dm.cell1, dm.cell2);
    int i = region.cell_index(canon.cell1), j = region.cell_index(canon.cell2);
    if (i < 0 || j < 0) throw InvalidTiling("domino leaves the region");
    if (partner[i] >= 0 || partner[j] >= 0) throw InvalidTiling("dominos overlap");
    partner[i] = j, partner[j] = i;
  }
  for (int p : partner)
    if (p < 0) throw InvalidTiling("tiling leaves a cell uncovered");
  return partner;
}

inline HeightFunction tiling_to_height(const Region& region, const Tiling& tiling) {
  const auto partner = tiling_partners(region, tiling);
  const auto& E = region.edges();
  std::vector<int> h(region.vertices().size(), 0);
  std::vector<char> seen(h.size(), 0);
  std::vector<int> queue{region.base_index()};
  h[region.base_index()] = region.base_height();
  seen[region.base_index()] = 1;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    int u = queue[qi];
    for (int e : region.incident(u)) {
      const auto& ed = E[e];
      const bool crossed = ed.crossable() && partner[ed.left] == ed.right;
      const int step = crossed ? -3 * ed.delta : ed.delta;
      const int v = ed.u == u ? ed.v : ed.u;
      const int hv = ed.u == u ? h[u] + step : h[u] - step;
      if (!seen[v]) {
        seen[v] = 1, h[v] = hv, queue.push_back(v);
      } else if (h[v] != hv) {
        throw InvalidTiling("tiling is inconsistent with a height function");
      }
    }
  }
  return {std::move(h)};
}

/// Checks the local rules and returns the set of crossed edges.
inline std::vector<char> crossed_edges(const Region& region, const HeightFunction& h) {
  if (h.values.size() != region.vertices().size()) throw InvalidHeight("height function has wrong size");
  const auto& E = region.edges();
  std::vector<char> crossed(E.size(), 0);
  std::vector<int> sides(region.area(), 0);
  for (std::size_t e = 0; e < E.size(); ++e) {
    const auto& ed = E[e];
    const int diff = h[ed.v] - h[ed.u];
    if (diff == ed.delta) continue;
    if (diff == -3 * ed.delta && ed.crossable()) {
      crossed[e] = 1;
      ++sides[ed.left], ++sides[ed.right];
      continue;
    }
    const auto p = region.vertices()[ed.u];
    throw InvalidHeight("local rule violated on edge from (" + std::to_string(p.x) + ", " +
                        std::to_string(p.y) + ")");
  }
  for (int s : sides)
    if (s != 1) throw InvalidHeight("a cell is not bisected by exactly one height gap of 3");
  return crossed;
}

inline Tiling height_to_tiling(const Region& region, const HeightFunction& h) {
  const auto crossed = crossed_edges(region, h);
  if (h[region.base_index()] != region.base_height())
    throw InvalidHeight("height at base vertex differs from the base height");
  std::vector<Domino> ds;
  ds.reserve(region.area() / 2);
  const auto& E = region.edges();
  for (std::size_t e = 0; e < E.size(); ++e)
    if (crossed[e]) ds.push_back(make_domino(region.cells()[E[e].left], region.cells()[E[e].right]));
  return make_tiling(std::move(ds));
}

/// True when every local rule holds and the base height matches.
inline bool is_height_function(const Region& region, const HeightFunction& h) {
  try {
    crossed_edges(region, h);
  } catch (const InvalidHeight&) {
    return false;
  }
  return h[region.base_index()] == region.base_height();
}

/// Heights forced on the boundary by the base vertex. Throws NotExtendable
/// if the boundary does not close up (unequal colour counts).
inline BoundaryHeights boundary_heights(const Region& region) {
  const auto& E = region.edges();
  const auto& V = region.vertices();
  std::vector<int> h(V.size(), 0);
  std::vector<char> seen(V.size(), 0);
  std::vector<int> queue{region.base_index()};
  h[region.base_index()] = region.base_height();
  seen[region.base_index()] = 1;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    int u = queue[qi];
    for (int e : region.incident(u)) {
      if (E[e].crossable()) continue;
      const int v = E[e].u == u ? E[e].v : E[e].u;
      const int hv = E[e].u == u ? h[u] + E[e].delta : h[u] - E[e].delta;
      if (!seen[v]) seen[v] = 1, h[v] = hv, queue.push_back(v);
      else if (h[v] != hv) throw NotExtendable("boundary heights do not close up around the region");
    }
  }
  BoundaryHeights b;
  for (std::size_t i = 0; i < V.size(); ++i)
    if (region.is_boundary(static_cast<int>(i))) {
      if (!seen[i]) throw NotExtendable("boundary is not connected");
      b.values[V[i]] = h[i];
    }
  return b;
}

namespace detail {

// Shortest paths from the boundary with per-edge step bounds. For the
// maximal extension a step may rise by 1 along its uncrossed direction and
// by 3 against it; the minimal extension is the mirror image.
inline std::vector<long long> extremal_extension(const Region& region, const std::vector<int>& bvals,
                                                 bool upper) {
  const auto& E = region.edges();
  const long long inf = LLONG_MAX / 4;
  std::vector<long long> dist(bvals.size(), inf);
  using Item = std::pair<long long, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (std::size_t i = 0; i < bvals.size(); ++i)
    if (region.is_boundary(static_cast<int>(i))) {
      dist[i] = upper ? bvals[i] : -static_cast<long long>(bvals[i]);
      pq.push({dist[i], static_cast<int>(i)});
    }
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d != dist[u]) continue;
    for (int e : region.incident(u)) {
      const auto& ed = E[e];
      if (!ed.crossable()) continue;
      const int v = ed.u == u ? ed.v : ed.u;
      const int delta = ed.u == u ? ed.delta : -ed.delta;
      // upper: h(v) <= h(u) + cost; lower (negated): -h(v) <= -h(u) + cost.
      const int cost = upper ? (delta == 1 ? 1 : 3) : (delta == -1 ? 1 : 3);
      if (d + cost < dist[v]) dist[v] = d + cost, pq.push({dist[v], v});
    }
  }
  if (!upper)
    for (auto& x : dist) x = -x;
  return dist;
}

}  // namespace detail

/// (H_min, H_max): the smallest and largest height functions extending b.
inline std::pair<HeightFunction, HeightFunction> min_max_extensions(const Region& region,
                                                                     const BoundaryHeights& b) {
  const auto& V = region.vertices();
  std::vector<int> bvals(V.size(), 0);
  for (std::size_t i = 0; i < V.size(); ++i) {
    if (!region.is_boundary(static_cast<int>(i))) continue;
    auto it = b.values.find(V[i]);
    if (it == b.values.end())
      throw NotExtendable("no boundary height at (" + std::to_string(V[i].x) + ", " + std::to_string(V[i].y) + ")");
    bvals[i] = it->second;
  }
  for (const auto& ed : region.edges())
    if (!ed.crossable() && bvals[ed.v] - bvals[ed.u] != ed.delta)
      throw NotExtendable("boundary heights break the local rule on a boundary edge");

  auto hi = detail::extremal_extension(region, bvals, true);
  auto lo = detail::extremal_extension(region, bvals, false);
  HeightFunction hmin, hmax;
  hmin.values.resize(V.size());
  hmax.values.resize(V.size());
  for (std::size_t i = 0; i < V.size(); ++i) {
    if (lo[i] > hi[i]) throw NotExtendable("minimal and maximal extensions cross");
    if (region.is_boundary(static_cast<int>(i)) && (lo[i] != bvals[i] || hi[i] != bvals[i]))
      throw NotExtendable("boundary values are not realized by any height function");
    hmin.values[i] = static_cast<int>(lo[i]);
    hmax.values[i] = static_cast<int>(hi[i]);
  }
  try {
    crossed_edges(region, hmin);
    crossed_edges(region, hmax);
  } catch (const InvalidHeight& e) {
    throw NotExtendable(std::string("extension violates local rules: ") + e.what());
  }
  return {std::move(hmin), std::move(hmax)};
}

inline std::pair<HeightFunction, HeightFunction> min_max_extensions(const Region& region) {
  return min_max_extensions(region, boundary_heights(region));
}

inline HeightFunction meet(const HeightFunction& h1, const HeightFunction& h2) {
  if (h1.values.size() != h2.values.size()) throw BaseMismatch("height functions live on different regions");
  HeightFunction r = h1;
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (((h1[i] - h2[i]) % 4) != 0) throw BaseMismatch("heights differ mod 4");
    r.values[i] = std::min(h1[i], h2[i]);
  }
  return r;
}

inline HeightFunction join(const HeightFunction& h1, const HeightFunction& h2) {
  if (h1.values.size() != h2.values.size()) throw BaseMismatch("height functions live on different regions");
  HeightFunction r = h1;
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (((h1[i] - h2[i]) % 4) != 0) throw BaseMismatch("heights differ mod 4");
    r.values[i] = std::max(h1[i], h2[i]);
  }
  return r;
}

namespace detail {

// Augmenting-path bipartite matching between white and black cells.
inline bool has_perfect_matching(const Region& region) {
  const auto& C = region.cells();
  const int n = static_cast<int>(C.size());
  std::vector<int> match(n, -1);
  std::vector<int> stamp(n, -1);
  std::function<bool(int, int)> augment = [&](int w, int round) -> bool {
    for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      int b = region.cell_index({C[w].x + dx, C[w].y + dy});
      if (b < 0 || stamp[b] == round) continue;
      stamp[b] = round;
      if (match[b] < 0 || augment(match[b], round)) {
        match[b] = w;
        return true;
      }
    }
    return false;
  };
  for (int i = 0; i < n; ++i)
    if (is_white(C[i]) && !augment(i, i)) return false;
  return true;
}

}  // namespace detail

inline bool tileable(const Region& region) {
  if (region.white_count() != region.black_count()) return false;
  try {
    min_max_extensions(region);
    return true;
  } catch (const NotExtendable&) {
    return detail::has_perfect_matching(region);
  }
}

struct NormalizedPoint {
  double x, y, h;
};

/// Heights and coordinates scaled by 1/n.
inline std::vector<NormalizedPoint> normalize_height(const Region& region, const HeightFunction& h, double n) {
  if (!(n > 0)) throw InvalidHeight("scale must be positive");
  std::vector<NormalizedPoint> out;
  out.reserve(h.values.size());
  for (std::size_t i = 0; i < h.values.size(); ++i)
    out.push_back({region.vertices()[i].x / n, region.vertices()[i].y / n, h[i] / n});
  return out;
}

inline Region rectangle_region(int width, int height, int base_height = 0) {
  if (width <= 0 || height <= 0) throw InvalidRegion("rectangle sides must be positive");
  std::vector<Cell> cells;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) cells.push_back({x, y});
  return Region(std::move(cells), {0, 0}, base_height);
}

/// Cells with |x + 1/2| + |y + 1/2| <= n, based at the left corner (-n, 0).
inline Region aztec_diamond(int n, int base_height = 0) {
  if (n <= 0) throw InvalidRegion("Aztec diamond order must be positive");
  std::vector<Cell> cells;
  for (int y = -n; y < n; ++y)
    for (int x = -n; x < n; ++x)
      if (std::abs(2 * x + 1) + std::abs(2 * y + 1) <= 2 * n) cells.push_back({x, y});
  return Region(std::move(cells), {-n, 0}, base_height);
}

}  // namespace dimervar
