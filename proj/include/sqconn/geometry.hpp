#pragma once

#include <cassert>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

// Coordinate conventions:
//
//   - Input squares have non-negative integer coordinates and a positive
//     integer side. On ingestion everything is scaled by 4 ("world units")
//     so that square centers and 5x-scaled dyadic cells stay integral.
//   - All regions are closed; touching boundaries count as intersection.
//   - The dyadic grid is anchored at the origin. A cell at level l has
//     side 2^l and occupies [ix*2^l, (ix+1)*2^l] x [iy*2^l, (iy+1)*2^l].

namespace sqconn {

using Coord = std::int64_t;
using SquareId = std::uint64_t;

constexpr Coord kWorldScale = 4;
constexpr Coord kMaxInputCoord = Coord{1} << 40;

struct Rect {
  Coord x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;

  bool valid() const { return x_lo <= x_hi && y_lo <= y_hi; }
  Coord width() const { return x_hi - x_lo; }
  Coord height() const { return y_hi - y_lo; }
  bool operator==(const Rect& o) const = default;
};

// A square as ingested. Coordinates are kept in input units; all derived
// geometry (region, center) is in world units.
struct Square {
  SquareId id = 0;
  Coord x_lo = 0, y_lo = 0, side = 0;  // input units

  Coord world_side() const { return side * kWorldScale; }
  Coord center_x() const { return x_lo * kWorldScale + side * 2; }
  Coord center_y() const { return y_lo * kWorldScale + side * 2; }
  Rect region() const {
    return Rect{x_lo * kWorldScale, (x_lo + side) * kWorldScale,
                y_lo * kWorldScale, (y_lo + side) * kWorldScale};
  }
};

// Returns an empty string when sq satisfies all Square invariants,
// otherwise a human-readable reason.
std::string validate_square(const Square& sq);

struct Cell {
  int level = 0;  // side = 2^level, world units
  Coord ix = 0, iy = 0;

  Coord side() const { return Coord{1} << level; }
  Rect region() const {
    const Coord s = side();
    return Rect{ix * s, (ix + 1) * s, iy * s, (iy + 1) * s};
  }
  Cell parent() const { return Cell{level + 1, ix >> 1, iy >> 1}; }
  bool operator==(const Cell& o) const = default;
};

struct CellHash {
  std::size_t operator()(const Cell& c) const {
    std::uint64_t h = static_cast<std::uint64_t>(c.level);
    h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(c.ix);
    h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(c.iy);
    h ^= h >> 29;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 32;
    return static_cast<std::size_t>(h);
  }
};

// Total order used for canonical cell listings: z-order of the lower-left
// corner in world coordinates, ties broken by level (children first).
bool morton_less(const Cell& a, const Cell& b);

inline Cell ancestor_at(const Cell& c, int level) {
  assert(level >= c.level);
  return Cell{level, c.ix >> (level - c.level), c.iy >> (level - c.level)};
}

// a is b or an ancestor of b.
inline bool is_ancestor_or_self(const Cell& a, const Cell& b) {
  return a.level >= b.level && ancestor_at(b, a.level) == a;
}

Cell lca(const Cell& a, const Cell& b);

// The cell grown by a factor 5 about its center. Integral thanks to the
// x4 world scaling; may extend to negative coordinates near the origin.
inline Rect scale5(const Cell& c) {
  const Coord s = c.side();
  return Rect{c.ix * s - 2 * s, c.ix * s + 3 * s, c.iy * s - 2 * s,
              c.iy * s + 3 * s};
}

// Largest dyadic cell that contains the square's center and is itself
// contained in the square's closed region; bottom-left cell (smallest
// (iy, ix)) among qualifying cells when the center sits on grid lines.
Cell storing_cell(const Square& sq);

// Grid cell of the given level containing the point; when the point lies
// on grid lines the bottom-left incident cell wins.
Cell cell_at(int level, Coord x, Coord y);

// Closed-region predicates.
inline bool intersects(const Rect& a, const Rect& b) {
  return a.x_lo <= b.x_hi && b.x_lo <= a.x_hi && a.y_lo <= b.y_hi &&
         b.y_lo <= a.y_hi;
}
inline bool contains(const Rect& outer, const Rect& inner) {
  return outer.x_lo <= inner.x_lo && inner.x_hi <= outer.x_hi &&
         outer.y_lo <= inner.y_lo && inner.y_hi <= outer.y_hi;
}
// inner lies in the open interior of outer.
inline bool strictly_interior(const Rect& inner, const Rect& outer) {
  return outer.x_lo < inner.x_lo && inner.x_hi < outer.x_hi &&
         outer.y_lo < inner.y_lo && inner.y_hi < outer.y_hi;
}
// k meets the boundary of r: k touches r but does not sit in its interior.
inline bool boundary_intersects(const Rect& k, const Rect& r) {
  return intersects(k, r) && !strictly_interior(k, r);
}

inline bool intersects(const Square& a, const Square& b) {
  return intersects(a.region(), b.region());
}

std::string to_string(const Cell& c);
std::string to_string(const Rect& r);

}  // namespace sqconn
