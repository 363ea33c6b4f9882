#include "sqconn/geometry.hpp"

#include <algorithm>
#include <bit>

namespace sqconn {

std::string validate_square(const Square& sq) {
  if (sq.side < 1) return "side must be >= 1";
  if (sq.x_lo < 0 || sq.y_lo < 0) return "coordinates must be non-negative";
  if (sq.x_lo + sq.side > kMaxInputCoord || sq.y_lo + sq.side > kMaxInputCoord)
    return "square exceeds the supported coordinate range";
  return {};
}

namespace {

// True when the most significant set bit of a is below that of b.
bool less_msb(std::uint64_t a, std::uint64_t b) { return a < b && a < (a ^ b); }

}  // namespace

bool morton_less(const Cell& a, const Cell& b) {
  const auto ax = static_cast<std::uint64_t>(a.ix) << a.level;
  const auto ay = static_cast<std::uint64_t>(a.iy) << a.level;
  const auto bx = static_cast<std::uint64_t>(b.ix) << b.level;
  const auto by = static_cast<std::uint64_t>(b.iy) << b.level;
  if (ax == bx && ay == by) return a.level < b.level;
  // z-order: the dimension whose coordinates differ in a higher bit decides.
  if (less_msb(ax ^ bx, ay ^ by)) return ay < by;
  return ax < bx;
}

Cell lca(const Cell& a, const Cell& b) {
  Cell lo = a, hi = b;
  if (lo.level > hi.level) std::swap(lo, hi);
  Cell lifted = ancestor_at(lo, hi.level);
  const std::uint64_t diff =
      static_cast<std::uint64_t>(lifted.ix ^ hi.ix) |
      static_cast<std::uint64_t>(lifted.iy ^ hi.iy);
  const int k = 64 - std::countl_zero(diff);  // 0 when one contains the other
  return ancestor_at(hi, hi.level + k);
}

namespace {

// Up to four cells of the given level whose closed region contains (x, y),
// in (iy, ix) order, clipped to the positive quadrant.
void incident_cells(int level, Coord x, Coord y, std::vector<Cell>& out) {
  out.clear();
  const Coord s = Coord{1} << level;
  const Coord qx = x >> level, qy = y >> level;
  Coord xs[2], ys[2];
  int nx = 0, ny = 0;
  if (x == qx * s && qx > 0) xs[nx++] = qx - 1;
  xs[nx++] = qx;
  if (y == qy * s && qy > 0) ys[ny++] = qy - 1;
  ys[ny++] = qy;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) out.push_back(Cell{level, xs[i], ys[j]});
}

}  // namespace

Cell storing_cell(const Square& sq) {
  assert(validate_square(sq).empty());
  const Coord w = sq.world_side();
  const Coord cx = sq.center_x(), cy = sq.center_y();
  const Rect region = sq.region();
  int level = 63 - std::countl_zero(static_cast<std::uint64_t>(w));
  std::vector<Cell> cand;
  cand.reserve(4);
  for (; level >= 0; --level) {
    incident_cells(level, cx, cy, cand);
    for (const Cell& c : cand) {
      // candidates arrive in (iy, ix) order, so the first fit is bottom-left
      if (contains(region, c.region())) return c;
    }
  }
  assert(false && "a level >= 0 always qualifies for a valid square");
  return {};
}

Cell cell_at(int level, Coord x, Coord y) {
  const Coord s = Coord{1} << level;
  Coord ix = x >> level, iy = y >> level;
  if (x == ix * s && ix > 0) --ix;
  if (y == iy * s && iy > 0) --iy;
  return Cell{level, ix, iy};
}

std::string to_string(const Cell& c) {
  return "(" + std::to_string(c.level) + "," + std::to_string(c.ix) + "," +
         std::to_string(c.iy) + ")";
}

std::string to_string(const Rect& r) {
  return "[" + std::to_string(r.x_lo) + "," + std::to_string(r.x_hi) + "]x[" +
         std::to_string(r.y_lo) + "," + std::to_string(r.y_hi) + "]";
}

}  // namespace sqconn
