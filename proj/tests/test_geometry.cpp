#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <optional>
#include <random>

#include "sqconn/geometry.hpp"

using namespace sqconn;

namespace {

// Independent storing-cell oracle: enumerate dyadic cells by decreasing
// level and test center- and region-containment directly.
std::optional<Cell> storing_cell_by_enumeration(const Square& sq) {
  const Coord w = sq.world_side();
  const Coord cx = sq.center_x(), cy = sq.center_y();
  int level = 0;
  while ((Coord{2} << level) <= w) ++level;  // first level with side > w
  for (; level >= 0; --level) {
    const Coord s = Coord{1} << level;
    std::optional<Cell> best;
    for (Coord iy = cy / s - 1; iy <= cy / s; ++iy) {
      for (Coord ix = cx / s - 1; ix <= cx / s; ++ix) {
        if (ix < 0 || iy < 0) continue;
        const Cell c{level, ix, iy};
        const Rect r = c.region();
        const bool has_center =
            r.x_lo <= cx && cx <= r.x_hi && r.y_lo <= cy && cy <= r.y_hi;
        if (!has_center || !contains(sq.region(), r)) continue;
        if (!best || std::tuple(iy, ix) < std::tuple(best->iy, best->ix))
          best = c;
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

Square make_square(SquareId id, Coord x, Coord y, Coord side) {
  return Square{id, x, y, side};
}

}  // namespace

TEST_CASE("storing cell matches the worked examples") {
  CHECK(storing_cell(make_square(1, 1, 1, 4)) == Cell{3, 1, 1});
  CHECK(storing_cell(make_square(2, 0, 0, 4)) == Cell{4, 0, 0});
  CHECK(storing_cell(make_square(3, 0, 0, 1)) == Cell{2, 0, 0});
}

TEST_CASE("storing cell agrees with the enumeration oracle") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 100000; ++i) {
    const Coord side = 1 + static_cast<Coord>(rng() % 64);
    const Coord x = static_cast<Coord>(rng() % 512);
    const Coord y = static_cast<Coord>(rng() % 512);
    const Square sq = make_square(i, x, y, side);
    const Cell got = storing_cell(sq);
    auto expect = storing_cell_by_enumeration(sq);
    REQUIRE(expect.has_value());
    CHECK(got == *expect);

    // containment, center membership, maximality and packing bounds
    const Rect r = got.region();
    CHECK(contains(sq.region(), r));
    CHECK(r.x_lo <= sq.center_x());
    CHECK(sq.center_x() <= r.x_hi);
    CHECK(r.y_lo <= sq.center_y());
    CHECK(sq.center_y() <= r.y_hi);
    CHECK(!contains(sq.region(), got.parent().region()));
    CHECK(got.side() * 8 >= sq.world_side());
    CHECK(got.side() <= sq.world_side());
  }
}

TEST_CASE("scale5 arithmetic") {
  CHECK(scale5(Cell{0, 3, 3}) == Rect{1, 6, 1, 6});
  CHECK(scale5(Cell{3, 2, 2}) == Rect{0, 40, 0, 40});
  CHECK(scale5(Cell{1, 0, 0}) == Rect{-4, 6, -4, 6});
}

TEST_CASE("scale5 commutes with grid translation") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const int level = static_cast<int>(rng() % 10);
    const Coord ix = static_cast<Coord>(rng() % 1000);
    const Coord iy = static_cast<Coord>(rng() % 1000);
    const Coord dx = static_cast<Coord>(rng() % 50);
    const Rect base = scale5(Cell{level, ix, iy});
    const Rect moved = scale5(Cell{level, ix + dx, iy});
    CHECK(moved.x_lo == base.x_lo + dx * (Coord{1} << level));
    CHECK(moved.y_lo == base.y_lo);
  }
}

TEST_CASE("closed-region predicates") {
  const Rect a{0, 2, 0, 2}, b{2, 4, 2, 4};
  CHECK(intersects(a, b));  // corner touch counts
  CHECK(!boundary_intersects(Rect{1, 6, 1, 6}, Rect{0, 8, 0, 8}));
  CHECK(boundary_intersects(Rect{6, 11, 6, 11}, Rect{0, 8, 0, 8}));
}

TEST_CASE("boundary_intersects agrees with a rasterized brute check") {
  // k meets the boundary of r iff some integer point of k lies on it and
  // k touches r at all; small coordinates make the scan exact.
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    auto rand_rect = [&]() {
      Coord x0 = static_cast<Coord>(rng() % 12);
      Coord x1 = x0 + static_cast<Coord>(rng() % 8);
      Coord y0 = static_cast<Coord>(rng() % 12);
      Coord y1 = y0 + static_cast<Coord>(rng() % 8);
      return Rect{x0, x1, y0, y1};
    };
    const Rect k = rand_rect(), r = rand_rect();
    bool brute = false;
    for (Coord x = k.x_lo; x <= k.x_hi && !brute; ++x)
      for (Coord y = k.y_lo; y <= k.y_hi && !brute; ++y) {
        const bool in_r =
            r.x_lo <= x && x <= r.x_hi && r.y_lo <= y && y <= r.y_hi;
        const bool interior =
            r.x_lo < x && x < r.x_hi && r.y_lo < y && y < r.y_hi;
        if (in_r && !interior) brute = true;
      }
    CHECK(boundary_intersects(k, r) == brute);
  }
}

TEST_CASE("intersects is symmetric, mutual containment implies equality") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 5000; ++i) {
    auto rand_rect = [&]() {
      Coord x0 = static_cast<Coord>(rng() % 40);
      Coord x1 = x0 + static_cast<Coord>(rng() % 20);
      Coord y0 = static_cast<Coord>(rng() % 40);
      Coord y1 = y0 + static_cast<Coord>(rng() % 20);
      return Rect{x0, x1, y0, y1};
    };
    const Rect a = rand_rect(), b = rand_rect();
    CHECK(intersects(a, b) == intersects(b, a));
    if (contains(a, b) && contains(b, a)) CHECK(a == b);
  }
}

TEST_CASE("cell_at uses the bottom-left cell on grid ties") {
  CHECK(cell_at(2, 12, 12) == Cell{2, 2, 2});
  CHECK(cell_at(3, 12, 12) == Cell{3, 1, 1});
  // every integer point sits on level-0 grid lines, so the bottom-left
  // incident cell wins
  CHECK(cell_at(0, 7, 9) == Cell{0, 6, 8});
  CHECK(cell_at(0, 0, 0) == Cell{0, 0, 0});  // clipped at the quadrant edge
}

TEST_CASE("lca and ancestor navigation") {
  const Cell a{0, 5, 5}, b{0, 6, 5};
  const Cell l = lca(a, b);
  CHECK(is_ancestor_or_self(l, a));
  CHECK(is_ancestor_or_self(l, b));
  CHECK(!is_ancestor_or_self(l.parent(), l) == false);  // parent covers l
  CHECK(lca(a, a) == a);
  const Cell anc = ancestor_at(a, 3);
  CHECK(lca(a, anc) == anc);

  std::mt19937_64 rng(17);
  for (int i = 0; i < 2000; ++i) {
    const Cell x{static_cast<int>(rng() % 6), static_cast<Coord>(rng() % 200),
                 static_cast<Coord>(rng() % 200)};
    const Cell y{static_cast<int>(rng() % 6), static_cast<Coord>(rng() % 200),
                 static_cast<Coord>(rng() % 200)};
    const Cell m = lca(x, y);
    CHECK(is_ancestor_or_self(m, x));
    CHECK(is_ancestor_or_self(m, y));
    if (m.level > 0) {
      // minimality: no child of the lca covers both
      bool child_covers = false;
      for (Coord dy = 0; dy < 2 && !child_covers; ++dy)
        for (Coord dx = 0; dx < 2 && !child_covers; ++dx) {
          const Cell ch{m.level - 1, m.ix * 2 + dx, m.iy * 2 + dy};
          if (ch.level >= x.level && ch.level >= y.level)
            child_covers = is_ancestor_or_self(ch, x) &&
                           is_ancestor_or_self(ch, y);
        }
      CHECK(!child_covers);
    }
  }
}

TEST_CASE("square validation") {
  CHECK(validate_square(make_square(1, 0, 0, 1)).empty());
  CHECK(!validate_square(make_square(1, 0, 0, 0)).empty());
  CHECK(!validate_square(make_square(1, -1, 0, 2)).empty());
  CHECK(!validate_square(make_square(1, kMaxInputCoord, 0, 1)).empty());
}
