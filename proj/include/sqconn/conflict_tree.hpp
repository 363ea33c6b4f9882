#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "sqconn/geometry.hpp"

// Dominance-searchable collection of squares with per-node conflict-set
// counts. Every stored square is viewed as a point with five coordinates
// (s, l, r, b, t): side, x-extent and y-extent. Orthogonal box queries over
// those coordinates express intersection, containment, boundary crossing
// and side thresholds exactly, with no precondition on the query.
//
// Conflict sets are sparse named subsets; each tree node carries the number
// of members of each set in its subtree, so a search can skip any subtree
// whose points all belong to the excluded set. Counts not stored are zero.

namespace sqconn {

struct Entry {
  std::int64_t id = 0;
  Coord s = 0, l = 0, r = 0, b = 0, t = 0;

  Coord coord(int dim) const {
    switch (dim) {
      case 0: return s;
      case 1: return l;
      case 2: return r;
      case 3: return b;
      default: return t;
    }
  }
  bool operator==(const Entry& o) const = default;
};

inline Entry square_entry(const Square& sq) {
  const Rect reg = sq.region();
  return Entry{static_cast<std::int64_t>(sq.id), sq.world_side(), reg.x_lo,
               reg.x_hi, reg.y_lo, reg.y_hi};
}

// Closed per-coordinate bounds; defaults are unbounded.
struct Box5 {
  static constexpr Coord kLoInf = INT64_MIN / 4;
  static constexpr Coord kHiInf = INT64_MAX / 4;

  std::array<Coord, 5> lo{kLoInf, kLoInf, kLoInf, kLoInf, kLoInf};
  std::array<Coord, 5> hi{kHiInf, kHiInf, kHiInf, kHiInf, kHiInf};

  bool empty() const {
    for (int d = 0; d < 5; ++d)
      if (lo[d] > hi[d]) return true;
    return false;
  }
  bool contains(const Entry& e) const {
    for (int d = 0; d < 5; ++d) {
      const Coord v = e.coord(d);
      if (v < lo[d] || v > hi[d]) return false;
    }
    return true;
  }
  Box5 intersect(const Box5& o) const {
    Box5 out;
    for (int d = 0; d < 5; ++d) {
      out.lo[d] = lo[d] > o.lo[d] ? lo[d] : o.lo[d];
      out.hi[d] = hi[d] < o.hi[d] ? hi[d] : o.hi[d];
    }
    return out;
  }
};

using BoxList = std::vector<Box5>;

// Query builders. The argument is always a query rectangle in world units;
// the predicate applies to the stored squares' extents.
Box5 box_intersecting(const Rect& q);        // entry meets q
Box5 box_containing(const Rect& q);          // entry covers q
Box5 box_within(const Rect& q);              // entry inside q
Box5 box_strictly_containing(const Rect& q); // q inside entry's open interior
Box5 box_strictly_inside(const Rect& q);     // entry inside q's open interior
Box5 box_strict_overlap(const Rect& q);      // interiors meet
Box5 box_min_side(Coord s_min);
Box5 box_max_side(Coord s_max);

// Disjoint difference: points of (union of a) not in (union of b).
// b boxes are subtracted one at a time; pieces stay pairwise disjoint
// provided the boxes in a are.
BoxList boxes_minus(BoxList a, const BoxList& b);

// Entries whose boundary meets k, i.e. k intersects the entry but is not
// strictly inside it.
BoxList boxes_boundary_intersecting(const Rect& k);
// Entries meeting the boundary of k, i.e. the entry intersects k but does
// not lie strictly inside it.
BoxList boxes_crossing_boundary(const Rect& k);

BoxList and_box(BoxList boxes, const Box5& c);

class ConflictTree {
 public:
  ConflictTree() = default;
  ~ConflictTree();
  ConflictTree(const ConflictTree&) = delete;
  ConflictTree& operator=(const ConflictTree&) = delete;

  void insert(const Entry& e);            // duplicate id is an error
  void erase(std::int64_t id);            // clears memberships first
  void join(std::int64_t id, std::int64_t set_id);
  void leave(std::int64_t id, std::int64_t set_id);

  bool contains(std::int64_t id) const { return index_.count(id) != 0; }
  const Entry* find(std::int64_t id) const;
  bool is_member(std::int64_t id, std::int64_t set_id) const;
  std::vector<std::int64_t> sets_of(std::int64_t id) const;
  std::size_t set_size(std::int64_t set_id) const;
  std::size_t size() const { return live_; }

  // Some stored square in the union of the boxes that is not in set_id
  // (any square when set_id is nullopt); nullopt when none. Boxes are
  // scanned in order; within a box the leftmost-in-tree match wins, which
  // makes results reproducible for identical operation sequences.
  std::optional<Entry> find_excluding(std::span<const Box5> boxes,
                                      std::optional<std::int64_t> set_id) const;
  std::size_t count(std::span<const Box5> boxes) const;  // boxes disjoint
  std::vector<Entry> report_all(std::span<const Box5> boxes) const;  // id-sorted

  Coord max_side() const;  // largest stored s, kLoInf when empty

  // Space statistic: number of explicitly stored per-set subtree counts.
  std::size_t stored_count_entries() const;
  // Test hook: recount every subtree total and per-set count from scratch.
  bool check_counts() const;

 private:
  struct Node;

  Node* build(std::vector<Node*>& items, std::size_t lo, std::size_t hi);
  void rebuild(Node* scope);
  void destroy(Node* n);
  void pull_bounds(Node* n);
  void collect_live(Node* n, std::vector<Node*>& out);
  void bump_set(Node* leaf, std::int64_t set_id, int delta);

  const Node* find_rec(const Node* n, const Box5& q, std::int64_t set) const;
  std::size_t count_rec(const Node* n, const Box5& q) const;
  void report_rec(const Node* n, const Box5& q, std::vector<Entry>& out) const;

  Node* root_ = nullptr;
  std::size_t live_ = 0;
  std::size_t count_entries_ = 0;
  std::unordered_map<std::int64_t, Node*> index_;
  std::unordered_map<std::int64_t, std::vector<std::int64_t>> memberships_;
};

}  // namespace sqconn
