#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sqconn/geometry.hpp"

// Compressed quadtree over the origin-anchored dyadic grid. Nodes are kept
// in a hash map keyed by cell, so absent cells cost nothing and compression
// is implicit. The node set stays closed under pairwise lowest common
// ancestors; nodes are garbage collected once nothing pins them.
//
// A node is pinned by presence-reason refcounts (neighborhood, containment,
// structural), a positive mark count, the storing flag, or by being a
// branching point of the tree.

namespace sqconn {

enum class CellTag : int { kNeighborhood = 0, kContainment = 1, kStructural = 2 };

class Quadtree {
 public:
  struct Node {
    Cell cell;
    std::optional<Cell> parent;
    std::array<std::optional<Cell>, 4> child;  // by quadrant
    std::array<std::uint32_t, 3> reasons{0, 0, 0};
    std::uint32_t mark_count = 0;
    bool is_storing = false;

    int child_count() const {
      int n = 0;
      for (const auto& c : child) n += c.has_value();
      return n;
    }
  };

  void ensure_cells(std::span<const Cell> cells, CellTag tag);
  void release_cells(std::span<const Cell> cells, CellTag tag);  // error if absent

  // Adjusts the mark count; the cell must exist. A node acquires the
  // containment reason when its mark count leaves zero and drops it (and
  // may be collected) when the count returns to zero.
  void mark(const Cell& cell, int delta);
  std::uint32_t mark_count(const Cell& cell) const;

  // Marked strict ancestor closest to the root, if any.
  std::optional<Cell> highest_marked_ancestor(const Cell& cell) const;

  void set_storing(const Cell& cell, bool storing);
  bool is_storing(const Cell& cell) const;
  bool exists(const Cell& cell) const { return nodes_.count(cell) != 0; }

  std::size_t node_count() const { return nodes_.size(); }
  std::optional<Cell> root() const { return root_; }
  const Node* node(const Cell& cell) const;

  // Existing nodes on the path from cell (inclusive) to the root.
  std::vector<Cell> ancestor_chain(const Cell& cell) const;
  std::vector<Cell> all_cells() const;  // unsorted

  // One node per line, "level ix iy mark_count is_storing", Morton order.
  std::string dump() const;
  void check_structure() const;  // asserts parent/child coherence

 private:
  Node& insert_node(const Cell& cell);
  void attach(const Cell& parent, const Cell& child);
  void maybe_collect(const Cell& cell);
  bool removable(const Node& n) const;

  std::unordered_map<Cell, Node, CellHash> nodes_;
  std::optional<Cell> root_;
};

// The 5x5 block of cells at the storing cell's level centered on it,
// clipped to the positive quadrant. Includes the storing cell.
std::vector<Cell> neighborhood(const Square& sq);

}  // namespace sqconn
