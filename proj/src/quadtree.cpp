#include "sqconn/quadtree.hpp"

#include <algorithm>
#include <stdexcept>

namespace sqconn {

namespace {

// quadrant of desc within the subdivision of anc (anc must be a strict
// ancestor): bit 0 = x half, bit 1 = y half
int quadrant_of(const Cell& anc, const Cell& desc) {
  const int shift = anc.level - 1 - desc.level;
  const Coord qx = (desc.ix >> shift) & 1;
  const Coord qy = (desc.iy >> shift) & 1;
  return static_cast<int>(qx | (qy << 1));
}

}  // namespace

const Quadtree::Node* Quadtree::node(const Cell& cell) const {
  auto it = nodes_.find(cell);
  return it == nodes_.end() ? nullptr : &it->second;
}

void Quadtree::attach(const Cell& parent, const Cell& child) {
  nodes_.at(parent).child[quadrant_of(parent, child)] = child;
  nodes_.at(child).parent = parent;
}

Quadtree::Node& Quadtree::insert_node(const Cell& cell) {
  auto [it, fresh] = nodes_.try_emplace(cell, Node{cell, {}, {}, {}, 0, false});
  Node& n = it->second;
  if (!fresh) return n;

  if (!root_) {
    root_ = cell;
    return n;
  }

  // nearest existing strict ancestor, walking grid levels upward
  std::optional<Cell> anc;
  for (Cell a = cell.parent();; a = a.parent()) {
    if (nodes_.count(a)) {
      anc = a;
      break;
    }
    if (a.level > root_->level) break;
  }

  if (!anc) {
    Cell old_root = *root_;
    if (is_ancestor_or_self(cell, old_root)) {
      attach(cell, old_root);
      root_ = cell;
      return nodes_.at(cell);
    }
    Cell join = lca(cell, old_root);
    auto [jit, jfresh] =
        nodes_.try_emplace(join, Node{join, {}, {}, {}, 0, false});
    (void)jit;
    attach(join, old_root);
    attach(join, cell);
    root_ = join;
    return nodes_.at(cell);
  }

  const int q = quadrant_of(*anc, cell);
  auto& slot = nodes_.at(*anc).child[q];
  if (!slot) {
    slot = cell;
    nodes_.at(cell).parent = *anc;
    return nodes_.at(cell);
  }
  const Cell other = *slot;
  if (is_ancestor_or_self(cell, other)) {
    // cell slides in between anc and other
    attach(*anc, cell);
    attach(cell, other);
    return nodes_.at(cell);
  }
  const Cell join = lca(cell, other);
  nodes_.try_emplace(join, Node{join, {}, {}, {}, 0, false});
  attach(*anc, join);
  attach(join, other);
  attach(join, cell);
  return nodes_.at(cell);
}

void Quadtree::ensure_cells(std::span<const Cell> cells, CellTag tag) {
  for (const Cell& c : cells)
    insert_node(c).reasons[static_cast<int>(tag)] += 1;
}

bool Quadtree::removable(const Node& n) const {
  if (n.mark_count > 0 || n.is_storing) return false;
  for (std::uint32_t r : n.reasons)
    if (r > 0) return false;
  return n.child_count() <= 1;
}

void Quadtree::maybe_collect(const Cell& cell) {
  Cell cur = cell;
  for (;;) {
    auto it = nodes_.find(cur);
    if (it == nodes_.end()) return;
    Node& n = it->second;
    if (!removable(n)) return;
    const std::optional<Cell> parent = n.parent;
    std::optional<Cell> lone;
    for (const auto& c : n.child)
      if (c) lone = c;

    if (parent) {
      auto& pslot = nodes_.at(*parent).child[quadrant_of(*parent, cur)];
      if (lone) {
        pslot = *lone;
        nodes_.at(*lone).parent = *parent;
      } else {
        pslot.reset();
      }
    } else {
      if (lone)
        nodes_.at(*lone).parent.reset();
      root_ = lone;
    }
    nodes_.erase(it);
    if (!parent) return;
    cur = *parent;  // the parent may have become a spliceable chain node
  }
}

void Quadtree::release_cells(std::span<const Cell> cells, CellTag tag) {
  for (const Cell& c : cells) {
    auto it = nodes_.find(c);
    if (it == nodes_.end())
      throw std::invalid_argument("Quadtree::release_cells: cell not present");
    auto& count = it->second.reasons[static_cast<int>(tag)];
    if (count == 0)
      throw std::invalid_argument("Quadtree::release_cells: reason not held");
    count -= 1;
    maybe_collect(c);
  }
}

void Quadtree::mark(const Cell& cell, int delta) {
  auto it = nodes_.find(cell);
  if (it == nodes_.end())
    throw std::invalid_argument("Quadtree::mark: cell not present");
  Node& n = it->second;
  if (delta < 0 && n.mark_count < static_cast<std::uint32_t>(-delta))
    throw std::invalid_argument("Quadtree::mark: count would go negative");
  const bool was_zero = n.mark_count == 0;
  n.mark_count += delta;
  const bool is_zero = n.mark_count == 0;
  auto& containment = n.reasons[static_cast<int>(CellTag::kContainment)];
  if (was_zero && !is_zero) containment += 1;
  if (!was_zero && is_zero) {
    containment -= 1;
    maybe_collect(cell);
  }
}

std::uint32_t Quadtree::mark_count(const Cell& cell) const {
  const Node* n = node(cell);
  return n ? n->mark_count : 0;
}

std::optional<Cell> Quadtree::highest_marked_ancestor(const Cell& cell) const {
  auto it = nodes_.find(cell);
  if (it == nodes_.end())
    throw std::invalid_argument("highest_marked_ancestor: cell not present");
  std::optional<Cell> best;
  std::optional<Cell> cur = it->second.parent;
  while (cur) {
    const Node& n = nodes_.at(*cur);
    if (n.mark_count > 0) best = *cur;
    cur = n.parent;
  }
  return best;
}

void Quadtree::set_storing(const Cell& cell, bool storing) {
  auto it = nodes_.find(cell);
  if (it == nodes_.end())
    throw std::invalid_argument("Quadtree::set_storing: cell not present");
  it->second.is_storing = storing;
  if (!storing) maybe_collect(cell);
}

bool Quadtree::is_storing(const Cell& cell) const {
  const Node* n = node(cell);
  return n && n->is_storing;
}

std::vector<Cell> Quadtree::ancestor_chain(const Cell& cell) const {
  std::vector<Cell> out;
  auto it = nodes_.find(cell);
  if (it == nodes_.end()) return out;
  out.push_back(cell);
  std::optional<Cell> cur = it->second.parent;
  while (cur) {
    out.push_back(*cur);
    cur = nodes_.at(*cur).parent;
  }
  return out;
}

std::vector<Cell> Quadtree::all_cells() const {
  std::vector<Cell> out;
  out.reserve(nodes_.size());
  for (const auto& [cell, n] : nodes_) out.push_back(cell);
  return out;
}

std::string Quadtree::dump() const {
  std::vector<Cell> cells = all_cells();
  std::sort(cells.begin(), cells.end(), morton_less);
  std::string out;
  for (const Cell& c : cells) {
    const Node& n = nodes_.at(c);
    out += std::to_string(c.level) + " " + std::to_string(c.ix) + " " +
           std::to_string(c.iy) + " " + std::to_string(n.mark_count) + " " +
           (n.is_storing ? "1" : "0") + "\n";
  }
  return out;
}

void Quadtree::check_structure() const {
  auto require = [](bool cond, const char* what) {
    if (!cond) throw std::logic_error(std::string("Quadtree structure: ") + what);
  };
  std::size_t with_parent = 0;
  for (const auto& [cell, n] : nodes_) {
    if (n.parent) {
      ++with_parent;
      const Node& p = nodes_.at(*n.parent);
      require(is_ancestor_or_self(*n.parent, cell) && *n.parent != cell,
              "parent is not a strict ancestor");
      require(p.child[quadrant_of(*n.parent, cell)] == cell,
              "parent does not link back to child");
    } else {
      require(root_ && *root_ == cell, "parentless node is not the root");
    }
    for (const auto& c : n.child) {
      if (!c) continue;
      require(nodes_.at(*c).parent == cell, "child does not link back");
    }
  }
  require(nodes_.empty() ? !root_ : with_parent + 1 == nodes_.size(),
          "exactly one root expected");
}

std::vector<Cell> neighborhood(const Square& sq) {
  const Cell c = storing_cell(sq);
  std::vector<Cell> out;
  out.reserve(25);
  for (Coord dy = -2; dy <= 2; ++dy) {
    for (Coord dx = -2; dx <= 2; ++dx) {
      const Coord ix = c.ix + dx, iy = c.iy + dy;
      if (ix < 0 || iy < 0) continue;
      out.push_back(Cell{c.level, ix, iy});
    }
  }
  return out;
}

}  // namespace sqconn
