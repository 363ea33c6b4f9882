#include "sqconn/conflict_tree.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace sqconn {

Box5 box_intersecting(const Rect& q) {
  Box5 b;
  b.lo[2] = q.x_lo;  // r >= q.x_lo
  b.hi[1] = q.x_hi;  // l <= q.x_hi
  b.lo[4] = q.y_lo;  // t >= q.y_lo
  b.hi[3] = q.y_hi;  // b <= q.y_hi
  return b;
}

Box5 box_containing(const Rect& q) {
  Box5 b;
  b.hi[1] = q.x_lo;
  b.lo[2] = q.x_hi;
  b.hi[3] = q.y_lo;
  b.lo[4] = q.y_hi;
  return b;
}

Box5 box_within(const Rect& q) {
  Box5 b;
  b.lo[1] = q.x_lo;
  b.hi[2] = q.x_hi;
  b.lo[3] = q.y_lo;
  b.hi[4] = q.y_hi;
  return b;
}

Box5 box_strictly_containing(const Rect& q) {
  Box5 b;
  b.hi[1] = q.x_lo - 1;
  b.lo[2] = q.x_hi + 1;
  b.hi[3] = q.y_lo - 1;
  b.lo[4] = q.y_hi + 1;
  return b;
}

Box5 box_strictly_inside(const Rect& q) {
  Box5 b;
  b.lo[1] = q.x_lo + 1;
  b.hi[2] = q.x_hi - 1;
  b.lo[3] = q.y_lo + 1;
  b.hi[4] = q.y_hi - 1;
  return b;
}

Box5 box_strict_overlap(const Rect& q) {
  Box5 b;
  b.lo[2] = q.x_lo + 1;
  b.hi[1] = q.x_hi - 1;
  b.lo[4] = q.y_lo + 1;
  b.hi[3] = q.y_hi - 1;
  return b;
}

Box5 box_min_side(Coord s_min) {
  Box5 b;
  b.lo[0] = s_min;
  return b;
}

Box5 box_max_side(Coord s_max) {
  Box5 b;
  b.hi[0] = s_max;
  return b;
}

BoxList boxes_minus(BoxList a, const BoxList& b) {
  for (const Box5& cut : b) {
    BoxList next;
    for (Box5 piece : a) {
      if (piece.empty()) continue;
      if (piece.intersect(cut).empty()) {
        next.push_back(piece);
        continue;
      }
      for (int d = 0; d < 5; ++d) {
        if (piece.lo[d] < cut.lo[d]) {
          Box5 below = piece;
          below.hi[d] = cut.lo[d] - 1;
          if (!below.empty()) next.push_back(below);
          piece.lo[d] = cut.lo[d];
        }
        if (piece.hi[d] > cut.hi[d]) {
          Box5 above = piece;
          above.lo[d] = cut.hi[d] + 1;
          if (!above.empty()) next.push_back(above);
          piece.hi[d] = cut.hi[d];
        }
      }
      // the remainder of piece lies inside cut and is dropped
    }
    a = std::move(next);
  }
  return a;
}

BoxList boxes_boundary_intersecting(const Rect& k) {
  return boxes_minus({box_intersecting(k)}, {box_strictly_containing(k)});
}

BoxList boxes_crossing_boundary(const Rect& k) {
  return boxes_minus({box_intersecting(k)}, {box_strictly_inside(k)});
}

BoxList and_box(BoxList boxes, const Box5& c) {
  BoxList out;
  for (const Box5& b : boxes) {
    Box5 cut = b.intersect(c);
    if (!cut.empty()) out.push_back(cut);
  }
  return out;
}

struct ConflictTree::Node {
  Entry e;
  int dim = 1;
  bool alive = true;
  int m = 1;   // live entries in subtree
  int nt = 1;  // all nodes in subtree
  std::array<Coord, 5> bb_lo{}, bb_hi{};
  std::vector<std::pair<std::int64_t, std::int32_t>> setcnt;
  Node* lc = nullptr;
  Node* rc = nullptr;
  Node* up = nullptr;

  std::int32_t set_count(std::int64_t set_id) const {
    auto it = std::lower_bound(
        setcnt.begin(), setcnt.end(), set_id,
        [](const auto& p, std::int64_t v) { return p.first < v; });
    return (it != setcnt.end() && it->first == set_id) ? it->second : 0;
  }
};

namespace {

constexpr double kAlpha = 0.70;
constexpr int kSplitDims[3] = {1, 3, 0};  // l, b, s

// strict total order along one coordinate, ids break ties
bool entry_less(const Entry& a, const Entry& b, int dim) {
  const Coord av = a.coord(dim), bv = b.coord(dim);
  if (av != bv) return av < bv;
  return a.id < b.id;
}

}  // namespace

ConflictTree::~ConflictTree() { destroy(root_); }

void ConflictTree::destroy(Node* n) {
  if (!n) return;
  destroy(n->lc);
  destroy(n->rc);
  delete n;
}

void ConflictTree::pull_bounds(Node* n) {
  bool seeded = false;
  auto merge = [&](const std::array<Coord, 5>& lo,
                   const std::array<Coord, 5>& hi) {
    if (!seeded) {
      n->bb_lo = lo;
      n->bb_hi = hi;
      seeded = true;
      return;
    }
    for (int d = 0; d < 5; ++d) {
      if (lo[d] < n->bb_lo[d]) n->bb_lo[d] = lo[d];
      if (hi[d] > n->bb_hi[d]) n->bb_hi[d] = hi[d];
    }
  };
  if (n->alive) {
    std::array<Coord, 5> pt{n->e.s, n->e.l, n->e.r, n->e.b, n->e.t};
    merge(pt, pt);
  }
  if (n->lc && n->lc->m > 0) merge(n->lc->bb_lo, n->lc->bb_hi);
  if (n->rc && n->rc->m > 0) merge(n->rc->bb_lo, n->rc->bb_hi);
  if (!seeded) {
    n->bb_lo.fill(Box5::kHiInf);
    n->bb_hi.fill(Box5::kLoInf);
  }
}

void ConflictTree::insert(const Entry& e) {
  if (index_.count(e.id))
    throw std::invalid_argument("ConflictTree::insert: duplicate id");
  Node* node = new Node{};
  node->e = e;
  pull_bounds(node);
  index_.emplace(e.id, node);
  ++live_;
  if (!root_) {
    root_ = node;
    return;
  }
  Node* cur = root_;
  for (;;) {
    Node*& next = entry_less(e, cur->e, cur->dim) ? cur->lc : cur->rc;
    if (!next) {
      next = node;
      node->up = cur;
      // children keep cycling through l, b, s between rebuilds
      node->dim = cur->dim == 1 ? 3 : (cur->dim == 3 ? 0 : 1);
      break;
    }
    cur = next;
  }
  Node* scapegoat = nullptr;
  for (Node* p = node->up; p; p = p->up) {
    p->m += 1;
    p->nt += 1;
    pull_bounds(p);
    const int child_nt = std::max(p->lc ? p->lc->nt : 0, p->rc ? p->rc->nt : 0);
    if (child_nt > kAlpha * p->nt + 1) scapegoat = p;  // highest wins
  }
  if (scapegoat) rebuild(scapegoat);
}

void ConflictTree::erase(std::int64_t id) {
  auto it = index_.find(id);
  if (it == index_.end())
    throw std::invalid_argument("ConflictTree::erase: unknown id");
  // memberships go first so every per-node count returns to zero
  for (std::int64_t set_id : sets_of(id)) leave(id, set_id);
  Node* node = it->second;
  index_.erase(it);
  node->alive = false;
  --live_;
  for (Node* p = node; p; p = p->up) {
    if (p != node) p->m -= 1;
    pull_bounds(p);
  }
  if (root_ && root_->nt > 2 * root_->m + 8) rebuild(root_);
}

void ConflictTree::bump_set(Node* leaf, std::int64_t set_id, int delta) {
  for (Node* p = leaf; p; p = p->up) {
    auto it = std::lower_bound(
        p->setcnt.begin(), p->setcnt.end(), set_id,
        [](const auto& a, std::int64_t v) { return a.first < v; });
    if (it != p->setcnt.end() && it->first == set_id) {
      it->second += delta;
      if (it->second == 0) {
        p->setcnt.erase(it);
        --count_entries_;
      }
    } else {
      p->setcnt.insert(it, {set_id, delta});
      ++count_entries_;
    }
  }
}

void ConflictTree::join(std::int64_t id, std::int64_t set_id) {
  auto it = index_.find(id);
  if (it == index_.end())
    throw std::invalid_argument("ConflictTree::join: unknown id");
  auto& sets = memberships_[id];
  auto pos = std::lower_bound(sets.begin(), sets.end(), set_id);
  if (pos != sets.end() && *pos == set_id)
    throw std::invalid_argument("ConflictTree::join: already a member");
  sets.insert(pos, set_id);
  bump_set(it->second, set_id, +1);
}

void ConflictTree::leave(std::int64_t id, std::int64_t set_id) {
  auto it = index_.find(id);
  if (it == index_.end())
    throw std::invalid_argument("ConflictTree::leave: unknown id");
  auto mit = memberships_.find(id);
  if (mit == memberships_.end())
    throw std::invalid_argument("ConflictTree::leave: not a member");
  auto pos = std::lower_bound(mit->second.begin(), mit->second.end(), set_id);
  if (pos == mit->second.end() || *pos != set_id)
    throw std::invalid_argument("ConflictTree::leave: not a member");
  mit->second.erase(pos);
  if (mit->second.empty()) memberships_.erase(mit);
  bump_set(it->second, set_id, -1);
}

const Entry* ConflictTree::find(std::int64_t id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &it->second->e;
}

bool ConflictTree::is_member(std::int64_t id, std::int64_t set_id) const {
  auto it = memberships_.find(id);
  if (it == memberships_.end()) return false;
  return std::binary_search(it->second.begin(), it->second.end(), set_id);
}

std::vector<std::int64_t> ConflictTree::sets_of(std::int64_t id) const {
  auto it = memberships_.find(id);
  return it == memberships_.end() ? std::vector<std::int64_t>{} : it->second;
}

std::size_t ConflictTree::set_size(std::int64_t set_id) const {
  return root_ ? static_cast<std::size_t>(root_->set_count(set_id)) : 0;
}

void ConflictTree::collect_live(Node* n, std::vector<Node*>& out) {
  if (!n) return;
  collect_live(n->lc, out);
  if (n->alive) out.push_back(n);
  collect_live(n->rc, out);
  if (!n->alive) delete n;
}

ConflictTree::Node* ConflictTree::build(std::vector<Node*>& items,
                                        std::size_t lo, std::size_t hi) {
  if (lo >= hi) return nullptr;
  // split along the widest of (l, b, s) over this range, ties in that order
  int dim = 1;
  Coord best = -1;
  for (int cand : kSplitDims) {
    Coord mn = items[lo]->e.coord(cand), mx = mn;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      const Coord v = items[i]->e.coord(cand);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    if (mx - mn > best) {
      best = mx - mn;
      dim = cand;
    }
  }
  const std::size_t mid = (lo + hi) / 2;
  std::nth_element(items.begin() + lo, items.begin() + mid, items.begin() + hi,
                   [dim](const Node* a, const Node* b) {
                     return entry_less(a->e, b->e, dim);
                   });
  Node* n = items[mid];
  n->dim = dim;
  n->lc = build(items, lo, mid);
  n->rc = build(items, mid + 1, hi);
  if (n->lc) n->lc->up = n;
  if (n->rc) n->rc->up = n;
  n->m = 1 + (n->lc ? n->lc->m : 0) + (n->rc ? n->rc->m : 0);
  n->nt = n->m;
  pull_bounds(n);
  return n;
}

void ConflictTree::rebuild(Node* scope) {
  Node* parent = scope->up;
  Node** hook = parent ? (parent->lc == scope ? &parent->lc : &parent->rc)
                       : &root_;
  std::vector<Node*> items;
  items.reserve(static_cast<std::size_t>(scope->m));
  collect_live(scope, items);
  for (Node* n : items) {
    count_entries_ -= n->setcnt.size();
    n->setcnt.clear();
    n->lc = n->rc = n->up = nullptr;
    n->alive = true;
  }
  Node* fresh = build(items, 0, items.size());
  *hook = fresh;
  if (fresh) fresh->up = parent;
  // replay conflict memberships inside the rebuilt scope
  for (Node* n : items) {
    auto mit = memberships_.find(n->e.id);
    if (mit == memberships_.end()) continue;
    for (std::int64_t set_id : mit->second) {
      for (Node* p = n; p != parent; p = p->up) {
        auto it = std::lower_bound(
            p->setcnt.begin(), p->setcnt.end(), set_id,
            [](const auto& a, std::int64_t v) { return a.first < v; });
        if (it != p->setcnt.end() && it->first == set_id) {
          it->second += 1;
        } else {
          p->setcnt.insert(it, {set_id, 1});
          ++count_entries_;
        }
      }
    }
  }
}

namespace {

bool bb_disjoint(const Box5& q, const std::array<Coord, 5>& lo,
                 const std::array<Coord, 5>& hi) {
  for (int d = 0; d < 5; ++d)
    if (q.lo[d] > hi[d] || q.hi[d] < lo[d]) return true;
  return false;
}

bool bb_inside(const Box5& q, const std::array<Coord, 5>& lo,
               const std::array<Coord, 5>& hi) {
  for (int d = 0; d < 5; ++d)
    if (lo[d] < q.lo[d] || hi[d] > q.hi[d]) return false;
  return true;
}

}  // namespace

const ConflictTree::Node* ConflictTree::find_rec(const Node* n, const Box5& q,
                                                 std::int64_t set) const {
  if (!n || n->m == 0) return nullptr;
  if (set >= 0 && n->set_count(set) >= n->m) return nullptr;
  if (bb_disjoint(q, n->bb_lo, n->bb_hi)) return nullptr;
  if (const Node* x = find_rec(n->lc, q, set)) return x;
  if (n->alive && q.contains(n->e) && (set < 0 || !is_member(n->e.id, set)))
    return n;
  return find_rec(n->rc, q, set);
}

std::optional<Entry> ConflictTree::find_excluding(
    std::span<const Box5> boxes, std::optional<std::int64_t> set_id) const {
  const std::int64_t set = set_id ? *set_id : -1;
  for (const Box5& q : boxes) {
    if (q.empty()) continue;
    if (const Node* n = find_rec(root_, q, set)) return n->e;
  }
  return std::nullopt;
}

std::size_t ConflictTree::count_rec(const Node* n, const Box5& q) const {
  if (!n || n->m == 0) return 0;
  if (bb_disjoint(q, n->bb_lo, n->bb_hi)) return 0;
  if (bb_inside(q, n->bb_lo, n->bb_hi)) return static_cast<std::size_t>(n->m);
  std::size_t c = (n->alive && q.contains(n->e)) ? 1 : 0;
  return c + count_rec(n->lc, q) + count_rec(n->rc, q);
}

std::size_t ConflictTree::count(std::span<const Box5> boxes) const {
  std::size_t total = 0;
  for (const Box5& q : boxes)
    if (!q.empty()) total += count_rec(root_, q);
  return total;
}

void ConflictTree::report_rec(const Node* n, const Box5& q,
                              std::vector<Entry>& out) const {
  if (!n || n->m == 0) return;
  if (bb_disjoint(q, n->bb_lo, n->bb_hi)) return;
  report_rec(n->lc, q, out);
  if (n->alive && q.contains(n->e)) out.push_back(n->e);
  report_rec(n->rc, q, out);
}

std::vector<Entry> ConflictTree::report_all(std::span<const Box5> boxes) const {
  std::vector<Entry> out;
  for (const Box5& q : boxes)
    if (!q.empty()) report_rec(root_, q, out);
  std::sort(out.begin(), out.end(),
            [](const Entry& a, const Entry& b) { return a.id < b.id; });
  return out;
}

Coord ConflictTree::max_side() const {
  return (root_ && root_->m > 0) ? root_->bb_hi[0] : Box5::kLoInf;
}

std::size_t ConflictTree::stored_count_entries() const {
  return count_entries_;
}

namespace {

struct Recount {
  int m = 0;
  std::map<std::int64_t, std::int32_t> sets;
};

}  // namespace

bool ConflictTree::check_counts() const {
  struct Walker {
    const ConflictTree* tree;
    bool ok = true;
    Recount walk(const Node* n) {
      Recount rc;
      if (!n) return rc;
      Recount l = walk(n->lc), r = walk(n->rc);
      rc.m = l.m + r.m + (n->alive ? 1 : 0);
      rc.sets = std::move(l.sets);
      for (const auto& [k, v] : r.sets) rc.sets[k] += v;
      if (n->alive)
        for (std::int64_t s : tree->sets_of(n->e.id)) rc.sets[s] += 1;
      if (rc.m != n->m) ok = false;
      std::size_t nonzero = 0;
      for (const auto& [k, v] : rc.sets) {
        if (v == 0) continue;
        ++nonzero;
        if (n->set_count(k) != v) ok = false;
      }
      if (nonzero != n->setcnt.size()) ok = false;
      return rc;
    }
  };
  Walker w{this};
  w.walk(root_);
  return w.ok;
}

}  // namespace sqconn
