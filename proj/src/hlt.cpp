#include "sqconn/hlt.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <tuple>

namespace sqconn {

namespace {

std::uint64_t arc_key(HltConnectivity::Vertex u, HltConnectivity::Vertex v) {
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

std::uint64_t edge_key(HltConnectivity::Vertex u, HltConnectivity::Vertex v) {
  return u < v ? arc_key(u, v) : arc_key(v, u);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

// Euler tour element: an arc (u,v) of a tree edge, or the vertex loop (v,v).
struct HltConnectivity::TNode {
  TNode* l = nullptr;
  TNode* r = nullptr;
  TNode* p = nullptr;
  std::uint64_t prio = 0;
  Vertex u = 0, v = 0;
  int sz = 1;    // tour elements in subtree
  int vcnt = 0;  // loop nodes in subtree
  bool tree_here = false;     // arc of an edge whose level equals this forest
  bool nontree_here = false;  // loop: vertex has non-tree edges at this level
  bool or_tree = false;
  bool or_nontree = false;

  bool is_loop() const { return u == v; }
};

namespace {

using TNode = HltConnectivity::TNode;

void pull(TNode* n) {
  n->sz = 1;
  n->vcnt = n->is_loop() ? 1 : 0;
  n->or_tree = n->tree_here;
  n->or_nontree = n->nontree_here;
  for (TNode* c : {n->l, n->r}) {
    if (!c) continue;
    c->p = n;
    n->sz += c->sz;
    n->vcnt += c->vcnt;
    n->or_tree |= c->or_tree;
    n->or_nontree |= c->or_nontree;
  }
}

void pull_to_root(TNode* n) {
  for (; n; n = n->p) pull(n);
}

TNode* root_of(TNode* n) {
  while (n->p) n = n->p;
  return n;
}

int index_of(TNode* n) {
  int idx = n->l ? n->l->sz : 0;
  for (TNode* q = n; q->p; q = q->p)
    if (q->p->r == q) idx += 1 + (q->p->l ? q->p->l->sz : 0);
  return idx;
}

TNode* merge(TNode* a, TNode* b) {
  if (!a) return b;
  if (!b) return a;
  if (a->prio > b->prio) {
    a->r = merge(a->r, b);
    pull(a);
    return a;
  }
  b->l = merge(a, b->l);
  pull(b);
  return b;
}

// first k tour elements into a, rest into b
void split(TNode* t, int k, TNode*& a, TNode*& b) {
  if (!t) {
    a = b = nullptr;
    return;
  }
  const int lsz = t->l ? t->l->sz : 0;
  if (k <= lsz) {
    split(t->l, k, a, t->l);
    pull(t);
    b = t;
  } else {
    split(t->r, k - lsz - 1, t->r, b);
    pull(t);
    a = t;
  }
  if (a) a->p = nullptr;
  if (b) b->p = nullptr;
}

// rotate the tour so that it starts at the given element
TNode* reroot(TNode* at) {
  TNode* t = root_of(at);
  const int k = index_of(at);
  if (k == 0) return t;
  TNode *a, *b;
  split(t, k, a, b);
  return merge(b, a);
}

template <bool TNode::*Here, bool TNode::*Or>
TNode* find_flag(TNode* n) {
  for (;;) {
    if (n->l && n->l->*Or) {
      n = n->l;
      continue;
    }
    if (n->*Here) return n;
    n = n->r;
  }
}

}  // namespace

HltConnectivity::~HltConnectivity() {
  for (Forest& f : forests_) {
    for (auto& [k, n] : f.arc) delete n;
    for (TNode* n : f.loop) delete n;
  }
}

void HltConnectivity::ensure_level(int level) {
  while (static_cast<int>(forests_.size()) <= level) {
    forests_.emplace_back();
    forests_.back().loop.resize(alive_.size(), nullptr);
    nontree_.emplace_back(alive_.size());
  }
}

HltConnectivity::TNode* HltConnectivity::loop_node(int level, Vertex v) {
  ensure_level(level);
  TNode*& slot = forests_[level].loop[v];
  if (!slot) {
    slot = new TNode{};
    slot->prio = splitmix64(prio_seq_++);
    slot->u = slot->v = v;
    pull(slot);
  }
  return slot;
}

HltConnectivity::TNode* HltConnectivity::loop_node_const(int level,
                                                         Vertex v) const {
  return forests_[level].loop[v];
}

HltConnectivity::Vertex HltConnectivity::add_vertex() {
  Vertex v;
  if (!free_slots_.empty()) {
    v = free_slots_.back();
    free_slots_.pop_back();
    alive_[v] = true;
  } else {
    v = static_cast<Vertex>(alive_.size());
    alive_.push_back(true);
    degree_.push_back(0);
    for (Forest& f : forests_) f.loop.push_back(nullptr);
    for (auto& level : nontree_) level.emplace_back();
  }
  degree_[v] = 0;
  ++alive_count_;
  loop_node(0, v);
  return v;
}

void HltConnectivity::remove_vertex(Vertex v) {
  if (v >= alive_.size() || !alive_[v])
    throw std::invalid_argument("remove_vertex: unknown vertex");
  if (degree_[v] != 0)
    throw std::invalid_argument("remove_vertex: vertex is not isolated");
  for (std::size_t i = 0; i < forests_.size(); ++i) {
    TNode*& slot = forests_[i].loop[v];
    if (!slot) continue;
    if (slot->p || slot->sz != 1)
      throw std::logic_error("remove_vertex: loop node is not a singleton");
    delete slot;
    slot = nullptr;
  }
  alive_[v] = false;
  --alive_count_;
  free_slots_.push_back(v);
}

void HltConnectivity::link(int level, Vertex u, Vertex v, bool level_edge) {
  TNode* lu = loop_node(level, u);
  TNode* lv = loop_node(level, v);
  if (root_of(lu) == root_of(lv))
    throw std::logic_error("link: endpoints already connected at this level");
  TNode* tu = reroot(lu);
  TNode* tv = reroot(lv);
  TNode* auv = new TNode{};
  auv->prio = splitmix64(prio_seq_++);
  auv->u = u;
  auv->v = v;
  auv->tree_here = level_edge;
  pull(auv);
  TNode* avu = new TNode{};
  avu->prio = splitmix64(prio_seq_++);
  avu->u = v;
  avu->v = u;
  avu->tree_here = level_edge;
  pull(avu);
  forests_[level].arc.emplace(arc_key(u, v), auv);
  forests_[level].arc.emplace(arc_key(v, u), avu);
  merge(merge(merge(tu, auv), tv), avu);
}

void HltConnectivity::cut(int level, Vertex u, Vertex v) {
  Forest& f = forests_[level];
  auto i1 = f.arc.find(arc_key(u, v));
  auto i2 = f.arc.find(arc_key(v, u));
  TNode* a1 = i1->second;
  TNode* a2 = i2->second;
  f.arc.erase(i1);
  f.arc.erase(i2);
  int k1 = index_of(a1), k2 = index_of(a2);
  if (k1 > k2) {
    std::swap(a1, a2);
    std::swap(k1, k2);
  }
  TNode* t = root_of(a1);
  TNode *left, *mid, *right, *d1, *d2;
  split(t, k2 + 1, left, right);
  split(left, k2, left, d2);
  split(left, k1 + 1, left, mid);
  split(left, k1, left, d1);
  merge(left, right);
  delete d1;
  delete d2;
  (void)mid;  // the detached subtree keeps its own root
}

bool HltConnectivity::connected(Vertex u, Vertex v) const {
  if (u >= alive_.size() || !alive_[u] || v >= alive_.size() || !alive_[v])
    throw std::invalid_argument("connected: unknown vertex");
  if (u == v) return true;
  return root_of(loop_node_const(0, u)) == root_of(loop_node_const(0, v));
}

bool HltConnectivity::has_edge(Vertex u, Vertex v) const {
  return edges_.count(edge_key(u, v)) != 0;
}

void HltConnectivity::set_nontree_flag(int level, Vertex v) {
  TNode* ln = loop_node(level, v);
  const bool want = !nontree_[level][v].empty();
  if (ln->nontree_here != want) {
    ln->nontree_here = want;
    pull_to_root(ln);
  }
}

void HltConnectivity::insert_edge(Vertex u, Vertex v) {
  if (u >= alive_.size() || !alive_[u] || v >= alive_.size() || !alive_[v])
    throw std::invalid_argument("insert_edge: unknown vertex");
  if (u == v) throw std::invalid_argument("insert_edge: self loop");
  if (edges_.count(edge_key(u, v)))
    throw std::invalid_argument("insert_edge: parallel edge");
  ensure_level(0);
  EdgeInfo info;
  if (root_of(loop_node(0, u)) == root_of(loop_node(0, v))) {
    nontree_[0][u].insert(v);
    nontree_[0][v].insert(u);
    set_nontree_flag(0, u);
    set_nontree_flag(0, v);
    info = {0, false};
  } else {
    link(0, u, v, true);
    info = {0, true};
  }
  edges_.emplace(edge_key(u, v), info);
  degree_[u] += 1;
  degree_[v] += 1;
}

// Move a tree edge currently at `level` up to level+1.
void HltConnectivity::raise_tree_edge(int level, Vertex x, Vertex y) {
  Forest& f = forests_[level];
  for (std::uint64_t k : {arc_key(x, y), arc_key(y, x)}) {
    TNode* a = f.arc.at(k);
    a->tree_here = false;
    pull_to_root(a);
  }
  edges_[edge_key(x, y)].level = level + 1;
  link(level + 1, x, y, true);
}

bool HltConnectivity::replace(int level, Vertex u, Vertex v) {
  ensure_level(level + 1);  // pushed edges land here; resize before we hold refs
  TNode* ru = root_of(loop_node(level, u));
  TNode* rv = root_of(loop_node(level, v));
  if (ru->vcnt > rv->vcnt) std::swap(ru, rv);

  // push tree edges of this level in the smaller tree one level up
  while (ru->or_tree) {
    TNode* an = find_flag<&TNode::tree_here, &TNode::or_tree>(ru);
    ++touches_;
    raise_tree_edge(level, an->u, an->v);
  }

  // scan non-tree edges of the smaller tree; either one reconnects or it
  // also moves one level up
  while (ru->or_nontree) {
    TNode* ln = find_flag<&TNode::nontree_here, &TNode::or_nontree>(ru);
    const Vertex x = ln->u;
    auto& set_x = nontree_[level][x];
    while (!set_x.empty()) {
      ++touches_;
      const Vertex y = *set_x.begin();
      set_x.erase(set_x.begin());
      nontree_[level][y].erase(x);
      set_nontree_flag(level, y);
      if (root_of(loop_node(level, y)) == rv) {
        set_nontree_flag(level, x);
        edges_[edge_key(x, y)] = {level, true};
        for (int j = 0; j < level; ++j) link(j, x, y, false);
        link(level, x, y, true);
        return true;
      }
      nontree_[level + 1][x].insert(y);
      nontree_[level + 1][y].insert(x);
      set_nontree_flag(level + 1, x);
      set_nontree_flag(level + 1, y);
      edges_[edge_key(x, y)].level = level + 1;
    }
    set_nontree_flag(level, x);
  }
  return false;
}

void HltConnectivity::delete_edge(Vertex u, Vertex v) {
  auto it = edges_.find(edge_key(u, v));
  if (it == edges_.end())
    throw std::invalid_argument("delete_edge: unknown edge");
  const EdgeInfo info = it->second;
  edges_.erase(it);
  degree_[u] -= 1;
  degree_[v] -= 1;
  if (!info.tree) {
    nontree_[info.level][u].erase(v);
    nontree_[info.level][v].erase(u);
    set_nontree_flag(info.level, u);
    set_nontree_flag(info.level, v);
    return;
  }
  for (int i = 0; i <= info.level; ++i) cut(i, u, v);
  for (int i = info.level; i >= 0; --i)
    if (replace(i, u, v)) return;
}

void HltConnectivity::check_invariants(bool size_bounds) const {
  auto require = [](bool cond, const char* what) {
    if (!cond) throw std::logic_error(std::string("HLT invariant: ") + what);
  };
  const int top = static_cast<int>(forests_.size());

  // per-level union-find over tree edges of level >= i
  for (int i = 0; i < top; ++i) {
    std::vector<Vertex> parent(alive_.size());
    for (Vertex v = 0; v < parent.size(); ++v) parent[v] = v;
    std::function<Vertex(Vertex)> find = [&](Vertex x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& [key, info] : edges_) {
      if (!info.tree || info.level < i) continue;
      const Vertex a = static_cast<Vertex>(key >> 32);
      const Vertex b = static_cast<Vertex>(key & 0xffffffffu);
      const Vertex ra = find(a), rb = find(b);
      require(ra != rb, "tree edges at a level form a cycle");
      parent[ra] = rb;
    }
    // Euler-tour connectivity must agree with the union-find partition
    std::unordered_map<const TNode*, Vertex> tour_to_comp;
    std::unordered_map<Vertex, const TNode*> comp_to_tour;
    for (Vertex v = 0; v < alive_.size(); ++v) {
      if (!alive_[v]) continue;
      const TNode* ln = forests_[i].loop[v];
      if (!ln) {
        // vertices absent from a forest must be singletons there
        for (const auto& [key, info] : edges_) {
          if (!info.tree || info.level < i) continue;
          require(static_cast<Vertex>(key >> 32) != v &&
                      static_cast<Vertex>(key & 0xffffffffu) != v,
                  "tree edge endpoint lacks a tour node");
        }
        continue;
      }
      const TNode* rt = ln;
      while (rt->p) rt = rt->p;
      auto [pos, fresh] = tour_to_comp.try_emplace(rt, find(v));
      require(pos->second == find(v), "tour groups differ from forest");
      auto [rpos, rfresh] = comp_to_tour.try_emplace(find(v), rt);
      require(rpos->second == rt, "forest component split across tours");
      (void)fresh;
      (void)rfresh;
    }
    // non-tree edges at level i connect vertices of one F_i tree
    for (Vertex v = 0; v < alive_.size(); ++v) {
      if (!alive_[v] || i >= static_cast<int>(nontree_.size())) continue;
      for (Vertex w : nontree_[i][v])
        require(find(v) == find(w),
                "non-tree edge endpoints split across F_i trees");
    }
    if (size_bounds && i > 0) {
      std::unordered_map<Vertex, std::size_t> comp_size;
      for (Vertex v = 0; v < alive_.size(); ++v)
        if (alive_[v]) comp_size[find(v)] += 1;
      // only components that actually contain level->=i tree edges matter,
      // singletons are trivially fine
      for (const auto& [key, info] : edges_) {
        if (!info.tree || info.level < i) continue;
        const Vertex a = static_cast<Vertex>(key >> 32);
        require(comp_size[find(a)] <= alive_count_ >> i,
                "level-i tree exceeds n / 2^i vertices");
      }
    }
  }

  // edge bookkeeping vs tour structures
  for (const auto& [key, info] : edges_) {
    const Vertex a = static_cast<Vertex>(key >> 32);
    const Vertex b = static_cast<Vertex>(key & 0xffffffffu);
    if (info.tree) {
      for (int i = 0; i <= info.level; ++i) {
        const auto& arcs = forests_[i].arc;
        require(arcs.count(arc_key(a, b)) && arcs.count(arc_key(b, a)),
                "tree edge arcs missing in a lower forest");
        require((arcs.at(arc_key(a, b))->tree_here) == (i == info.level),
                "tree_here flag at the wrong level");
      }
    } else {
      require(nontree_[info.level][a].count(b) &&
                  nontree_[info.level][b].count(a),
              "non-tree edge missing from adjacency");
    }
  }
}

// ---------------------------------------------------------------------------

bool ProxyGraph::PairKey::operator<(const PairKey& o) const {
  const auto t = std::tuple(a.level, a.ix, a.iy, b.level, b.ix, b.iy);
  const auto s = std::tuple(o.a.level, o.a.ix, o.a.iy, o.b.level, o.b.ix,
                            o.b.iy);
  return t < s;
}

ProxyGraph::PairKey ProxyGraph::norm(const Cell& x, const Cell& y) {
  const auto tx = std::tuple(x.level, x.ix, x.iy);
  const auto ty = std::tuple(y.level, y.ix, y.iy);
  return tx <= ty ? PairKey{x, y} : PairKey{y, x};
}

void ProxyGraph::add_vertex(const Cell& c) {
  if (verts_.count(c))
    throw std::invalid_argument("ProxyGraph::add_vertex: duplicate vertex");
  verts_.emplace(c, hlt_.add_vertex());
  incident_.emplace(c, 0);
}

void ProxyGraph::remove_vertex(const Cell& c) {
  auto it = verts_.find(c);
  if (it == verts_.end())
    throw std::invalid_argument("ProxyGraph::remove_vertex: unknown vertex");
  if (incident_.at(c) != 0)
    throw std::invalid_argument("ProxyGraph::remove_vertex: not isolated");
  hlt_.remove_vertex(it->second);
  verts_.erase(it);
  incident_.erase(c);
}

void ProxyGraph::activate(const Cell& a, const Cell& b) {
  auto ia = verts_.find(a), ib = verts_.find(b);
  if (ia == verts_.end() || ib == verts_.end())
    throw std::invalid_argument("ProxyGraph::activate: unknown vertex");
  int& rc = refcnt_[norm(a, b)];
  rc += 1;
  if (rc > 2) throw std::logic_error("ProxyGraph: refcount above 2");
  incident_[a] += 1;
  if (!(a == b)) incident_[b] += 1;
  if (rc == 1 && !(a == b)) hlt_.insert_edge(ia->second, ib->second);
}

void ProxyGraph::deactivate(const Cell& a, const Cell& b) {
  auto it = refcnt_.find(norm(a, b));
  if (it == refcnt_.end())
    throw std::invalid_argument("ProxyGraph::deactivate: inactive pair");
  it->second -= 1;
  incident_[a] -= 1;
  if (!(a == b)) incident_[b] -= 1;
  if (it->second == 0) {
    if (!(a == b)) hlt_.delete_edge(verts_.at(a), verts_.at(b));
    refcnt_.erase(it);
  }
}

bool ProxyGraph::connected(const Cell& a, const Cell& b) const {
  auto ia = verts_.find(a), ib = verts_.find(b);
  if (ia == verts_.end() || ib == verts_.end())
    throw std::invalid_argument("ProxyGraph::connected: unknown vertex");
  return hlt_.connected(ia->second, ib->second);
}

}  // namespace sqconn
