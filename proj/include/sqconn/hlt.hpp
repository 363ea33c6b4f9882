#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sqconn/geometry.hpp"

// Fully-dynamic connectivity (Holm / de Lichtenberg / Thorup): a hierarchy
// of spanning forests F_0 ⊇ F_1 ⊇ ..., each maintained as Euler tours over
// balanced binary trees. Deleting a tree edge searches for a replacement
// from the edge's level downward, pushing scanned edges one level up to pay
// for the search.

namespace sqconn {

class HltConnectivity {
 public:
  using Vertex = std::uint32_t;

  HltConnectivity() = default;
  ~HltConnectivity();
  HltConnectivity(const HltConnectivity&) = delete;
  HltConnectivity& operator=(const HltConnectivity&) = delete;

  Vertex add_vertex();
  void remove_vertex(Vertex v);  // v must be isolated
  void insert_edge(Vertex u, Vertex v);  // u != v, no parallel edges
  void delete_edge(Vertex u, Vertex v);
  bool connected(Vertex u, Vertex v) const;
  bool has_edge(Vertex u, Vertex v) const;

  std::size_t vertex_count() const { return alive_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  // total edges touched by replacement searches, for amortized-cost tracking
  std::uint64_t replacement_touches() const { return touches_; }

  // Throws std::logic_error when an internal invariant fails. Size bounds
  // (level-i trees hold at most n/2^i vertices) are only meaningful while
  // the vertex set is not shrinking, so they are checked on request.
  void check_invariants(bool size_bounds) const;

 private:
  struct TNode;
  struct Forest {
    std::unordered_map<std::uint64_t, TNode*> arc;  // (u,v) -> arc node
    std::vector<TNode*> loop;                       // per vertex, lazy
  };

  struct EdgeInfo {
    int level = 0;
    bool tree = false;
  };

  TNode* loop_node(int level, Vertex v);
  TNode* loop_node_const(int level, Vertex v) const;
  void link(int level, Vertex u, Vertex v, bool level_edge);
  void cut(int level, Vertex u, Vertex v);
  void set_nontree_flag(int level, Vertex v);
  void raise_tree_edge(int level, Vertex x, Vertex y);
  bool replace(int level, Vertex u, Vertex v);
  void ensure_level(int level);

  std::vector<Forest> forests_;
  // nontree_[level][vertex] -> neighbors via non-tree edges at that level
  std::vector<std::vector<std::unordered_set<Vertex>>> nontree_;
  std::unordered_map<std::uint64_t, EdgeInfo> edges_;
  std::vector<bool> alive_;
  std::vector<std::uint32_t> degree_;
  std::vector<Vertex> free_slots_;
  std::size_t alive_count_ = 0;
  std::uint64_t touches_ = 0;
  std::uint64_t prio_seq_ = 0x243f6a8885a308d3ULL;
};

// Multigraph over storing cells. Matching pairs activate the two possible
// orientations of an unordered cell pair, so refcounts stay in {0, 1, 2};
// the HLT structure sees each unordered pair as a single edge. Self pairs
// are tracked but never reach HLT (a loop cannot change connectivity).
class ProxyGraph {
 public:
  void add_vertex(const Cell& c);
  void remove_vertex(const Cell& c);  // c must be isolated
  bool has_vertex(const Cell& c) const { return verts_.count(c) != 0; }
  void activate(const Cell& a, const Cell& b);
  void deactivate(const Cell& a, const Cell& b);
  bool connected(const Cell& a, const Cell& b) const;

  std::size_t vertex_count() const { return verts_.size(); }
  std::size_t edge_count() const { return refcnt_.size(); }
  const HltConnectivity& hlt() const { return hlt_; }

 private:
  struct PairKey {
    Cell a, b;  // normalized: (a, b) with a <= b by (level, ix, iy)
    bool operator<(const PairKey& o) const;
  };
  static PairKey norm(const Cell& x, const Cell& y);

  HltConnectivity hlt_;
  std::unordered_map<Cell, HltConnectivity::Vertex, CellHash> verts_;
  std::unordered_map<Cell, std::uint32_t, CellHash> incident_;
  std::map<PairKey, int> refcnt_;
};

}  // namespace sqconn
