#include "qecfab/uf_decoder.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <string>

namespace qecfab {

namespace {

void check_dimensions(const DecodingGraph& graph, const SyndromeRounds& syndrome) {
  if (syndrome.rounds() != graph.rounds() || syndrome.bits_per_round() != 2 * graph.stabilizers()) {
    throw DecodeError("syndrome is " + std::to_string(syndrome.rounds()) + "x" +
                      std::to_string(syndrome.bits_per_round()) + " but graph expects " +
                      std::to_string(graph.rounds()) + "x" +
                      std::to_string(2 * graph.stabilizers()));
  }
}

std::vector<VertexId> defects_of(const DecodingGraph& graph, const SyndromeRounds& syndrome) {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    if (syndrome.vertex_bit(graph.sector(), graph.stabilizers(), v)) out.push_back(v);
  }
  return out;
}

VertexId other_end(const DecodingGraph::Edge& e, VertexId v) { return e.a == v ? e.b : e.a; }

// Sorted symmetric difference accumulator for edge sets.
void toggle(std::vector<std::uint8_t>& mask, FaultId f) { mask[f] ^= 1; }

std::vector<FaultId> mask_to_list(const std::vector<std::uint8_t>& mask) {
  std::vector<FaultId> out;
  for (FaultId f = 0; f < mask.size(); ++f) {
    if (mask[f]) out.push_back(f);
  }
  return out;
}

}  // namespace

UnionFindDecoder::UnionFindDecoder(const DecodingGraph& graph)
    : graph_(&graph), node_count_(graph.vertex_count() + 1) {
  parent_.resize(node_count_);
  rank_.resize(node_count_);
  parity_.resize(node_count_);
  touches_boundary_.resize(node_count_);
  frontier_.resize(node_count_);
  defect_.resize(node_count_);
  growth_.resize(graph.edge_count());
}

std::uint32_t UnionFindDecoder::find(std::uint32_t v) {
  std::uint32_t root = v;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[v] != root) {
    const std::uint32_t next = parent_[v];
    parent_[v] = root;
    v = next;
  }
  return root;
}

std::uint32_t UnionFindDecoder::unite(std::uint32_t a, std::uint32_t b) {
  if (rank_[a] < rank_[b] || (rank_[a] == rank_[b] && b < a)) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
  parity_[a] ^= parity_[b];
  touches_boundary_[a] |= touches_boundary_[b];
  auto& dst = frontier_[a];
  auto& src = frontier_[b];
  dst.insert(dst.end(), src.begin(), src.end());
  src.clear();
  return a;
}

bool UnionFindDecoder::is_active(std::uint32_t root) const {
  return parity_[root] != 0 && touches_boundary_[root] == 0;
}

Correction UnionFindDecoder::decode(const SyndromeRounds& syndrome) {
  const DecodingGraph& g = *graph_;
  check_dimensions(g, syndrome);
  stats_ = {};
  Correction out{g.sector(), {}};

  const std::vector<VertexId> defects = defects_of(g, syndrome);
  if (defects.empty()) return out;

  const VertexId boundary = g.boundary();
  for (std::uint32_t v = 0; v < node_count_; ++v) {
    parent_[v] = v;
    rank_[v] = 0;
    parity_[v] = 0;
    defect_[v] = 0;
    touches_boundary_[v] = v == boundary ? 1 : 0;
    frontier_[v].clear();
    if (v != boundary) frontier_[v].push_back(v);
  }
  std::fill(growth_.begin(), growth_.end(), std::uint8_t{0});
  forest_.clear();
  for (VertexId v : defects) {
    parity_[v] = 1;
    defect_[v] = 1;
  }

  // Candidate roots; merged-away entries are filtered each round.
  std::vector<std::uint32_t> roots(defects.begin(), defects.end());
  std::vector<FaultId> newly_full;
  std::vector<std::uint32_t> kept;

  for (;;) {
    for (auto& r : roots) r = find(r);
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    roots.erase(std::remove_if(roots.begin(), roots.end(),
                               [this](std::uint32_t r) { return !is_active(r); }),
                roots.end());
    if (roots.empty()) break;
    ++stats_.growth_rounds;

    newly_full.clear();
    bool grew = false;
    for (std::uint32_t root : roots) {
      kept.clear();
      for (std::uint32_t v : frontier_[root]) {
        bool open = false;
        for (FaultId e : g.incident(v)) {
          if (growth_[e] >= 2) continue;
          grew = true;
          if (++growth_[e] == 2) {
            newly_full.push_back(e);
          } else {
            open = true;
          }
        }
        if (open) kept.push_back(v);
      }
      // Vertices whose edges are all fully grown leave the frontier; the
      // far ends of full edges join through the merge step below.
      frontier_[root].swap(kept);
    }
    if (!grew) {
      throw std::logic_error("union-find growth stalled: active cluster cannot reach boundary");
    }

    for (FaultId e : newly_full) {
      ++stats_.grown_edges;
      const auto& edge = g.edge(e);
      const std::uint32_t ra = find(edge.a);
      const std::uint32_t rb = find(edge.b);
      if (ra == rb) continue;
      unite(ra, rb);
      forest_.push_back(e);
      ++stats_.merges;
    }
  }

  // Peel the merge forest: trees containing the boundary are rooted there,
  // every other tree at its lowest vertex id.
  std::vector<std::vector<std::pair<VertexId, FaultId>>> adj(node_count_);
  for (FaultId e : forest_) {
    const auto& edge = g.edge(e);
    adj[edge.a].emplace_back(edge.b, e);
    adj[edge.b].emplace_back(edge.a, e);
  }
  std::vector<std::uint8_t> seen(node_count_, 0);
  std::vector<FaultId> parent_edge(node_count_, std::numeric_limits<FaultId>::max());
  std::vector<VertexId> order;
  std::vector<std::uint8_t> chosen(g.edge_count(), 0);

  auto peel_tree = [&](VertexId root) {
    order.clear();
    order.push_back(root);
    seen[root] = 1;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const VertexId v = order[i];
      for (auto [w, e] : adj[v]) {
        if (seen[w]) continue;
        seen[w] = 1;
        parent_edge[w] = e;
        order.push_back(w);
      }
    }
    for (std::size_t i = order.size(); i-- > 1;) {
      const VertexId v = order[i];
      if (!defect_[v]) continue;
      const FaultId e = parent_edge[v];
      toggle(chosen, e);
      ++stats_.peeled_edges;
      defect_[v] = 0;
      defect_[other_end(g.edge(e), v)] ^= 1;
    }
    if (root != boundary && defect_[root]) {
      throw std::logic_error("peeling left an unmatched defect in an even cluster");
    }
    defect_[root] = 0;
  };

  if (!adj[boundary].empty()) peel_tree(boundary);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (!seen[v] && !adj[v].empty()) peel_tree(v);
  }

  out.faults = mask_to_list(chosen);
  return out;
}

Correction decode(const DecodingGraph& graph, const SyndromeRounds& syndrome, DecodeStats* stats) {
  UnionFindDecoder decoder(graph);
  Correction c = decoder.decode(syndrome);
  if (stats) *stats = decoder.last_stats();
  return c;
}

Correction oracle_decode(const DecodingGraph& graph, const SyndromeRounds& syndrome,
                         const OracleLimits& limits) {
  check_dimensions(graph, syndrome);
  Correction out{graph.sector(), {}};
  std::vector<VertexId> terminals = defects_of(graph, syndrome);
  if (terminals.empty()) return out;
  if (terminals.size() > limits.max_defects) {
    throw DecodeError("oracle cap exceeded: " + std::to_string(terminals.size()) +
                      " defects (limit " + std::to_string(limits.max_defects) + ")");
  }
  if (graph.vertex_count() + 1 > limits.max_vertices) {
    throw DecodeError("oracle cap exceeded: graph has " + std::to_string(graph.vertex_count()) +
                      " vertices");
  }
  if (terminals.size() % 2 == 1) terminals.push_back(graph.boundary());

  const std::size_t n = terminals.size();
  const std::uint32_t nodes = graph.vertex_count() + 1;
  constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();

  // BFS tree from every terminal.
  std::vector<std::vector<std::uint32_t>> dist(n, std::vector<std::uint32_t>(nodes, kInf));
  std::vector<std::vector<FaultId>> via(n, std::vector<FaultId>(nodes, 0));
  for (std::size_t i = 0; i < n; ++i) {
    std::queue<VertexId> q;
    dist[i][terminals[i]] = 0;
    q.push(terminals[i]);
    while (!q.empty()) {
      const VertexId v = q.front();
      q.pop();
      for (FaultId e : graph.incident(v)) {
        const VertexId w = other_end(graph.edge(e), v);
        if (dist[i][w] != kInf) continue;
        dist[i][w] = dist[i][v] + 1;
        via[i][w] = e;
        q.push(w);
      }
    }
  }

  // best[mask]: minimum pairing cost of the terminals in mask.
  const std::size_t full = (std::size_t{1} << n) - 1;
  std::vector<std::uint32_t> best(full + 1, kInf);
  std::vector<std::uint8_t> partner(full + 1, 0);
  best[0] = 0;
  for (std::size_t mask = 1; mask <= full; ++mask) {
    if (__builtin_popcountll(mask) % 2 == 1) continue;
    const int i = __builtin_ctzll(mask);
    const std::size_t rest = mask & ~(std::size_t{1} << i);
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j) {
      if (!(rest & (std::size_t{1} << j))) continue;
      const std::uint32_t dij = dist[static_cast<std::size_t>(i)][terminals[j]];
      const std::uint32_t sub = best[rest & ~(std::size_t{1} << j)];
      if (dij == kInf || sub == kInf) continue;
      if (dij + sub < best[mask]) {
        best[mask] = dij + sub;
        partner[mask] = static_cast<std::uint8_t>(j);
      }
    }
  }
  if (best[full] == kInf) throw DecodeError("oracle found no valid pairing");

  std::vector<std::uint8_t> chosen(graph.edge_count(), 0);
  std::size_t mask = full;
  while (mask) {
    const auto i = static_cast<std::size_t>(__builtin_ctzll(mask));
    const std::size_t j = partner[mask];
    VertexId v = terminals[j];
    while (v != terminals[i]) {
      const FaultId e = via[i][v];
      toggle(chosen, e);
      v = other_end(graph.edge(e), v);
    }
    mask &= ~((std::size_t{1} << i) | (std::size_t{1} << j));
  }
  out.faults = mask_to_list(chosen);
  return out;
}

bool is_valid(const Correction& correction, const SyndromeRounds& syndrome,
              const DecodingGraph& graph) noexcept {
  if (correction.sector != graph.sector()) return false;
  if (syndrome.rounds() != graph.rounds() || syndrome.bits_per_round() != 2 * graph.stabilizers()) {
    return false;
  }
  for (FaultId f : correction.faults) {
    if (f >= graph.edge_count()) return false;
  }
  try {
    const SyndromeRounds produced = syndrome_of(correction.faults, graph);
    for (VertexId v = 0; v < graph.vertex_count(); ++v) {
      if (produced.vertex_bit(graph.sector(), graph.stabilizers(), v) !=
          syndrome.vertex_bit(graph.sector(), graph.stabilizers(), v)) {
        return false;
      }
    }
  } catch (...) {
    return false;
  }
  return true;
}

bool is_logical_failure(const ErrorPattern& pattern, const Correction& correction,
                        const DecodingGraph& graph, const CodeLayout& layout) {
  if (pattern.sector != graph.sector() || correction.sector != graph.sector()) {
    throw DecodeError("pattern, correction and graph sectors differ");
  }
  if (!is_valid(correction, syndrome_of(pattern, graph), graph)) {
    throw DecodeError("correction does not annihilate the pattern's syndrome");
  }
  std::vector<std::uint8_t> residual(graph.edge_count(), 0);
  for (FaultId f : pattern.faults) residual[f] ^= 1;
  for (FaultId f : correction.faults) residual[f] ^= 1;

  std::vector<std::uint8_t> net(layout.data_qubit_count(), 0);
  for (FaultId f = 0; f < graph.spacelike_count(); ++f) {
    if (residual[f]) net[graph.edge(f).site] ^= 1;
  }
  unsigned crossings = 0;
  for (QubitIndex q : layout.crossing_set(graph.sector())) crossings += net[q];
  return crossings % 2 == 1;
}

}  // namespace qecfab
