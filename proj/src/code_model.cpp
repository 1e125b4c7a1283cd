#include "qecfab/code_model.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>

#include "qecfab/rng.hpp"

namespace qecfab {

std::string_view to_string(Sector s) noexcept { return s == Sector::X ? "X" : "Z"; }

namespace {

bool is_x_plaquette(std::uint32_t i, std::uint32_t j, std::uint32_t d) {
  const bool even = (i + j) % 2 == 0;
  const bool top_or_bottom = i == 0 || i == d;
  const bool left_or_right = j == 0 || j == d;
  if (top_or_bottom && left_or_right) return false;  // corners carry nothing
  if (top_or_bottom) return even;
  if (left_or_right) return false;
  return even;
}

bool is_z_plaquette(std::uint32_t i, std::uint32_t j, std::uint32_t d) {
  const bool odd = (i + j) % 2 == 1;
  const bool top_or_bottom = i == 0 || i == d;
  const bool left_or_right = j == 0 || j == d;
  if (top_or_bottom && left_or_right) return false;
  if (left_or_right) return odd;
  if (top_or_bottom) return false;
  return odd;
}

}  // namespace

CodeLayout::CodeLayout(std::uint32_t distance) : distance_(distance) {
  if (distance == 0 || distance % 2 == 0) {
    throw std::invalid_argument("surface code distance must be a positive odd integer, got " +
                                std::to_string(distance));
  }
  const std::uint32_t d = distance;
  const std::uint32_t n = d * d;
  x_adj_.assign(2 * n, 0);
  x_adj_count_.assign(n, 0);
  z_adj_.assign(2 * n, 0);
  z_adj_count_.assign(n, 0);

  if (d > 1) {
    for (std::uint32_t i = 0; i <= d; ++i) {
      for (std::uint32_t j = 0; j <= d; ++j) {
        const bool x = is_x_plaquette(i, j, d);
        const bool z = is_z_plaquette(i, j, d);
        if (!x && !z) continue;
        Stabilizer st{i, j, {}};
        for (int di = -1; di <= 0; ++di) {
          for (int dj = -1; dj <= 0; ++dj) {
            const int r = static_cast<int>(i) + di;
            const int c = static_cast<int>(j) + dj;
            if (r < 0 || c < 0 || r >= static_cast<int>(d) || c >= static_cast<int>(d)) continue;
            st.data.push_back(static_cast<QubitIndex>(r) * d + static_cast<QubitIndex>(c));
          }
        }
        auto& stabs = x ? x_stabs_ : z_stabs_;
        auto& adj = x ? x_adj_ : z_adj_;
        auto& cnt = x ? x_adj_count_ : z_adj_count_;
        const auto id = static_cast<std::uint32_t>(stabs.size());
        for (QubitIndex q : st.data) adj[2 * q + cnt[q]++] = id;
        stabs.push_back(std::move(st));
      }
    }
  }

  for (QubitIndex c = 0; c < d; ++c) x_logical_.push_back(c);      // row 0
  for (QubitIndex r = 0; r < d; ++r) z_logical_.push_back(r * d);  // column 0
}

std::span<const std::uint32_t> CodeLayout::stabilizers_of(Sector s, QubitIndex q) const noexcept {
  const auto& adj = s == Sector::X ? x_adj_ : z_adj_;
  const auto& cnt = s == Sector::X ? x_adj_count_ : z_adj_count_;
  return {adj.data() + 2 * q, cnt[q]};
}

QubitIndex CodeLayout::ancilla_qubit(Sector s, std::uint32_t stab) const noexcept {
  return data_qubit_count() + syndrome_column(s, stab);
}

CodeLayout build_layout(std::int64_t distance) {
  if (distance < 1 || distance % 2 == 0 || distance > 4095) {
    throw std::invalid_argument("surface code distance must be a positive odd integer, got " +
                                std::to_string(distance));
  }
  return CodeLayout(static_cast<std::uint32_t>(distance));
}

DecodingGraph::DecodingGraph(const CodeLayout& layout, Sector sector, std::uint32_t rounds)
    : sector_(sector),
      rounds_(rounds),
      distance_(layout.distance()),
      stabs_(layout.stabilizer_count_per_sector()),
      data_qubits_(layout.data_qubit_count()) {
  if (rounds == 0) throw std::invalid_argument("decoding graph needs at least one round");

  if (stabs_ > 0) {
    for (std::uint32_t t = 0; t < rounds; ++t) {
      for (QubitIndex q = 0; q < data_qubits_; ++q) {
        const auto adj = layout.stabilizers_of(sector, q);
        // Every data qubit of a d >= 3 code touches one or two stabilizers.
        const VertexId a = vertex(adj[0], t);
        const VertexId b = adj.size() == 2 ? vertex(adj[1], t) : boundary();
        edges_.push_back({a, b, EdgeKind::Spacelike, t, q});
      }
    }
  }
  spacelike_count_ = edges_.size();
  for (std::uint32_t t = 0; t + 1 < rounds; ++t) {
    for (std::uint32_t s = 0; s < stabs_; ++s) {
      edges_.push_back({vertex(s, t), vertex(s, t + 1), EdgeKind::Timelike, t, s});
    }
  }

  // CSR incidence including the boundary vertex.
  const std::uint32_t nv = vertex_count() + 1;
  offsets_.assign(nv + 1, 0);
  for (const Edge& e : edges_) {
    ++offsets_[e.a + 1];
    ++offsets_[e.b + 1];
  }
  for (std::uint32_t v = 0; v < nv; ++v) offsets_[v + 1] += offsets_[v];
  incidence_.resize(offsets_[nv]);
  std::vector<std::uint32_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (FaultId f = 0; f < edges_.size(); ++f) {
    incidence_[fill[edges_[f].a]++] = f;
    incidence_[fill[edges_[f].b]++] = f;
  }
}

FaultId DecodingGraph::data_fault(QubitIndex q, std::uint32_t round) const {
  if (q >= data_qubits_ || round >= rounds_ || spacelike_count_ == 0) {
    throw std::out_of_range("data fault outside decoding graph");
  }
  return round * data_qubits_ + q;
}

FaultId DecodingGraph::measurement_fault(std::uint32_t stab, std::uint32_t round) const {
  if (stab >= stabs_ || round + 1 >= rounds_) {
    throw std::out_of_range("measurement fault outside decoding graph");
  }
  return static_cast<FaultId>(spacelike_count_) + round * stabs_ + stab;
}

DecodingGraph build_decoding_graph(const CodeLayout& layout, Sector sector, std::int64_t rounds) {
  if (rounds < 1 || rounds > 1'000'000) {
    throw std::invalid_argument("rounds must be >= 1, got " + std::to_string(rounds));
  }
  return DecodingGraph(layout, sector, static_cast<std::uint32_t>(rounds));
}

std::vector<std::pair<QubitIndex, std::uint32_t>> ErrorPattern::data_faults(
    const DecodingGraph& g) const {
  std::vector<std::pair<QubitIndex, std::uint32_t>> out;
  for (FaultId f : faults) {
    const auto& e = g.edge(f);
    if (e.kind == EdgeKind::Spacelike) out.emplace_back(e.site, e.round);
  }
  return out;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> ErrorPattern::measurement_faults(
    const DecodingGraph& g) const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (FaultId f : faults) {
    const auto& e = g.edge(f);
    if (e.kind == EdgeKind::Timelike) out.emplace_back(e.site, e.round);
  }
  return out;
}

ErrorPattern ErrorPattern::operator^(const ErrorPattern& other) const {
  if (sector != other.sector) throw std::invalid_argument("patterns belong to different sectors");
  ErrorPattern out{sector, {}, rng_seed};
  std::set_symmetric_difference(faults.begin(), faults.end(), other.faults.begin(),
                                other.faults.end(), std::back_inserter(out.faults));
  return out;
}

ErrorPattern make_pattern(Sector sector, std::vector<FaultId> faults) {
  std::sort(faults.begin(), faults.end());
  std::vector<FaultId> kept;
  kept.reserve(faults.size());
  for (std::size_t i = 0; i < faults.size();) {
    std::size_t j = i;
    while (j < faults.size() && faults[j] == faults[i]) ++j;
    if ((j - i) % 2 == 1) kept.push_back(faults[i]);
    i = j;
  }
  return ErrorPattern{sector, std::move(kept), 0};
}

ErrorPattern sample_errors(const DecodingGraph& graph, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("error probability must lie in [0, 1]");
  ErrorPattern out{graph.sector(), {}, seed};
  if (p == 0.0) return out;
  const auto n = static_cast<FaultId>(graph.edge_count());
  if (p == 1.0) {
    out.faults.resize(n);
    for (FaultId f = 0; f < n; ++f) out.faults[f] = f;
    return out;
  }
  CounterRng rng(seed, {static_cast<std::uint64_t>(graph.sector())});
  for (FaultId f = 0; f < n; ++f) {
    if (rng.uniform() < p) out.faults.push_back(f);
  }
  return out;
}

SyndromeRounds::SyndromeRounds(std::uint32_t rounds, std::uint32_t bits_per_round)
    : rounds_(rounds),
      width_(bits_per_round),
      bits_(static_cast<std::size_t>(rounds) * bits_per_round, 0) {}

std::size_t SyndromeRounds::weight() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

SyndromeRounds& SyndromeRounds::operator^=(const SyndromeRounds& other) {
  if (rounds_ != other.rounds_ || width_ != other.width_) {
    throw std::invalid_argument("syndrome dimensions differ");
  }
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] ^= other.bits_[i];
  return *this;
}

SyndromeRounds empty_syndrome(const DecodingGraph& graph) {
  return SyndromeRounds(graph.rounds(), 2 * graph.stabilizers());
}

SyndromeRounds syndrome_of(std::span<const FaultId> faults, const DecodingGraph& graph) {
  SyndromeRounds out = empty_syndrome(graph);
  for (FaultId f : faults) {
    if (f >= graph.edge_count()) {
      throw std::out_of_range("fault id " + std::to_string(f) + " is not an edge of the graph");
    }
    const auto& e = graph.edge(f);
    out.flip_vertex(graph.sector(), graph.stabilizers(), e.a);
    if (!graph.is_boundary(e.b)) out.flip_vertex(graph.sector(), graph.stabilizers(), e.b);
  }
  return out;
}

SyndromeRounds syndrome_of(const ErrorPattern& pattern, const DecodingGraph& graph) {
  if (pattern.sector != graph.sector()) {
    throw std::invalid_argument("pattern sector does not match graph sector");
  }
  return syndrome_of(std::span<const FaultId>(pattern.faults), graph);
}

void write_layout_records(std::ostream& os, const CodeLayout& layout) {
  os << "layout distance=" << layout.distance() << " data=" << layout.data_qubit_count()
     << " stabilizers_per_sector=" << layout.stabilizer_count_per_sector()
     << " total_qubits=" << layout.total_qubits() << '\n';
  for (Sector s : {Sector::X, Sector::Z}) {
    const auto stabs = layout.stabilizers(s);
    for (std::uint32_t i = 0; i < stabs.size(); ++i) {
      os << "stabilizer sector=" << to_string(s) << " id=" << i
         << " qubit=" << layout.ancilla_qubit(s, i) << " corner=" << stabs[i].row << ','
         << stabs[i].col << " data=";
      for (std::size_t k = 0; k < stabs[i].data.size(); ++k) {
        os << (k ? "," : "") << stabs[i].data[k];
      }
      os << '\n';
    }
  }
}

void write_graph_records(std::ostream& os, const DecodingGraph& graph) {
  os << "graph sector=" << to_string(graph.sector()) << " rounds=" << graph.rounds()
     << " vertices=" << graph.vertex_count() << " edges=" << graph.edge_count() << '\n';
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    os << "vertex id=" << v << " stabilizer=" << v % graph.stabilizers()
       << " round=" << v / graph.stabilizers() << '\n';
  }
  for (FaultId f = 0; f < graph.edge_count(); ++f) {
    const auto& e = graph.edge(f);
    os << "edge id=" << f << " a=" << e.a << " b=";
    if (graph.is_boundary(e.b)) {
      os << "BOUNDARY";
    } else {
      os << e.b;
    }
    os << " kind=" << (e.kind == EdgeKind::Spacelike ? "spacelike" : "timelike")
       << " round=" << e.round << " site=" << e.site << '\n';
  }
}

}  // namespace qecfab
