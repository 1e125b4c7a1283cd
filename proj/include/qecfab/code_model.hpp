#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace qecfab {

enum class Sector : std::uint8_t { X = 0, Z = 1 };

std::string_view to_string(Sector s) noexcept;

using QubitIndex = std::uint32_t;
using VertexId = std::uint32_t;
using FaultId = std::uint32_t;

// Rotated surface code on a d x d data grid.
//
// Data qubit (row, col) has index row * d + col. Stabilizers sit on the
// plaquette corners (i, j), 0 <= i, j <= d, and cover the data qubits
// (i-1, j-1), (i-1, j), (i, j-1), (i, j) that exist. Bulk plaquettes are
// X-type when i + j is even. Weight-2 X plaquettes sit on the top and bottom
// edges, weight-2 Z plaquettes on the left and right edges. Within a sector
// stabilizers are ordered row-major by (i, j).
//
// Physical qubit numbering: data qubits first, then X ancillas, then Z
// ancillas, matching the per-round syndrome bit order.
class CodeLayout {
 public:
  struct Stabilizer {
    std::uint32_t row;  // plaquette corner coordinates
    std::uint32_t col;
    std::vector<QubitIndex> data;  // 2 or 4 incident data qubits, ascending
  };

  explicit CodeLayout(std::uint32_t distance);

  std::uint32_t distance() const noexcept { return distance_; }
  std::uint32_t data_qubit_count() const noexcept { return distance_ * distance_; }
  std::uint32_t stabilizer_count_per_sector() const noexcept {
    return static_cast<std::uint32_t>(x_stabs_.size());
  }
  std::uint32_t syndrome_bits_per_round() const noexcept {
    return 2 * stabilizer_count_per_sector();
  }
  std::uint32_t total_qubits() const noexcept {
    return data_qubit_count() + syndrome_bits_per_round();
  }

  std::span<const Stabilizer> stabilizers(Sector s) const noexcept {
    return s == Sector::X ? x_stabs_ : z_stabs_;
  }

  // Stabilizers of sector `s` touching data qubit q (0, 1 or 2 entries).
  std::span<const std::uint32_t> stabilizers_of(Sector s, QubitIndex q) const noexcept;

  // Support of one undetectable error chain for the sector: the residual
  // error type that sector's stabilizers detect, stretched between the two
  // boundaries the sector's edges terminate on. X sector: row 0. Z sector:
  // column 0.
  std::span<const QubitIndex> logical_chain(Sector s) const noexcept {
    return s == Sector::X ? x_logical_ : z_logical_;
  }

  // Support of the conjugate logical operator. A residual with zero syndrome
  // is a logical failure iff it overlaps this set an odd number of times.
  std::span<const QubitIndex> crossing_set(Sector s) const noexcept {
    return s == Sector::X ? z_logical_ : x_logical_;
  }

  // Physical qubit index of stabilizer `stab` in sector `s`.
  QubitIndex ancilla_qubit(Sector s, std::uint32_t stab) const noexcept;

  // Column of stabilizer `stab` of sector `s` within one syndrome round.
  std::uint32_t syndrome_column(Sector s, std::uint32_t stab) const noexcept {
    return (s == Sector::X ? 0 : stabilizer_count_per_sector()) + stab;
  }

 private:
  std::uint32_t distance_;
  std::vector<Stabilizer> x_stabs_;
  std::vector<Stabilizer> z_stabs_;
  // Flattened data-qubit -> stabilizer adjacency, two slots per qubit.
  std::vector<std::uint32_t> x_adj_;
  std::vector<std::uint8_t> x_adj_count_;
  std::vector<std::uint32_t> z_adj_;
  std::vector<std::uint8_t> z_adj_count_;
  std::vector<QubitIndex> x_logical_;
  std::vector<QubitIndex> z_logical_;
};

// Rejects even or non-positive distances with std::invalid_argument.
CodeLayout build_layout(std::int64_t distance);

enum class EdgeKind : std::uint8_t { Spacelike = 0, Timelike = 1 };

// Space-time decoding graph for one sector.
//
// Vertex (stab, round) has id round * stabilizers + stab. The virtual
// boundary vertex has id vertex_count(). Fault ids equal edge indices:
// spacelike edges come first, ordered by (round, data qubit), followed by
// timelike edges ordered by (round, stabilizer).
class DecodingGraph {
 public:
  struct Edge {
    VertexId a;
    VertexId b;  // may be boundary()
    EdgeKind kind;
    std::uint32_t round;
    std::uint32_t site;  // data qubit (spacelike) or stabilizer (timelike)
  };

  DecodingGraph(const CodeLayout& layout, Sector sector, std::uint32_t rounds);

  Sector sector() const noexcept { return sector_; }
  std::uint32_t rounds() const noexcept { return rounds_; }
  std::uint32_t distance() const noexcept { return distance_; }
  std::uint32_t stabilizers() const noexcept { return stabs_; }
  std::uint32_t vertex_count() const noexcept { return stabs_ * rounds_; }
  VertexId boundary() const noexcept { return vertex_count(); }
  bool is_boundary(VertexId v) const noexcept { return v == boundary(); }

  VertexId vertex(std::uint32_t stab, std::uint32_t round) const noexcept {
    return round * stabs_ + stab;
  }

  std::span<const Edge> edges() const noexcept { return edges_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const Edge& edge(FaultId f) const { return edges_.at(f); }

  std::size_t spacelike_count() const noexcept { return spacelike_count_; }
  std::size_t timelike_count() const noexcept { return edges_.size() - spacelike_count_; }

  // Incident edge ids of vertex v (boundary included), ascending.
  std::span<const FaultId> incident(VertexId v) const noexcept {
    return {incidence_.data() + offsets_[v], incidence_.data() + offsets_[v + 1]};
  }

  // Fault ids for a data error on qubit q in round t and for a measurement
  // error on stabilizer s in round t (t < rounds - 1). Throw on out-of-range.
  FaultId data_fault(QubitIndex q, std::uint32_t round) const;
  FaultId measurement_fault(std::uint32_t stab, std::uint32_t round) const;

 private:
  Sector sector_;
  std::uint32_t rounds_;
  std::uint32_t distance_;
  std::uint32_t stabs_;
  std::uint32_t data_qubits_;
  std::size_t spacelike_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> offsets_;
  std::vector<FaultId> incidence_;
};

DecodingGraph build_decoding_graph(const CodeLayout& layout, Sector sector, std::int64_t rounds);

// A set of faulted edges on one sector's graph, stored as sorted unique fault
// ids.
struct ErrorPattern {
  Sector sector = Sector::X;
  std::vector<FaultId> faults;
  std::uint64_t rng_seed = 0;

  std::size_t weight() const noexcept { return faults.size(); }

  // (data qubit, round) entries.
  std::vector<std::pair<QubitIndex, std::uint32_t>> data_faults(const DecodingGraph& g) const;
  // (stabilizer, round) entries.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> measurement_faults(
      const DecodingGraph& g) const;

  // Symmetric difference.
  ErrorPattern operator^(const ErrorPattern& other) const;
  bool operator==(const ErrorPattern&) const = default;
};

// Builds a pattern from arbitrary fault ids; sorts and cancels duplicates in
// pairs (mod-2 semantics).
ErrorPattern make_pattern(Sector sector, std::vector<FaultId> faults);

// Independent per-edge faults with probability p. Each (seed, sector) pair
// addresses its own generator stream.
ErrorPattern sample_errors(const DecodingGraph& graph, double p, std::uint64_t seed);

// rounds x (d^2 - 1) detector bits. Columns [0, split) are the X sector and
// [split, 2 * split) the Z sector.
class SyndromeRounds {
 public:
  SyndromeRounds() = default;
  SyndromeRounds(std::uint32_t rounds, std::uint32_t bits_per_round);

  std::uint32_t rounds() const noexcept { return rounds_; }
  std::uint32_t bits_per_round() const noexcept { return width_; }
  std::uint32_t split() const noexcept { return width_ / 2; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool get(std::uint32_t round, std::uint32_t col) const { return bits_.at(index(round, col)) != 0; }
  void set(std::uint32_t round, std::uint32_t col, bool v) { bits_.at(index(round, col)) = v ? 1 : 0; }
  void flip(std::uint32_t round, std::uint32_t col) { bits_.at(index(round, col)) ^= 1; }

  // Detector bit of vertex v in `sector`, using graph vertex numbering.
  bool vertex_bit(Sector sector, std::uint32_t stabs, VertexId v) const {
    return get(v / stabs, column(sector, stabs, v % stabs));
  }
  void flip_vertex(Sector sector, std::uint32_t stabs, VertexId v) {
    flip(v / stabs, column(sector, stabs, v % stabs));
  }

  std::size_t weight() const noexcept;
  bool is_zero() const noexcept { return weight() == 0; }
  std::span<const std::uint8_t> raw() const noexcept { return bits_; }

  SyndromeRounds& operator^=(const SyndromeRounds& other);
  SyndromeRounds operator^(const SyndromeRounds& other) const {
    SyndromeRounds out = *this;
    out ^= other;
    return out;
  }
  bool operator==(const SyndromeRounds&) const = default;

 private:
  std::size_t index(std::uint32_t round, std::uint32_t col) const noexcept {
    return static_cast<std::size_t>(round) * width_ + col;
  }
  static std::uint32_t column(Sector s, std::uint32_t stabs, std::uint32_t stab) noexcept {
    return (s == Sector::X ? 0 : stabs) + stab;
  }

  std::uint32_t rounds_ = 0;
  std::uint32_t width_ = 0;
  std::vector<std::uint8_t> bits_;
};

SyndromeRounds empty_syndrome(const DecodingGraph& graph);

// Mod-2 incidence of the pattern's edges, written into the graph's sector
// columns. The boundary absorbs parity. Throws std::out_of_range on an
// unknown fault id.
SyndromeRounds syndrome_of(const ErrorPattern& pattern, const DecodingGraph& graph);
SyndromeRounds syndrome_of(std::span<const FaultId> faults, const DecodingGraph& graph);

// Debug dumps: one record per line.
void write_layout_records(std::ostream& os, const CodeLayout& layout);
void write_graph_records(std::ostream& os, const DecodingGraph& graph);

}  // namespace qecfab
