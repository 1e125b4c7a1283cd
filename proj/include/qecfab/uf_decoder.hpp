#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qecfab/code_model.hpp"

namespace qecfab {

// Fault ids selected by a decoder for one sector, sorted ascending.
struct Correction {
  Sector sector = Sector::X;
  std::vector<FaultId> faults;

  std::size_t weight() const noexcept { return faults.size(); }
  bool operator==(const Correction&) const = default;
};

struct DecodeStats {
  std::uint32_t growth_rounds = 0;  // outer grow/merge iterations
  std::uint32_t merges = 0;         // successful unions
  std::uint32_t grown_edges = 0;    // edges that reached full growth
  std::uint32_t peeled_edges = 0;
};

class DecodeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Union-find decoder. Odd clusters that do not touch the boundary grow by
// half-edges in ascending root order. Fully grown edges merge clusters by rank,
// with the lower root id winning ties. The merge forest is then peeled
// leaf-first to produce the correction.
//
// The ClusterState buffers are reused across calls, so one instance must not
// be shared between threads.
class UnionFindDecoder {
 public:
  explicit UnionFindDecoder(const DecodingGraph& graph);

  Correction decode(const SyndromeRounds& syndrome);
  const DecodeStats& last_stats() const noexcept { return stats_; }
  const DecodingGraph& graph() const noexcept { return *graph_; }

 private:
  std::uint32_t find(std::uint32_t v);
  // Returns the surviving root.
  std::uint32_t unite(std::uint32_t a, std::uint32_t b);
  bool is_active(std::uint32_t root) const;

  const DecodingGraph* graph_;
  std::uint32_t node_count_;  // vertices + boundary

  // ClusterState
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::vector<std::uint8_t> parity_;
  std::vector<std::uint8_t> touches_boundary_;
  std::vector<std::vector<std::uint32_t>> frontier_;  // per root
  std::vector<std::uint8_t> growth_;                  // per edge: 0, 1 (half), 2 (full)

  std::vector<std::uint8_t> defect_;
  std::vector<FaultId> forest_;  // edges that merged two clusters
  std::vector<std::uint32_t> touched_;
  std::vector<std::uint8_t> in_touched_;
  DecodeStats stats_;
};

// Convenience wrapper with a fresh decoder. Throws DecodeError on a syndrome
// whose dimensions do not match the graph.
Correction decode(const DecodingGraph& graph, const SyndromeRounds& syndrome,
                  DecodeStats* stats = nullptr);

// Minimum-weight correction by exact pairing: all-pairs shortest paths over the
// graph (boundary treated as an ordinary vertex that joins the defect set when
// the defect count is odd) followed by a subset dynamic program over perfect
// pairings. Refuses instances above the caps with DecodeError.
struct OracleLimits {
  std::size_t max_defects = 12;
  std::size_t max_vertices = 4096;
};
Correction oracle_decode(const DecodingGraph& graph, const SyndromeRounds& syndrome,
                         const OracleLimits& limits = {});

// True iff the correction's mod-2 incidence reproduces the syndrome of the
// graph's sector exactly. Never throws; unknown fault ids yield false.
bool is_valid(const Correction& correction, const SyndromeRounds& syndrome,
              const DecodingGraph& graph) noexcept;

// True iff the residual (pattern XOR correction), projected onto data qubits
// by summing spacelike faults over rounds, overlaps the sector's crossing set
// an odd number of times. Throws DecodeError when the correction does not
// annihilate the pattern's syndrome.
bool is_logical_failure(const ErrorPattern& pattern, const Correction& correction,
                        const DecodingGraph& graph, const CodeLayout& layout);

}  // namespace qecfab
