#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qecfab/code_model.hpp"
#include "qecfab/fabric_sim.hpp"
#include "qecfab/link_layer.hpp"
#include "qecfab/uf_decoder.hpp"

namespace qecfab {

enum class Stage : std::uint8_t {
  LeafAgg,
  Uplink,
  RootAgg,
  Decode,
  RootDist,
  Downlink,
  LeafDist,
  RouterProc,
  RouterNet,
};
inline constexpr std::size_t kStageCount = 9;
inline constexpr std::array<Stage, kStageCount> kAllStages = {
    Stage::LeafAgg,  Stage::Uplink,   Stage::RootAgg,    Stage::Decode,   Stage::RootDist,
    Stage::Downlink, Stage::LeafDist, Stage::RouterProc, Stage::RouterNet};

// Fixed report names: leaf_agg, uplink, root_agg, decode, root_dist,
// downlink, leaf_dist, router_proc, router_net.
std::string_view stage_name(Stage s) noexcept;

struct StageSpec {
  std::uint64_t mean_ps = 0;
  std::uint64_t jitter_half_width_ps = 0;
};

// Decoder latency by code distance. Distances between table points
// interpolate linearly; distances outside the table take the nearest end
// point. Both cases are flagged as estimates.
struct DecodeTable {
  std::map<std::uint32_t, std::uint64_t> points_ps;
  std::uint64_t jitter_half_width_ps = 0;

  struct Lookup {
    std::uint64_t ps = 0;
    bool estimate = false;
  };
  Lookup at(std::uint32_t distance) const;
};

struct RouterSpec {
  std::uint64_t processing_ps = 45'000;          // per layer, both directions
  std::uint64_t network_round_trip_ps = 312'000;  // per layer, both directions
  std::uint64_t jitter_half_width_ps = 0;
};

struct StageLatencyConfig {
  StageSpec leaf_agg{29'000, 3'000};
  LinkModel uplink{10'000'000'000ULL, 1, 157'000, 16'000};
  StageSpec root_agg{20'000, 10'000};
  DecodeTable decode{{{3, 56'000}, {5, 65'000}, {7, 90'000}, {13, 250'000}}, 0};
  StageSpec root_dist{25'000, 3'000};
  LinkModel downlink{10'000'000'000ULL, 1, 155'000, 9'000};
  StageSpec leaf_dist{9'000, 1'000};
  RouterSpec router;

  StageLatencyConfig with_zero_jitter() const;
  // Throws std::invalid_argument when a decode key is even or zero.
  void validate() const;
};

// CommonPerShot: every node draws the same jitter for a given (stage, shot);
// PerNode: each node draws independently.
enum class JitterMode : std::uint8_t { CommonPerShot, PerNode };
enum class SyndromeSource : std::uint8_t { Sampled, WorstCaseD3 };

struct PipelineConfig {
  std::uint32_t distance = 3;
  std::uint32_t rounds = 0;  // 0: same as distance
  double error_rate = 0.001;
  std::uint32_t qubits_per_leaf = 14;
  std::uint32_t root_ports = 4;
  std::uint32_t router_children = 29;
  std::uint32_t router_layers = 0;
  StageLatencyConfig stages;
  JitterMode jitter_mode = JitterMode::CommonPerShot;
  SyndromeSource source = SyndromeSource::Sampled;
  // Clock state before the initial sync; indexed by node id, missing entries
  // default to zero.
  std::vector<std::int64_t> initial_offsets_ps;
  std::uint64_t link_asymmetry_ps = 0;  // added to every uplink sync path

  std::uint32_t effective_rounds() const noexcept { return rounds ? rounds : distance; }
};

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Contiguous assignment of physical qubits (data, X ancillas, Z ancillas) to
// leaves.
struct LeafMap {
  std::uint32_t qubits_per_leaf = 14;
  std::uint32_t leaf_count = 0;
  std::vector<std::uint32_t> owner;  // per physical qubit
  // Per leaf: owned syndrome columns [begin, end) within one round.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> columns;
  // Per leaf: owned data qubits [begin, end).
  std::vector<std::pair<std::uint32_t, std::uint32_t>> data;
};

LeafMap assign_qubits_to_leaves(const CodeLayout& layout, std::uint32_t qubits_per_leaf);

std::vector<std::uint64_t> pack_bits(std::span<const std::uint8_t> bits);
std::vector<std::uint8_t> unpack_bits(std::span<const std::uint64_t> words, std::size_t count);

struct SyndromeMessage {
  std::uint64_t shot = 0;
  std::uint32_t leaf = 0;
  std::uint32_t round_begin = 0;
  std::uint32_t round_end = 0;
  std::uint32_t column_begin = 0;
  std::uint32_t column_end = 0;
  std::vector<std::uint64_t> bits;  // round-major over the owned columns
  std::int64_t emit_ps = 0;
  std::int64_t receive_ps = 0;

  std::size_t bit_count() const noexcept {
    return static_cast<std::size_t>(round_end - round_begin) * (column_end - column_begin);
  }
};

SyndromeMessage make_syndrome_message(const SyndromeRounds& s, const LeafMap& map,
                                      std::uint32_t leaf, std::uint64_t shot);
// Reassembles the full syndrome from one message per leaf. Throws
// std::invalid_argument on missing, duplicate or misshaped messages.
SyndromeRounds assemble_syndrome(std::span<const SyndromeMessage> messages, std::uint32_t rounds,
                                 std::uint32_t bits_per_round);

struct RoutedFault {
  Sector sector;
  FaultId fault;
  auto operator<=>(const RoutedFault&) const = default;
};

struct CorrectionMessage {
  std::uint64_t shot = 0;
  std::uint32_t leaf = 0;
  std::vector<RoutedFault> faults;  // faults whose site this leaf owns
  // Net flips on the leaf's data qubits: bit 2k is the X-sector flip of the
  // k-th owned qubit, bit 2k+1 the Z-sector flip.
  std::vector<std::uint64_t> flips;
  std::int64_t emit_ps = 0;
  std::int64_t receive_ps = 0;

  std::size_t payload_bits(const LeafMap& map) const noexcept {
    return 2 * static_cast<std::size_t>(map.data[leaf].second - map.data[leaf].first);
  }
};

// Routes each fault to the leaf owning its data qubit (spacelike) or its
// ancilla (timelike).
std::vector<CorrectionMessage> route_corrections(const Correction& x, const Correction& z,
                                                 const DecodingGraph& gx, const DecodingGraph& gz,
                                                 const CodeLayout& layout, const LeafMap& map,
                                                 std::uint64_t shot);

struct ShotReport {
  std::uint64_t shot = 0;
  std::array<std::int64_t, kStageCount> interval_ps{};
  bool has_router = false;
  std::int64_t end_to_end_ps = 0;
  bool valid = false;
  bool logical_failure = false;
  bool feedback_matches = false;
  std::size_t syndrome_bits_received = 0;
  std::size_t correction_faults = 0;
  std::uint64_t trace_hash = 0;

  std::int64_t interval(Stage s) const noexcept { return interval_ps[static_cast<std::size_t>(s)]; }
  std::size_t stage_count() const noexcept { return has_router ? kStageCount : 7; }
};

// Holds everything that is shot-independent: layout, graphs, leaf map, the
// synchronized topology and the decoders. One instance runs shots
// sequentially; use one per worker.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);
  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  ShotReport run_shot(std::uint64_t shot, std::uint64_t seed, std::ostream* trace = nullptr);

  const PipelineConfig& config() const noexcept { return config_; }
  const CodeLayout& layout() const noexcept { return layout_; }
  const LeafMap& leaf_map() const noexcept { return leaf_map_; }
  const Topology& topology() const noexcept { return topology_; }
  const SyncReport& sync_report() const noexcept { return sync_; }
  const DecodingGraph& graph(Sector s) const noexcept { return s == Sector::X ? gx_ : gz_; }
  DecodeTable::Lookup decode_latency() const { return config_.stages.decode.at(config_.distance); }

 private:
  PipelineConfig config_;
  CodeLayout layout_;
  DecodingGraph gx_;
  DecodingGraph gz_;
  LeafMap leaf_map_;
  Topology topology_;
  SyncReport sync_;
  UnionFindDecoder dx_;
  UnionFindDecoder dz_;
};

ShotReport run_shot(const PipelineConfig& config, std::uint64_t seed);

struct StageStats {
  std::string name;
  std::size_t count = 0;
  double mean_ps = 0;
  double stddev_ps = 0;
  std::int64_t min_ps = 0;
  std::int64_t max_ps = 0;
  std::int64_t p50_ps = 0;
  std::int64_t p90_ps = 0;
  std::int64_t p99_ps = 0;
  std::uint64_t configured_mean_ps = 0;
  std::uint64_t configured_half_width_ps = 0;
};

StageStats summarize(std::string name, std::vector<std::int64_t> samples);

struct ProportionEstimate {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double rate = 0;
  double lower = 0;  // Wilson 95%
  double upper = 0;
};

ProportionEstimate wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                   double z = 1.959963984540054);

struct CampaignReport {
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  bool has_router = false;
  std::vector<StageStats> stages;  // 7 or 9, in Stage order
  StageStats end_to_end;
  std::vector<std::pair<std::int64_t, std::uint64_t>> histogram_ns;  // 1 ns bins
  ProportionEstimate logical_failures;
  bool all_valid = true;
  bool all_feedback_matches = true;
  bool decode_latency_estimate = false;
  std::vector<ShotReport> reports;
};

// Shots are split into contiguous blocks over `jobs` workers. Every shot's
// randomness depends only on (seed, shot), so the report is the same for any
// job count.
CampaignReport run_campaign(const PipelineConfig& config, std::uint64_t shots, std::uint64_t seed,
                            unsigned jobs = 1);

// Monte-Carlo logical error rate of the union-find decoder under
// phenomenological noise; a shot fails when either sector fails.
ProportionEstimate estimate_ler(std::uint32_t distance, std::uint32_t rounds, double p,
                                std::uint64_t shots, std::uint64_t seed, unsigned jobs = 1);

// Exhaustive search over all weight <= 2 fault patterns on the d=3, r=3 X
// sector graph for the one whose decode runs the most growth rounds (ties:
// most grown edges, then enumeration order). Computed once.
struct WorstCasePattern {
  ErrorPattern pattern;
  SyndromeRounds syndrome;
  DecodeStats stats;
};
const WorstCasePattern& worst_case_d3();
const SyndromeRounds& worst_case_d3_syndrome();

}  // namespace qecfab
