#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qecfab/link_layer.hpp"
#include "qecfab/qec_pipeline.hpp"

namespace qecfab {

struct PlatformProfile {
  std::string name;
  std::uint32_t root_ports = 4;
  std::uint32_t router_children = 29;
  std::uint32_t qubits_per_leaf = 14;
  std::uint64_t router_processing_ps = 45'000;
  std::uint64_t router_network_ps = 312'000;
  std::uint64_t base_latency_ps = 390'000;  // all non-decoder stages, measured
};

// "zcu216": 4 root transceivers. "vcu129": 34 root transceivers. Both use
// 29-child routers and 14-qubit leaves.
PlatformProfile zcu216_profile();
PlatformProfile vcu129_profile();
std::vector<PlatformProfile> builtin_profiles();

class UnknownProfile : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
PlatformProfile find_profile(std::string_view name);

std::uint64_t required_qubits(std::uint32_t distance);
std::uint64_t max_qubits(const PlatformProfile& profile, std::uint32_t router_layers);
// Smallest layer count whose capacity covers the distance.
std::uint32_t router_layers_needed(std::uint32_t distance, const PlatformProfile& profile);

struct LatencyEstimate {
  std::uint32_t distance = 0;
  std::uint32_t router_layers = 0;
  std::uint64_t base_ps = 0;
  std::uint64_t decode_ps = 0;
  bool decode_estimate = false;
  std::uint64_t router_ps = 0;
  std::uint64_t total_ps = 0;
};

// base + decode(d) + (router processing + router network) per router layer.
LatencyEstimate estimate_latency(std::uint32_t distance, const PlatformProfile& profile,
                                 const DecodeTable& decode);

// Sum of the configured non-decoder stage means (leaf_agg, uplink, root_agg,
// root_dist, downlink, leaf_dist). Reported next to the measured base.
std::uint64_t non_decoder_stage_sum_ps(const StageLatencyConfig& stages);

// Decoder throughput when `bits` syndrome bits take `ns` nanoseconds.
double decoder_peak_bps(std::uint64_t bits, double ns);

struct ThroughputMargin {
  std::uint32_t distance = 0;
  double required_bps = 0;
  double network_bps = 0;
  double decoder_bps = 0;
  double available_bps = 0;
  double ratio = 0;
  bool decoder_limited = false;
};

// required = (d^2 - 1) bits per cycle; available = min(network, decoder).
ThroughputMargin throughput_margin(std::uint32_t distance, const LinkModel& root_link,
                                   double decoder_bps, double cycle_ns = 1000.0);

struct CapacityEstimate {
  std::uint32_t distance = 0;
  std::uint64_t required_qubits = 0;
  std::uint64_t leaves_needed = 0;
  std::uint32_t router_layers = 0;
  std::uint64_t max_qubits = 0;
  std::uint64_t predicted_latency_ps = 0;
  double throughput_required_bps = 0;
  double throughput_available_bps = 0;
  bool feasible = false;
};

CapacityEstimate capacity_estimate(std::uint32_t distance, const PlatformProfile& profile,
                                   const DecodeTable& decode, const LinkModel& root_link,
                                   double decoder_bps, double cycle_ns = 1000.0);

}  // namespace qecfab
