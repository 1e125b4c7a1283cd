#include "qecfab/capacity_model.hpp"

#include <algorithm>
#include <cctype>

namespace qecfab {

PlatformProfile zcu216_profile() {
  PlatformProfile p;
  p.name = "zcu216";
  p.root_ports = 4;
  return p;
}

PlatformProfile vcu129_profile() {
  PlatformProfile p;
  p.name = "vcu129";
  p.root_ports = 34;
  return p;
}

std::vector<PlatformProfile> builtin_profiles() { return {zcu216_profile(), vcu129_profile()}; }

PlatformProfile find_profile(std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto& p : builtin_profiles()) {
    if (p.name == key) return p;
  }
  throw UnknownProfile("unknown platform profile '" + std::string(name) +
                       "' (known: zcu216, vcu129)");
}

std::uint64_t required_qubits(std::uint32_t distance) {
  if (distance == 0 || distance % 2 == 0) {
    throw std::invalid_argument("distance must be odd and positive");
  }
  const std::uint64_t d = distance;
  return 2 * d * d - 1;
}

std::uint64_t max_qubits(const PlatformProfile& profile, std::uint32_t router_layers) {
  std::uint64_t leaves = profile.root_ports;
  for (std::uint32_t l = 0; l < router_layers; ++l) leaves *= profile.router_children;
  return leaves * profile.qubits_per_leaf;
}

std::uint32_t router_layers_needed(std::uint32_t distance, const PlatformProfile& profile) {
  const std::uint64_t need = required_qubits(distance);
  if (profile.router_children < 2 && max_qubits(profile, 0) < need) {
    throw std::invalid_argument("routers with fewer than two children cannot add capacity");
  }
  std::uint32_t layers = 0;
  while (max_qubits(profile, layers) < need) ++layers;
  return layers;
}

LatencyEstimate estimate_latency(std::uint32_t distance, const PlatformProfile& profile,
                                 const DecodeTable& decode) {
  LatencyEstimate e;
  e.distance = distance;
  e.router_layers = router_layers_needed(distance, profile);
  e.base_ps = profile.base_latency_ps;
  const auto lookup = decode.at(distance);
  e.decode_ps = lookup.ps;
  e.decode_estimate = lookup.estimate;
  e.router_ps = e.router_layers * (profile.router_processing_ps + profile.router_network_ps);
  e.total_ps = e.base_ps + e.decode_ps + e.router_ps;
  return e;
}

std::uint64_t non_decoder_stage_sum_ps(const StageLatencyConfig& s) {
  return s.leaf_agg.mean_ps + s.uplink.one_way_latency_ps + s.root_agg.mean_ps +
         s.root_dist.mean_ps + s.downlink.one_way_latency_ps + s.leaf_dist.mean_ps;
}

double decoder_peak_bps(std::uint64_t bits, double ns) {
  if (ns <= 0) throw std::invalid_argument("decode time must be positive");
  return static_cast<double>(bits) / ns * 1e9;
}

ThroughputMargin throughput_margin(std::uint32_t distance, const LinkModel& root_link,
                                   double decoder_bps, double cycle_ns) {
  if (cycle_ns <= 0) throw std::invalid_argument("cycle time must be positive");
  ThroughputMargin m;
  m.distance = distance;
  const double d = distance;
  m.required_bps = (d * d - 1.0) / (cycle_ns * 1e-9);
  m.network_bps = effective_throughput(root_link).bps();
  m.decoder_bps = decoder_bps;
  m.decoder_limited = decoder_bps <= m.network_bps;
  m.available_bps = std::min(m.network_bps, decoder_bps);
  m.ratio = m.required_bps > 0 ? m.available_bps / m.required_bps : 0.0;
  return m;
}

CapacityEstimate capacity_estimate(std::uint32_t distance, const PlatformProfile& profile,
                                   const DecodeTable& decode, const LinkModel& root_link,
                                   double decoder_bps, double cycle_ns) {
  CapacityEstimate c;
  c.distance = distance;
  c.required_qubits = required_qubits(distance);
  c.leaves_needed = (c.required_qubits + profile.qubits_per_leaf - 1) / profile.qubits_per_leaf;
  const LatencyEstimate lat = estimate_latency(distance, profile, decode);
  c.router_layers = lat.router_layers;
  c.max_qubits = max_qubits(profile, c.router_layers);
  c.predicted_latency_ps = lat.total_ps;
  const ThroughputMargin m = throughput_margin(distance, root_link, decoder_bps, cycle_ns);
  c.throughput_required_bps = m.required_bps;
  c.throughput_available_bps = m.available_bps;
  c.feasible = c.required_qubits <= c.max_qubits && m.required_bps <= m.available_bps;
  return c;
}

}  // namespace qecfab
