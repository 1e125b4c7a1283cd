#include "qecfab/link_layer.hpp"

#include <algorithm>
#include <stdexcept>

namespace qecfab {

std::string BitRate::format_gbps(int decimals) const {
  // value in Gb/s = numerator / (denominator * 1e9); scale by 10^decimals and
  // round half-up with 128-bit intermediates.
  unsigned __int128 scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  const unsigned __int128 num = static_cast<unsigned __int128>(numerator) * scale;
  const unsigned __int128 den = static_cast<unsigned __int128>(denominator) * 1'000'000'000ULL;
  const unsigned __int128 q = (2 * num + den) / (2 * den);
  const auto whole = static_cast<std::uint64_t>(q / scale);
  auto frac = static_cast<std::uint64_t>(q % scale);
  std::string out = std::to_string(whole);
  if (decimals > 0) {
    std::string f = std::to_string(frac);
    out += '.' + std::string(static_cast<std::size_t>(decimals) - f.size(), '0') + f;
  }
  return out;
}

BitRate effective_throughput(const LinkModel& link) noexcept {
  return {link.line_rate_bps * link.lanes * kPayloadBitsPerFrame, kWireBitsPerFrame};
}

std::uint64_t frames_for(std::uint64_t payload_bits) noexcept {
  return (payload_bits + kPayloadBitsPerFrame - 1) / kPayloadBitsPerFrame;
}

SimTime serialization_delay(std::uint64_t payload_bits, const LinkModel& link) {
  const std::uint64_t frames = frames_for(payload_bits);
  if (frames == 0) return {};
  const unsigned __int128 rate = static_cast<unsigned __int128>(link.line_rate_bps) * link.lanes;
  if (rate == 0) throw std::invalid_argument("link has zero line rate");
  const unsigned __int128 wire_bits = static_cast<unsigned __int128>(frames) * kWireBitsPerFrame;
  const unsigned __int128 ps = (wire_bits * 1'000'000'000'000ULL + rate - 1) / rate;
  return {static_cast<std::uint64_t>(ps)};
}

SimTime LinkChannel::delivery_time(std::uint64_t payload_bits, SimTime now,
                                   std::int64_t jitter_ps) {
  const auto half = static_cast<std::int64_t>(model_.jitter_half_width_ps);
  if (jitter_ps < -half || jitter_ps > half) {
    throw std::out_of_range("jitter draw outside the configured half-width");
  }
  SimTime extra{};
  if (payload_bits > kPayloadBitsPerFrame) {
    extra = serialization_delay(payload_bits - kPayloadBitsPerFrame, model_);
  }
  const auto base = static_cast<std::int64_t>(now.ps + extra.ps + model_.one_way_latency_ps);
  SimTime at{static_cast<std::uint64_t>(std::max<std::int64_t>(base + jitter_ps,
                                                               static_cast<std::int64_t>(now.ps)))};
  at = std::max(at, last_delivery_);
  last_delivery_ = at;
  return at;
}

SimTime LinkChannel::transfer(Simulator& sim, std::uint64_t payload_bits, CounterRng& rng,
                              std::string label, std::function<void()> on_delivery) {
  const auto half = static_cast<std::int64_t>(model_.jitter_half_width_ps);
  const std::int64_t jitter = half ? rng.uniform_int(-half, half) : 0;
  const SimTime at = delivery_time(payload_bits, sim.now(), jitter);
  sim.schedule(at, to_, EventKind::MessageDelivery, std::move(label), std::move(on_delivery));
  return at;
}

}  // namespace qecfab
