#pragma once

#include <cstdint>
#include <string>

#include "qecfab/fabric_sim.hpp"
#include "qecfab/rng.hpp"

namespace qecfab {

inline constexpr std::uint32_t kPayloadBitsPerFrame = 64;
inline constexpr std::uint32_t kWireBitsPerFrame = 66;

// Point-to-point serial link with 64B/66B framing.
//
// one_way_latency_ps is the measured transport latency of a message that fits
// in one frame; frames beyond the first add their serialization time on top.
struct LinkModel {
  std::uint64_t line_rate_bps = 10'000'000'000ULL;  // per lane
  std::uint32_t lanes = 1;
  std::uint64_t one_way_latency_ps = 156'000;
  std::uint64_t jitter_half_width_ps = 0;  // uniform over [-w, +w]

  // Payload share of the wire rate, 64/66.
  static constexpr double efficiency() noexcept {
    return static_cast<double>(kPayloadBitsPerFrame) / kWireBitsPerFrame;
  }
  // Framing overhead as a fraction of wire bits, 2/66.
  static constexpr double overhead() noexcept {
    return static_cast<double>(kWireBitsPerFrame - kPayloadBitsPerFrame) / kWireBitsPerFrame;
  }
};

// Exact payload rate as the fraction numerator / denominator bits per second.
struct BitRate {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;

  double bps() const noexcept {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  double gbps() const noexcept { return bps() / 1e9; }
  // Gb/s rounded half-up at `decimals`, computed in integer arithmetic.
  std::string format_gbps(int decimals = 3) const;
};

BitRate effective_throughput(const LinkModel& link) noexcept;

std::uint64_t frames_for(std::uint64_t payload_bits) noexcept;

// ceil(bits / 64) frames of 66 wire bits over lanes x line_rate, rounded up
// to whole picoseconds. Throws std::invalid_argument for a zero-rate link
// with a non-empty payload.
SimTime serialization_delay(std::uint64_t payload_bits, const LinkModel& link);

// One direction of a link inside a simulation. Deliveries are FIFO: a
// message never overtakes one sent before it.
class LinkChannel {
 public:
  LinkChannel(LinkModel model, NodeId from, NodeId to) : model_(model), from_(from), to_(to) {}

  const LinkModel& model() const noexcept { return model_; }
  NodeId from() const noexcept { return from_; }
  NodeId to() const noexcept { return to_; }

  // Delivery time for a message handed to the link at `now`. `jitter_ps` must
  // lie within the configured half-width.
  SimTime delivery_time(std::uint64_t payload_bits, SimTime now, std::int64_t jitter_ps);

  // Draws jitter uniformly from the configured half-width and schedules the
  // delivery event. Returns the delivery time.
  SimTime transfer(Simulator& sim, std::uint64_t payload_bits, CounterRng& rng, std::string label,
                   std::function<void()> on_delivery);

 private:
  LinkModel model_;
  NodeId from_;
  NodeId to_;
  SimTime last_delivery_{};
};

}  // namespace qecfab
