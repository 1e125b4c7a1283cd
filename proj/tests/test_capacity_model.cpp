#include <gtest/gtest.h>

#include "qecfab/capacity_model.hpp"
#include "qecfab/code_model.hpp"

using namespace qecfab;

namespace {

const LinkModel kRootLink{10'000'000'000ULL, 4, 156'000, 0};
const DecodeTable kTable = StageLatencyConfig{}.decode;

}  // namespace

TEST(Capacity, RequiredQubits) {
  EXPECT_EQ(required_qubits(3), 17u);
  EXPECT_EQ(required_qubits(15), 449u);
  EXPECT_EQ(required_qubits(17), 577u);
  EXPECT_EQ(required_qubits(21), 881u);
  for (std::uint32_t d = 1; d <= 25; d += 2) EXPECT_EQ(required_qubits(d), build_layout(d).total_qubits());
}

TEST(Capacity, MaxQubits) {
  EXPECT_EQ(max_qubits(vcu129_profile(), 0), 476u);
  EXPECT_EQ(max_qubits(zcu216_profile(), 0), 56u);
  EXPECT_EQ(max_qubits(vcu129_profile(), 1), 476u * 29u);
  EXPECT_EQ(max_qubits(zcu216_profile(), 2), 56u * 29u * 29u);
}

TEST(Capacity, RouterLayers) {
  const PlatformProfile v = vcu129_profile();
  for (std::uint32_t d = 3; d <= 15; d += 2) EXPECT_EQ(router_layers_needed(d, v), 0u) << d;
  EXPECT_EQ(router_layers_needed(17, v), 1u);
  EXPECT_EQ(router_layers_needed(21, v), 1u);
  EXPECT_EQ(router_layers_needed(3, zcu216_profile()), 0u);
  EXPECT_EQ(router_layers_needed(7, zcu216_profile()), 1u);
  for (std::uint32_t d = 3; d <= 101; d += 2) {
    const auto layers = router_layers_needed(d, v);
    EXPECT_GE(max_qubits(v, layers), required_qubits(d));
    if (layers > 0) {
      EXPECT_LT(max_qubits(v, layers - 1), required_qubits(d));
    }
  }
}

TEST(Capacity, Profiles) {
  EXPECT_EQ(find_profile("vcu129").root_ports, 34u);
  EXPECT_EQ(find_profile("zcu216").root_ports, 4u);
  EXPECT_EQ(builtin_profiles().size(), 2u);
  EXPECT_THROW(find_profile("vc707"), UnknownProfile);
}

TEST(Latency, RouterStepAndBase) {
  const PlatformProfile v = vcu129_profile();
  const DecodeTable& table = kTable;
  const LatencyEstimate d3 = estimate_latency(3, v, table);
  EXPECT_EQ(d3.total_ps, 446'000u);
  EXPECT_EQ(d3.total_ps, 390'000u + 56'000u);
  EXPECT_FALSE(d3.decode_estimate);
  const LatencyEstimate d15 = estimate_latency(15, v, table);
  const LatencyEstimate d17 = estimate_latency(17, v, table);
  EXPECT_EQ(d15.router_layers, 0u);
  EXPECT_EQ(d17.router_layers, 1u);
  // Both sit past the last table point, so decode is equal and the step is
  // the router add-ons alone.
  EXPECT_EQ(d17.decode_ps, d15.decode_ps);
  EXPECT_EQ(d17.total_ps - d15.total_ps, 45'000u + 312'000u);
}

TEST(Latency, NonDecreasing) {
  const DecodeTable& table = kTable;
  for (const auto& p : builtin_profiles()) {
    std::uint64_t prev = 0;
    for (std::uint32_t d = 3; d <= 41; d += 2) {
      const auto t = estimate_latency(d, p, table).total_ps;
      EXPECT_GE(t, prev) << p.name << " d=" << d;
      prev = t;
    }
  }
}

TEST(Latency, D21UnderOneMicrosecondWhenDecodeFits) {
  const PlatformProfile v = vcu129_profile();
  for (std::uint64_t dec : {200'000u, 250'000u, 252'999u}) {
    DecodeTable table = kTable;
    table.points_ps[21] = dec;
    const auto t = estimate_latency(21, v, table);
    EXPECT_EQ(t.total_ps, 390'000u + dec + 357'000u);
    EXPECT_LT(t.total_ps, 1'000'000u) << dec;
  }
  // 390 + 357 + 253 lands exactly on 1000 ns.
  DecodeTable edge = kTable;
  edge.points_ps[21] = 253'000;
  EXPECT_EQ(estimate_latency(21, v, edge).total_ps, 1'000'000u);
  EXPECT_LT(estimate_latency(21, v, kTable).total_ps, 1'000'000u);
}

TEST(Latency, StageSumNextToBase) {
  // 29 + 157 + 20 + 25 + 155 + 9
  EXPECT_EQ(non_decoder_stage_sum_ps(StageLatencyConfig{}), 395'000u);
}

TEST(Throughput, DecoderPeak) {
  EXPECT_NEAR(decoder_peak_bps(440, 11.5), 38.26e9, 0.005e9);
  EXPECT_NEAR(decoder_peak_bps(440, 11.5), 440.0 / 11.5e-9, 1.0);
}

TEST(Throughput, MarginAtD21) {
  const double dec = decoder_peak_bps(440, 11.5);
  const ThroughputMargin m = throughput_margin(21, kRootLink, dec);
  EXPECT_DOUBLE_EQ(m.required_bps, 440e6);
  EXPECT_NEAR(m.network_bps, 40e9 * 64 / 66, 1e-3);
  EXPECT_DOUBLE_EQ(m.available_bps, dec);
  EXPECT_TRUE(m.decoder_limited);
  // Independent: (440 / 11.5) Gb/s over 0.44 Gb/s.
  EXPECT_NEAR(m.ratio, (440.0 / 11.5) / 0.44, 1e-9);
  EXPECT_NEAR(m.ratio, 87.0, 0.5);
}

TEST(Throughput, RequiredAtD3) {
  const ThroughputMargin m = throughput_margin(3, kRootLink, decoder_peak_bps(440, 11.5));
  EXPECT_DOUBLE_EQ(m.required_bps, 8e6);
  const ThroughputMargin slow = throughput_margin(3, kRootLink, decoder_peak_bps(440, 11.5), 2000.0);
  EXPECT_DOUBLE_EQ(slow.required_bps, 4e6);
}

TEST(Estimate, FeasibleAtD21OnVcu129) {
  const CapacityEstimate e =
      capacity_estimate(21, vcu129_profile(), kTable, kRootLink, decoder_peak_bps(440, 11.5));
  EXPECT_TRUE(e.feasible);
  EXPECT_EQ(e.required_qubits, 881u);
  EXPECT_EQ(e.leaves_needed, 63u);  // ceil(881 / 14)
  EXPECT_EQ(e.router_layers, 1u);
  EXPECT_EQ(e.max_qubits, 13'804u);
  EXPECT_LT(e.predicted_latency_ps, 1'000'000u);
}

TEST(Estimate, FeasibilityIsCapacityAndThroughput) {
  // A slow decode alone does not change feasibility.
  DecodeTable slow = kTable;
  slow.points_ps[21] = 400'000;
  const double dec = decoder_peak_bps(440, 11.5);
  EXPECT_TRUE(capacity_estimate(21, vcu129_profile(), slow, kRootLink, dec).feasible);
  // A decoder slower than the syndrome rate does.
  EXPECT_FALSE(capacity_estimate(21, vcu129_profile(), kTable, kRootLink, 400e6).feasible);
  // So does a link slower than the syndrome rate.
  const LinkModel thin{100'000'000ULL, 1, 156'000, 0};
  EXPECT_FALSE(capacity_estimate(21, vcu129_profile(), kTable, thin, dec).feasible);
  EXPECT_TRUE(capacity_estimate(3, vcu129_profile(), kTable, thin, dec).feasible);
}
