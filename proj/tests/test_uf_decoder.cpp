#include <gtest/gtest.h>

#include "brute_force.hpp"
#include "qecfab/qec_pipeline.hpp"
#include "qecfab/uf_decoder.hpp"

using namespace qecfab;
using qecfab::testing::brute_force;
using qecfab::testing::faults_from_mask;
using qecfab::testing::syndrome_from_mask;

namespace {

Correction as_correction(Sector s, std::vector<FaultId> f) { return Correction{s, std::move(f)}; }

}  // namespace

TEST(UnionFind, ZeroSyndromeGivesEmptyCorrection) {
  const CodeLayout l = build_layout(5);
  const DecodingGraph g = build_decoding_graph(l, Sector::X, 5);
  DecodeStats st;
  const Correction c = decode(g, empty_syndrome(g), &st);
  EXPECT_TRUE(c.faults.empty());
  EXPECT_EQ(st.growth_rounds, 0u);
}

TEST(UnionFind, AdjacentPairTakesSharedEdge) {
  const CodeLayout l = build_layout(3);
  for (Sector s : {Sector::X, Sector::Z}) {
    const DecodingGraph g = build_decoding_graph(l, s, 1);
    for (FaultId f = 0; f < g.edge_count(); ++f) {
      if (g.is_boundary(g.edge(f).b)) continue;
      const SyndromeRounds syn = syndrome_of(make_pattern(s, {f}), g);
      EXPECT_EQ(decode(g, syn).faults, std::vector<FaultId>{f});
      EXPECT_EQ(oracle_decode(g, syn).faults, std::vector<FaultId>{f});
    }
  }
}

TEST(UnionFind, RejectsMismatchedSyndrome) {
  const CodeLayout l = build_layout(3);
  const DecodingGraph g = build_decoding_graph(l, Sector::X, 3);
  EXPECT_THROW(decode(g, SyndromeRounds(2, 8)), DecodeError);
  EXPECT_THROW(decode(g, SyndromeRounds(3, 24)), DecodeError);
}

TEST(UnionFind, ValidOnRandomShots) {
  for (std::uint32_t d : {3u, 5u, 7u}) {
    const CodeLayout l = build_layout(d);
    for (Sector s : {Sector::X, Sector::Z}) {
      const DecodingGraph g = build_decoding_graph(l, s, d);
      UnionFindDecoder dec(g);
      for (std::uint64_t shot = 0; shot < 2000; ++shot) {
        const ErrorPattern p = sample_errors(g, 0.03, shot);
        const SyndromeRounds syn = syndrome_of(p, g);
        ASSERT_TRUE(is_valid(dec.decode(syn), syn, g)) << "d=" << d << " shot=" << shot;
      }
    }
  }
}

TEST(UnionFind, DeterministicAcrossInstances) {
  const CodeLayout l = build_layout(5);
  const DecodingGraph g = build_decoding_graph(l, Sector::Z, 5);
  UnionFindDecoder a(g), b(g);
  for (std::uint64_t shot = 0; shot < 200; ++shot) {
    const SyndromeRounds syn = syndrome_of(sample_errors(g, 0.05, shot), g);
    // `a` keeps its buffers from earlier calls, `b` decodes a fresh state.
    const Correction ca = a.decode(syn);
    EXPECT_EQ(ca, UnionFindDecoder(g).decode(syn));
    EXPECT_EQ(ca, b.decode(syn));
  }
}

TEST(UnionFind, EveryWeightOneErrorCorrectedD3) {
  const CodeLayout l = build_layout(3);
  for (Sector s : {Sector::X, Sector::Z}) {
    for (std::uint32_t r : {1u, 2u, 3u}) {
      const DecodingGraph g = build_decoding_graph(l, s, r);
      UnionFindDecoder dec(g);
      for (FaultId f = 0; f < g.edge_count(); ++f) {
        const ErrorPattern p = make_pattern(s, {f});
        EXPECT_FALSE(is_logical_failure(p, dec.decode(syndrome_of(p, g)), g, l)) << "fault " << f;
      }
    }
  }
}

TEST(UnionFind, EveryWeightTwoErrorCorrectedD5) {
  const CodeLayout l = build_layout(5);
  for (Sector s : {Sector::X, Sector::Z}) {
    const DecodingGraph g = build_decoding_graph(l, s, 5);
    UnionFindDecoder dec(g);
    const auto m = static_cast<FaultId>(g.edge_count());
    std::size_t failures = 0;
    for (FaultId a = 0; a < m; ++a) {
      for (FaultId b = a; b < m; ++b) {
        const ErrorPattern p = a == b ? make_pattern(s, {a}) : make_pattern(s, {a, b});
        failures += is_logical_failure(p, dec.decode(syndrome_of(p, g)), g, l) ? 1 : 0;
      }
    }
    EXPECT_EQ(failures, 0u) << to_string(s);
  }
}

TEST(UnionFind, WorstCasePattern) {
  const WorstCasePattern& w = worst_case_d3();
  const CodeLayout l = build_layout(3);
  const DecodingGraph g = build_decoding_graph(l, Sector::X, 3);
  EXPECT_FALSE(w.syndrome.is_zero());
  EXPECT_LE(w.pattern.weight(), 2u);
  EXPECT_EQ(&worst_case_d3_syndrome(), &w.syndrome);
  UnionFindDecoder dec(g);
  const Correction c = dec.decode(w.syndrome);
  EXPECT_TRUE(is_valid(c, w.syndrome, g));
  EXPECT_TRUE((syndrome_of(w.pattern ^ make_pattern(Sector::X, c.faults), g)).is_zero());
  EXPECT_EQ(dec.last_stats().growth_rounds, w.stats.growth_rounds);
  for (FaultId f = 0; f < g.edge_count(); ++f) {
    dec.decode(syndrome_of(make_pattern(Sector::X, {f}), g));
    EXPECT_GE(w.stats.growth_rounds, dec.last_stats().growth_rounds);
  }
}

TEST(Oracle, ZeroSyndrome) {
  const CodeLayout l = build_layout(3);
  const DecodingGraph g = build_decoding_graph(l, Sector::X, 2);
  const Correction c = oracle_decode(g, empty_syndrome(g));
  EXPECT_EQ(c.weight(), 0u);
}

TEST(Oracle, BoundaryDefectTakesBoundaryEdge) {
  const CodeLayout l = build_layout(3);
  const DecodingGraph g = build_decoding_graph(l, Sector::Z, 1);
  for (FaultId f = 0; f < g.edge_count(); ++f) {
    if (!g.is_boundary(g.edge(f).b)) continue;
    const SyndromeRounds syn = syndrome_of(make_pattern(Sector::Z, {f}), g);
    const Correction c = oracle_decode(g, syn);
    ASSERT_EQ(c.weight(), 1u);
    EXPECT_TRUE(g.is_boundary(g.edge(c.faults[0]).b));
    EXPECT_EQ(g.edge(c.faults[0]).a, g.edge(f).a);
  }
}

TEST(Oracle, WeightOneFaultsRecovered) {
  const CodeLayout l = build_layout(3);
  for (Sector s : {Sector::X, Sector::Z}) {
    const DecodingGraph g = build_decoding_graph(l, s, 2);
    for (FaultId f = 0; f < g.edge_count(); ++f) {
      const SyndromeRounds syn = syndrome_of(make_pattern(s, {f}), g);
      const Correction c = oracle_decode(g, syn);
      EXPECT_EQ(c.weight(), 1u);
      EXPECT_EQ(syndrome_of(c.faults, g), syn);
    }
  }
}

TEST(Oracle, EnforcesCaps) {
  const CodeLayout l = build_layout(7);
  const DecodingGraph g = build_decoding_graph(l, Sector::X, 7);
  SyndromeRounds syn = empty_syndrome(g);
  for (VertexId v = 0; v < 14; ++v) syn.flip_vertex(Sector::X, g.stabilizers(), v * 3);
  EXPECT_THROW(oracle_decode(g, syn), DecodeError);
  const SyndromeRounds one = syndrome_of(make_pattern(Sector::X, {0}), g);
  EXPECT_THROW(oracle_decode(g, one, OracleLimits{12, 10}), DecodeError);
  EXPECT_NO_THROW(oracle_decode(g, one));
}

// Brute force over every edge subset is the independent reference here.
TEST(Oracle, MatchesBruteForceAndBoundsUnionFind) {
  const CodeLayout l = build_layout(3);
  for (Sector s : {Sector::X, Sector::Z}) {
    for (std::uint32_t r : {1u, 2u}) {
      const DecodingGraph g = build_decoding_graph(l, s, r);
      const auto table = brute_force(g);
      UnionFindDecoder dec(g);
      for (std::uint32_t mask = 0; mask < table.min_weight.size(); ++mask) {
        const SyndromeRounds syn = syndrome_from_mask(g, mask);
        const Correction oc = oracle_decode(g, syn);
        const Correction uc = dec.decode(syn);
        ASSERT_TRUE(is_valid(oc, syn, g));
        ASSERT_TRUE(is_valid(uc, syn, g));
        EXPECT_EQ(oc.weight(), table.min_weight[mask]) << "mask " << mask;
        EXPECT_GE(uc.weight(), oc.weight()) << "mask " << mask;
        if (std::popcount(mask) == 2 && table.solutions[mask] == 1) {
          const auto unique = faults_from_mask(table.best_edges[mask]);
          EXPECT_EQ(oc.faults, unique) << "mask " << mask;
          EXPECT_EQ(uc.faults, unique) << "mask " << mask;
        }
      }
    }
  }
}

TEST(Validity, Basics) {
  const CodeLayout l = build_layout(3);
  const DecodingGraph g = build_decoding_graph(l, Sector::X, 2);
  EXPECT_TRUE(is_valid(as_correction(Sector::X, {}), empty_syndrome(g), g));
  const SyndromeRounds syn = syndrome_of(make_pattern(Sector::X, {3}), g);
  EXPECT_FALSE(is_valid(as_correction(Sector::X, {}), syn, g));
  EXPECT_TRUE(is_valid(as_correction(Sector::X, {3}), syn, g));
  EXPECT_FALSE(is_valid(as_correction(Sector::X, {static_cast<FaultId>(g.edge_count())}), syn, g));
  EXPECT_FALSE(is_valid(as_correction(Sector::Z, {3}), syn, g));
}

TEST(LogicalFailure, Basics) {
  for (std::uint32_t d : {3u, 5u}) {
    const CodeLayout l = build_layout(d);
    for (Sector s : {Sector::X, Sector::Z}) {
      const DecodingGraph g = build_decoding_graph(l, s, 2);
      const ErrorPattern p = sample_errors(g, 0.2, d);
      EXPECT_FALSE(is_logical_failure(p, as_correction(s, p.faults), g, l));
      std::vector<FaultId> chain;
      for (QubitIndex q : l.logical_chain(s)) chain.push_back(g.data_fault(q, 1));
      const ErrorPattern logical = make_pattern(s, chain);
      ASSERT_TRUE(syndrome_of(logical, g).is_zero());
      EXPECT_TRUE(is_logical_failure(logical, as_correction(s, {}), g, l));
      // A residual equal to a stabilizer of the other sector is harmless.
      for (const auto& st : l.stabilizers(s == Sector::X ? Sector::Z : Sector::X)) {
        std::vector<FaultId> f;
        for (QubitIndex q : st.data) f.push_back(g.data_fault(q, 0));
        const ErrorPattern stab = make_pattern(s, f);
        ASSERT_TRUE(syndrome_of(stab, g).is_zero());
        EXPECT_FALSE(is_logical_failure(stab, as_correction(s, {}), g, l));
      }
      EXPECT_THROW(is_logical_failure(make_pattern(s, {0}), as_correction(s, {}), g, l), DecodeError);
    }
  }
}
