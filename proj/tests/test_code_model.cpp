#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "qecfab/code_model.hpp"

using namespace qecfab;

namespace {

// Rank over GF(2) of rows given as qubit index sets.
std::size_t gf2_rank(std::vector<std::vector<std::uint8_t>> rows) {
  std::size_t rank = 0;
  const std::size_t cols = rows.empty() ? 0 : rows[0].size();
  for (std::size_t c = 0; c < cols && rank < rows.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && !rows[pivot][c]) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[pivot], rows[rank]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != rank && rows[r][c]) {
        for (std::size_t k = 0; k < cols; ++k) rows[r][k] ^= rows[rank][k];
      }
    }
    ++rank;
  }
  return rank;
}

std::size_t overlap(const std::vector<QubitIndex>& a, std::span<const QubitIndex> b) {
  std::size_t n = 0;
  for (auto q : a) n += std::count(b.begin(), b.end(), q);
  return n;
}

}  // namespace

TEST(CodeLayout, QubitCountsMatchClosedForm) {
  for (std::uint32_t d : {1u, 3u, 5u, 7u, 11u, 17u, 21u}) {
    const CodeLayout l = build_layout(d);
    EXPECT_EQ(l.total_qubits(), 2 * d * d - 1) << d;
    EXPECT_EQ(l.syndrome_bits_per_round(), d * d - 1) << d;
  }
  EXPECT_EQ(build_layout(3).total_qubits(), 17u);
  EXPECT_EQ(build_layout(3).syndrome_bits_per_round(), 8u);
  EXPECT_EQ(build_layout(21).total_qubits(), 881u);
  EXPECT_EQ(build_layout(21).syndrome_bits_per_round(), 440u);
}

TEST(CodeLayout, DistanceOneIsDegenerate) {
  const CodeLayout l = build_layout(1);
  EXPECT_EQ(l.total_qubits(), 1u);
  EXPECT_EQ(l.stabilizer_count_per_sector(), 0u);
  const DecodingGraph g = build_decoding_graph(l, Sector::X, 1);
  EXPECT_EQ(g.vertex_count(), 0u);
  EXPECT_EQ(g.timelike_count(), 0u);
}

TEST(CodeLayout, RejectsBadDistances) {
  EXPECT_THROW(build_layout(0), std::invalid_argument);
  EXPECT_THROW(build_layout(-3), std::invalid_argument);
  EXPECT_THROW(build_layout(4), std::invalid_argument);
}

TEST(CodeLayout, StabilizerStructure) {
  for (std::uint32_t d : {3u, 5u, 7u}) {
    const CodeLayout l = build_layout(d);
    const std::uint32_t n = d * d;
    for (Sector s : {Sector::X, Sector::Z}) {
      ASSERT_EQ(l.stabilizers(s).size(), (n - 1) / 2);
      std::vector<int> touch(n, 0);
      std::vector<std::vector<std::uint8_t>> rows;
      for (const auto& st : l.stabilizers(s)) {
        ASSERT_TRUE(st.data.size() == 2 || st.data.size() == 4);
        if (st.data.size() == 4) {
          // Plaquette: two adjacent rows, two adjacent columns.
          std::set<std::uint32_t> r, c;
          for (auto q : st.data) r.insert(q / d), c.insert(q % d);
          EXPECT_EQ(r.size(), 2u);
          EXPECT_EQ(c.size(), 2u);
          EXPECT_EQ(*r.rbegin() - *r.begin(), 1u);
          EXPECT_EQ(*c.rbegin() - *c.begin(), 1u);
        }
        std::vector<std::uint8_t> row(n, 0);
        for (auto q : st.data) ++touch[q], row[q] = 1;
        rows.push_back(row);
      }
      for (std::uint32_t q = 0; q < n; ++q) {
        EXPECT_LE(touch[q], 2);
        EXPECT_EQ(l.stabilizers_of(s, q).size(), static_cast<std::size_t>(touch[q]));
      }
      EXPECT_EQ(gf2_rank(rows), rows.size()) << "stabilizers must be independent";
    }
    // X and Z stabilizers commute.
    for (const auto& a : l.stabilizers(Sector::X)) {
      for (const auto& b : l.stabilizers(Sector::Z)) {
        EXPECT_EQ(overlap(a.data, b.data) % 2, 0u);
      }
    }
  }
}

TEST(CodeLayout, LogicalOperators) {
  for (std::uint32_t d : {3u, 5u, 9u}) {
    const CodeLayout l = build_layout(d);
    for (Sector s : {Sector::X, Sector::Z}) {
      const Sector other = s == Sector::X ? Sector::Z : Sector::X;
      EXPECT_EQ(l.logical_chain(s).size(), d);
      for (const auto& st : l.stabilizers(s)) EXPECT_EQ(overlap(st.data, l.logical_chain(s)) % 2, 0u);
      for (const auto& st : l.stabilizers(other)) EXPECT_EQ(overlap(st.data, l.crossing_set(s)) % 2, 0u);
      const std::vector<QubitIndex> chain(l.logical_chain(s).begin(), l.logical_chain(s).end());
      EXPECT_EQ(overlap(chain, l.crossing_set(s)) % 2, 1u);
    }
  }
}

TEST(CodeLayout, AncillaNumbering) {
  const CodeLayout l = build_layout(5);
  std::set<QubitIndex> seen;
  for (Sector s : {Sector::X, Sector::Z}) {
    for (std::uint32_t k = 0; k < l.stabilizer_count_per_sector(); ++k) {
      const QubitIndex a = l.ancilla_qubit(s, k);
      EXPECT_EQ(a, l.data_qubit_count() + l.syndrome_column(s, k));
      seen.insert(a);
    }
  }
  EXPECT_EQ(seen.size(), 24u);
  EXPECT_EQ(*seen.begin(), 25u);
  EXPECT_EQ(*seen.rbegin(), 48u);
}

TEST(DecodingGraph, CountsD3) {
  const CodeLayout l = build_layout(3);
  const DecodingGraph g = build_decoding_graph(l, Sector::X, 3);
  EXPECT_EQ(g.vertex_count(), 12u);
  EXPECT_EQ(g.timelike_count(), 8u);
  EXPECT_EQ(g.spacelike_count(), 27u);
  EXPECT_EQ(build_decoding_graph(l, Sector::Z, 1).timelike_count(), 0u);
  EXPECT_THROW(build_decoding_graph(l, Sector::X, 0), std::invalid_argument);
}

TEST(DecodingGraph, CountsD5ByEnumeration) {
  const CodeLayout l = build_layout(5);
  const DecodingGraph g = build_decoding_graph(l, Sector::X, 5);
  // Distinct non-boundary endpoints across all edges.
  std::set<VertexId> verts;
  for (const auto& e : g.edges()) {
    verts.insert(e.a);
    if (!g.is_boundary(e.b)) verts.insert(e.b);
  }
  EXPECT_EQ(verts.size(), 60u);
  EXPECT_EQ(g.vertex_count(), 60u);
}

TEST(DecodingGraph, EdgeStructure) {
  for (std::uint32_t d : {3u, 5u}) {
    const CodeLayout l = build_layout(d);
    for (Sector s : {Sector::X, Sector::Z}) {
      const std::uint32_t r = 4;
      const DecodingGraph g = build_decoding_graph(l, s, r);
      ASSERT_EQ(g.spacelike_count(), static_cast<std::size_t>(d) * d * r);
      ASSERT_EQ(g.timelike_count(), static_cast<std::size_t>(g.stabilizers()) * (r - 1));
      std::vector<int> seen(g.edge_count(), 0);
      for (VertexId v = 0; v <= g.boundary(); ++v) {
        for (FaultId f : g.incident(v)) {
          ++seen[f];
          const auto& e = g.edge(f);
          EXPECT_TRUE(e.a == v || e.b == v);
        }
      }
      for (FaultId f = 0; f < g.edge_count(); ++f) {
        const auto& e = g.edge(f);
        EXPECT_EQ(seen[f], 2) << "edge " << f << " must be listed at both endpoints";
        if (e.kind == EdgeKind::Spacelike) {
          const auto touching = l.stabilizers_of(s, e.site);
          EXPECT_EQ(g.is_boundary(e.b), touching.size() == 1);
          EXPECT_EQ(g.data_fault(e.site, e.round), f);
        } else {
          EXPECT_EQ(e.a, g.vertex(e.site, e.round));
          EXPECT_EQ(e.b, g.vertex(e.site, e.round + 1));
          EXPECT_EQ(g.measurement_fault(e.site, e.round), f);
        }
      }
      EXPECT_THROW(g.data_fault(d * d, 0), std::out_of_range);
      EXPECT_THROW(g.measurement_fault(0, r - 1), std::out_of_range);
    }
  }
}

TEST(Sampling, DegenerateRates) {
  const CodeLayout l = build_layout(5);
  const DecodingGraph g = build_decoding_graph(l, Sector::Z, 5);
  EXPECT_TRUE(sample_errors(g, 0.0, 3).faults.empty());
  EXPECT_EQ(sample_errors(g, 1.0, 3).faults.size(), g.edge_count());
}

TEST(Sampling, FaultFractionWithinFiveSigma) {
  const CodeLayout l = build_layout(21);
  const DecodingGraph g = build_decoding_graph(l, Sector::X, 21);
  const double p = 0.001;
  std::uint64_t edges = 0, faults = 0;
  for (std::uint64_t seed = 0; edges < 1'000'000; ++seed) {
    edges += g.edge_count();
    faults += sample_errors(g, p, seed).faults.size();
  }
  const double sigma = std::sqrt(static_cast<double>(edges) * p * (1 - p));
  EXPECT_LT(std::abs(static_cast<double>(faults) - static_cast<double>(edges) * p), 5 * sigma);
}

TEST(Sampling, SeedAndSectorSelectStreams) {
  const CodeLayout l = build_layout(5);
  const DecodingGraph gx = build_decoding_graph(l, Sector::X, 5);
  const DecodingGraph gz = build_decoding_graph(l, Sector::Z, 5);
  EXPECT_EQ(sample_errors(gx, 0.2, 42), sample_errors(gx, 0.2, 42));
  EXPECT_NE(sample_errors(gx, 0.2, 42).faults, sample_errors(gx, 0.2, 43).faults);
  EXPECT_NE(sample_errors(gx, 0.2, 42).faults, sample_errors(gz, 0.2, 42).faults);
}

TEST(Syndrome, EmptyPatternIsZero) {
  const CodeLayout l = build_layout(3);
  const DecodingGraph g = build_decoding_graph(l, Sector::X, 3);
  const SyndromeRounds s = syndrome_of(make_pattern(Sector::X, {}), g);
  EXPECT_TRUE(s.is_zero());
  EXPECT_EQ(s.size(), 3u * 8u);
}

TEST(Syndrome, SingleFaults) {
  for (std::uint32_t d : {3u, 5u}) {
    const CodeLayout l = build_layout(d);
    for (Sector s : {Sector::X, Sector::Z}) {
      const DecodingGraph g = build_decoding_graph(l, s, 3);
      for (FaultId f = 0; f < g.edge_count(); ++f) {
        const auto& e = g.edge(f);
        const SyndromeRounds syn = syndrome_of(make_pattern(s, {f}), g);
        const std::size_t w = syn.weight();
        EXPECT_TRUE(w == 1 || w == 2);
        EXPECT_TRUE(syn.vertex_bit(s, g.stabilizers(), e.a));
        if (!g.is_boundary(e.b)) {
          EXPECT_EQ(w, 2u);
          EXPECT_TRUE(syn.vertex_bit(s, g.stabilizers(), e.b));
        } else {
          EXPECT_EQ(w, 1u);
        }
        if (e.kind == EdgeKind::Spacelike && !g.is_boundary(e.b)) {
          for (std::uint32_t t = 0; t < 3; ++t) {
            std::size_t row = 0;
            for (std::uint32_t c = 0; c < syn.bits_per_round(); ++c) row += syn.get(t, c);
            EXPECT_EQ(row, t == e.round ? 2u : 0u);
          }
        }
        if (e.kind == EdgeKind::Timelike) {
          const std::uint32_t col = l.syndrome_column(s, e.site);
          EXPECT_TRUE(syn.get(e.round, col));
          EXPECT_TRUE(syn.get(e.round + 1, col));
        }
      }
    }
  }
}

TEST(Syndrome, Linearity) {
  const CodeLayout l = build_layout(5);
  for (Sector s : {Sector::X, Sector::Z}) {
    const DecodingGraph g = build_decoding_graph(l, s, 5);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const ErrorPattern a = sample_errors(g, 0.1, seed);
      const ErrorPattern b = sample_errors(g, 0.1, seed + 1000);
      EXPECT_EQ(syndrome_of(a ^ b, g), syndrome_of(a, g) ^ syndrome_of(b, g));
    }
  }
}

TEST(Syndrome, SizeMatchesRoundsTimesBits) {
  for (std::uint32_t d : {3u, 7u}) {
    const CodeLayout l = build_layout(d);
    for (std::uint32_t r : {1u, 2u, d}) {
      const DecodingGraph g = build_decoding_graph(l, Sector::X, r);
      EXPECT_EQ(empty_syndrome(g).size(), static_cast<std::size_t>(d * d - 1) * r);
    }
  }
}

TEST(Syndrome, UnknownFaultRejected) {
  const CodeLayout l = build_layout(3);
  const DecodingGraph g = build_decoding_graph(l, Sector::X, 2);
  const std::vector<FaultId> bad{static_cast<FaultId>(g.edge_count())};
  EXPECT_THROW(syndrome_of(bad, g), std::out_of_range);
}

TEST(ErrorPattern, ModTwoCancellation) {
  const ErrorPattern p = make_pattern(Sector::X, {5, 2, 5, 9, 2, 2});
  EXPECT_EQ(p.faults, (std::vector<FaultId>{2, 9}));
  const ErrorPattern q = make_pattern(Sector::X, {9, 4});
  EXPECT_EQ((p ^ q).faults, (std::vector<FaultId>{2, 4}));
}

TEST(ErrorPattern, Projections) {
  const CodeLayout l = build_layout(3);
  const DecodingGraph g = build_decoding_graph(l, Sector::X, 3);
  const ErrorPattern p = make_pattern(Sector::X, {g.data_fault(4, 1), g.measurement_fault(2, 0)});
  EXPECT_EQ(p.data_faults(g), (std::vector<std::pair<QubitIndex, std::uint32_t>>{{4, 1}}));
  EXPECT_EQ(p.measurement_faults(g), (std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 0}}));
}

TEST(Records, DumpsOneLinePerItem) {
  const CodeLayout l = build_layout(3);
  const DecodingGraph g = build_decoding_graph(l, Sector::X, 2);
  std::ostringstream a, b;
  write_layout_records(a, l);
  write_graph_records(b, g);
  EXPECT_FALSE(a.str().empty());
  const std::string text = b.str();
  EXPECT_GE(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), g.edge_count());
}
