#include "qecfab/qec_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "qecfab/rng.hpp"

namespace qecfab {

std::string_view stage_name(Stage s) noexcept {
  switch (s) {
    case Stage::LeafAgg: return "leaf_agg";
    case Stage::Uplink: return "uplink";
    case Stage::RootAgg: return "root_agg";
    case Stage::Decode: return "decode";
    case Stage::RootDist: return "root_dist";
    case Stage::Downlink: return "downlink";
    case Stage::LeafDist: return "leaf_dist";
    case Stage::RouterProc: return "router_proc";
    case Stage::RouterNet: return "router_net";
  }
  return "?";
}

DecodeTable::Lookup DecodeTable::at(std::uint32_t distance) const {
  if (points_ps.empty()) throw std::invalid_argument("decode latency table is empty");
  if (auto it = points_ps.find(distance); it != points_ps.end()) return {it->second, false};
  auto hi = points_ps.lower_bound(distance);
  if (hi == points_ps.begin()) return {hi->second, true};
  if (hi == points_ps.end()) return {std::prev(hi)->second, true};
  auto lo = std::prev(hi);
  const double f = static_cast<double>(distance - lo->first) / static_cast<double>(hi->first - lo->first);
  const double v = static_cast<double>(lo->second) +
                   f * (static_cast<double>(hi->second) - static_cast<double>(lo->second));
  return {static_cast<std::uint64_t>(std::llround(v)), true};
}

StageLatencyConfig StageLatencyConfig::with_zero_jitter() const {
  StageLatencyConfig c = *this;
  c.leaf_agg.jitter_half_width_ps = 0;
  c.uplink.jitter_half_width_ps = 0;
  c.root_agg.jitter_half_width_ps = 0;
  c.decode.jitter_half_width_ps = 0;
  c.root_dist.jitter_half_width_ps = 0;
  c.downlink.jitter_half_width_ps = 0;
  c.leaf_dist.jitter_half_width_ps = 0;
  c.router.jitter_half_width_ps = 0;
  return c;
}

void StageLatencyConfig::validate() const {
  if (decode.points_ps.empty()) throw std::invalid_argument("decode latency table is empty");
  for (const auto& [d, ps] : decode.points_ps) {
    if (d == 0 || d % 2 == 0) {
      throw std::invalid_argument("decode table key " + std::to_string(d) + " is not an odd distance");
    }
  }
  if (uplink.one_way_latency_ps == 0 || downlink.one_way_latency_ps == 0) {
    throw std::invalid_argument("link one-way latency must be positive");
  }
  if (uplink.lanes == 0 || downlink.lanes == 0) throw std::invalid_argument("links need >= 1 lane");
  auto bounded = [](const char* name, std::uint64_t mean, std::uint64_t half_width) {
    if (half_width > mean) throw std::invalid_argument(std::string(name) + " jitter exceeds its mean");
  };
  bounded("leaf_agg", leaf_agg.mean_ps, leaf_agg.jitter_half_width_ps);
  bounded("root_agg", root_agg.mean_ps, root_agg.jitter_half_width_ps);
  bounded("root_dist", root_dist.mean_ps, root_dist.jitter_half_width_ps);
  bounded("leaf_dist", leaf_dist.mean_ps, leaf_dist.jitter_half_width_ps);
  bounded("uplink", uplink.one_way_latency_ps, uplink.jitter_half_width_ps);
  bounded("downlink", downlink.one_way_latency_ps, downlink.jitter_half_width_ps);
  for (const auto& [d, ps] : decode.points_ps) bounded("decode", ps, decode.jitter_half_width_ps);
  // Each router direction gets half the processing and half the round trip.
  bounded("router", std::min(router.processing_ps / 2, router.network_round_trip_ps / 2),
          router.jitter_half_width_ps);
}

LeafMap assign_qubits_to_leaves(const CodeLayout& layout, std::uint32_t qubits_per_leaf) {
  if (qubits_per_leaf == 0) throw std::invalid_argument("qubits_per_leaf must be >= 1");
  LeafMap m;
  m.qubits_per_leaf = qubits_per_leaf;
  const std::uint32_t total = layout.total_qubits();
  const std::uint32_t data = layout.data_qubit_count();
  m.leaf_count = (total + qubits_per_leaf - 1) / qubits_per_leaf;
  m.owner.resize(total);
  for (std::uint32_t q = 0; q < total; ++q) m.owner[q] = q / qubits_per_leaf;
  for (std::uint32_t leaf = 0; leaf < m.leaf_count; ++leaf) {
    const std::uint32_t begin = leaf * qubits_per_leaf;
    const std::uint32_t end = std::min(total, begin + qubits_per_leaf);
    m.data.emplace_back(std::min(begin, data), std::min(end, data));
    m.columns.emplace_back(std::max(begin, data) - data, std::max(end, data) - data);
  }
  return m;
}

std::vector<std::uint64_t> pack_bits(std::span<const std::uint8_t> bits) {
  std::vector<std::uint64_t> words((bits.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) words[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  return words;
}

std::vector<std::uint8_t> unpack_bits(std::span<const std::uint64_t> words, std::size_t count) {
  if (words.size() * 64 < count) throw std::invalid_argument("packed buffer too short");
  std::vector<std::uint8_t> bits(count);
  for (std::size_t i = 0; i < count; ++i) bits[i] = (words[i / 64] >> (i % 64)) & 1;
  return bits;
}

SyndromeMessage make_syndrome_message(const SyndromeRounds& s, const LeafMap& map,
                                      std::uint32_t leaf, std::uint64_t shot) {
  SyndromeMessage m;
  m.shot = shot;
  m.leaf = leaf;
  m.round_begin = 0;
  m.round_end = s.rounds();
  std::tie(m.column_begin, m.column_end) = map.columns.at(leaf);
  std::vector<std::uint8_t> bits;
  bits.reserve(m.bit_count());
  for (std::uint32_t r = m.round_begin; r < m.round_end; ++r) {
    for (std::uint32_t c = m.column_begin; c < m.column_end; ++c) bits.push_back(s.get(r, c));
  }
  m.bits = pack_bits(bits);
  return m;
}

SyndromeRounds assemble_syndrome(std::span<const SyndromeMessage> messages, std::uint32_t rounds,
                                 std::uint32_t bits_per_round) {
  SyndromeRounds out(rounds, bits_per_round);
  std::vector<std::uint8_t> covered(static_cast<std::size_t>(rounds) * bits_per_round, 0);
  std::vector<const SyndromeMessage*> ordered;
  for (const auto& m : messages) ordered.push_back(&m);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->leaf < b->leaf; });
  for (const SyndromeMessage* m : ordered) {
    if (m->round_end > rounds || m->column_end > bits_per_round || m->column_begin > m->column_end ||
        m->round_begin > m->round_end) {
      throw std::invalid_argument("syndrome message from leaf " + std::to_string(m->leaf) +
                                  " is out of range");
    }
    const auto bits = unpack_bits(m->bits, m->bit_count());
    std::size_t k = 0;
    for (std::uint32_t r = m->round_begin; r < m->round_end; ++r) {
      for (std::uint32_t c = m->column_begin; c < m->column_end; ++c, ++k) {
        auto& cov = covered[static_cast<std::size_t>(r) * bits_per_round + c];
        if (cov) throw std::invalid_argument("duplicate syndrome bit in leaf messages");
        cov = 1;
        out.set(r, c, bits[k] != 0);
      }
    }
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
    throw std::invalid_argument("leaf messages do not cover the full syndrome");
  }
  return out;
}

std::vector<CorrectionMessage> route_corrections(const Correction& x, const Correction& z,
                                                 const DecodingGraph& gx, const DecodingGraph& gz,
                                                 const CodeLayout& layout, const LeafMap& map,
                                                 std::uint64_t shot) {
  std::vector<CorrectionMessage> out(map.leaf_count);
  std::vector<std::vector<std::uint8_t>> flips(map.leaf_count);
  for (std::uint32_t leaf = 0; leaf < map.leaf_count; ++leaf) {
    out[leaf].shot = shot;
    out[leaf].leaf = leaf;
    flips[leaf].assign(out[leaf].payload_bits(map), 0);
  }
  auto route = [&](const Correction& c, const DecodingGraph& g) {
    for (FaultId f : c.faults) {
      const auto& e = g.edge(f);
      const QubitIndex site = e.kind == EdgeKind::Spacelike
                                  ? e.site
                                  : layout.ancilla_qubit(g.sector(), e.site);
      const std::uint32_t leaf = map.owner.at(site);
      out[leaf].faults.push_back({g.sector(), f});
      if (e.kind == EdgeKind::Spacelike) {
        const std::uint32_t k = site - map.data[leaf].first;
        flips[leaf][2 * k + (g.sector() == Sector::X ? 0 : 1)] ^= 1;
      }
    }
  };
  route(x, gx);
  route(z, gz);
  for (std::uint32_t leaf = 0; leaf < map.leaf_count; ++leaf) {
    std::sort(out[leaf].faults.begin(), out[leaf].faults.end());
    out[leaf].flips = pack_bits(flips[leaf]);
  }
  return out;
}

namespace {

Topology make_topology(const PipelineConfig& cfg, const LeafMap& map) {
  const std::uint64_t capacity = [&] {
    std::uint64_t c = static_cast<std::uint64_t>(cfg.root_ports) * cfg.qubits_per_leaf;
    for (std::uint32_t l = 0; l < cfg.router_layers; ++l) c *= cfg.router_children;
    return c;
  }();
  try {
    return Topology(TreeShape{map.leaf_count, cfg.root_ports, cfg.router_children, cfg.router_layers});
  } catch (const TopologyError& e) {
    throw CapacityError("distance " + std::to_string(cfg.distance) + " needs " +
                        std::to_string(map.owner.size()) + " qubits on " +
                        std::to_string(map.leaf_count) + " leaves but the topology supports " +
                        std::to_string(capacity) + " qubits (" + e.what() + ")");
  }
}

constexpr std::uint64_t kJitterDomain = 0x6A17;

}  // namespace

Pipeline::Pipeline(PipelineConfig config)
    : config_(std::move(config)),
      layout_(build_layout(config_.distance)),
      gx_(build_decoding_graph(layout_, Sector::X, config_.effective_rounds())),
      gz_(build_decoding_graph(layout_, Sector::Z, config_.effective_rounds())),
      leaf_map_(assign_qubits_to_leaves(layout_, config_.qubits_per_leaf)),
      topology_(make_topology(config_, leaf_map_)),
      dx_(gx_),
      dz_(gz_) {
  config_.stages.validate();
  if (!(config_.error_rate >= 0.0 && config_.error_rate <= 1.0)) {
    throw std::invalid_argument("error rate must lie in [0, 1]");
  }
  if (config_.source == SyndromeSource::WorstCaseD3 &&
      (config_.distance != 3 || config_.effective_rounds() != 3)) {
    throw std::invalid_argument("the worst-case syndrome exists only for distance 3, 3 rounds");
  }
  for (NodeId id = 0; id < topology_.size() && id < config_.initial_offsets_ps.size(); ++id) {
    topology_.node(id).clock.offset_ps = config_.initial_offsets_ps[id];
  }
  // Sync messages see the mean of the two data-path directions plus the
  // configured asymmetry on the way up.
  const auto& st = config_.stages;
  const std::uint64_t leaf_path = (st.uplink.one_way_latency_ps + st.downlink.one_way_latency_ps) / 2;
  const std::uint64_t router_path = st.router.network_round_trip_ps / 2;
  Simulator sim;
  sync_ = global_sync(sim, topology_, [&](NodeId child) {
    const std::uint64_t base =
        topology_.node(child).role == NodeRole::Leaf ? leaf_path : router_path;
    return PathDelay{base, base + config_.link_asymmetry_ps, 0};
  });
}

ShotReport Pipeline::run_shot(std::uint64_t shot, std::uint64_t seed, std::ostream* trace) {
  const std::uint64_t shot_seed = stream_key(seed, {shot});
  const auto& st = config_.stages;
  const std::uint32_t rounds = config_.effective_rounds();

  ErrorPattern px{Sector::X, {}, shot_seed};
  ErrorPattern pz{Sector::Z, {}, shot_seed};
  if (config_.source == SyndromeSource::WorstCaseD3) {
    px = worst_case_d3().pattern;
  } else {
    px = sample_errors(gx_, config_.error_rate, shot_seed);
    pz = sample_errors(gz_, config_.error_rate, shot_seed);
  }
  const SyndromeRounds truth = syndrome_of(px, gx_) ^ syndrome_of(pz, gz_);

  const std::size_t n = topology_.size();
  // Direction 0 is toward the root, 1 away from it.
  auto jitter = [&](Stage stage, NodeId node, std::uint64_t half,
                    std::uint64_t dir = 0) -> std::int64_t {
    if (half == 0) return 0;
    const std::uint64_t node_key = config_.jitter_mode == JitterMode::PerNode ? node + 1 : 0;
    CounterRng rng(shot_seed, {kJitterDomain, static_cast<std::uint64_t>(stage), dir, node_key});
    const auto h = static_cast<std::int64_t>(half);
    return rng.uniform_int(-h, h);
  };
  auto link_rng = [&](Stage stage, NodeId node, std::uint64_t dir) {
    const std::uint64_t node_key = config_.jitter_mode == JitterMode::PerNode ? node + 1 : 0;
    return CounterRng(shot_seed, {kJitterDomain, static_cast<std::uint64_t>(stage), dir, node_key});
  };
  auto duration = [](std::uint64_t mean, std::int64_t j) {
    return SimTime{static_cast<std::uint64_t>(std::max<std::int64_t>(0, static_cast<std::int64_t>(mean) + j))};
  };
  auto clock = [&](NodeId id, SimTime t) { return topology_.node(id).clock.read(t); };

  Simulator sim;
  sim.set_trace_stream(trace);

  // Per-node timestamps in that node's timer.
  std::vector<std::int64_t> t_avail(n), t_agg(n), t_arrive_up(n), t_send_up(n), t_recv_down(n),
      t_send_down(n), t_done(n);
  std::vector<std::uint32_t> pending(n, 0);
  std::vector<NodeId> last_child(n, kNoNode);
  std::vector<std::uint64_t> up_payload(n, 0);
  std::int64_t t_root_agg = 0, t_decode = 0, t_root_dist = 0;
  NodeId last_leaf_done = kNoNode;

  std::vector<std::uint32_t> leaf_index(n, 0);
  for (std::uint32_t k = 0; k < topology_.leaf_ids().size(); ++k) leaf_index[topology_.leaf_ids()[k]] = k;
  for (NodeId id = 0; id < n; ++id) {
    pending[id] = static_cast<std::uint32_t>(topology_.node(id).children.size());
  }

  std::vector<SyndromeMessage> received;
  std::vector<CorrectionMessage> corrections;
  std::vector<RoutedFault> applied;
  Correction cx{Sector::X, {}}, cz{Sector::Z, {}};
  ShotReport rep;
  rep.shot = shot;
  rep.has_router = config_.router_layers > 0;

  std::vector<LinkChannel> up_links, down_links;
  for (NodeId id = 0; id < n; ++id) {
    const NodeState& node = topology_.node(id);
    const NodeId parent = node.parent == kNoNode ? 0 : node.parent;
    LinkModel up = st.uplink, down = st.downlink;
    if (node.role == NodeRole::Router) {
      up = LinkModel{st.uplink.line_rate_bps, st.uplink.lanes, st.router.network_round_trip_ps / 2,
                     st.router.jitter_half_width_ps};
      down = LinkModel{st.downlink.line_rate_bps, st.downlink.lanes,
                       st.router.network_round_trip_ps - st.router.network_round_trip_ps / 2,
                       st.router.jitter_half_width_ps};
    }
    up_links.emplace_back(up, id, parent);
    down_links.emplace_back(down, parent, id);
  }

  std::function<void(NodeId)> send_up;
  std::function<void(NodeId)> on_children_complete;
  std::function<void(NodeId)> send_down;

  on_children_complete = [&](NodeId id) {
    const NodeState& node = topology_.node(id);
    if (node.role == NodeRole::Router) {
      const SimTime done = sim.now() + duration(st.router.processing_ps / 2,
                                                jitter(Stage::RouterProc, id, st.router.jitter_half_width_ps));
      sim.schedule(done, id, EventKind::StageComplete, "router_proc_up", [&, id] {
        t_send_up[id] = clock(id, sim.now());
        send_up(id);
      });
      return;
    }
    // Root: aggregation, decode, distribution.
    const SimTime agg_done = sim.now() + duration(st.root_agg.mean_ps,
                                                  jitter(Stage::RootAgg, id, st.root_agg.jitter_half_width_ps));
    sim.schedule(agg_done, id, EventKind::StageComplete, "root_agg", [&, id] {
      t_root_agg = clock(id, sim.now());
      const SyndromeRounds assembled =
          assemble_syndrome(received, rounds, layout_.syndrome_bits_per_round());
      for (const auto& m : received) rep.syndrome_bits_received += m.bit_count();
      cx = dx_.decode(assembled);
      cz = dz_.decode(assembled);
      rep.valid = is_valid(cx, assembled, gx_) && is_valid(cz, assembled, gz_) && assembled == truth;
      if (rep.valid) {
        rep.logical_failure = is_logical_failure(px, cx, gx_, layout_) ||
                              is_logical_failure(pz, cz, gz_, layout_);
      }
      rep.correction_faults = cx.weight() + cz.weight();
      const auto dec = st.decode.at(config_.distance);
      const SimTime dec_done =
          sim.now() + duration(dec.ps, jitter(Stage::Decode, id, st.decode.jitter_half_width_ps));
      sim.schedule(dec_done, id, EventKind::DecodeComplete, "decode", [&, id] {
        t_decode = clock(id, sim.now());
        corrections = route_corrections(cx, cz, gx_, gz_, layout_, leaf_map_, shot);
        const SimTime dist_done = sim.now() + duration(st.root_dist.mean_ps,
                                                       jitter(Stage::RootDist, id, st.root_dist.jitter_half_width_ps));
        sim.schedule(dist_done, id, EventKind::StageComplete, "root_dist", [&, id] {
          t_root_dist = clock(id, sim.now());
          send_down(id);
        });
      });
    });
  };

  auto deliver_up = [&](NodeId child) {
    const NodeId parent = topology_.node(child).parent;
    t_arrive_up[child] = clock(parent, sim.now());
    up_payload[parent] += up_payload[child];
    last_child[parent] = child;
    if (--pending[parent] == 0) on_children_complete(parent);
  };

  send_up = [&](NodeId id) {
    const Stage stage = topology_.node(id).role == NodeRole::Leaf ? Stage::Uplink : Stage::RouterNet;
    CounterRng rng = link_rng(stage, id, 0);
    up_links[id].transfer(sim, up_payload[id], rng, std::string(stage_name(stage)) + "_up",
                          [&, id] { deliver_up(id); });
  };

  std::function<void(NodeId)> on_down_arrival = [&](NodeId id) {
    const NodeState& node = topology_.node(id);
    t_recv_down[id] = clock(id, sim.now());
    if (node.role == NodeRole::Router) {
      const SimTime done = sim.now() + duration(st.router.processing_ps - st.router.processing_ps / 2,
                                                jitter(Stage::RouterProc, id,
                                                       st.router.jitter_half_width_ps, 1));
      sim.schedule(done, id, EventKind::StageComplete, "router_proc_down", [&, id] {
        t_send_down[id] = clock(id, sim.now());
        send_down(id);
      });
      return;
    }
    const SimTime done = sim.now() + duration(st.leaf_dist.mean_ps,
                                              jitter(Stage::LeafDist, id, st.leaf_dist.jitter_half_width_ps));
    sim.schedule(done, id, EventKind::StageComplete, "leaf_dist", [&, id] {
      t_done[id] = clock(id, sim.now());
      auto& msg = corrections.at(leaf_index[id]);
      msg.receive_ps = t_recv_down[id];
      applied.insert(applied.end(), msg.faults.begin(), msg.faults.end());
      last_leaf_done = id;
    });
  };

  // Payload of the downward bundle each node forwards.
  std::vector<std::uint64_t> down_payload(n, 0);

  send_down = [&](NodeId id) {
    for (NodeId child : topology_.node(id).children) {
      const NodeState& c = topology_.node(child);
      const Stage stage = c.role == NodeRole::Leaf ? Stage::Downlink : Stage::RouterNet;
      if (c.role == NodeRole::Leaf) {
        auto& msg = corrections.at(leaf_index[child]);
        msg.emit_ps = clock(id, sim.now());
        down_payload[child] = msg.payload_bits(leaf_map_);
      }
      CounterRng rng = link_rng(stage, child, 1);
      down_links[child].transfer(sim, down_payload[child], rng, std::string(stage_name(stage)) + "_down",
                                 [&, child] { on_down_arrival(child); });
    }
  };

  // Router bundles: total correction payload of their leaves.
  if (rep.has_router) {
    for (auto it = topology_.leaf_ids().rbegin(); it != topology_.leaf_ids().rend(); ++it) {
      const std::uint32_t k = leaf_index[*it];
      const std::uint64_t bits = 2ULL * (leaf_map_.data[k].second - leaf_map_.data[k].first);
      for (NodeId p = topology_.node(*it).parent; p != 0; p = topology_.node(p).parent) {
        down_payload[p] += bits;
      }
    }
  }

  // Final round boundary: syndromes become available at every leaf.
  for (NodeId leaf : topology_.leaf_ids()) {
    sim.schedule(SimTime{0}, leaf, EventKind::RoundBoundary, "syndrome_ready", [&, leaf] {
      t_avail[leaf] = clock(leaf, sim.now());
      const SimTime done = sim.now() + duration(st.leaf_agg.mean_ps,
                                                jitter(Stage::LeafAgg, leaf, st.leaf_agg.jitter_half_width_ps));
      sim.schedule(done, leaf, EventKind::StageComplete, "leaf_agg", [&, leaf] {
        t_agg[leaf] = clock(leaf, sim.now());
        const std::uint32_t k = leaf_index[leaf];
        SyndromeMessage msg = make_syndrome_message(truth, leaf_map_, k, shot);
        msg.emit_ps = t_agg[leaf];
        // Earlier rounds are already streamed; only the final round is timed.
        up_payload[leaf] = msg.column_end - msg.column_begin;
        received.push_back(std::move(msg));
        send_up(leaf);
      });
    });
  }
  sim.run_all();

  for (auto& m : received) m.receive_ps = t_root_agg;

  // Critical path upward: follow the child whose arrival completed each
  // aggregation.
  auto& iv = rep.interval_ps;
  auto add = [&](Stage s, std::int64_t v) { iv[static_cast<std::size_t>(s)] += v; };
  NodeId up_node = last_child[topology_.root()];
  add(Stage::RootAgg, t_root_agg - t_arrive_up[up_node]);
  while (topology_.node(up_node).role == NodeRole::Router) {
    add(Stage::RouterNet, t_arrive_up[up_node] - t_send_up[up_node]);
    const NodeId c = last_child[up_node];
    add(Stage::RouterProc, t_send_up[up_node] - t_arrive_up[c]);
    up_node = c;
  }
  add(Stage::Uplink, t_arrive_up[up_node] - t_agg[up_node]);
  add(Stage::LeafAgg, t_agg[up_node] - t_avail[up_node]);
  add(Stage::Decode, t_decode - t_root_agg);
  add(Stage::RootDist, t_root_dist - t_decode);

  // Critical path downward: from the last leaf to finish back to the root.
  const NodeId down_leaf = last_leaf_done;
  add(Stage::LeafDist, t_done[down_leaf] - t_recv_down[down_leaf]);
  NodeId hop = down_leaf;
  NodeId parent = topology_.node(hop).parent;
  add(Stage::Downlink, t_recv_down[hop] - (parent == 0 ? t_root_dist : t_send_down[parent]));
  while (parent != 0) {
    hop = parent;
    parent = topology_.node(hop).parent;
    add(Stage::RouterProc, t_send_down[hop] - t_recv_down[hop]);
    add(Stage::RouterNet, t_recv_down[hop] - (parent == 0 ? t_root_dist : t_send_down[parent]));
  }
  rep.end_to_end_ps = std::accumulate(iv.begin(), iv.end(), std::int64_t{0});

  std::vector<RoutedFault> expected;
  for (FaultId f : cx.faults) expected.push_back({Sector::X, f});
  for (FaultId f : cz.faults) expected.push_back({Sector::Z, f});
  std::sort(expected.begin(), expected.end());
  std::sort(applied.begin(), applied.end());
  rep.feedback_matches = applied == expected;
  rep.trace_hash = sim.trace_hash();
  return rep;
}

ShotReport run_shot(const PipelineConfig& config, std::uint64_t seed) {
  Pipeline p(config);
  return p.run_shot(0, seed);
}

StageStats summarize(std::string name, std::vector<std::int64_t> samples) {
  StageStats s;
  s.name = std::move(name);
  s.count = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  s.min_ps = samples.front();
  s.max_ps = samples.back();
  long double sum = 0;
  for (auto v : samples) sum += v;
  const long double mean = sum / samples.size();
  long double var = 0;
  for (auto v : samples) var += (v - mean) * (v - mean);
  s.mean_ps = static_cast<double>(mean);
  s.stddev_ps = static_cast<double>(std::sqrt(var / samples.size()));
  auto rank = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
    return samples[std::min(samples.size() - 1, idx == 0 ? 0 : idx - 1)];
  };
  s.p50_ps = rank(0.50);
  s.p90_ps = rank(0.90);
  s.p99_ps = rank(0.99);
  return s;
}

ProportionEstimate wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  ProportionEstimate e;
  e.trials = trials;
  e.successes = successes;
  if (trials == 0) {
    e.upper = 1.0;
    return e;
  }
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  e.rate = p;
  e.lower = successes == 0 ? 0.0 : std::max(0.0, center - half);
  e.upper = successes == trials ? 1.0 : std::min(1.0, center + half);
  return e;
}

namespace {

template <typename Fn>
void parallel_blocks(std::uint64_t shots, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, jobs);
  if (jobs == 1 || shots < 2) {
    fn(0u, std::uint64_t{0}, shots);
    return;
  }
  std::vector<std::thread> workers;
  const std::uint64_t block = (shots + jobs - 1) / jobs;
  for (unsigned w = 0; w < jobs; ++w) {
    const std::uint64_t begin = w * block;
    const std::uint64_t end = std::min(shots, begin + block);
    if (begin >= end) break;
    workers.emplace_back([&fn, w, begin, end] { fn(w, begin, end); });
  }
  for (auto& t : workers) t.join();
}

std::pair<std::uint64_t, std::uint64_t> configured(const PipelineConfig& cfg, Stage s) {
  const auto& st = cfg.stages;
  const std::uint64_t layers = cfg.router_layers;
  switch (s) {
    case Stage::LeafAgg: return {st.leaf_agg.mean_ps, st.leaf_agg.jitter_half_width_ps};
    case Stage::Uplink: return {st.uplink.one_way_latency_ps, st.uplink.jitter_half_width_ps};
    case Stage::RootAgg: return {st.root_agg.mean_ps, st.root_agg.jitter_half_width_ps};
    case Stage::Decode: return {st.decode.at(cfg.distance).ps, st.decode.jitter_half_width_ps};
    case Stage::RootDist: return {st.root_dist.mean_ps, st.root_dist.jitter_half_width_ps};
    case Stage::Downlink: return {st.downlink.one_way_latency_ps, st.downlink.jitter_half_width_ps};
    case Stage::LeafDist: return {st.leaf_dist.mean_ps, st.leaf_dist.jitter_half_width_ps};
    case Stage::RouterProc:
      return {layers * st.router.processing_ps, 2 * layers * st.router.jitter_half_width_ps};
    case Stage::RouterNet:
      return {layers * st.router.network_round_trip_ps, 2 * layers * st.router.jitter_half_width_ps};
  }
  return {0, 0};
}

}  // namespace

CampaignReport run_campaign(const PipelineConfig& config, std::uint64_t shots, std::uint64_t seed,
                            unsigned jobs) {
  if (shots == 0) throw std::invalid_argument("a campaign needs at least one shot");
  CampaignReport out;
  out.shots = shots;
  out.seed = seed;
  out.has_router = config.router_layers > 0;
  out.reports.resize(shots);

  // Validates config and capacity before any worker starts.
  Pipeline probe(config);
  out.decode_latency_estimate = probe.decode_latency().estimate;

  parallel_blocks(shots, jobs, [&](unsigned, std::uint64_t begin, std::uint64_t end) {
    Pipeline p(config);
    for (std::uint64_t s = begin; s < end; ++s) out.reports[s] = p.run_shot(s, seed);
  });

  const std::size_t stage_count = out.has_router ? kStageCount : 7;
  std::uint64_t failures = 0;
  std::vector<std::int64_t> e2e;
  e2e.reserve(shots);
  std::map<std::int64_t, std::uint64_t> hist;
  for (const auto& r : out.reports) {
    failures += r.logical_failure ? 1 : 0;
    out.all_valid &= r.valid;
    out.all_feedback_matches &= r.feedback_matches;
    e2e.push_back(r.end_to_end_ps);
    ++hist[r.end_to_end_ps / 1000];
  }
  for (std::size_t i = 0; i < stage_count; ++i) {
    std::vector<std::int64_t> v;
    v.reserve(shots);
    for (const auto& r : out.reports) v.push_back(r.interval_ps[i]);
    StageStats s = summarize(std::string(stage_name(kAllStages[i])), std::move(v));
    std::tie(s.configured_mean_ps, s.configured_half_width_ps) = configured(config, kAllStages[i]);
    out.stages.push_back(std::move(s));
  }
  out.end_to_end = summarize("end_to_end", std::move(e2e));
  out.histogram_ns.assign(hist.begin(), hist.end());
  out.logical_failures = wilson_interval(failures, shots);
  return out;
}

ProportionEstimate estimate_ler(std::uint32_t distance, std::uint32_t rounds, double p,
                                std::uint64_t shots, std::uint64_t seed, unsigned jobs) {
  const CodeLayout layout = build_layout(distance);
  const std::uint32_t r = rounds ? rounds : distance;
  const DecodingGraph gx = build_decoding_graph(layout, Sector::X, r);
  const DecodingGraph gz = build_decoding_graph(layout, Sector::Z, r);
  jobs = std::max(1u, jobs);
  std::vector<std::uint64_t> failures(jobs, 0);
  parallel_blocks(shots, jobs, [&](unsigned w, std::uint64_t begin, std::uint64_t end) {
    UnionFindDecoder dx(gx), dz(gz);
    std::uint64_t local = 0;
    for (std::uint64_t s = begin; s < end; ++s) {
      const std::uint64_t shot_seed = stream_key(seed, {s});
      bool failed = false;
      for (auto* pair : {&dx, &dz}) {
        const DecodingGraph& g = pair->graph();
        const ErrorPattern pattern = sample_errors(g, p, shot_seed);
        if (pattern.faults.empty()) continue;
        const SyndromeRounds syn = syndrome_of(pattern, g);
        const Correction c = pair->decode(syn);
        failed |= is_logical_failure(pattern, c, g, layout);
      }
      local += failed ? 1 : 0;
    }
    failures[w] = local;
  });
  return wilson_interval(std::accumulate(failures.begin(), failures.end(), std::uint64_t{0}), shots);
}

const WorstCasePattern& worst_case_d3() {
  static const WorstCasePattern cached = [] {
    const CodeLayout layout = build_layout(3);
    const DecodingGraph g = build_decoding_graph(layout, Sector::X, 3);
    UnionFindDecoder dec(g);
    WorstCasePattern best{ErrorPattern{Sector::X, {}, 0}, empty_syndrome(g), {}};
    auto consider = [&](std::vector<FaultId> faults) {
      ErrorPattern pat = make_pattern(Sector::X, std::move(faults));
      SyndromeRounds syn = syndrome_of(pat, g);
      dec.decode(syn);
      const DecodeStats& st = dec.last_stats();
      if (st.growth_rounds > best.stats.growth_rounds ||
          (st.growth_rounds == best.stats.growth_rounds && st.grown_edges > best.stats.grown_edges)) {
        best = {std::move(pat), std::move(syn), st};
      }
    };
    const auto m = static_cast<FaultId>(g.edge_count());
    for (FaultId a = 0; a < m; ++a) consider({a});
    for (FaultId a = 0; a < m; ++a) {
      for (FaultId b = a + 1; b < m; ++b) consider({a, b});
    }
    return best;
  }();
  return cached;
}

const SyndromeRounds& worst_case_d3_syndrome() { return worst_case_d3().syndrome; }

}  // namespace qecfab
