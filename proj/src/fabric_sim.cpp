#include "qecfab/fabric_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>

namespace qecfab {

std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::MessageDelivery: return "deliver";
    case EventKind::RoundBoundary: return "round";
    case EventKind::SyncStep: return "sync";
    case EventKind::StageComplete: return "stage";
    case EventKind::DecodeComplete: return "decode";
  }
  return "?";
}

std::string_view to_string(NodeRole r) noexcept {
  switch (r) {
    case NodeRole::Leaf: return "leaf";
    case NodeRole::Router: return "router";
    case NodeRole::Root: return "root";
  }
  return "?";
}

std::uint64_t Simulator::schedule(SimTime at, NodeId target, EventKind kind, std::string label,
                                  std::function<void()> action) {
  if (at < now_) {
    throw SchedulingError("cannot schedule event at " + std::to_string(at.ps) +
                          " ps before current time " + std::to_string(now_.ps) + " ps");
  }
  const std::uint64_t seq = next_seq_++;
  queue_.push(Event{at, seq, target, kind, std::move(label), std::move(action)});
  return seq;
}

namespace {

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xFF;
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

void Simulator::record(const Event& e) {
  fnv_mix(trace_hash_, e.at.ps);
  fnv_mix(trace_hash_, e.target);
  fnv_mix(trace_hash_, static_cast<std::uint64_t>(e.kind));
  for (char c : e.label) {
    trace_hash_ ^= static_cast<unsigned char>(c);
    trace_hash_ *= 0x100000001b3ULL;
  }
  if (trace_) {
    *trace_ << e.at.ps << ' ' << e.target << ' ' << to_string(e.kind) << ' ' << e.label << '\n';
  }
}

std::size_t Simulator::run_until(SimTime until) {
  std::size_t count = 0;
  while (!queue_.empty() && queue_.top().at <= until) {
    // priority_queue::top is const; the event is copied out before popping.
    Event e = queue_.top();
    queue_.pop();
    now_ = e.at;
    record(e);
    ++processed_;
    ++count;
    if (e.action) e.action();
  }
  if (until > now_) now_ = until;
  return count;
}

std::size_t Simulator::run_all() {
  std::size_t count = 0;
  while (!queue_.empty()) count += run_until(queue_.top().at);
  return count;
}

std::int64_t NodeClock::read(SimTime t) const noexcept {
  const auto drift = static_cast<std::int64_t>(
      std::llround(drift_ppm * static_cast<double>(t.ps) / 1e6));
  return static_cast<std::int64_t>(t.ps) + offset_ps + drift;
}

Topology::Topology(const TreeShape& shape) : shape_(shape) {
  if (shape.leaves == 0) throw TopologyError("topology needs at least one leaf");
  if (shape.root_ports == 0) throw TopologyError("root needs at least one port");
  if (shape.router_layers > 0 && shape.router_children == 0) {
    throw TopologyError("router layers need a positive child limit");
  }

  // Routers per layer, bottom-up.
  std::vector<std::uint32_t> per_layer(shape.router_layers);
  std::uint32_t below = shape.leaves;
  for (std::uint32_t l = shape.router_layers; l-- > 0;) {
    below = (below + shape.router_children - 1) / shape.router_children;
    per_layer[l] = below;
  }
  if (below > shape.root_ports) {
    throw TopologyError("root has " + std::to_string(shape.root_ports) + " ports but " +
                        std::to_string(below) + " children are required; add a router layer");
  }

  nodes_.push_back(NodeState{0, NodeRole::Root, kNoNode, {}, {}});
  std::vector<NodeId> upper{0};
  for (std::uint32_t l = 0; l < shape.router_layers; ++l) {
    std::vector<NodeId> layer;
    for (std::uint32_t k = 0; k < per_layer[l]; ++k) {
      const auto id = static_cast<NodeId>(nodes_.size());
      // Fill parents left to right so each parent is full before the next.
      const std::uint32_t limit = l == 0 ? shape.root_ports : shape.router_children;
      const NodeId parent = upper[k / limit];
      nodes_.push_back(NodeState{id, NodeRole::Router, parent, {}, {}});
      nodes_[parent].children.push_back(id);
      routers_.push_back(id);
      layer.push_back(id);
    }
    upper = std::move(layer);
  }
  const std::uint32_t limit = shape.router_layers == 0 ? shape.root_ports : shape.router_children;
  for (std::uint32_t k = 0; k < shape.leaves; ++k) {
    const auto id = static_cast<NodeId>(nodes_.size());
    const NodeId parent = upper[k / limit];
    nodes_.push_back(NodeState{id, NodeRole::Leaf, parent, {}, {}});
    nodes_[parent].children.push_back(id);
    leaves_.push_back(id);
  }
  depth_ = shape.router_layers + 1;
  validate();
}

std::vector<NodeId> Topology::top_down() const {
  std::vector<NodeId> order{root()};
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (NodeId c : nodes_[order[i]].children) order.push_back(c);
  }
  return order;
}

void Topology::validate() const {
  if (nodes_.empty() || nodes_[0].role != NodeRole::Root || nodes_[0].parent != kNoNode) {
    throw TopologyError("node 0 must be the parentless root");
  }
  for (const NodeState& n : nodes_) {
    const std::uint32_t limit = n.role == NodeRole::Root     ? shape_.root_ports
                                : n.role == NodeRole::Router ? shape_.router_children
                                                             : 0;
    if (n.children.size() > limit) {
      throw TopologyError("node " + std::to_string(n.id) + " exceeds its port limit");
    }
    for (NodeId c : n.children) {
      if (c >= nodes_.size() || nodes_[c].parent != n.id) {
        throw TopologyError("child " + std::to_string(c) + " does not point back to its parent");
      }
    }
    if (n.id != 0 && n.parent == kNoNode) {
      throw TopologyError("node " + std::to_string(n.id) + " has no parent");
    }
  }
  if (top_down().size() != nodes_.size()) throw TopologyError("topology is not a single tree");
}

std::int64_t ptp_offset(const PtpTimestamps& ts) {
  if (!ts.t1 || !ts.t2 || !ts.t3 || !ts.t4) {
    throw SyncError("sync round aborted: missing timestamp");
  }
  const std::int64_t num = (*ts.t2 - *ts.t1) - (*ts.t4 - *ts.t3);
  if (num % 2 == 0) return num / 2;
  // Odd numerator: pick the even neighbour of num / 2.
  const std::int64_t lo = num >= 0 ? num / 2 : -((-num + 1) / 2);
  return lo % 2 == 0 ? lo : lo + 1;
}

std::int64_t ptp_sync(Simulator& sim, const NodeState& parent, NodeState& child,
                      const PathDelay& delay) {
  PtpTimestamps ts;
  const SimTime start = sim.now();
  const SimTime at_child = start + SimTime{delay.down_ps};
  const SimTime child_send = at_child + SimTime{delay.turnaround_ps};
  const SimTime at_parent = child_send + SimTime{delay.up_ps};

  sim.schedule(start, parent.id, EventKind::SyncStep, "sync_req_send",
               [&] { ts.t1 = parent.clock.read(sim.now()); });
  sim.schedule(at_child, child.id, EventKind::SyncStep, "sync_req_recv",
               [&] { ts.t2 = child.clock.read(sim.now()); });
  sim.schedule(child_send, child.id, EventKind::SyncStep, "sync_resp_send",
               [&] { ts.t3 = child.clock.read(sim.now()); });
  sim.schedule(at_parent, parent.id, EventKind::SyncStep, "sync_resp_recv",
               [&] { ts.t4 = parent.clock.read(sim.now()); });
  sim.run_until(at_parent);

  const std::int64_t correction = ptp_offset(ts);
  child.clock.adjust(correction);
  return correction;
}

std::vector<std::int64_t> clock_residuals(const Topology& topo, SimTime t) {
  std::vector<std::int64_t> out(topo.size());
  const std::int64_t ref = topo.node(topo.root()).clock.read(t);
  for (NodeId id = 0; id < topo.size(); ++id) out[id] = topo.node(id).clock.read(t) - ref;
  return out;
}

SyncReport global_sync(Simulator& sim, Topology& topo,
                       const std::function<PathDelay(NodeId)>& delay_of) {
  SyncReport report;
  report.corrections_ps.assign(topo.size(), 0);
  for (NodeId id : topo.top_down()) {
    NodeState& child = topo.node(id);
    if (child.parent == kNoNode) continue;
    report.corrections_ps[id] = ptp_sync(sim, topo.node(child.parent), child, delay_of(id));
  }
  report.residual_ps = clock_residuals(topo, sim.now());
  for (std::int64_t r : report.residual_ps) {
    report.max_abs_residual_ps = std::max<std::int64_t>(report.max_abs_residual_ps, std::llabs(r));
  }
  return report;
}

std::uint64_t drift_bound_ps(double drift_ppm, SimTime interval) noexcept {
  return static_cast<std::uint64_t>(
      std::llround(std::fabs(drift_ppm) * static_cast<double>(interval.ps) / 1e6));
}

}  // namespace qecfab
