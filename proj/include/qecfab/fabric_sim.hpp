#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qecfab {

/// Simulated time in integer picoseconds.
struct SimTime {
  std::uint64_t ps = 0;

  static constexpr SimTime from_ns(std::uint64_t ns) noexcept { return {ns * 1000}; }
  constexpr double ns() const noexcept { return static_cast<double>(ps) / 1000.0; }

  constexpr auto operator<=>(const SimTime&) const = default;
  constexpr SimTime operator+(SimTime o) const noexcept { return {ps + o.ps}; }
  constexpr SimTime& operator+=(SimTime o) noexcept {
    ps += o.ps;
    return *this;
  }
};

constexpr SimTime operator""_ps(unsigned long long v) noexcept { return {v}; }
constexpr SimTime operator""_ns(unsigned long long v) noexcept { return {v * 1000}; }

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xFFFFFFFFu;

enum class EventKind : std::uint8_t {
  MessageDelivery,
  RoundBoundary,
  SyncStep,
  StageComplete,
  DecodeComplete,
};

std::string_view to_string(EventKind k) noexcept;

struct Event {
  SimTime at;
  std::uint64_t seq = 0;
  NodeId target = kNoNode;
  EventKind kind = EventKind::StageComplete;
  std::string label;  // free-form tag for traces (stage name, message kind)
  std::function<void()> action;
};

class SchedulingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Sequential discrete-event engine. Events run in (time, sequence) order;
/// sequence numbers are assigned at scheduling time, so equal-time events run
/// in insertion order.
class Simulator {
 public:
  SimTime now() const noexcept { return now_; }

  // Returns the assigned sequence number. Throws SchedulingError when `at`
  // lies before now().
  std::uint64_t schedule(SimTime at, NodeId target, EventKind kind, std::string label,
                         std::function<void()> action = {});

  // Processes every event with fire time <= until; returns how many ran.
  std::size_t run_until(SimTime until);
  std::size_t run_all();

  std::size_t pending() const noexcept { return queue_.size(); }

  // Running FNV-1a hash over (time, node, kind, label) of every processed
  // event.
  std::uint64_t trace_hash() const noexcept { return trace_hash_; }
  std::size_t processed() const noexcept { return processed_; }

  // Line-delimited trace output: "<ps> <node> <kind> <label>".
  void set_trace_stream(std::ostream* os) noexcept { trace_ = os; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const noexcept {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  void record(const Event& e);

  SimTime now_{};
  std::uint64_t next_seq_ = 0;
  std::size_t processed_ = 0;
  std::uint64_t trace_hash_ = 0xcbf29ce484222325ULL;
  std::ostream* trace_ = nullptr;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

// Local timer of a node: reading(t) = t + offset + drift_ppm * t / 1e6.
struct NodeClock {
  std::int64_t offset_ps = 0;
  double drift_ppm = 0.0;

  std::int64_t read(SimTime t) const noexcept;
  void adjust(std::int64_t correction_ps) noexcept { offset_ps -= correction_ps; }
};

enum class NodeRole : std::uint8_t { Leaf, Router, Root };
std::string_view to_string(NodeRole r) noexcept;

struct NodeState {
  NodeId id = 0;
  NodeRole role = NodeRole::Leaf;
  NodeId parent = kNoNode;
  std::vector<NodeId> children;
  NodeClock clock;
};

struct TreeShape {
  std::uint32_t leaves = 1;
  std::uint32_t root_ports = 4;
  std::uint32_t router_children = 29;
  std::uint32_t router_layers = 0;
};

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Root, routers and leaves. Node 0 is the root; leaves are numbered after
// all routers, so leaf k has id leaf_ids()[k].
class Topology {
 public:
  explicit Topology(const TreeShape& shape);

  std::size_t size() const noexcept { return nodes_.size(); }
  NodeState& node(NodeId id) { return nodes_.at(id); }
  const NodeState& node(NodeId id) const { return nodes_.at(id); }
  NodeId root() const noexcept { return 0; }
  const std::vector<NodeId>& leaf_ids() const noexcept { return leaves_; }
  const std::vector<NodeId>& router_ids() const noexcept { return routers_; }
  std::uint32_t depth() const noexcept { return depth_; }
  const TreeShape& shape() const noexcept { return shape_; }

  // Nodes in breadth-first order from the root.
  std::vector<NodeId> top_down() const;

  // Checks single-parent, acyclic, port-limit invariants; throws TopologyError.
  void validate() const;

 private:
  TreeShape shape_;
  std::vector<NodeState> nodes_;
  std::vector<NodeId> leaves_;
  std::vector<NodeId> routers_;
  std::uint32_t depth_ = 1;
};

// Two-way timestamp exchange. t1: parent send, t2: child receive, t3: child
// send, t4: parent receive, all in the respective local timers.
struct PtpTimestamps {
  std::optional<std::int64_t> t1, t2, t3, t4;
};

class SyncError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ((t2 - t1) - (t4 - t3)) / 2 with the single division rounded half to even.
// Throws SyncError when a timestamp is missing.
std::int64_t ptp_offset(const PtpTimestamps& ts);

// Path delays of one parent/child edge; known to the simulator only.
struct PathDelay {
  std::uint64_t down_ps = 156'000;  // parent -> child
  std::uint64_t up_ps = 156'000;    // child -> parent
  std::uint64_t turnaround_ps = 0;  // child response time
};

// Runs one sync exchange through the simulator, applies the correction to
// the child clock and returns it.
std::int64_t ptp_sync(Simulator& sim, const NodeState& parent, NodeState& child,
                      const PathDelay& delay);

struct SyncReport {
  std::vector<std::int64_t> residual_ps;  // per node, relative to the root timer
  std::int64_t max_abs_residual_ps = 0;
  std::vector<std::int64_t> corrections_ps;  // per node; 0 for the root
};

// Residual of each node's timer against the root timer at time t.
std::vector<std::int64_t> clock_residuals(const Topology& topo, SimTime t);

// Syncs every edge top-down; `delay_of(child)` gives the edge's path delays.
SyncReport global_sync(Simulator& sim, Topology& topo,
                       const std::function<PathDelay(NodeId)>& delay_of);

// Worst timer divergence accumulated between syncs by a linear drift.
std::uint64_t drift_bound_ps(double drift_ppm, SimTime interval) noexcept;

}  // namespace qecfab
