// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "brute_force.hpp"
#include "qecfab/capacity_model.hpp"
#include "qecfab/experiment.hpp"
#include "qecfab/fabric_sim.hpp"
#include "qecfab/link_layer.hpp"
#include "qecfab/qec_pipeline.hpp"
#include "qecfab/reports.hpp"
#include "qecfab/rng.hpp"
#include "qecfab/uf_decoder.hpp"

using namespace qecfab;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int n, const char* name, bool ok, const std::string& detail) {
  std::printf("%s criterion %d %s: %s\n", ok ? "PASS" : "FAIL", n, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

unsigned worker_count() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void latency_reproduction() {
  const auto t0 = std::chrono::steady_clock::now();
  const PipelineConfig cfg;
  const CampaignReport r = run_campaign(cfg, 10'000, 1, worker_count());
  const double mean_ns = r.end_to_end.mean_ps / 1000.0;
  bool ok = mean_ns >= 440.0 && mean_ns <= 455.0 && r.all_valid && r.all_feedback_matches;
  std::ostringstream d;
  d << "mean end-to-end " << fixed(mean_ns, 3) << " ns;";
  // Expected bounds written out independently of the stage config.
  const struct {
    Stage stage;
    std::int64_t mean_ns, half_ns;
  } expected[] = {{Stage::LeafAgg, 29, 3},   {Stage::Uplink, 157, 16},  {Stage::RootAgg, 20, 10},
                  {Stage::Decode, 56, 0},    {Stage::RootDist, 25, 3},  {Stage::Downlink, 155, 9},
                  {Stage::LeafDist, 9, 1}};
  for (const auto& e : expected) {
    const StageStats& s = r.stages[static_cast<std::size_t>(e.stage)];
    const bool in = s.min_ps >= (e.mean_ns - e.half_ns) * 1000 && s.max_ps <= (e.mean_ns + e.half_ns) * 1000;
    ok = ok && in;
    d << ' ' << s.name << " [" << fixed(s.min_ps / 1000.0, 3) << ", " << fixed(s.max_ps / 1000.0, 3) << "]"
      << (in ? "" : "!");
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 60.0;
  d << "; " << fixed(secs, 2) << " s";
  report(1, "latency reproduction", ok, d.str());
}

struct CliRun {
  int code = -1;
  fs::path dir;
};

CliRun cli_latency(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cmd = std::string(QECFAB_CLI) + " latency --zero-jitter --jobs 1 --shots 10000 --seed 5 --shot-csv --out " +
                          dir.string() + " > " + (dir / "stdout.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, dir};
}

void zero_jitter_determinism() {
  const fs::path base = fs::temp_directory_path() / ("qecfab_acceptance_" + std::to_string(::getpid()));
  const CliRun a = cli_latency(base / "a");
  const CliRun b = cli_latency(base / "b");
  bool ok = a.code == 0 && b.code == 0;
  std::ostringstream d;
  d << "exit codes " << a.code << "/" << b.code << ";";

  // Every shot's end_to_end_ps column must read 451000.
  std::size_t shots = 0, exact = 0;
  std::ifstream in(a.dir / "latency_shots.csv");
  std::string line;
  int col = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (col < 0) {
      const auto it = std::find(cells.begin(), cells.end(), "end_to_end_ps");
      if (it == cells.end()) break;
      col = static_cast<int>(it - cells.begin());
      continue;
    }
    ++shots;
    exact += cells.at(static_cast<std::size_t>(col)) == "451000" ? 1 : 0;
  }
  ok = ok && shots == 10'000 && exact == shots;
  d << ' ' << exact << "/" << shots << " shots at 451000 ps;";

  std::size_t identical = 0;
  const char* files[] = {"latency_stages.csv", "latency_histogram.csv", "latency_summary.json", "latency_shots.csv"};
  for (const char* f : files) {
    const std::string x = slurp(a.dir / f);
    identical += !x.empty() && x == slurp(b.dir / f) ? 1 : 0;
  }
  ok = ok && identical == std::size(files);
  d << ' ' << identical << "/" << std::size(files) << " report files byte-identical across runs";
  fs::remove_all(base);
  report(2, "zero-jitter determinism", ok, d.str());
}

void throughput_ledger() {
  const LinkModel ten{10'000'000'000ULL, 4, 156'000, 0};
  const LinkModel twenty_eight{28'000'000'000ULL, 4, 156'000, 0};
  const std::string a = effective_throughput(ten).format_gbps(3);
  const std::string b = effective_throughput(twenty_eight).format_gbps(1);
  const double peak = decoder_peak_bps(440, 11.5);
  const ThroughputMargin m = throughput_margin(21, ten, peak);
  const std::string peak_text = fixed(peak / 1e9, 2);
  const bool ok = a == "38.788" && b == "108.6" && peak_text == "38.26" && std::abs(m.ratio - 87.0) < 0.5 &&
                  std::abs(m.required_bps - 440e6) < 1e-3;
  report(3, "throughput ledger", ok,
         "4x10G " + a + " Gb/s, 4x28G " + b + " Gb/s, decoder peak " + peak_text + " Gb/s, d=21 required " +
             fixed(m.required_bps / 1e6, 0) + " Mb/s, margin " + fixed(m.ratio, 2) + "x");
}

void extrapolation_shape() {
  ExperimentConfig cfg;  // analysis defaults: vcu129, d = 3..21
  const auto rows = extrapolation_table(cfg);
  bool ok = rows.size() == 10;
  std::ostringstream d;
  std::uint64_t step = 0;
  for (std::size_t i = 0; ok && i < rows.size(); ++i) {
    const auto& l = rows[i].latency;
    ok = ok && l.router_layers == (l.distance >= 17 ? 1u : 0u);
    if (l.distance == 17) step = l.total_ps - rows[i - 1].latency.total_ps;
  }
  ok = ok && rows.front().latency.total_ps == 446'000 && step == 357'000;
  const std::uint64_t d21 = rows.back().latency.total_ps;
  ok = ok && d21 < 1'000'000;
  d << "layers 0 through d=15 and 1 from d=17, step " << fixed(step / 1000.0, 3) << " ns, d=3 "
    << fixed(rows.front().latency.total_ps / 1000.0, 3) << " ns, d=21 " << fixed(d21 / 1000.0, 3) << " ns";

  // Sweep decode(21) over every picosecond value below 253 ns.
  DecodeTable table = cfg.pipeline.stages.decode;
  const PlatformProfile prof = cfg.analysis_profile();
  std::uint64_t worst = 0;
  for (std::uint64_t dec = 0; dec < 253'000; ++dec) {
    table.points_ps[21] = dec;
    worst = std::max(worst, estimate_latency(21, prof, table).total_ps);
  }
  table.points_ps[21] = 253'000;
  const std::uint64_t edge = estimate_latency(21, prof, table).total_ps;
  ok = ok && worst < 1'000'000;
  d << "; decode(21) < 253 ns keeps d=21 at most " << fixed(worst / 1000.0, 3)
    << " ns; decode(21) = 253 ns gives exactly " << fixed(edge / 1000.0, 3) << " ns";
  report(4, "extrapolation shape", ok, d.str());
}

void decoder_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream d;

  // (a) exhaustive low-weight errors.
  std::size_t checked = 0, failed = 0;
  {
    const CodeLayout l = build_layout(3);
    for (Sector s : {Sector::X, Sector::Z}) {
      for (std::uint32_t r = 1; r <= 3; ++r) {
        const DecodingGraph g = build_decoding_graph(l, s, r);
        UnionFindDecoder dec(g);
        for (FaultId f = 0; f < g.edge_count(); ++f) {
          const ErrorPattern p = make_pattern(s, {f});
          failed += is_logical_failure(p, dec.decode(syndrome_of(p, g)), g, l) ? 1 : 0;
          ++checked;
        }
      }
    }
  }
  {
    const CodeLayout l = build_layout(5);
    for (Sector s : {Sector::X, Sector::Z}) {
      const DecodingGraph g = build_decoding_graph(l, s, 5);
      UnionFindDecoder dec(g);
      const auto m = static_cast<FaultId>(g.edge_count());
      for (FaultId a = 0; a < m; ++a) {
        for (FaultId b = a; b < m; ++b) {
          const ErrorPattern p = a == b ? make_pattern(s, {a}) : make_pattern(s, {a, b});
          failed += is_logical_failure(p, dec.decode(syndrome_of(p, g)), g, l) ? 1 : 0;
          ++checked;
        }
      }
    }
  }
  const bool a_ok = failed == 0;
  d << "(a) " << checked << " patterns, " << failed << " logical failures;";

  // (b) validity on random shots.
  std::size_t shots = 0, invalid = 0;
  const double rates[] = {0.001, 0.01, 0.03};
  for (std::uint32_t dist : {3u, 5u, 7u}) {
    const CodeLayout l = build_layout(dist);
    for (Sector s : {Sector::X, Sector::Z}) {
      const DecodingGraph g = build_decoding_graph(l, s, dist);
      UnionFindDecoder dec(g);
      for (std::uint64_t shot = 0; shot < 100'000; ++shot) {
        const ErrorPattern p = sample_errors(g, rates[shot % 3], stream_key(99, {dist, shot}));
        const SyndromeRounds syn = syndrome_of(p, g);
        invalid += is_valid(dec.decode(syn), syn, g) ? 0 : 1;
        ++shots;
      }
    }
  }
  const bool b_ok = invalid == 0;
  d << " (b) " << shots << " random decodes, " << invalid << " invalid;";

  // (c) LER ordering at p = 0.001.
  const std::uint64_t n = 1'000'000;
  const ProportionEstimate l3 = estimate_ler(3, 0, 0.001, n, 2024, worker_count());
  const ProportionEstimate l5 = estimate_ler(5, 0, 0.001, n, 2025, worker_count());
  const bool c_ok = l5.rate < l3.rate && l5.upper < l3.lower;
  char buf[256];
  std::snprintf(buf, sizeof buf, " (c) LER d=3 %.3e [%.3e, %.3e], d=5 %.3e [%.3e, %.3e] over %llu shots each;",
                l3.rate, l3.lower, l3.upper, l5.rate, l5.lower, l5.upper, static_cast<unsigned long long>(n));
  d << buf;
  const double secs = seconds_since(t0);
  d << ' ' << fixed(secs, 1) << " s";
  report(5, "decoder correctness", a_ok && b_ok && c_ok && secs < 600.0, d.str());
}

void oracle_consistency() {
  const CodeLayout l = build_layout(3);
  std::size_t instances = 0, bad = 0, pairs = 0, pair_bad = 0;
  for (Sector s : {Sector::X, Sector::Z}) {
    for (std::uint32_t r : {1u, 2u}) {
      const DecodingGraph g = build_decoding_graph(l, s, r);
      const auto table = testing::brute_force(g);
      UnionFindDecoder dec(g);
      for (std::uint32_t mask = 0; mask < table.min_weight.size(); ++mask) {
        const SyndromeRounds syn = testing::syndrome_from_mask(g, mask);
        const Correction oc = oracle_decode(g, syn);
        const Correction uc = dec.decode(syn);
        ++instances;
        const bool ok = is_valid(oc, syn, g) && is_valid(uc, syn, g) && oc.weight() == table.min_weight[mask] &&
                        uc.weight() >= oc.weight();
        bad += ok ? 0 : 1;
        if (std::popcount(mask) == 2 && table.solutions[mask] == 1) {
          ++pairs;
          const auto unique = testing::faults_from_mask(table.best_edges[mask]);
          pair_bad += oc.faults == unique && uc.faults == unique ? 0 : 1;
        }
      }
    }
  }
  std::ostringstream d;
  d << instances << " syndromes, " << bad << " violations; " << pairs << " unique defect pairs, " << pair_bad
    << " mismatches";
  report(6, "oracle consistency", bad == 0 && pair_bad == 0 && pairs > 0, d.str());
}

void clock_sync() {
  std::int64_t worst = 0;
  std::size_t trees = 0;
  for (std::uint32_t layers : {0u, 1u}) {
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
      Topology topo(TreeShape{layers ? 63u : 4u, layers ? 34u : 4u, 29, layers});
      CounterRng rng(trial, {layers, 7});
      for (NodeId id = 0; id < topo.size(); ++id) topo.node(id).clock.offset_ps = rng.uniform_int(-1'000'000, 1'000'000);
      Simulator sim;
      const SyncReport rep = global_sync(sim, topo, [](NodeId) { return PathDelay{156'000, 156'000, 0}; });
      worst = std::max(worst, rep.max_abs_residual_ps);
      ++trees;
    }
  }
  bool ok = worst == 0;
  std::size_t edges = 0, exact = 0;
  for (std::int64_t delta : {2, 100, 1000, 4000}) {
    Topology topo(TreeShape{60, 34, 29, 1});
    CounterRng rng(static_cast<std::uint64_t>(delta), {3});
    for (NodeId id = 0; id < topo.size(); ++id) topo.node(id).clock.offset_ps = rng.uniform_int(-1'000'000, 1'000'000);
    Simulator sim;
    const SyncReport rep = global_sync(sim, topo, [delta](NodeId) {
      return PathDelay{156'000, static_cast<std::uint64_t>(156'000 + delta), 0};
    });
    for (NodeId id = 1; id < topo.size(); ++id) {
      std::int64_t hops = 0;
      for (NodeId p = id; p != topo.root(); p = topo.node(p).parent) ++hops;
      ++edges;
      exact += rep.residual_ps[id] == hops * (delta / 2) ? 1 : 0;
    }
  }
  ok = ok && exact == edges;
  std::ostringstream d;
  d << trees << " random trees, max residual " << worst << " ps; " << exact << "/" << edges
    << " nodes at hops x delta/2 under asymmetry";
  report(7, "clock sync", ok, d.str());
}

void capacity_identities() {
  const auto q17 = required_qubits(17), q21 = required_qubits(21);
  const auto v = max_qubits(vcu129_profile(), 0), z = max_qubits(zcu216_profile(), 0);
  std::ostringstream d;
  d << "required(17)=" << q17 << ", required(21)=" << q21 << ", max(VCU129,0)=" << v << ", max(ZCU216,0)=" << z;
  report(8, "capacity identities", q17 == 577 && q21 == 881 && v == 476 && z == 56, d.str());
}

}  // namespace

int main() {
  latency_reproduction();
  zero_jitter_determinism();
  throughput_ledger();
  extrapolation_shape();
  decoder_correctness();
  oracle_consistency();
  clock_sync();
  capacity_identities();
  return failures == 0 ? 0 : 1;
}
