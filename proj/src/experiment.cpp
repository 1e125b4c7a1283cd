#include "qecfab/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>

namespace qecfab {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError((path.empty() ? "config" : path) + ": expected an object");
}

void check_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  check_object(j, path);
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(join(path, key) + ": unknown key");
  }
}

std::uint64_t read_uint(const json& j, const std::string& path, std::uint64_t lo = 0,
                        std::uint64_t hi = std::numeric_limits<std::uint32_t>::max()) {
  if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
    throw ConfigError(path + ": expected a non-negative integer");
  }
  const auto v = j.get<std::uint64_t>();
  if (v < lo || v > hi) {
    throw ConfigError(path + ": " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
  return v;
}

double read_double(const json& j, const std::string& path, double lo, double hi) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  const double v = j.get<double>();
  if (!(v >= lo && v <= hi)) throw ConfigError(path + ": value outside the allowed range");
  return v;
}

std::uint64_t read_ns(const json& j, const std::string& path) {
  const double ns = read_double(j, path, 0.0, 1e9);
  return static_cast<std::uint64_t>(std::llround(ns * 1000.0));
}

std::uint64_t read_gbps(const json& j, const std::string& path) {
  const double g = read_double(j, path, 0.0, 1e4);
  return static_cast<std::uint64_t>(std::llround(g * 1e9));
}

bool read_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path + ": expected true or false");
  return j.get<bool>();
}

std::string read_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path + ": expected a string");
  return j.get<std::string>();
}

std::uint32_t read_distance(const json& j, const std::string& path) {
  const auto d = static_cast<std::uint32_t>(read_uint(j, path, 1, 4095));
  if (d % 2 == 0) throw ConfigError(path + ": distance must be odd");
  return d;
}

double ps_to_ns(std::uint64_t ps) { return static_cast<double>(ps) / 1000.0; }
double bps_to_gbps(std::uint64_t bps) { return static_cast<double>(bps) / 1e9; }

void read_stage(const json& j, const std::string& path, StageSpec& s) {
  check_keys(j, path, {"mean_ns", "jitter_ns"});
  if (j.contains("mean_ns")) s.mean_ps = read_ns(j["mean_ns"], join(path, "mean_ns"));
  if (j.contains("jitter_ns")) s.jitter_half_width_ps = read_ns(j["jitter_ns"], join(path, "jitter_ns"));
}

void read_link(const json& j, const std::string& path, LinkModel& l, bool with_latency) {
  if (with_latency) {
    check_keys(j, path, {"latency_ns", "jitter_ns", "line_rate_gbps", "lanes"});
    if (j.contains("latency_ns")) l.one_way_latency_ps = read_ns(j["latency_ns"], join(path, "latency_ns"));
    if (j.contains("jitter_ns")) l.jitter_half_width_ps = read_ns(j["jitter_ns"], join(path, "jitter_ns"));
  } else {
    check_keys(j, path, {"line_rate_gbps", "lanes"});
  }
  if (j.contains("line_rate_gbps")) l.line_rate_bps = read_gbps(j["line_rate_gbps"], join(path, "line_rate_gbps"));
  if (j.contains("lanes")) l.lanes = static_cast<std::uint32_t>(read_uint(j["lanes"], join(path, "lanes"), 1, 1024));
}

json stage_json(const StageSpec& s) {
  return {{"mean_ns", ps_to_ns(s.mean_ps)}, {"jitter_ns", ps_to_ns(s.jitter_half_width_ps)}};
}

json link_json(const LinkModel& l) {
  return {{"latency_ns", ps_to_ns(l.one_way_latency_ps)},
          {"jitter_ns", ps_to_ns(l.jitter_half_width_ps)},
          {"line_rate_gbps", bps_to_gbps(l.line_rate_bps)},
          {"lanes", l.lanes}};
}

void read_stages(const json& j, StageLatencyConfig& st) {
  const std::string p = "stages";
  check_keys(j, p, {"leaf_agg", "uplink", "root_agg", "decode", "root_dist", "downlink", "leaf_dist", "router"});
  if (j.contains("leaf_agg")) read_stage(j["leaf_agg"], "stages.leaf_agg", st.leaf_agg);
  if (j.contains("uplink")) read_link(j["uplink"], "stages.uplink", st.uplink, true);
  if (j.contains("root_agg")) read_stage(j["root_agg"], "stages.root_agg", st.root_agg);
  if (j.contains("root_dist")) read_stage(j["root_dist"], "stages.root_dist", st.root_dist);
  if (j.contains("downlink")) read_link(j["downlink"], "stages.downlink", st.downlink, true);
  if (j.contains("leaf_dist")) read_stage(j["leaf_dist"], "stages.leaf_dist", st.leaf_dist);
  if (j.contains("decode")) {
    const auto& d = j["decode"];
    check_keys(d, "stages.decode", {"table_ns", "jitter_ns"});
    if (d.contains("jitter_ns")) st.decode.jitter_half_width_ps = read_ns(d["jitter_ns"], "stages.decode.jitter_ns");
    if (d.contains("table_ns")) {
      const auto& t = d["table_ns"];
      check_object(t, "stages.decode.table_ns");
      if (t.empty()) throw ConfigError("stages.decode.table_ns: table is empty");
      st.decode.points_ps.clear();
      for (const auto& [key, value] : t.items()) {
        const std::string kp = "stages.decode.table_ns." + key;
        std::uint32_t d_key = 0;
        try {
          std::size_t used = 0;
          const unsigned long v = std::stoul(key, &used);
          if (used != key.size() || v > 4095) throw std::invalid_argument(key);
          d_key = static_cast<std::uint32_t>(v);
        } catch (const std::exception&) {
          throw ConfigError(kp + ": key must be an odd distance");
        }
        if (d_key == 0 || d_key % 2 == 0) throw ConfigError(kp + ": key must be an odd distance");
        st.decode.points_ps[d_key] = read_ns(value, kp);
      }
    }
  }
  if (j.contains("router")) {
    const auto& r = j["router"];
    check_keys(r, "stages.router", {"processing_ns", "network_round_trip_ns", "jitter_ns"});
    if (r.contains("processing_ns")) st.router.processing_ps = read_ns(r["processing_ns"], "stages.router.processing_ns");
    if (r.contains("network_round_trip_ns")) {
      st.router.network_round_trip_ps = read_ns(r["network_round_trip_ns"], "stages.router.network_round_trip_ns");
    }
    if (r.contains("jitter_ns")) st.router.jitter_half_width_ps = read_ns(r["jitter_ns"], "stages.router.jitter_ns");
  }
}

void read_platform(const json& j, ExperimentConfig& c) {
  check_keys(j, "platform", {"profile", "root_ports", "router_children", "qubits_per_leaf", "router_layers"});
  auto& pc = c.pipeline;
  if (j.contains("profile")) {
    c.profile = read_string(j["profile"], "platform.profile");
    PlatformProfile prof;
    try {
      prof = find_profile(c.profile);
    } catch (const UnknownProfile& e) {
      throw ConfigError(std::string("platform.profile: ") + e.what());
    }
    c.profile = prof.name;
    pc.root_ports = prof.root_ports;
    pc.router_children = prof.router_children;
    pc.qubits_per_leaf = prof.qubits_per_leaf;
  }
  if (j.contains("root_ports")) pc.root_ports = static_cast<std::uint32_t>(read_uint(j["root_ports"], "platform.root_ports", 1, 4096));
  if (j.contains("router_children")) {
    pc.router_children = static_cast<std::uint32_t>(read_uint(j["router_children"], "platform.router_children", 1, 4096));
  }
  if (j.contains("qubits_per_leaf")) {
    pc.qubits_per_leaf = static_cast<std::uint32_t>(read_uint(j["qubits_per_leaf"], "platform.qubits_per_leaf", 1, 1 << 20));
  }
  if (j.contains("router_layers")) pc.router_layers = static_cast<std::uint32_t>(read_uint(j["router_layers"], "platform.router_layers", 0, 4));
}

void read_analysis(const json& j, AnalysisConfig& a) {
  check_keys(j, "analysis", {"profile", "d_min", "d_max", "base_latency_ns", "cycle_ns", "decoder_bits", "decoder_ns",
                             "root_link", "line_rates_gbps", "margin_distance"});
  if (j.contains("profile")) {
    a.profile = read_string(j["profile"], "analysis.profile");
    try {
      a.profile = find_profile(a.profile).name;
    } catch (const UnknownProfile& e) {
      throw ConfigError(std::string("analysis.profile: ") + e.what());
    }
  }
  if (j.contains("d_min")) a.d_min = static_cast<std::uint32_t>(read_uint(j["d_min"], "analysis.d_min", 0, 4095));
  if (j.contains("d_max")) a.d_max = static_cast<std::uint32_t>(read_uint(j["d_max"], "analysis.d_max", 0, 4095));
  if (j.contains("base_latency_ns")) a.base_latency_ps = read_ns(j["base_latency_ns"], "analysis.base_latency_ns");
  if (j.contains("cycle_ns")) {
    a.cycle_ns = read_double(j["cycle_ns"], "analysis.cycle_ns", 1e-3, 1e12);
  }
  if (j.contains("decoder_bits")) a.decoder_bits = read_uint(j["decoder_bits"], "analysis.decoder_bits", 1);
  if (j.contains("decoder_ns")) a.decoder_ns = read_double(j["decoder_ns"], "analysis.decoder_ns", 1e-3, 1e12);
  if (j.contains("root_link")) read_link(j["root_link"], "analysis.root_link", a.root_link, false);
  if (j.contains("line_rates_gbps")) {
    const auto& arr = j["line_rates_gbps"];
    if (!arr.is_array()) throw ConfigError("analysis.line_rates_gbps: expected an array");
    a.line_rates_gbps.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      a.line_rates_gbps.push_back(read_double(arr[i], "analysis.line_rates_gbps[" + std::to_string(i) + "]", 1e-3, 1e4));
    }
  }
  if (j.contains("margin_distance")) a.margin_distance = read_distance(j["margin_distance"], "analysis.margin_distance");
}

}  // namespace

PipelineConfig ExperimentConfig::resolved_pipeline() const {
  PipelineConfig p = pipeline;
  if (zero_jitter) p.stages = p.stages.with_zero_jitter();
  return p;
}

PlatformProfile ExperimentConfig::analysis_profile() const {
  PlatformProfile p = find_profile(analysis.profile);
  p.router_processing_ps = pipeline.stages.router.processing_ps;
  p.router_network_ps = pipeline.stages.router.network_round_trip_ps;
  p.base_latency_ps = analysis.base_latency_ps;
  return p;
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  check_keys(doc, "", {"format_version", "distance", "rounds", "error_rate", "shots", "seed", "syndrome", "jitter_mode",
                       "zero_jitter", "platform", "stages", "sync", "ler", "analysis", "output"});
  if (doc.contains("format_version")) {
    const auto v = read_uint(doc["format_version"], "format_version");
    if (v != static_cast<std::uint64_t>(kConfigFormatVersion)) {
      throw ConfigError("format_version: unsupported version " + std::to_string(v));
    }
  }
  auto& pc = c.pipeline;
  if (doc.contains("distance")) pc.distance = read_distance(doc["distance"], "distance");
  if (doc.contains("rounds")) pc.rounds = static_cast<std::uint32_t>(read_uint(doc["rounds"], "rounds", 0, 4095));
  if (doc.contains("error_rate")) pc.error_rate = read_double(doc["error_rate"], "error_rate", 0.0, 1.0);
  if (doc.contains("shots")) c.shots = read_uint(doc["shots"], "shots", 1, std::numeric_limits<std::uint64_t>::max());
  if (doc.contains("seed")) c.seed = read_uint(doc["seed"], "seed", 0, std::numeric_limits<std::uint64_t>::max());
  if (doc.contains("syndrome")) {
    const auto s = read_string(doc["syndrome"], "syndrome");
    if (s == "sampled") pc.source = SyndromeSource::Sampled;
    else if (s == "worst_case") pc.source = SyndromeSource::WorstCaseD3;
    else throw ConfigError("syndrome: expected \"sampled\" or \"worst_case\"");
  }
  if (doc.contains("jitter_mode")) {
    const auto s = read_string(doc["jitter_mode"], "jitter_mode");
    if (s == "common") pc.jitter_mode = JitterMode::CommonPerShot;
    else if (s == "per_node") pc.jitter_mode = JitterMode::PerNode;
    else throw ConfigError("jitter_mode: expected \"common\" or \"per_node\"");
  }
  if (doc.contains("zero_jitter")) c.zero_jitter = read_bool(doc["zero_jitter"], "zero_jitter");
  if (doc.contains("platform")) read_platform(doc["platform"], c);
  if (doc.contains("stages")) read_stages(doc["stages"], pc.stages);
  if (doc.contains("sync")) {
    const auto& s = doc["sync"];
    check_keys(s, "sync", {"link_asymmetry_ns"});
    if (s.contains("link_asymmetry_ns")) pc.link_asymmetry_ps = read_ns(s["link_asymmetry_ns"], "sync.link_asymmetry_ns");
  }
  if (doc.contains("ler")) {
    const auto& l = doc["ler"];
    check_keys(l, "ler", {"distances", "shots"});
    if (l.contains("distances")) {
      const auto& arr = l["distances"];
      if (!arr.is_array()) throw ConfigError("ler.distances: expected an array");
      c.ler_distances.clear();
      for (std::size_t i = 0; i < arr.size(); ++i) {
        c.ler_distances.push_back(read_distance(arr[i], "ler.distances[" + std::to_string(i) + "]"));
      }
    }
    if (l.contains("shots")) c.ler_shots = read_uint(l["shots"], "ler.shots", 1, std::numeric_limits<std::uint64_t>::max());
  }
  if (doc.contains("analysis")) read_analysis(doc["analysis"], c.analysis);
  if (doc.contains("output")) {
    const auto& o = doc["output"];
    check_keys(o, "output", {"dir", "shot_csv"});
    if (o.contains("dir")) c.out_dir = read_string(o["dir"], "output.dir");
    if (o.contains("shot_csv")) c.shot_csv = read_bool(o["shot_csv"], "output.shot_csv");
  }
  if (pc.source == SyndromeSource::WorstCaseD3 && (pc.distance != 3 || pc.effective_rounds() != 3)) {
    throw ConfigError("syndrome: worst_case requires distance 3 and 3 rounds");
  }
  try {
    pc.stages.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("stages: ") + e.what());
  }
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) { return config_from_json(read_json_file(path)); }

json to_json(const ExperimentConfig& c) {
  const auto& pc = c.pipeline;
  const auto& st = pc.stages;
  json table = json::object();
  for (const auto& [d, ps] : st.decode.points_ps) table[std::to_string(d)] = ps_to_ns(ps);
  json rates = json::array();
  for (double r : c.analysis.line_rates_gbps) rates.push_back(r);
  return {
      {"format_version", kConfigFormatVersion},
      {"distance", pc.distance},
      {"rounds", pc.rounds},
      {"error_rate", pc.error_rate},
      {"shots", c.shots},
      {"seed", c.seed},
      {"syndrome", pc.source == SyndromeSource::Sampled ? "sampled" : "worst_case"},
      {"jitter_mode", pc.jitter_mode == JitterMode::CommonPerShot ? "common" : "per_node"},
      {"zero_jitter", c.zero_jitter},
      {"platform",
       {{"profile", c.profile},
        {"root_ports", pc.root_ports},
        {"router_children", pc.router_children},
        {"qubits_per_leaf", pc.qubits_per_leaf},
        {"router_layers", pc.router_layers}}},
      {"stages",
       {{"leaf_agg", stage_json(st.leaf_agg)},
        {"uplink", link_json(st.uplink)},
        {"root_agg", stage_json(st.root_agg)},
        {"decode", {{"table_ns", table}, {"jitter_ns", ps_to_ns(st.decode.jitter_half_width_ps)}}},
        {"root_dist", stage_json(st.root_dist)},
        {"downlink", link_json(st.downlink)},
        {"leaf_dist", stage_json(st.leaf_dist)},
        {"router",
         {{"processing_ns", ps_to_ns(st.router.processing_ps)},
          {"network_round_trip_ns", ps_to_ns(st.router.network_round_trip_ps)},
          {"jitter_ns", ps_to_ns(st.router.jitter_half_width_ps)}}}}},
      {"sync", {{"link_asymmetry_ns", ps_to_ns(pc.link_asymmetry_ps)}}},
      {"ler", {{"distances", c.ler_distances}, {"shots", c.ler_shots}}},
      {"analysis",
       {{"profile", c.analysis.profile},
        {"d_min", c.analysis.d_min},
        {"d_max", c.analysis.d_max},
        {"base_latency_ns", ps_to_ns(c.analysis.base_latency_ps)},
        {"cycle_ns", c.analysis.cycle_ns},
        {"decoder_bits", c.analysis.decoder_bits},
        {"decoder_ns", c.analysis.decoder_ns},
        {"root_link",
         {{"line_rate_gbps", bps_to_gbps(c.analysis.root_link.line_rate_bps)}, {"lanes", c.analysis.root_link.lanes}}},
        {"line_rates_gbps", rates},
        {"margin_distance", c.analysis.margin_distance}}},
  };
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<DefaultEntry> default_entries() {
  const json d = to_json(ExperimentConfig{});
  const std::vector<std::pair<std::string, std::string>> sources = {
      {"/distance", "prototype experiment, distance-3 rotated surface code"},
      {"/rounds", "one round per unit of distance"},
      {"/error_rate", "benchmark physical error rate"},
      {"/shots", "latency campaign length, 10 000 runs"},
      {"/platform/profile", "ZCU216 prototype, 4 root transceivers"},
      {"/platform/root_ports", "root transceivers on the ZCU216 root"},
      {"/platform/router_children", "VMK180 router fan-out"},
      {"/platform/qubits_per_leaf", "qubits per controller board"},
      {"/stages/leaf_agg/mean_ns", "measured leaf aggregation"},
      {"/stages/leaf_agg/jitter_ns", "measured leaf aggregation spread"},
      {"/stages/uplink/latency_ns", "measured leaf-to-root transport"},
      {"/stages/uplink/jitter_ns", "measured leaf-to-root spread"},
      {"/stages/uplink/line_rate_gbps", "transceiver line rate"},
      {"/stages/root_agg/mean_ns", "measured root aggregation"},
      {"/stages/root_agg/jitter_ns", "measured root aggregation spread"},
      {"/stages/decode/table_ns/3", "measured union-find decode, d=3"},
      {"/stages/decode/table_ns/5", "decoder latency, d=5"},
      {"/stages/decode/table_ns/7", "decoder latency, d=7"},
      {"/stages/decode/table_ns/13", "decoder latency, d=13"},
      {"/stages/root_dist/mean_ns", "measured root distribution"},
      {"/stages/root_dist/jitter_ns", "measured root distribution spread"},
      {"/stages/downlink/latency_ns", "measured root-to-leaf transport"},
      {"/stages/downlink/jitter_ns", "measured root-to-leaf spread"},
      {"/stages/leaf_dist/mean_ns", "measured leaf distribution"},
      {"/stages/leaf_dist/jitter_ns", "measured leaf distribution spread"},
      {"/stages/router/processing_ns", "router processing add-on per layer"},
      {"/stages/router/network_round_trip_ns", "router network round trip per layer"},
      {"/analysis/profile", "VCU129 root, 34 transceivers"},
      {"/analysis/base_latency_ns", "measured non-decoder latency"},
      {"/analysis/cycle_ns", "typical measurement cycle"},
      {"/analysis/decoder_bits", "syndrome bits per d=21 decode"},
      {"/analysis/decoder_ns", "average d=21 decode time"},
      {"/analysis/root_link/lanes", "root link lanes"},
      {"/analysis/line_rates_gbps", "10G and 28G transceiver rates"},
  };
  std::vector<DefaultEntry> out;
  const json flat = d.flatten();
  for (const auto& [key, value] : flat.items()) {
    std::string source = "tool default";
    for (const auto& [k, s] : sources) {
      if (key == k || key.rfind(k + "/", 0) == 0) source = s;
    }
    std::string text = value.dump();
    if (value.is_number_float() && std::trunc(value.get<double>()) == value.get<double>()) {
      text = std::to_string(static_cast<long long>(value.get<double>()));
    }
    out.push_back({key, text, source});
  }
  return out;
}

}  // namespace qecfab
