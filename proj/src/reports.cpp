#include "qecfab/reports.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qecfab/rng.hpp"

namespace qecfab {

using nlohmann::json;

namespace {

double ns(double ps) { return std::round(ps) / 1000.0; }
double round_to(double v, int decimals) {
  const double f = std::pow(10.0, decimals);
  return std::round(v * f) / f;
}

json meta_json(const ReportMeta& meta) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"command", meta.command},
          {"config_hash", meta.config_hash},
          {"seed", meta.seed}};
}

bool within(const StageStats& s) {
  const auto lo = static_cast<std::int64_t>(s.configured_mean_ps) - static_cast<std::int64_t>(s.configured_half_width_ps);
  const auto hi = static_cast<std::int64_t>(s.configured_mean_ps + s.configured_half_width_ps);
  return s.min_ps >= lo && s.max_ps <= hi;
}

json stats_json(const StageStats& s) {
  return {{"count", s.count},
          {"mean_ns", round_to(s.mean_ps / 1000.0, 3)},
          {"stddev_ns", round_to(s.stddev_ps / 1000.0, 3)},
          {"min_ns", ns(static_cast<double>(s.min_ps))},
          {"max_ns", ns(static_cast<double>(s.max_ps))},
          {"p50_ns", ns(static_cast<double>(s.p50_ps))},
          {"p90_ns", ns(static_cast<double>(s.p90_ps))},
          {"p99_ns", ns(static_cast<double>(s.p99_ps))}};
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string gbps_text(double bps) { return fixed(bps / 1e9, 3); }

}  // namespace

ReportMeta make_meta(std::string command, const ExperimentConfig& config) {
  return {std::move(command), config_hash(config), config.seed};
}

std::string csv_preamble(const ReportMeta& meta) {
  std::ostringstream os;
  os << "# " << kToolName << ' ' << kToolVersion << ' ' << meta.command << " config_hash=" << meta.config_hash
     << " seed=" << meta.seed << '\n';
  return os.str();
}

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s = buf;
  if (s == "-0" || s.rfind("-0.", 0) == 0) {
    bool zero = true;
    for (char c : s.substr(1)) zero = zero && (c == '0' || c == '.');
    if (zero) s.erase(0, 1);
  }
  return s;
}

std::string stage_stats_csv(const CampaignReport& report, const ReportMeta& meta) {
  std::ostringstream os;
  os << csv_preamble(meta);
  os << "stage,count,mean_ns,stddev_ns,min_ns,max_ns,p50_ns,p90_ns,p99_ns,configured_mean_ns,configured_jitter_ns,"
        "within_bounds\n";
  auto row = [&](const StageStats& s, bool ok) {
    os << s.name << ',' << s.count << ',' << fixed(s.mean_ps / 1000.0, 3) << ',' << fixed(s.stddev_ps / 1000.0, 3)
       << ',' << fixed(s.min_ps / 1000.0, 3) << ',' << fixed(s.max_ps / 1000.0, 3) << ','
       << fixed(s.p50_ps / 1000.0, 3) << ',' << fixed(s.p90_ps / 1000.0, 3) << ',' << fixed(s.p99_ps / 1000.0, 3)
       << ',' << fixed(s.configured_mean_ps / 1000.0, 3) << ',' << fixed(s.configured_half_width_ps / 1000.0, 3)
       << ',' << bool_text(ok) << '\n';
  };
  StageStats total = report.end_to_end;
  total.configured_mean_ps = 0;
  total.configured_half_width_ps = 0;
  for (const auto& s : report.stages) {
    row(s, within(s));
    total.configured_mean_ps += s.configured_mean_ps;
    total.configured_half_width_ps += s.configured_half_width_ps;
  }
  row(total, within(total));
  return os.str();
}

std::string histogram_csv(const CampaignReport& report, const ReportMeta& meta) {
  std::ostringstream os;
  os << csv_preamble(meta) << "end_to_end_ns,count\n";
  for (const auto& [bin, count] : report.histogram_ns) os << bin << ',' << count << '\n';
  return os.str();
}

std::string shots_csv(const CampaignReport& report, const ReportMeta& meta) {
  std::ostringstream os;
  os << csv_preamble(meta) << "shot";
  const std::size_t n = report.has_router ? kStageCount : 7;
  for (std::size_t i = 0; i < n; ++i) os << ',' << stage_name(kAllStages[i]) << "_ps";
  os << ",end_to_end_ps,valid,logical_failure,feedback_matches\n";
  for (const auto& r : report.reports) {
    os << r.shot;
    for (std::size_t i = 0; i < n; ++i) os << ',' << r.interval_ps[i];
    os << ',' << r.end_to_end_ps << ',' << bool_text(r.valid) << ',' << bool_text(r.logical_failure) << ','
       << bool_text(r.feedback_matches) << '\n';
  }
  return os.str();
}

json latency_summary(const CampaignReport& report, const ExperimentConfig& config, const ReportMeta& meta) {
  const PipelineConfig pc = config.resolved_pipeline();
  json stages = json::array();
  double mean_sum = 0;
  std::uint64_t configured_sum = 0;
  for (const auto& s : report.stages) {
    json j = stats_json(s);
    j["name"] = s.name;
    j["configured_mean_ns"] = s.configured_mean_ps / 1000.0;
    j["configured_jitter_ns"] = s.configured_half_width_ps / 1000.0;
    j["within_bounds"] = within(s);
    stages.push_back(std::move(j));
    mean_sum += s.mean_ps;
    configured_sum += s.configured_mean_ps;
  }
  Pipeline probe(pc);
  json out = meta_json(meta);
  out["distance"] = pc.distance;
  out["rounds"] = pc.effective_rounds();
  out["shots"] = report.shots;
  out["leaves"] = probe.leaf_map().leaf_count;
  out["router_layers"] = pc.router_layers;
  out["jitter_mode"] = pc.jitter_mode == JitterMode::CommonPerShot ? "common" : "per_node";
  out["zero_jitter"] = config.zero_jitter;
  out["end_to_end_ns"] = stats_json(report.end_to_end);
  out["stage_mean_sum_ns"] = round_to(mean_sum / 1000.0, 3);
  out["configured_stage_sum_ns"] = configured_sum / 1000.0;
  out["stages"] = std::move(stages);
  out["decode_latency_estimate"] = report.decode_latency_estimate;
  out["logical_failures"] = {{"count", report.logical_failures.successes},
                             {"rate", report.logical_failures.rate},
                             {"ci_low", report.logical_failures.lower},
                             {"ci_high", report.logical_failures.upper}};
  out["all_corrections_valid"] = report.all_valid;
  out["all_feedback_delivered"] = report.all_feedback_matches;
  out["clock_sync_max_residual_ps"] = probe.sync_report().max_abs_residual_ps;
  return out;
}

std::vector<LerRow> run_ler_table(const ExperimentConfig& config, unsigned jobs) {
  std::vector<LerRow> rows;
  for (std::uint32_t d : config.ler_distances) {
    LerRow r;
    r.distance = d;
    r.rounds = config.pipeline.rounds ? config.pipeline.rounds : d;
    r.error_rate = config.pipeline.error_rate;
    r.estimate = estimate_ler(d, r.rounds, r.error_rate, config.ler_shots, stream_key(config.seed, {d}), jobs);
    rows.push_back(r);
  }
  return rows;
}

std::string ler_csv(const std::vector<LerRow>& rows, const ReportMeta& meta) {
  std::ostringstream os;
  os << csv_preamble(meta) << "distance,rounds,p,shots,failures,ler,ci_low,ci_high\n";
  char buf[64];
  auto sci = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    os << r.distance << ',' << r.rounds << ',' << sci(r.error_rate) << ',' << r.estimate.trials << ','
       << r.estimate.successes << ',' << sci(r.estimate.rate) << ',' << sci(r.estimate.lower) << ','
       << sci(r.estimate.upper) << '\n';
  }
  return os.str();
}

json ler_json(const std::vector<LerRow>& rows, const ReportMeta& meta) {
  json out = meta_json(meta);
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"distance", r.distance},
                   {"rounds", r.rounds},
                   {"p", r.error_rate},
                   {"shots", r.estimate.trials},
                   {"failures", r.estimate.successes},
                   {"ler", r.estimate.rate},
                   {"ci_low", r.estimate.lower},
                   {"ci_high", r.estimate.upper}});
  }
  out["rows"] = std::move(arr);
  return out;
}

std::vector<std::uint32_t> distance_range(std::uint32_t d_min, std::uint32_t d_max) {
  std::vector<std::uint32_t> out;
  std::uint32_t d = std::max<std::uint32_t>(d_min, 1);
  if (d % 2 == 0) ++d;
  for (; d <= d_max; d += 2) out.push_back(d);
  return out;
}

std::vector<CapacityEstimate> capacity_table(const ExperimentConfig& config) {
  const PlatformProfile prof = config.analysis_profile();
  const double peak = decoder_peak_bps(config.analysis.decoder_bits, config.analysis.decoder_ns);
  std::vector<CapacityEstimate> rows;
  for (std::uint32_t d : distance_range(config.analysis.d_min, config.analysis.d_max)) {
    rows.push_back(capacity_estimate(d, prof, config.pipeline.stages.decode, config.analysis.root_link, peak,
                                     config.analysis.cycle_ns));
  }
  return rows;
}

std::string capacity_csv(const std::vector<CapacityEstimate>& rows, const ReportMeta& meta) {
  std::ostringstream os;
  os << csv_preamble(meta)
     << "distance,required_qubits,leaves_needed,router_layers,max_qubits,predicted_latency_ns,"
        "throughput_required_gbps,throughput_available_gbps,feasible\n";
  for (const auto& r : rows) {
    os << r.distance << ',' << r.required_qubits << ',' << r.leaves_needed << ',' << r.router_layers << ','
       << r.max_qubits << ',' << fixed(r.predicted_latency_ps / 1000.0, 3) << ','
       << gbps_text(r.throughput_required_bps) << ',' << gbps_text(r.throughput_available_bps) << ','
       << bool_text(r.feasible) << '\n';
  }
  return os.str();
}

json capacity_json(const std::vector<CapacityEstimate>& rows, const ExperimentConfig& config, const ReportMeta& meta) {
  json out = meta_json(meta);
  out["profile"] = config.analysis.profile;
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"distance", r.distance},
                   {"required_qubits", r.required_qubits},
                   {"leaves_needed", r.leaves_needed},
                   {"router_layers", r.router_layers},
                   {"max_qubits", r.max_qubits},
                   {"predicted_latency_ns", r.predicted_latency_ps / 1000.0},
                   {"throughput_required_bps", r.throughput_required_bps},
                   {"throughput_available_bps", r.throughput_available_bps},
                   {"feasible", r.feasible}});
  }
  out["rows"] = std::move(arr);
  return out;
}

ThroughputReport throughput_report(const ExperimentConfig& config) {
  ThroughputReport t;
  const auto& a = config.analysis;
  for (double rate : a.line_rates_gbps) {
    LinkModel l = a.root_link;
    l.line_rate_bps = static_cast<std::uint64_t>(std::llround(rate * 1e9));
    t.links.push_back({l.lanes, rate, effective_throughput(l)});
  }
  t.decoder_peak_bps = decoder_peak_bps(a.decoder_bits, a.decoder_ns);
  t.margin = throughput_margin(a.margin_distance, a.root_link, t.decoder_peak_bps, a.cycle_ns);
  return t;
}

std::string throughput_csv(const ThroughputReport& t, const ReportMeta& meta) {
  std::ostringstream os;
  os << csv_preamble(meta) << "item,lanes,line_rate_gbps,value_gbps\n";
  for (const auto& l : t.links) {
    os << "link_effective," << l.lanes << ',' << fixed(l.line_rate_gbps, 3) << ',' << l.effective.format_gbps(3)
       << '\n';
  }
  const auto& m = t.margin;
  const std::string d = std::to_string(m.distance);
  os << "decoder_peak,,," << gbps_text(t.decoder_peak_bps) << '\n';
  os << "network_available_d" << d << ",,," << gbps_text(m.network_bps) << '\n';
  os << "required_d" << d << ",,," << gbps_text(m.required_bps) << '\n';
  os << "available_d" << d << ",,," << gbps_text(m.available_bps) << '\n';
  os << "margin_ratio_d" << d << ",,," << fixed(m.ratio, 3) << '\n';
  return os.str();
}

json throughput_json(const ThroughputReport& t, const ReportMeta& meta) {
  json out = meta_json(meta);
  json links = json::array();
  for (const auto& l : t.links) {
    links.push_back({{"lanes", l.lanes},
                     {"line_rate_gbps", l.line_rate_gbps},
                     {"effective_gbps", l.effective.format_gbps(3)},
                     {"effective_bps_numerator", l.effective.numerator},
                     {"effective_bps_denominator", l.effective.denominator}});
  }
  out["links"] = std::move(links);
  out["decoder_peak_bps"] = t.decoder_peak_bps;
  out["margin"] = {{"distance", t.margin.distance},
                   {"required_bps", t.margin.required_bps},
                   {"network_bps", t.margin.network_bps},
                   {"decoder_bps", t.margin.decoder_bps},
                   {"available_bps", t.margin.available_bps},
                   {"decoder_limited", t.margin.decoder_limited},
                   {"ratio", t.margin.ratio}};
  return out;
}

std::vector<ExtrapolationRow> extrapolation_table(const ExperimentConfig& config) {
  const PlatformProfile prof = config.analysis_profile();
  const auto& a = config.analysis;
  const double peak = decoder_peak_bps(a.decoder_bits, a.decoder_ns);
  std::vector<ExtrapolationRow> rows;
  for (std::uint32_t d : distance_range(a.d_min, a.d_max)) {
    ExtrapolationRow r;
    r.latency = estimate_latency(d, prof, config.pipeline.stages.decode);
    r.required_qubits = required_qubits(d);
    r.max_qubits = max_qubits(prof, r.latency.router_layers);
    r.margin_ratio = throughput_margin(d, a.root_link, peak, a.cycle_ns).ratio;
    rows.push_back(r);
  }
  return rows;
}

std::string extrapolation_csv(const std::vector<ExtrapolationRow>& rows, const ExperimentConfig& config,
                              const ReportMeta& meta) {
  const double stage_sum = non_decoder_stage_sum_ps(config.pipeline.stages) / 1000.0;
  std::ostringstream os;
  os << csv_preamble(meta)
     << "distance,qubits,router_layers,max_qubits,base_ns,stage_sum_ns,decode_ns,decode_estimate,router_ns,"
        "predicted_ns,under_1us,margin_ratio\n";
  for (const auto& r : rows) {
    const auto& l = r.latency;
    os << l.distance << ',' << r.required_qubits << ',' << l.router_layers << ',' << r.max_qubits << ','
       << fixed(l.base_ps / 1000.0, 3) << ',' << fixed(stage_sum, 3) << ',' << fixed(l.decode_ps / 1000.0, 3) << ','
       << bool_text(l.decode_estimate) << ',' << fixed(l.router_ps / 1000.0, 3) << ','
       << fixed(l.total_ps / 1000.0, 3) << ',' << bool_text(l.total_ps < 1'000'000) << ','
       << fixed(r.margin_ratio, 3) << '\n';
  }
  return os.str();
}

json extrapolation_json(const std::vector<ExtrapolationRow>& rows, const ExperimentConfig& config,
                        const ReportMeta& meta) {
  json out = meta_json(meta);
  out["profile"] = config.analysis.profile;
  out["stage_sum_ns"] = non_decoder_stage_sum_ps(config.pipeline.stages) / 1000.0;
  json arr = json::array();
  for (const auto& r : rows) {
    const auto& l = r.latency;
    arr.push_back({{"distance", l.distance},
                   {"qubits", r.required_qubits},
                   {"router_layers", l.router_layers},
                   {"max_qubits", r.max_qubits},
                   {"base_ns", l.base_ps / 1000.0},
                   {"decode_ns", l.decode_ps / 1000.0},
                   {"decode_estimate", l.decode_estimate},
                   {"router_ns", l.router_ps / 1000.0},
                   {"predicted_ns", l.total_ps / 1000.0},
                   {"under_1us", l.total_ps < 1'000'000},
                   {"margin_ratio", r.margin_ratio}});
  }
  out["rows"] = std::move(arr);
  return out;
}

std::filesystem::path write_text(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
  return path;
}

}  // namespace qecfab
