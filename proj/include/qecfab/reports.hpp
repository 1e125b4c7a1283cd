#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qecfab/capacity_model.hpp"
#include "qecfab/experiment.hpp"
#include "qecfab/qec_pipeline.hpp"

namespace qecfab {

// Identification embedded in every report. Equal (config hash, seed,
// version) means byte-identical output.
struct ReportMeta {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
};

ReportMeta make_meta(std::string command, const ExperimentConfig& config);

// "# qecfab <version> <command> config_hash=<hash> seed=<seed>"
std::string csv_preamble(const ReportMeta& meta);

// Fixed-point decimal text, independent of locale.
std::string fixed(double value, int decimals);

// latency
// stage,count,mean_ns,stddev_ns,min_ns,max_ns,p50_ns,p90_ns,p99_ns,
// configured_mean_ns,configured_jitter_ns,within_bounds
std::string stage_stats_csv(const CampaignReport& report, const ReportMeta& meta);
// end_to_end_ns,count
std::string histogram_csv(const CampaignReport& report, const ReportMeta& meta);
// shot,<stage>_ps...,end_to_end_ps,valid,logical_failure,feedback_matches
std::string shots_csv(const CampaignReport& report, const ReportMeta& meta);
nlohmann::json latency_summary(const CampaignReport& report, const ExperimentConfig& config,
                               const ReportMeta& meta);

// ler
struct LerRow {
  std::uint32_t distance = 0;
  std::uint32_t rounds = 0;
  double error_rate = 0;
  ProportionEstimate estimate;
};
std::vector<LerRow> run_ler_table(const ExperimentConfig& config, unsigned jobs);
// distance,rounds,p,shots,failures,ler,ci_low,ci_high
std::string ler_csv(const std::vector<LerRow>& rows, const ReportMeta& meta);
nlohmann::json ler_json(const std::vector<LerRow>& rows, const ReportMeta& meta);

// Odd distances in [d_min, d_max]; empty when the range is empty.
std::vector<std::uint32_t> distance_range(std::uint32_t d_min, std::uint32_t d_max);

// capacity
std::vector<CapacityEstimate> capacity_table(const ExperimentConfig& config);
// distance,required_qubits,leaves_needed,router_layers,max_qubits,
// predicted_latency_ns,throughput_required_gbps,throughput_available_gbps,feasible
std::string capacity_csv(const std::vector<CapacityEstimate>& rows, const ReportMeta& meta);
nlohmann::json capacity_json(const std::vector<CapacityEstimate>& rows, const ExperimentConfig& config,
                             const ReportMeta& meta);

// throughput
struct LinkRow {
  std::uint32_t lanes = 0;
  double line_rate_gbps = 0;
  BitRate effective;
};
struct ThroughputReport {
  std::vector<LinkRow> links;
  double decoder_peak_bps = 0;
  ThroughputMargin margin;
};
ThroughputReport throughput_report(const ExperimentConfig& config);
// item,lanes,line_rate_gbps,value_gbps
std::string throughput_csv(const ThroughputReport& report, const ReportMeta& meta);
nlohmann::json throughput_json(const ThroughputReport& report, const ReportMeta& meta);

// extrapolate
struct ExtrapolationRow {
  LatencyEstimate latency;
  std::uint64_t required_qubits = 0;
  std::uint64_t max_qubits = 0;
  double margin_ratio = 0;
};
std::vector<ExtrapolationRow> extrapolation_table(const ExperimentConfig& config);
// distance,qubits,router_layers,max_qubits,base_ns,stage_sum_ns,decode_ns,
// decode_estimate,router_ns,predicted_ns,under_1us,margin_ratio
std::string extrapolation_csv(const std::vector<ExtrapolationRow>& rows, const ExperimentConfig& config,
                              const ReportMeta& meta);
nlohmann::json extrapolation_json(const std::vector<ExtrapolationRow>& rows, const ExperimentConfig& config,
                                  const ReportMeta& meta);

// Writes `text` to dir/name, creating dir. Returns the path written.
std::filesystem::path write_text(const std::filesystem::path& dir, const std::string& name,
                                 const std::string& text);

}  // namespace qecfab
