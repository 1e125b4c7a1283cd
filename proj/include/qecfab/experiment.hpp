#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qecfab/capacity_model.hpp"
#include "qecfab/qec_pipeline.hpp"

namespace qecfab {

inline constexpr std::string_view kToolName = "qecfab";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kConfigFormatVersion = 1;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AnalysisConfig {
  std::string profile = "vcu129";
  std::uint32_t d_min = 3;
  std::uint32_t d_max = 21;
  std::uint64_t base_latency_ps = 390'000;
  double cycle_ns = 1000.0;
  std::uint64_t decoder_bits = 440;
  double decoder_ns = 11.5;
  LinkModel root_link{10'000'000'000ULL, 4, 156'000, 0};
  std::vector<double> line_rates_gbps{10.0, 28.0};
  std::uint32_t margin_distance = 21;
};

struct ExperimentConfig {
  PipelineConfig pipeline;
  std::string profile = "zcu216";
  bool zero_jitter = false;
  std::uint64_t shots = 10'000;
  std::uint64_t seed = 1;
  std::vector<std::uint32_t> ler_distances{3, 5};
  std::uint64_t ler_shots = 100'000;
  AnalysisConfig analysis;
  // Not part of the hash.
  std::filesystem::path out_dir = "qecfab-out";
  bool shot_csv = false;

  // Pipeline config with zero_jitter applied.
  PipelineConfig resolved_pipeline() const;
  // Analysis profile with the configured router add-ons and base latency.
  PlatformProfile analysis_profile() const;
};

// Parses a config document on top of the defaults. Unknown keys, wrong types
// and out-of-range values throw ConfigError naming the offending key.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

// Full resolved config in canonical form, without output settings.
nlohmann::json to_json(const ExperimentConfig& config);

// FNV-1a 64 of the canonical dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

struct DefaultEntry {
  std::string key;
  std::string value;
  std::string source;
};
std::vector<DefaultEntry> default_entries();

}  // namespace qecfab
