// qecfab: command-line front end for latency and LER campaigns and the
// capacity, throughput and extrapolation tables.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qecfab/capacity_model.hpp"
#include "qecfab/experiment.hpp"
#include "qecfab/reports.hpp"
#include "qecfab/rng.hpp"
#include "qecfab/uf_decoder.hpp"

namespace {

using nlohmann::json;
using namespace qecfab;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCapacity = 3;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  unsigned jobs = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "RNG seed");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--jobs", c.jobs, "worker threads (1 = sequential reference path)")->check(CLI::Range(1u, 1024u));
}

// Command-line values are applied as a patch on the config document, so the
// same schema checks cover both sources.
ExperimentConfig resolve(const Common& c, json patch) {
  json doc = c.config_path.empty() ? json::object() : read_json_file(c.config_path);
  if (!doc.is_object()) throw ConfigError("config: expected an object");
  if (c.seed) patch["seed"] = *c.seed;
  doc.merge_patch(patch);
  ExperimentConfig cfg = config_from_json(doc);
  if (c.out) cfg.out_dir = *c.out;
  return cfg;
}

void report_written(const std::filesystem::path& p) { std::cerr << "wrote " << p.string() << '\n'; }

int cmd_latency(const ExperimentConfig& cfg, unsigned jobs, const std::string& trace_path) {
  const PipelineConfig pc = cfg.resolved_pipeline();
  const ReportMeta meta = make_meta("latency", cfg);
  const CampaignReport report = run_campaign(pc, cfg.shots, cfg.seed, jobs);
  report_written(write_text(cfg.out_dir, "latency_stages.csv", stage_stats_csv(report, meta)));
  report_written(write_text(cfg.out_dir, "latency_histogram.csv", histogram_csv(report, meta)));
  report_written(write_text(cfg.out_dir, "latency_summary.json", latency_summary(report, cfg, meta).dump(2) + "\n"));
  if (cfg.shot_csv) report_written(write_text(cfg.out_dir, "latency_shots.csv", shots_csv(report, meta)));
  if (!trace_path.empty()) {
    std::ofstream trace(trace_path);
    if (!trace) throw std::runtime_error("cannot write " + trace_path);
    Pipeline p(pc);
    p.run_shot(0, cfg.seed, &trace);
    report_written(trace_path);
  }
  const auto& e = report.end_to_end;
  std::cout << "distance " << pc.distance << ", " << report.shots << " shots, config " << meta.config_hash << "\n";
  std::cout << "end-to-end mean " << fixed(e.mean_ps / 1000.0, 3) << " ns, stddev " << fixed(e.stddev_ps / 1000.0, 3)
            << " ns, min " << fixed(e.min_ps / 1000.0, 3) << " ns, max " << fixed(e.max_ps / 1000.0, 3) << " ns\n";
  for (const auto& s : report.stages) {
    std::cout << "  " << s.name << " mean " << fixed(s.mean_ps / 1000.0, 3) << " ns [" << fixed(s.min_ps / 1000.0, 3)
              << ", " << fixed(s.max_ps / 1000.0, 3) << "]\n";
  }
  std::cout << "logical failures " << report.logical_failures.successes << ", corrections valid "
            << (report.all_valid ? "yes" : "no") << "\n";
  return report.all_valid && report.all_feedback_matches ? kExitOk : kExitFailure;
}

int cmd_ler(const ExperimentConfig& cfg, unsigned jobs) {
  const ReportMeta meta = make_meta("ler", cfg);
  const auto rows = run_ler_table(cfg, jobs);
  const std::string csv = ler_csv(rows, meta);
  report_written(write_text(cfg.out_dir, "ler.csv", csv));
  report_written(write_text(cfg.out_dir, "ler.json", ler_json(rows, meta).dump(2) + "\n"));
  std::cout << csv;
  return kExitOk;
}

int cmd_capacity(const ExperimentConfig& cfg) {
  const ReportMeta meta = make_meta("capacity", cfg);
  const auto rows = capacity_table(cfg);
  const std::string csv = capacity_csv(rows, meta);
  report_written(write_text(cfg.out_dir, "capacity.csv", csv));
  report_written(write_text(cfg.out_dir, "capacity.json", capacity_json(rows, cfg, meta).dump(2) + "\n"));
  std::cout << csv;
  return kExitOk;
}

int cmd_throughput(const ExperimentConfig& cfg) {
  const ReportMeta meta = make_meta("throughput", cfg);
  const auto t = throughput_report(cfg);
  const std::string csv = throughput_csv(t, meta);
  report_written(write_text(cfg.out_dir, "throughput.csv", csv));
  report_written(write_text(cfg.out_dir, "throughput.json", throughput_json(t, meta).dump(2) + "\n"));
  std::cout << csv;
  return kExitOk;
}

int cmd_extrapolate(const ExperimentConfig& cfg) {
  const ReportMeta meta = make_meta("extrapolate", cfg);
  const auto rows = extrapolation_table(cfg);
  const std::string csv = extrapolation_csv(rows, cfg, meta);
  report_written(write_text(cfg.out_dir, "extrapolate.csv", csv));
  report_written(write_text(cfg.out_dir, "extrapolate.json", extrapolation_json(rows, cfg, meta).dump(2) + "\n"));
  std::cout << csv;
  return kExitOk;
}

int cmd_selftest(unsigned jobs) {
  int failed = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
    failed += ok ? 0 : 1;
  };

  PipelineConfig zj;
  zj.stages = zj.stages.with_zero_jitter();
  const CampaignReport r = run_campaign(zj, 16, 1, jobs);
  check("zero-jitter d=3 end-to-end is 451000 ps",
        r.end_to_end.min_ps == 451'000 && r.end_to_end.max_ps == 451'000 && r.all_valid);

  LinkModel l4{10'000'000'000ULL, 4, 156'000, 0};
  check("4x10G effective throughput 38.788 Gb/s", effective_throughput(l4).format_gbps(3) == "38.788");
  l4.line_rate_bps = 28'000'000'000ULL;
  check("4x28G effective throughput 108.6 Gb/s", effective_throughput(l4).format_gbps(1) == "108.6");
  check("decoder peak 38.26 Gb/s", fixed(decoder_peak_bps(440, 11.5) / 1e9, 2) == "38.26");

  const PlatformProfile v = vcu129_profile();
  check("capacity identities", required_qubits(17) == 577 && required_qubits(21) == 881 &&
                                   max_qubits(v, 0) == 476 && max_qubits(zcu216_profile(), 0) == 56);
  const StageLatencyConfig st;
  const auto e15 = estimate_latency(15, v, st.decode);
  const auto e17 = estimate_latency(17, v, st.decode);
  check("router step d=15 to d=17 is 357 ns", e17.total_ps - e15.total_ps == 357'000 && e17.router_layers == 1);
  check("d=3 predicted latency 446 ns", estimate_latency(3, v, st.decode).total_ps == 446'000);

  const CodeLayout layout = build_layout(3);
  bool weight_one = true;
  for (Sector s : {Sector::X, Sector::Z}) {
    const DecodingGraph g = build_decoding_graph(layout, s, 3);
    UnionFindDecoder dec(g);
    for (FaultId f = 0; f < g.edge_count(); ++f) {
      const ErrorPattern p = make_pattern(s, {f});
      const Correction c = dec.decode(syndrome_of(p, g));
      weight_one = weight_one && !is_logical_failure(p, c, g, layout);
    }
  }
  check("every d=3 weight-1 error is corrected", weight_one);

  PipelineConfig offs;
  CounterRng rng(99, {0});
  for (int i = 0; i < 8; ++i) offs.initial_offsets_ps.push_back(rng.uniform_int(-1'000'000, 1'000'000));
  Pipeline p(offs);
  check("clock sync leaves zero residual", p.sync_report().max_abs_residual_ps == 0);

  std::cout << (failed == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failed == 0 ? kExitOk : kExitFailure;
}

void show_defaults() {
  std::cout << "# qecfab " << kToolVersion << " defaults (config format " << kConfigFormatVersion << ")\n";
  for (const auto& e : default_entries()) std::cout << e.key << " = " << e.value << "    # " << e.source << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QEC decoding-feedback fabric emulator"};
  app.set_version_flag("--version", std::string(kToolVersion));
  bool defaults = false;
  app.add_flag("--show-defaults", defaults, "print every config default with its source");
  app.require_subcommand(0, 1);

  Common common;
  json patch = json::object();

  // latency
  auto* lat = app.add_subcommand("latency", "latency campaign: per-stage stats, histogram, summary");
  add_common(lat, common);
  std::optional<std::uint64_t> shots;
  std::optional<std::uint32_t> distance, rounds, router_layers;
  std::optional<double> p;
  std::optional<std::string> profile, jitter_mode;
  bool zero_jitter = false, worst_case = false, shot_csv = false;
  std::string trace_path;
  lat->add_option("--shots", shots, "number of shots");
  lat->add_option("--distance", distance, "code distance");
  lat->add_option("--rounds", rounds, "syndrome rounds (0 = distance)");
  lat->add_option("--p", p, "physical error rate");
  lat->add_option("--profile", profile, "platform profile (zcu216, vcu129)");
  lat->add_option("--router-layers", router_layers, "router layers between root and leaves");
  lat->add_option("--jitter-mode", jitter_mode, "common or per_node");
  lat->add_flag("--zero-jitter", zero_jitter, "set every jitter half-width to zero");
  lat->add_flag("--worst-case", worst_case, "replay the worst-case d=3 syndrome every shot");
  lat->add_flag("--shot-csv", shot_csv, "also write per-shot intervals");
  lat->add_option("--trace", trace_path, "write the event trace of shot 0 to this file");

  // ler
  auto* ler = app.add_subcommand("ler", "logical error rate with 95% CI per distance");
  add_common(ler, common);
  std::vector<std::uint32_t> distances;
  std::optional<std::uint64_t> ler_shots;
  std::optional<double> ler_p;
  std::optional<std::uint32_t> ler_rounds;
  ler->add_option("--distances,--distance", distances, "distances to sweep");
  ler->add_option("--shots", ler_shots, "shots per distance");
  ler->add_option("--p", ler_p, "physical error rate");
  ler->add_option("--rounds", ler_rounds, "syndrome rounds (0 = distance)");

  // capacity, extrapolate
  std::optional<std::string> a_profile;
  std::optional<std::uint32_t> d_min, d_max;
  auto* cap = app.add_subcommand("capacity", "qubit capacity and feasibility table");
  auto* ext = app.add_subcommand("extrapolate", "predicted latency by distance");
  for (auto* cmd : {cap, ext}) {
    add_common(cmd, common);
    cmd->add_option("--profile", a_profile, "platform profile (zcu216, vcu129)");
    cmd->add_option("--d-min", d_min, "smallest distance");
    cmd->add_option("--d-max", d_max, "largest distance");
  }

  // throughput
  auto* thr = app.add_subcommand("throughput", "link and decoder throughput margin");
  add_common(thr, common);
  std::optional<std::uint32_t> margin_d, lanes;
  std::vector<double> line_rates;
  thr->add_option("--distance", margin_d, "distance for the margin row");
  thr->add_option("--lanes", lanes, "root link lanes");
  thr->add_option("--line-rates", line_rates, "per-lane line rates in Gb/s");

  auto* self = app.add_subcommand("selftest", "quick built-in checks");
  unsigned self_jobs = 1;
  self->add_option("--jobs", self_jobs, "worker threads")->check(CLI::Range(1u, 1024u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (defaults) {
    show_defaults();
    return kExitOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kExitConfig;
  }

  try {
    if (lat->parsed()) {
      if (shots) patch["shots"] = *shots;
      if (distance) patch["distance"] = *distance;
      if (rounds) patch["rounds"] = *rounds;
      if (p) patch["error_rate"] = *p;
      if (profile) patch["platform"]["profile"] = *profile;
      if (router_layers) patch["platform"]["router_layers"] = *router_layers;
      if (jitter_mode) patch["jitter_mode"] = *jitter_mode;
      if (zero_jitter) patch["zero_jitter"] = true;
      if (worst_case) patch["syndrome"] = "worst_case";
      if (shot_csv) patch["output"]["shot_csv"] = true;
      return cmd_latency(resolve(common, patch), common.jobs, trace_path);
    }
    if (ler->parsed()) {
      if (!distances.empty()) patch["ler"]["distances"] = distances;
      if (ler_shots) patch["ler"]["shots"] = *ler_shots;
      if (ler_p) patch["error_rate"] = *ler_p;
      if (ler_rounds) patch["rounds"] = *ler_rounds;
      return cmd_ler(resolve(common, patch), common.jobs);
    }
    if (cap->parsed() || ext->parsed()) {
      if (a_profile) patch["analysis"]["profile"] = *a_profile;
      if (d_min) patch["analysis"]["d_min"] = *d_min;
      if (d_max) patch["analysis"]["d_max"] = *d_max;
      const ExperimentConfig cfg = resolve(common, patch);
      return cap->parsed() ? cmd_capacity(cfg) : cmd_extrapolate(cfg);
    }
    if (thr->parsed()) {
      if (margin_d) patch["analysis"]["margin_distance"] = *margin_d;
      if (lanes) patch["analysis"]["root_link"]["lanes"] = *lanes;
      if (!line_rates.empty()) patch["analysis"]["line_rates_gbps"] = line_rates;
      return cmd_throughput(resolve(common, patch));
    }
    if (self->parsed()) return cmd_selftest(self_jobs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
