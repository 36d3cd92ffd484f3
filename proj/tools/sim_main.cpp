// Command-line front end: single runs, parameter sweeps, synthetic trace
// generation, and two-device fairness experiments.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "conmlo/config.hpp"
#include "conmlo/engine.hpp"
#include "conmlo/metrics.hpp"
#include "conmlo/rng.hpp"

namespace fs = std::filesystem;
using namespace conmlo;

namespace {

struct GlobalOpts {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int threads = 1;
  std::optional<std::string> collision_mode;
  bool bo_exclusive = false;
  std::optional<std::string> run_statistic;
};

void apply_overrides(AppConfig& cfg, const GlobalOpts& g) {
  if (g.seed) cfg.seeds = {*g.seed};
  if (g.out) cfg.out_dir = *g.out;
  if (g.collision_mode) {
    cfg.scenario.collision_mode = *g.collision_mode == "abort"
                                      ? CollisionMode::kAbort
                                      : CollisionMode::kPermissive;
  }
  if (g.bo_exclusive)
    for (auto& d : cfg.scenario.devices) d.timing.bo_exclusive = true;
  if (g.run_statistic)
    cfg.run_statistic = *g.run_statistic == "all" ? RunStatistic::kPooled
                                                  : RunStatistic::kMaxPerTrace;
}

// Per-seed scenario: the trace stream is decoupled from the device streams
// so every seed sees a fresh synthetic environment.
Scenario seeded_scenario(const Scenario& base, std::uint64_t seed,
                         std::string_view trace_tag) {
  Scenario s = base;
  s.seed = seed;
  if (auto* p = std::get_if<SynthParams>(&s.trace))
    p->seed ^= derive_stream(seed, trace_tag);
  return s;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void print_run_summary(const Scenario& s, std::uint64_t seed,
                       const RunLog& log) {
  for (std::size_t d = 0; d < s.devices.size(); ++d) {
    RunMetrics m = compute_metrics(log, static_cast<int>(d),
                                   log.duration_slots,
                                   s.devices[d].timing.txop_slots, log.slot_us);
    std::int64_t max_run = 0;
    for (auto r : m.continuity_runs) max_run = std::max(max_run, r);
    std::printf(
        "run seed=%llu device=%s mode=%s L=%zu airtime=%.4f n_tx=%lld "
        "max_run=%lld collisions=%lld\n",
        static_cast<unsigned long long>(seed), s.devices[d].id.c_str(),
        mode_name(s.devices[d].mode).c_str(), s.devices[d].links.size(),
        m.airtime, static_cast<long long>(m.n_tx),
        static_cast<long long>(max_run), static_cast<long long>(m.collisions));
  }
}

int cmd_run(const std::string& config_path, const GlobalOpts& g) {
  AppConfig cfg = load_config(config_path);
  apply_overrides(cfg, g);

  // one metric list per device, filled across seeds
  std::vector<std::vector<RunMetrics>> per_device(cfg.scenario.devices.size());
  for (std::uint64_t seed : cfg.seeds) {
    Scenario s = seeded_scenario(cfg.scenario, seed, "trace");
    RunLog log = run(s);
    write_file(fs::path(cfg.out_dir) / ("seed" + std::to_string(seed)) /
                   "runlog.jsonl",
               runlog_to_jsonl(log, s));
    for (std::size_t d = 0; d < s.devices.size(); ++d)
      per_device[d].push_back(
          compute_metrics(log, static_cast<int>(d), log.duration_slots,
                          s.devices[d].timing.txop_slots, log.slot_us));
    print_run_summary(s, seed, log);
  }

  std::string airtime = airtime_csv_header();
  std::string cdf = nca_cdf_csv_header();
  std::string holds = holds_csv_header();
  for (std::size_t d = 0; d < cfg.scenario.devices.size(); ++d) {
    const auto& dev = cfg.scenario.devices[d];
    CellKey key{cfg.scenario.regime_label, static_cast<int>(dev.links.size()),
                mode_name(dev.mode)};
    AggregateReport rep = aggregate(per_device[d], key, cfg.run_statistic);
    append_airtime_rows(airtime, rep);
    append_nca_cdf_rows(cdf, rep);
    append_holds_rows(holds, rep);
  }
  write_file(fs::path(cfg.out_dir) / "airtime.csv", airtime);
  write_file(fs::path(cfg.out_dir) / "nca_cdf.csv", cdf);
  write_file(fs::path(cfg.out_dir) / "holds.csv", holds);
  return 0;
}

struct SweepCell {
  std::string regime;
  std::string mode;
  int num_links = 0;
  int delta = 0;
};

int cmd_sweep(const std::string& config_path, const GlobalOpts& g,
              std::vector<std::string> modes, std::vector<int> links,
              std::vector<int> deltas, std::vector<std::string> regimes) {
  AppConfig cfg = load_config(config_path);
  apply_overrides(cfg, g);
  if (cfg.scenario.devices.size() != 1)
    throw std::runtime_error("sweep expects a single-device config template");
  const DeviceConfig tmpl = cfg.scenario.devices.front();

  if (modes.empty()) modes = {"SLO", "MLO", "CONMLO"};
  if (links.empty()) links = {1, 2, 4, 6};
  if (deltas.empty()) deltas = {tmpl.timing.delta_slots};
  if (regimes.empty()) regimes = {cfg.scenario.regime_label};

  std::vector<SweepCell> cells;
  for (const auto& regime : regimes)
    for (const auto& mode : modes)
      for (int l : links) {
        if (parse_mode(mode) == AccessMode::kSlo && l > 1) {
          std::fprintf(stderr, "warning: skipping SLO cell with L=%d\n", l);
          continue;
        }
        for (int d : deltas) cells.push_back({regime, mode, l, d});
      }

  struct CellResult {
    AggregateReport report;
    std::string error;
  };
  std::vector<CellResult> results(cells.size());

  auto run_cell = [&](std::size_t ci) {
    const SweepCell& cell = cells[ci];
    try {
      Scenario base = cfg.scenario;
      DeviceConfig dev = tmpl;
      dev.mode = parse_mode(cell.mode);
      dev.links.resize(cell.num_links);
      for (int i = 0; i < cell.num_links; ++i) dev.links[i] = i;
      dev.timing.delta_slots = cell.delta;
      base.devices = {dev};
      base.regime_label = cell.regime;
      if (cell.regime != "custom") {
        const auto* prev = std::get_if<SynthParams>(&base.trace);
        base.trace = regime_preset(
            cell.regime, std::max(cell.num_links, 1),
            prev ? prev->num_slots : (base.duration_slots > 0
                                          ? base.duration_slots
                                          : std::int64_t{100000}),
            prev ? prev->seed : 0);
      }

      const std::string cell_dir = cell.mode + "_L" +
                                   std::to_string(cell.num_links) + "_D" +
                                   std::to_string(cell.delta) + "_" +
                                   cell.regime;
      const std::string trace_tag = "trace:" + cell.regime + ":L" +
                                    std::to_string(cell.num_links);
      std::vector<RunMetrics> metrics;
      for (std::uint64_t seed : cfg.seeds) {
        Scenario s = seeded_scenario(base, seed, trace_tag);
        RunLog log = run(s);
        write_file(fs::path(cfg.out_dir) / cell_dir /
                       ("seed" + std::to_string(seed)) / "runlog.jsonl",
                   runlog_to_jsonl(log, s));
        metrics.push_back(compute_metrics(log, 0, log.duration_slots,
                                          dev.timing.txop_slots, log.slot_us));
      }
      CellKey key{cell.regime, cell.num_links, cell.mode};
      results[ci].report = aggregate(metrics, key, cfg.run_statistic);
    } catch (const std::exception& e) {
      results[ci].error = e.what();
    }
  };

  const int workers = std::max(1, g.threads);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t ci = next.fetch_add(1); ci < cells.size();
           ci = next.fetch_add(1))
        run_cell(ci);
    });
  }
  for (auto& t : pool) t.join();

  std::string airtime = airtime_csv_header();
  std::string cdf = nca_cdf_csv_header();
  std::string holds = holds_csv_header();
  int failures = 0;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    if (!results[ci].error.empty()) {
      std::fprintf(stderr, "cell %s_L%d_D%d_%s failed: %s\n",
                   cells[ci].mode.c_str(), cells[ci].num_links,
                   cells[ci].delta, cells[ci].regime.c_str(),
                   results[ci].error.c_str());
      ++failures;
      continue;
    }
    append_airtime_rows(airtime, results[ci].report);
    append_nca_cdf_rows(cdf, results[ci].report);
    append_holds_rows(holds, results[ci].report);
  }
  write_file(fs::path(cfg.out_dir) / "airtime.csv", airtime);
  write_file(fs::path(cfg.out_dir) / "nca_cdf.csv", cdf);
  write_file(fs::path(cfg.out_dir) / "holds.csv", holds);
  std::printf("sweep: %zu cells, %d failed, results in %s\n", cells.size(),
              failures, cfg.out_dir.c_str());
  return failures == 0 ? 0 : 1;
}

int cmd_synth(const std::string& preset, double duty, std::int64_t burst,
              int channels, std::int64_t slots, std::uint64_t seed,
              const std::string& out_file) {
  SynthParams p;
  if (preset == "custom") {
    p.duty_cycle = duty;
    p.mean_busy_burst_slots = burst;
    p.num_channels = channels;
    p.num_slots = slots;
    p.seed = seed;
  } else {
    p = regime_preset(preset, channels, slots, seed);
  }
  RssiTrace trace = synth_trace(p);
  save_trace(trace, out_file);
  for (int ch = 0; ch < trace.num_channels; ++ch) {
    std::int64_t busy = 0;
    for (std::int64_t t = 0; t < trace.num_slots; ++t)
      if (trace.at(ch, t) >= -82.0) ++busy;
    std::printf("channel %d: empirical duty %.4f\n", ch,
                static_cast<double>(busy) / trace.num_slots);
  }
  std::printf("wrote %s (%d channels x %lld slots)\n", out_file.c_str(),
              trace.num_channels, static_cast<long long>(trace.num_slots));
  return 0;
}

int cmd_fairness(const std::string& config_path, const GlobalOpts& g) {
  AppConfig cfg = load_config(config_path);
  apply_overrides(cfg, g);
  if (cfg.scenario.devices.size() != 2)
    throw std::runtime_error(
        "fairness config must declare exactly one probe device and one "
        "competitor device");
  const DeviceConfig probe = cfg.scenario.devices[0];
  const DeviceConfig competitor = cfg.scenario.devices[1];

  struct Variant {
    std::string label;
    std::optional<DeviceConfig> competitor;
  };
  std::vector<Variant> variants;
  variants.push_back({"none", std::nullopt});
  DeviceConfig slo = competitor;
  slo.mode = AccessMode::kSlo;
  slo.links = {probe.links.front()};  // same channel as the probe
  variants.push_back({"SLO", slo});
  DeviceConfig mlo = competitor;
  mlo.mode = AccessMode::kMlo;
  variants.push_back({"MLO", mlo});
  DeviceConfig con = competitor;
  con.mode = AccessMode::kConMlo;
  variants.push_back({"CONMLO", con});

  std::string csv = "iteration,competitor,airtime\n";
  for (std::size_t it = 0; it < cfg.seeds.size(); ++it) {
    const std::uint64_t seed = cfg.seeds[it];
    for (const Variant& v : variants) {
      Scenario s = cfg.scenario;
      s.devices = {probe};
      if (v.competitor) s.devices.push_back(*v.competitor);
      // identical traces/seeds across variants
      s = seeded_scenario(s, seed, "trace");
      RunLog log = run(s);
      RunMetrics m = compute_metrics(log, 0, log.duration_slots,
                                     probe.timing.txop_slots, log.slot_us);
      char row[128];
      std::snprintf(row, sizeof(row), "%zu,%s,%.6f\n", it, v.label.c_str(),
                    m.airtime);
      csv += row;
      write_file(fs::path(cfg.out_dir) / ("iter" + std::to_string(it)) /
                     ("runlog_" + v.label + ".jsonl"),
                 runlog_to_jsonl(log, s));
    }
  }
  write_file(fs::path(cfg.out_dir) / "fairness.csv", csv);
  std::printf("fairness: %zu iterations x %zu competitors, results in %s\n",
              cfg.seeds.size(), variants.size(), cfg.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trace-driven simulator of unlicensed-spectrum channel access "
               "(SLO, MLO, ConMLO)"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "override the config seed list with one seed");
  app.add_option("--out", g.out, "override the output directory");
  app.add_option("--threads", g.threads, "worker threads for sweeps")
      ->check(CLI::PositiveNumber);
  app.add_option("--collision-mode", g.collision_mode,
                 "same-slot same-link start handling")
      ->check(CLI::IsMember({"permissive", "abort"}));
  app.add_flag("--bo-exclusive", g.bo_exclusive,
               "draw backoff from [0, CW-1] instead of [0, CW]");
  app.add_option("--run-statistic", g.run_statistic,
                 "per-trace continuity statistic for the CDF")
      ->check(CLI::IsMember({"max", "all"}));

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "execute one configured scenario");
  run_cmd->fallthrough();
  run_cmd->add_option("config", config_path, "JSON config file")->required();

  std::vector<std::string> modes, regimes;
  std::vector<int> links, deltas;
  auto* sweep_cmd = app.add_subcommand("sweep", "Cartesian parameter sweep");
  sweep_cmd->fallthrough();
  sweep_cmd->add_option("config", config_path, "JSON config template")->required();
  sweep_cmd->add_option("--modes", modes, "access modes to sweep");
  sweep_cmd->add_option("--links", links, "link-set sizes to sweep");
  sweep_cmd->add_option("--deltas", deltas, "anticipation shifts (slots)");
  sweep_cmd->add_option("--regimes", regimes, "occupancy regimes to sweep");

  std::string preset = "custom", out_file = "trace.otrc";
  double duty = 0.4;
  std::int64_t burst = 300, slots = 100000;
  int channels = 6;
  std::uint64_t synth_seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic trace");
  synth_cmd->fallthrough();
  synth_cmd->add_option("--preset", preset, "low, medium, high, or custom")
      ->check(CLI::IsMember({"low", "medium", "high", "custom"}));
  synth_cmd->add_option("--duty", duty, "busy fraction (custom preset)");
  synth_cmd->add_option("--burst", burst, "mean busy burst length in slots");
  synth_cmd->add_option("--channels", channels, "number of channels");
  synth_cmd->add_option("--slots", slots, "number of slots");
  synth_cmd->add_option("--trace-seed", synth_seed, "generator seed");
  synth_cmd->add_option("--out-file", out_file, "output trace path");

  auto* fairness_cmd =
      app.add_subcommand("fairness", "probe vs competitor airtime series");
  fairness_cmd->fallthrough();
  fairness_cmd->add_option("config", config_path, "JSON config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, g);
    if (sweep_cmd->parsed())
      return cmd_sweep(config_path, g, modes, links, deltas, regimes);
    if (synth_cmd->parsed())
      return cmd_synth(preset, duty, burst, channels, slots, synth_seed, out_file);
    if (fairness_cmd->parsed()) return cmd_fairness(config_path, g);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
