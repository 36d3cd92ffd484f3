#include "conmlo/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace conmlo {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("config error at " + path + ": " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail(path + "." + key, "unknown key");
  }
}

TimingConfig parse_timing(const json& obj, const std::string& path) {
  reject_unknown(obj,
                 {"slot_us", "empty_slot_us", "difs_us", "sifs_us",
                  "aifs_slots", "txop_slots", "cw", "delta_slots",
                  "bo_exclusive"},
                 path);
  TimingConfig t;
  if (obj.contains("slot_us")) t.slot_us = obj["slot_us"].get<int>();
  if (obj.contains("empty_slot_us")) t.empty_slot_us = obj["empty_slot_us"].get<int>();
  if (obj.contains("difs_us")) t.difs_us = obj["difs_us"].get<int>();
  if (obj.contains("sifs_us")) t.sifs_us = obj["sifs_us"].get<int>();
  if (obj.contains("aifs_slots"))
    t.aifs_slots = obj["aifs_slots"].get<int>();
  else
    t.aifs_slots = t.difs_us / t.slot_us;
  if (obj.contains("txop_slots")) t.txop_slots = obj["txop_slots"].get<int>();
  if (obj.contains("cw")) t.cw = obj["cw"].get<int>();
  if (obj.contains("delta_slots")) t.delta_slots = obj["delta_slots"].get<int>();
  if (obj.contains("bo_exclusive")) t.bo_exclusive = obj["bo_exclusive"].get<bool>();
  try {
    t.validate();
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return t;
}

SynthParams parse_synth(const json& obj, const std::string& path) {
  reject_unknown(obj,
                 {"preset", "duty_cycle", "mean_busy_burst_slots",
                  "num_channels", "num_slots", "seed"},
                 path);
  SynthParams p;
  p.num_channels = obj.value("num_channels", 6);
  p.num_slots = obj.value("num_slots", std::int64_t{100000});
  p.seed = obj.value("seed", std::uint64_t{0});
  if (obj.contains("preset")) {
    try {
      p = regime_preset(obj["preset"].get<std::string>(), p.num_channels,
                        p.num_slots, p.seed);
    } catch (const std::exception& e) {
      fail(path + ".preset", e.what());
    }
  }
  if (obj.contains("duty_cycle")) p.duty_cycle = obj["duty_cycle"].get<double>();
  if (obj.contains("mean_busy_burst_slots"))
    p.mean_busy_burst_slots = obj["mean_busy_burst_slots"].get<std::int64_t>();
  try {
    p.validate();
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return p;
}

DeviceConfig parse_device(const json& obj, const std::string& path) {
  reject_unknown(obj, {"id", "mode", "links", "timing"}, path);
  DeviceConfig d;
  if (!obj.contains("id")) fail(path, "missing required key 'id'");
  d.id = obj["id"].get<std::string>();
  if (!obj.contains("mode")) fail(path, "missing required key 'mode'");
  try {
    d.mode = parse_mode(obj["mode"].get<std::string>());
  } catch (const std::exception& e) {
    fail(path + ".mode", e.what());
  }
  if (!obj.contains("links")) fail(path, "missing required key 'links'");
  d.links = obj["links"].get<std::vector<int>>();
  if (obj.contains("timing"))
    d.timing = parse_timing(obj["timing"], path + ".timing");
  return d;
}

}  // namespace

AppConfig parse_config(const std::string& json_text,
                       const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(origin, e.what());
  }
  if (!root.is_object()) fail(origin, "top level must be an object");

  reject_unknown(root,
                 {"trace", "devices", "ed_threshold_dbm", "duration_slots",
                  "seeds", "out_dir", "regime_label", "collision_mode",
                  "run_statistic"},
                 origin);

  AppConfig cfg;
  Scenario& s = cfg.scenario;

  if (!root.contains("trace")) fail(origin, "missing required key 'trace'");
  const json& trace = root["trace"];
  reject_unknown(trace, {"path", "format", "synth"}, origin + ".trace");
  if (trace.contains("synth")) {
    if (trace.contains("path"))
      fail(origin + ".trace", "specify either 'path' or 'synth', not both");
    s.trace = parse_synth(trace["synth"], origin + ".trace.synth");
  } else if (trace.contains("path")) {
    TraceFile f;
    f.path = trace["path"].get<std::string>();
    const std::string fmt = trace.value("format", std::string("binary"));
    if (fmt == "binary")
      f.format = TraceFormat::kBinary;
    else if (fmt == "csv")
      f.format = TraceFormat::kCsv;
    else
      fail(origin + ".trace.format", "must be 'binary' or 'csv'");
    s.trace = f;
  } else {
    fail(origin + ".trace", "needs 'path' or 'synth'");
  }

  if (!root.contains("devices")) fail(origin, "missing required key 'devices'");
  if (!root["devices"].is_array() || root["devices"].empty())
    fail(origin + ".devices", "must be a nonempty array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < root["devices"].size(); ++i) {
    DeviceConfig d = parse_device(root["devices"][i],
                                  origin + ".devices[" + std::to_string(i) + "]");
    if (!ids.insert(d.id).second)
      fail(origin + ".devices[" + std::to_string(i) + "].id",
           "duplicate device id '" + d.id + "'");
    s.devices.push_back(std::move(d));
  }

  s.ed_threshold_dbm = root.value("ed_threshold_dbm", -82.0);
  s.duration_slots = root.value("duration_slots", std::int64_t{0});
  s.regime_label = root.value("regime_label", std::string("custom"));

  const std::string col = root.value("collision_mode", std::string("permissive"));
  if (col == "permissive")
    s.collision_mode = CollisionMode::kPermissive;
  else if (col == "abort")
    s.collision_mode = CollisionMode::kAbort;
  else
    fail(origin + ".collision_mode", "must be 'permissive' or 'abort'");

  const std::string stat = root.value("run_statistic", std::string("max"));
  if (stat == "max")
    cfg.run_statistic = RunStatistic::kMaxPerTrace;
  else if (stat == "all")
    cfg.run_statistic = RunStatistic::kPooled;
  else
    fail(origin + ".run_statistic", "must be 'max' or 'all'");

  cfg.out_dir = root.value("out_dir", std::string("out"));
  if (root.contains("seeds")) {
    cfg.seeds = root["seeds"].get<std::vector<std::uint64_t>>();
    if (cfg.seeds.empty()) fail(origin + ".seeds", "must be nonempty");
  } else {
    cfg.seeds = {0};
  }
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config error at " + path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace conmlo
