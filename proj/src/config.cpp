// Copyright 2026 The ttsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ttsim/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ttsim/errors.hpp"

namespace ttsim {
namespace {

using Json = nlohmann::ordered_json;

Json make_defaults() {
  Json d;
  d["workload"] = {
      {"source", "synthetic"},   {"trace_path", ""},      {"resample_arrivals", false},
      {"rate", 4.0},             {"num_requests", 256},   {"lengths", "sharegpt"},
      {"fixed_input", 128},      {"fixed_output", 64},    {"input_mean", 200.0},
      {"input_sigma", 1.0},      {"output_mean", 180.0},  {"output_sigma", 1.0},
      {"min_input", 1},          {"max_input", 8192},     {"min_output", 1},
      {"max_output", 4096},
  };
  d["sched"] = {
      {"policy", "throttle"}, {"mode", "combined"},  {"T", 8},
      {"max_p", 2048},        {"min_p", 32},         {"kv_thresh", 0.05},
      {"token_budget", 2048},
  };
  d["pipeline"] = {
      {"depth", 4},
      {"c0_ms", 5.0},
      {"per_token_ms", 0.02},
      {"per_kctx_ms", 0.075},
  };
  d["comm"] = {
      {"preset", "pcie"},
      {"latency_ms", 0.05},
      {"bytes_per_token", 10240.0},
      {"bandwidth_bytes_per_ms", kPcieBytesPerMs},
  };
  d["kv"] = {{"page_size", 16}, {"total_pages", 4096}};
  d["slo"] = {{"ttft_ms", 3000.0}, {"tpot_ms", 150.0}};
  d["run"] = {
      {"seed", 1},
      {"out_dir", "out"},
      {"horizon_ms", 0.0},
      {"events_log", false},
      {"rates", Json::array({1.0, 2.0, 4.0, 8.0})},
      {"schedulers", Json::array({"throttle", "sarathi"})},
      {"threads", 0},
  };
  return d;
}

std::string valid_keys_message() {
  std::string msg = "valid keys:";
  for (const std::string& k : config_keys()) msg += " " + k;
  return msg;
}

[[noreturn]] void type_error(const std::string& key, const char* expected) {
  throw ConfigError("config key '" + key + "' expects " + expected);
}

// Coerces `value` to the JSON type of `like`.
Json coerce(const std::string& key, const Json& like, const Json& value) {
  switch (like.type()) {
    case Json::value_t::number_integer:
    case Json::value_t::number_unsigned:
      if (value.is_number_integer()) return value;
      if (value.is_number_float()) {
        const double v = value.get<double>();
        if (std::floor(v) == v && std::isfinite(v)) return static_cast<std::int64_t>(v);
      }
      type_error(key, "an integer");
    case Json::value_t::number_float:
      if (value.is_number()) return value.get<double>();
      type_error(key, "a number");
    case Json::value_t::boolean:
      if (value.is_boolean()) return value;
      type_error(key, "a boolean");
    case Json::value_t::string:
      if (value.is_string()) return value;
      type_error(key, "a string");
    case Json::value_t::array: {
      if (!value.is_array()) type_error(key, "an array");
      Json out = Json::array();
      const Json elem = like.empty() ? Json() : like.front();
      for (const Json& v : value) out.push_back(elem.is_null() ? v : coerce(key, elem, v));
      return out;
    }
    default:
      return value;
  }
}

Json parse_scalar_text(const std::string& key, const Json& like, const std::string& text) {
  try {
    switch (like.type()) {
      case Json::value_t::number_integer:
      case Json::value_t::number_unsigned: {
        std::size_t pos = 0;
        const long long v = std::stoll(text, &pos);
        if (pos != text.size()) type_error(key, "an integer");
        return v;
      }
      case Json::value_t::number_float: {
        std::size_t pos = 0;
        const double v = std::stod(text, &pos);
        if (pos != text.size()) type_error(key, "a number");
        return v;
      }
      case Json::value_t::boolean:
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        type_error(key, "a boolean");
      default:
        return text;
    }
  } catch (const std::invalid_argument&) {
    type_error(key, "a value of the default's type");
  } catch (const std::out_of_range&) {
    type_error(key, "a value in range");
  }
}

Json parse_override(const std::string& key, const Json& like, const std::string& text) {
  if (!like.is_array()) return parse_scalar_text(key, like, text);
  Json out = Json::array();
  const Json elem = like.empty() ? Json("") : like.front();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_scalar_text(key, elem, item));
  }
  return out;
}

std::pair<std::string, std::string> split_key(const std::string& key) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) return {key, ""};
  return {key.substr(0, dot), key.substr(dot + 1)};
}

Json& lookup(Json& doc, const std::string& key) {
  auto [section, name] = split_key(key);
  if (!doc.contains(section) || name.empty() || !doc[section].contains(name)) {
    throw ConfigError("unknown config key '" + key + "'; " + valid_keys_message());
  }
  return doc[section][name];
}

LengthDistribution build_distribution(const Json& w) {
  const std::string kind = w["lengths"].get<std::string>();
  LengthDistribution d;
  if (kind == "sharegpt") {
    const auto t = sharegpt_like_table();
    d = LengthDistribution::empirical({t.begin(), t.end()});
  } else if (kind == "azure") {
    const auto t = azure_like_table();
    d = LengthDistribution::empirical({t.begin(), t.end()});
  } else if (kind == "fixed") {
    d = LengthDistribution::fixed_lengths(w["fixed_input"].get<std::int64_t>(),
                                          w["fixed_output"].get<std::int64_t>());
  } else if (kind == "lognormal") {
    d = LengthDistribution::lognormal(w["input_mean"].get<double>(), w["input_sigma"].get<double>(),
                                      w["output_mean"].get<double>(),
                                      w["output_sigma"].get<double>());
  } else {
    throw ConfigError("workload.lengths must be one of sharegpt, azure, fixed, lognormal");
  }
  d.input_bounds = {w["min_input"].get<std::int64_t>(), w["max_input"].get<std::int64_t>()};
  d.output_bounds = {w["min_output"].get<std::int64_t>(), w["max_output"].get<std::int64_t>()};
  if (d.input_bounds.min < 1 || d.input_bounds.max < d.input_bounds.min ||
      d.output_bounds.min < 1 || d.output_bounds.max < d.output_bounds.min) {
    throw ConfigError("workload length bounds must satisfy 1 <= min <= max");
  }
  if (d.kind == LengthDistribution::Kind::kFixed && (d.fixed.input < 1 || d.fixed.output < 1)) {
    throw ConfigError("workload.fixed_input and workload.fixed_output must be >= 1");
  }
  return d;
}

RunConfig build(const Json& doc) {
  RunConfig cfg;
  cfg.resolved = doc;

  const Json& w = doc["workload"];
  const std::string source = w["source"].get<std::string>();
  if (source == "synthetic") {
    cfg.workload.source = WorkloadConfig::Source::kSynthetic;
  } else if (source == "trace") {
    cfg.workload.source = WorkloadConfig::Source::kTrace;
  } else {
    throw ConfigError("workload.source must be synthetic or trace");
  }
  cfg.workload.trace_path = w["trace_path"].get<std::string>();
  if (cfg.workload.source == WorkloadConfig::Source::kTrace) {
    if (cfg.workload.trace_path.empty()) {
      throw ConfigError("workload.trace_path is required when workload.source is trace");
    }
    if (!std::filesystem::exists(cfg.workload.trace_path)) {
      throw ConfigError("trace file not found: " + cfg.workload.trace_path.string());
    }
  }
  cfg.workload.resample_arrivals = w["resample_arrivals"].get<bool>();
  cfg.workload.rate_per_s = w["rate"].get<double>();
  if (!(cfg.workload.rate_per_s > 0.0)) throw ConfigError("workload.rate must be positive");
  cfg.workload.num_requests = w["num_requests"].get<std::int64_t>();
  if (cfg.workload.num_requests < 0) throw ConfigError("workload.num_requests must be >= 0");
  cfg.workload.lengths = w["lengths"].get<std::string>();
  cfg.workload.distribution = build_distribution(w);

  const Json& s = doc["sched"];
  ThrottleConfig tc;
  tc.iterations = s["T"].get<std::int64_t>();
  tc.max_p = s["max_p"].get<std::int64_t>();
  tc.min_p = s["min_p"].get<std::int64_t>();
  tc.kv_thresh = s["kv_thresh"].get<double>();
  tc.mode = parse_throttle_mode(s["mode"].get<std::string>());
  const std::string policy = s["policy"].get<std::string>();
  if (policy != "throttle" && policy != "sarathi") {
    throw ConfigError("sched.policy must be throttle or sarathi");
  }
  cfg.scheduler.policy = policy == "sarathi" ? Policy::kSarathi : Policy::kThrottle;
  cfg.scheduler.throttle = tc;
  cfg.scheduler.token_budget = s["token_budget"].get<std::int64_t>();
  cfg.scheduler.validate();

  const Json& p = doc["pipeline"];
  cfg.pipeline.depth = p["depth"].get<std::int64_t>();
  cfg.pipeline.cost.c0_ms = p["c0_ms"].get<double>();
  cfg.pipeline.cost.per_token_ms = p["per_token_ms"].get<double>();
  cfg.pipeline.cost.per_kctx_ms = p["per_kctx_ms"].get<double>();

  const Json& c = doc["comm"];
  const std::string preset = c["preset"].get<std::string>();
  if (preset == "pcie") {
    cfg.pipeline.comm.bandwidth_bytes_per_ms = kPcieBytesPerMs;
  } else if (preset == "network") {
    cfg.pipeline.comm.bandwidth_bytes_per_ms = kNetworkBytesPerMs;
  } else if (preset == "custom") {
    cfg.pipeline.comm.bandwidth_bytes_per_ms = c["bandwidth_bytes_per_ms"].get<double>();
  } else {
    throw ConfigError("comm.preset must be pcie, network or custom");
  }
  cfg.pipeline.comm.latency_ms = c["latency_ms"].get<double>();
  cfg.pipeline.comm.bytes_per_token = c["bytes_per_token"].get<double>();
  cfg.pipeline.validate();

  cfg.kv.page_size = doc["kv"]["page_size"].get<std::int64_t>();
  cfg.kv.total_pages = doc["kv"]["total_pages"].get<std::int64_t>();
  cfg.kv.validate();

  cfg.slo.ttft_ms = doc["slo"]["ttft_ms"].get<double>();
  cfg.slo.tpot_ms = doc["slo"]["tpot_ms"].get<double>();
  if (!(cfg.slo.ttft_ms > 0.0) || !(cfg.slo.tpot_ms > 0.0)) {
    throw ConfigError("SLO limits must be positive");
  }

  const Json& r = doc["run"];
  const std::int64_t seed = r["seed"].get<std::int64_t>();
  if (seed < 0) throw ConfigError("run.seed must be >= 0");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.out_dir = r["out_dir"].get<std::string>();
  const double horizon = r["horizon_ms"].get<double>();
  if (horizon < 0.0) throw ConfigError("run.horizon_ms must be >= 0 (0 disables it)");
  if (horizon > 0.0) cfg.horizon_ms = horizon;
  cfg.events_log = r["events_log"].get<bool>();
  for (const Json& v : r["rates"]) {
    const double rate = v.get<double>();
    if (!(rate > 0.0)) throw ConfigError("run.rates entries must be positive");
    cfg.rates.push_back(rate);
  }
  for (const Json& v : r["schedulers"]) {
    const std::string name = v.get<std::string>();
    SchedulerChoice::from_name(name, tc, cfg.scheduler.token_budget);
    cfg.schedulers.push_back(name);
  }
  cfg.threads = r["threads"].get<std::int64_t>();
  if (cfg.threads < 0) throw ConfigError("run.threads must be >= 0");
  return cfg;
}

}  // namespace

const nlohmann::ordered_json& default_config() {
  static const Json defaults = make_defaults();
  return defaults;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [section, body] : default_config().items()) {
    for (const auto& [name, value] : body.items()) keys.push_back(section + "." + name);
  }
  return keys;
}

RunConfig parse_config(const nlohmann::ordered_json& file, const Overrides& overrides) {
  Json doc = default_config();
  if (!file.is_null()) {
    if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [section, body] : file.items()) {
      if (!body.is_object()) {
        throw ConfigError("config section '" + section + "' must be an object; " +
                          valid_keys_message());
      }
      for (const auto& [name, value] : body.items()) {
        const std::string key = section + "." + name;
        Json& slot = lookup(doc, key);
        slot = coerce(key, slot, value);
      }
    }
  }
  for (const auto& [key, text] : overrides) {
    Json& slot = lookup(doc, key);
    slot = parse_override(key, slot, text);
  }
  return build(doc);
}

RunConfig parse_config_text(std::string_view text, const Overrides& overrides) {
  Json file;
  if (text.find_first_not_of(" \t\r\n") != std::string_view::npos) {
    try {
      file = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
    }
  }
  return parse_config(file, overrides);
}

RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
    v >>= 4;
  }
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  // Output location and parallelism do not change results.
  Json doc = cfg.resolved;
  if (doc.contains("run")) {
    doc["run"].erase("out_dir");
    doc["run"].erase("threads");
  }
  return hex64(fnv1a64(doc.dump()));
}

}  // namespace ttsim
