// Copyright 2026 The nvdfs Authors
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

#pragma once

#include <openssl/evp.h>

#include <boost/program_options.hpp>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvdfs/experiments.hpp"

namespace nvdfs {

namespace po = boost::program_options;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Every key a config file must define.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "system.b_z",         "system.gamma_c13",   "system.gamma_e",      "system.a_par_1",
      "system.a_perp_1",    "system.a_par_2",     "system.a_perp_2",     "system.t1",
      "system.pi_slot_us",  "noise.field_jitter", "noise.sigma_b",       "noise.t1",
      "noise.crosstalk",    "noise.rf_rate",      "noise.rf_bandwidth",  "noise.rf_delta_omega",
      "noise.rf_amplitude", "init.errors",        "init.p1",             "init.p2",
      "init.p3",            "init.p4",            "init.scenario",       "readout.errors",
      "run.shots",          "run.trajectories",   "run.seed",            "run.threads",
  };
  return keys;
}

// Canonical key = value text of a config; sorted keys, full-precision numbers.
inline std::map<std::string, std::string> config_entries(const ExperimentConfig& c) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  const auto& s = c.system;
  return {
      {"system.b_z", format_double(s.field.b_z)},
      {"system.gamma_c13", format_double(s.field.gamma_c13)},
      {"system.gamma_e", format_double(s.field.gamma_e)},
      {"system.a_par_1", format_double(s.spins[0].a_par)},
      {"system.a_perp_1", format_double(s.spins[0].a_perp)},
      {"system.a_par_2", format_double(s.spins[1].a_par)},
      {"system.a_perp_2", format_double(s.spins[1].a_perp)},
      {"system.t1", format_double(s.t1_electron)},
      {"system.pi_slot_us", format_double(s.pi_slot_us)},
      {"noise.field_jitter", b(c.field_jitter)},
      {"noise.sigma_b", format_double(c.field.sigma_b)},
      {"noise.t1", b(c.t1)},
      {"noise.crosstalk", b(c.crosstalk)},
      {"noise.rf_rate", format_double(c.rf.correlation_rate)},
      {"noise.rf_bandwidth", format_double(c.rf.bandwidth)},
      {"noise.rf_delta_omega", format_double(c.rf.delta_omega)},
      {"noise.rf_amplitude", format_double(c.rf.amplitude_scale)},
      {"init.errors", b(c.init_errors)},
      {"init.p1", format_double(c.init.p1)},
      {"init.p2", format_double(c.init.p2)},
      {"init.p3", format_double(c.init.p3)},
      {"init.p4", format_double(c.init.p4)},
      {"init.scenario", c.scenario == Scenario::NoMemory ? "no-memory" : "charge-preserving"},
      {"readout.errors", b(c.readout_errors)},
      {"run.shots", std::to_string(c.shots)},
      {"run.trajectories", std::to_string(c.trajectories)},
      {"run.seed", std::to_string(c.seed)},
      {"run.threads", std::to_string(c.threads)},
  };
}

inline std::string canonical_config(const ExperimentConfig& c) {
  std::string out;
  for (const auto& [k, v] : config_entries(c)) out += k + " = " + v + "\n";
  return out;
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) s += {hex[md[i] >> 4], hex[md[i] & 15]};
  return s;
}

inline std::string config_hash(const ExperimentConfig& c) { return sha256_hex(canonical_config(c)); }

namespace detail {

inline bool parse_bool(const std::string& k, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key " + k + ": expected a boolean, got '" + v + "'");
}

inline double parse_num(const std::string& k, const std::string& v) {
  std::size_t pos = 0;
  double d = 0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError("config key " + k + ": bad number '" + v + "'");
  return d;
}

inline std::uint64_t parse_uint(const std::string& k, const std::string& v) {
  const double d = parse_num(k, v);
  if (d < 0 || d != std::floor(d)) throw ConfigError("config key " + k + ": expected an integer");
  return std::uint64_t(d);
}

}  // namespace detail

inline ExperimentConfig config_from_entries(const std::map<std::string, std::string>& e) {
  std::vector<std::string> missing;
  for (const auto& k : config_keys())
    if (!e.count(k)) missing.push_back(k);
  if (!missing.empty()) {
    std::string msg = "missing config keys:";
    for (const auto& k : missing) msg += " " + k;
    throw ConfigError(msg);
  }
  for (const auto& [k, v] : e)
    if (std::find(config_keys().begin(), config_keys().end(), k) == config_keys().end())
      throw ConfigError("unknown config key " + k);
  auto num = [&](const char* k) { return detail::parse_num(k, e.at(k)); };
  auto flag = [&](const char* k) { return detail::parse_bool(k, e.at(k)); };
  auto uint = [&](const char* k) { return detail::parse_uint(k, e.at(k)); };

  ExperimentConfig c;
  c.system.field.b_z = num("system.b_z");
  c.system.field.gamma_c13 = num("system.gamma_c13");
  c.system.field.gamma_e = num("system.gamma_e");
  c.system.spins[0] = {num("system.a_par_1"), num("system.a_perp_1"), "1"};
  c.system.spins[1] = {num("system.a_par_2"), num("system.a_perp_2"), "2"};
  c.system.t1_electron = num("system.t1");
  c.system.pi_slot_us = num("system.pi_slot_us");
  c.field_jitter = flag("noise.field_jitter");
  c.field.sigma_b = num("noise.sigma_b");
  c.field.gamma_c13 = c.system.field.gamma_c13;
  c.t1 = flag("noise.t1");
  c.crosstalk = flag("noise.crosstalk");
  c.rf.correlation_rate = num("noise.rf_rate");
  c.rf.bandwidth = num("noise.rf_bandwidth");
  c.rf.delta_omega = num("noise.rf_delta_omega");
  c.rf.amplitude_scale = num("noise.rf_amplitude");
  c.init_errors = flag("init.errors");
  c.init = {num("init.p1"), num("init.p2"), num("init.p3"), num("init.p4")};
  const std::string sc = e.at("init.scenario");
  if (sc == "no-memory")
    c.scenario = Scenario::NoMemory;
  else if (sc == "charge-preserving")
    c.scenario = Scenario::ChargePreserving;
  else
    throw ConfigError("init.scenario must be no-memory or charge-preserving");
  c.readout_errors = flag("readout.errors");
  c.shots = uint("run.shots");
  c.trajectories = uint("run.trajectories");
  c.seed = uint("run.seed");
  c.threads = unsigned(uint("run.threads"));
  try {
    c.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("invalid config: ") + ex.what());
  }
  return c;
}

// Parses flat "section.key = value" text.
inline ExperimentConfig parse_config(std::istream& is) {
  po::options_description desc;
  for (const auto& k : config_keys()) desc.add_options()(k.c_str(), po::value<std::string>());
  std::map<std::string, std::string> e;
  try {
    const auto parsed = po::parse_config_file(is, desc, true);
    for (const auto& o : parsed.options) {
      if (o.unregistered) throw ConfigError("unknown config key " + o.string_key);
      if (e.count(o.string_key)) throw ConfigError("duplicate config key " + o.string_key);
      e[o.string_key] = o.value.empty() ? std::string() : o.value.front();
    }
  } catch (const po::error& ex) {
    throw ConfigError(std::string("config parse error: ") + ex.what());
  }
  return config_from_entries(e);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  return parse_config(f);
}

// Reference configuration: measured hyperfine values, 480 G, field jitter,
// T1, calibrated rf amplitude, init and readout errors.
inline ExperimentConfig default_config() {
  ExperimentConfig c;
  c.field_jitter = true;
  c.t1 = true;
  c.init_errors = true;
  c.readout_errors = true;
  c.rf.amplitude_scale = 0.5;
  return c;
}

inline ExperimentConfig noiseless_config() {
  ExperimentConfig c;
  c.field_jitter = false;
  c.t1 = false;
  c.init_errors = false;
  c.readout_errors = false;
  c.shots = 0;
  return c;
}

// ---------------------------------------------------------------------------
// Results

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> r) {
    if (r.size() != header.size()) throw std::invalid_argument("csv row width mismatch");
    rows.push_back(std::move(r));
  }
  void add(const std::vector<double>& r) {
    std::vector<std::string> s;
    for (double v : r) s.push_back(format_double(v));
    add(std::move(s));
  }
  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (first)
      t.header = cells, first = false;
    else
      t.add(std::move(cells));
  }
  return t;
}

inline void atomic_write(const std::filesystem::path& path, const std::string& data) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << data;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename to " + path.string() + ": " + ec.message());
  }
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline constexpr const char* kCodeVersion = "0.1.0";

struct RunManifest {
  std::string command;
  ExperimentConfig config;
  std::string started, finished;
  std::vector<std::string> outputs;
  nlohmann::json fits = nlohmann::json::object();

  nlohmann::json to_json() const {
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : config_entries(config)) cfg[k] = v;
    return {{"command", command},
            {"config", cfg},
            {"config_hash", config_hash(config)},
            {"seed", config.seed},
            {"started", started},
            {"finished", finished},
            {"outputs", outputs},
            {"fits", fits},
            {"code_version", kCodeVersion}};
  }
};

// Writes each table as <dir>/<name>.csv and the manifest as <dir>/<stem>.manifest.json.
inline std::vector<std::filesystem::path> emit_results(
    const std::vector<std::pair<std::string, CsvTable>>& tables, RunManifest manifest,
    const std::filesystem::path& dir, const std::string& stem) {
  if (tables.empty()) throw std::invalid_argument("emit_results: no tables");
  for (const auto& [name, t] : tables)
    if (t.rows.empty()) throw std::invalid_argument("emit_results: table " + name + " has no rows");
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& [name, t] : tables) {
    const auto p = dir / (name + ".csv");
    atomic_write(p, t.str());
    manifest.outputs.push_back(p.filename().string());
    written.push_back(p);
  }
  manifest.finished = utc_timestamp();
  const auto mp = dir / (stem + ".manifest.json");
  atomic_write(mp, manifest.to_json().dump(2) + "\n");
  written.push_back(mp);
  return written;
}

}  // namespace nvdfs
