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

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "nvdfs/io.hpp"

namespace nvdfs {

enum ExitCode { kOk = 0, kUsage = 1, kConfigError = 2, kFitFailure = 3 };

inline constexpr const char* kOutputDirEnv = "NVDFS_OUTPUT_DIR";

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> v = {"odmr",    "gate-check", "entangle",
                                             "store",   "tomo",       "calibrate-noise"};
  return v;
}

namespace detail {

inline double parse_phi(const std::string& s) {
  if (s == "pi") return kPi;
  if (s == "0") return 0.0;
  return parse_num("--phi", s);
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(parse_num("--times", item));
  return v;
}

inline nlohmann::json fit_json(const DecayFit& f) {
  return {{"model", model_name(f.model)},
          {"params", std::vector<double>(f.params.data(), f.params.data() + f.params.size())},
          {"sigma", std::vector<double>(f.sigma.data(), f.sigma.data() + f.sigma.size())},
          {"residual_rms", f.residual_rms}};
}

inline nlohmann::json matrix_json(const Mat4& m) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    std::vector<double> r, c;
    for (int j = 0; j < 4; ++j) r.push_back(m(i, j).real()), c.push_back(m(i, j).imag());
    re.push_back(r);
    im.push_back(c);
  }
  return {{"re", re}, {"im", im}};
}

inline CsvTable matrix_csv(const Mat4& m) {
  CsvTable t{{"row", "col", "re", "im"}, {}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) t.add(std::vector<double>{double(i), double(j), m(i, j).real(), m(i, j).imag()});
  return t;
}

}  // namespace detail

// Runs one subcommand; args excludes the program name.
inline int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  if (!args.empty() && (args[0] == "--help" || args[0] == "-h")) {
    out << "usage: nvdfs <odmr|gate-check|entangle|store|tomo|calibrate-noise> [options]\n"
        << "run 'nvdfs <subcommand> --help' for options\n";
    return kOk;
  }
  if (args.empty() || std::find(subcommands().begin(), subcommands().end(), args[0]) ==
                          subcommands().end()) {
    err << "usage: nvdfs <odmr|gate-check|entangle|store|tomo|calibrate-noise> [options]\n";
    if (!args.empty()) err << "unknown subcommand: " << args[0] << "\n";
    return kUsage;
  }
  const std::string cmd = args[0];

  po::options_description desc("options");
  desc.add_options()("help", "show options")("config", po::value<std::string>(), "config file")(
      "out", po::value<std::string>(), "output directory")(
      "seed", po::value<std::uint64_t>(), "seed override")(
      "trajectories", po::value<std::uint64_t>(), "trajectory count override")(
      "shots", po::value<std::uint64_t>(), "shot count override")(
      "spin", po::value<int>()->default_value(1), "nuclear spin label (1 or 2)")(
      "ms", po::value<int>()->default_value(0), "electron branch for odmr (0, 1, -1)")(
      "branch", po::value<int>()->default_value(0), "electron index for gate-check (0 or 1)")(
      "nmax", po::value<int>()->default_value(10), "gate repetitions")(
      "phi", po::value<std::string>()->default_value("pi"), "entangling phase (pi, 0 or radians)")(
      "state", po::value<std::string>()->default_value("S"), "stored state (S or T)")(
      "noise", po::value<std::string>()->default_value("dephasing"),
      "storage noise (dephasing or general)")(
      "times", po::value<std::string>(), "comma separated storage times in ms");

  po::variables_map vm;
  ExperimentConfig cfg;
  try {
    std::vector<std::string> rest(args.begin() + 1, args.end());
    po::store(po::command_line_parser(rest).options(desc).run(), vm);
    po::notify(vm);
    if (vm.count("help")) {
      out << desc;
      return kOk;
    }
    cfg = vm.count("config") ? load_config(vm["config"].as<std::string>()) : default_config();
    if (vm.count("seed")) cfg.seed = vm["seed"].as<std::uint64_t>();
    if (vm.count("trajectories")) cfg.trajectories = vm["trajectories"].as<std::uint64_t>();
    if (vm.count("shots")) cfg.shots = vm["shots"].as<std::uint64_t>();
    if (vm.count("times")) cfg.grid = detail::parse_list(vm["times"].as<std::string>());
    cfg.validate();
  } catch (const po::error& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  std::filesystem::path dir = "results";
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) dir = env;
  if (vm.count("out")) dir = vm["out"].as<std::string>();

  RunManifest man;
  man.command = cmd;
  man.config = cfg;
  man.started = utc_timestamp();
  std::vector<std::pair<std::string, CsvTable>> tables;
  std::string stem = cmd;
  bool fit_failed = false;

  try {
    const int spin = vm["spin"].as<int>();
    if (spin != 1 && spin != 2) throw ConfigError("--spin must be 1 or 2");
    const int si = spin - 1;

    if (cmd == "odmr") {
      const int ms = vm["ms"].as<int>();
      stem = "odmr_spin" + std::to_string(spin) + "_ms" + std::to_string(ms);
      OdmrScan s = run_odmr_scan(si, ms, cfg);
      CsvTable t{{"freq_khz", "signal", "stderr"}, {}};
      for (std::size_t i = 0; i < s.freq.size(); ++i) t.add(std::vector<double>{s.freq[i], s.signal[i], s.stderr_[i]});
      tables.emplace_back(stem, t);
      man.fits["center_khz"] = s.center();
      man.fits["center_sigma_khz"] = s.center_sigma();
      man.fits["expected_center_khz"] = s.true_center;
      man.fits["gaussian"] = detail::fit_json(s.fit);
      out << "center " << format_double(s.center()) << " kHz\n";
    } else if (cmd == "gate-check") {
      const int branch = vm["branch"].as<int>();
      stem = "gate_check_spin" + std::to_string(spin) + "_b" + std::to_string(branch);
      GateCompiler gc(cfg.system, cfg.compile);
      CsvTable g{{"spin", "kind", "order", "tau_us", "pulses", "total_us"}, {}};
      for (int s = 0; s < 2; ++s) {
        const auto c = gc.gate_info({s, GateKind::ConditionalX, kPi / 2, cfg.compile.conditional_order[s], 0});
        g.add({std::to_string(s + 1), "conditional-x", std::to_string(c.k), format_double(c.tau_us),
               std::to_string(c.n_pulses), format_double(c.total_us)});
        const auto u = gc.gate_info({s, GateKind::UnconditionalX, kPi / 2, cfg.compile.unconditional_order[s], 0});
        g.add({std::to_string(s + 1), "unconditional-x", std::to_string(u.k), format_double(u.tau_us),
               std::to_string(u.n_pulses), format_double(u.total_us)});
        const double zt = solve_z_gate(kPi / 2, cfg.system.spins[s], cfg.system.field, cfg.system.pi_slot_us);
        g.add({std::to_string(s + 1), "z", "0", format_double(zt), "4",
               format_double(8.0 * (zt + 0.5 * cfg.system.pi_slot_us))});
      }
      tables.emplace_back("gate_table", g);
      const auto r = run_gate_repetition({si, GateKind::ConditionalX, kPi / 2, 0, 0.0}, branch,
                                         vm["nmax"].as<int>(), cfg);
      CsvTable t{{"n", "sigma_y", "stderr"}, {}};
      for (std::size_t i = 0; i < r.n.size(); ++i) t.add(std::vector<double>{r.n[i], r.y[i], r.stderr_[i]});
      tables.emplace_back(stem, t);
      if (r.fit) {
        man.fits["sinusoid"] = detail::fit_json(*r.fit);
        man.fits["b"] = r.fit->b();
        out << "b " << format_double(r.fit->b()) << "\n";
      } else {
        man.fits["error"] = r.fit_error;
        err << "fit failure: " << r.fit_error << "\n";
        fit_failed = true;
      }
    } else if (cmd == "entangle" || cmd == "tomo") {
      const double phi = detail::parse_phi(vm["phi"].as<std::string>());
      const bool tomo = cmd == "tomo";
      const auto e = run_entanglement(phi, cfg, tomo);
      stem = cmd + (target_state(phi) == singlet() ? "_S" : "_T");
      man.fits["fidelity"] = e.fidelity;
      man.fits["fidelity_stderr"] = e.fidelity_stderr;
      man.fits["fidelity_prepared"] = e.fidelity_prepared;
      man.fits["duration_us"] = e.duration_us;
      if (!tomo) {
        tables.emplace_back(stem + "_rho", detail::matrix_csv(e.measured));
        out << "fidelity " << format_double(e.fidelity) << "\n";
      } else {
        const Mat4 rho = 0.5 * (e.measured + e.measured.adjoint());
        const auto recs = cfg.shots == 0 ? exact_tomography(rho, 1e6)
                                         : simulate_tomography(rho, cfg.shots, cfg.seed);
        CsvTable c{{"setting", "outcome", "counts"}, {}};
        for (const auto& r : recs) {
          const auto labels = outcome_labels(r.setting);
          for (std::size_t k = 0; k < labels.size(); ++k)
            c.add({r.setting.name(), labels[k], format_double(r.counts[k])});
        }
        tables.emplace_back(stem + "_counts", c);
        tables.emplace_back(stem + "_rho", detail::matrix_csv(e.tomography->rho));
        man.fits["reconstruction"] = {{"rho", detail::matrix_json(e.tomography->rho)},
                                      {"fidelity", e.tomography_fidelity},
                                      {"log_likelihood", e.tomography->log_likelihood},
                                      {"iterations", e.tomography->iterations},
                                      {"converged", e.tomography->converged}};
        out << "tomography fidelity " << format_double(e.tomography_fidelity) << "\n";
      }
    } else if (cmd == "store") {
      const std::string st = vm["state"].as<std::string>(), nm = vm["noise"].as<std::string>();
      if (st != "S" && st != "T") throw ConfigError("--state must be S or T");
      if (nm != "dephasing" && nm != "general") throw ConfigError("--noise must be dephasing or general");
      const auto state = st == "S" ? StoredState::S : StoredState::T;
      const auto mode = nm == "general" ? NoiseMode::GeneralCollective : NoiseMode::DephasingOnly;
      stem = "store_" + st + "_" + nm;
      const auto r = run_storage_experiment(state, mode, cfg);
      CsvTable t{{"t_ms", "fidelity", "stderr"}, {}};
      for (std::size_t i = 0; i < r.t_ms.size(); ++i) t.add(std::vector<double>{r.t_ms[i], r.fidelity[i], r.stderr_[i]});
      tables.emplace_back(stem, t);
      man.fits["initial_fidelity"] = r.initial_fidelity;
      if (r.fit) {
        man.fits["exp_floor"] = detail::fit_json(*r.fit);
        man.fits["t_est_ms"] = r.fit->t_est();
        man.fits["floor"] = r.fit->floor();
        out << "t_est " << format_double(r.fit->t_est()) << " ms\n";
      } else {
        man.fits["error"] = r.fit_error;
        err << "fit failure: " << r.fit_error << "\n";
        fit_failed = true;
      }
    } else {  // calibrate-noise
      stem = "calibrate_noise";
      ExperimentConfig c2 = cfg;
      const Mat4 rhoT = run_entanglement(0.0, c2).prepared;
      const auto cal = calibrate_rf_amplitude(c2, rhoT);
      std::vector<double> lags;
      for (int i = 0; i <= 20; ++i) lags.push_back(2.0 / c2.rf.correlation_rate * i / 20.0);
      const auto ac = rf_autocorrelation(c2.rf, lags, 1000, cfg.seed);
      CsvTable t{{"lag_ms", "re", "im", "model"}, {}};
      for (std::size_t i = 0; i < lags.size(); ++i)
        t.add(std::vector<double>{lags[i], ac[i].real(), ac[i].imag(),
                                  std::exp(-c2.rf.correlation_rate * lags[i])});
      tables.emplace_back("rf_autocorrelation", t);
      man.fits["amplitude_scale"] = cal.amplitude_scale;
      man.fits["t_est_triplet_ms"] = cal.t_est_ms;
      man.fits["evaluations"] = cal.evaluations;
      man.fits["converged"] = cal.converged;
      out << "amplitude_scale " << format_double(cal.amplitude_scale) << " kHz\n";
      fit_failed = !cal.converged;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const FitError& e) {
    err << "fit failure: " << e.what() << "\n";
    return kFitFailure;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    emit_results(tables, man, dir, stem);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return fit_failed ? kFitFailure : kOk;
}

inline int run_command(int argc, char** argv) {
  return run_command(std::vector<std::string>(argv + 1, argv + argc));
}

}  // namespace nvdfs
