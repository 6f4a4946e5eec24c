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

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvdfs/fitting.hpp"
#include "nvdfs/noise_models.hpp"
#include "nvdfs/nv_model.hpp"
#include "nvdfs/pulse_engine.hpp"
#include "nvdfs/readout_model.hpp"
#include "nvdfs/tomography.hpp"

namespace nvdfs {

enum class NoiseMode { None, DephasingOnly, GeneralCollective };
enum class StoredState { S, T };

struct ExperimentConfig {
  NvSystem system = default_system();
  CompileOptions compile{};

  // Noise toggles.
  bool field_jitter = false;       // quasi-static collective field, gates and storage
  StaticFieldNoise field{};
  bool t1 = true;                  // electron T1 during storage and gate repetition
  RfNoiseSpec rf{};
  bool crosstalk = true;           // false: ideal gates on the target only
  bool init_errors = false;
  bool readout_errors = false;
  InitPopulations init{};
  Scenario scenario = Scenario::NoMemory;

  std::uint64_t shots = 1000000;   // 0: exact probabilities
  std::size_t trajectories = 1000;
  std::uint64_t seed = 1;
  std::vector<double> grid;        // times (ms) or frequencies (kHz)
  unsigned threads = 0;
  std::string output;

  void validate() const {
    system.validate();
    init.validate();
    rf.validate();
    if (trajectories < 1) throw std::invalid_argument("trajectories must be >= 1");
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("grid must be strictly increasing");
  }

  double contrast() const { return readout_errors ? readout_contrast(init, scenario) : 1.0; }
};

inline std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 2 || !(lo > 0) || !(hi > lo)) throw std::invalid_argument("log_grid: bad range");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
  return g;
}

inline std::vector<double> default_storage_grid() { return log_grid(0.025, 4.0, 8); }

// ---------------------------------------------------------------------------
// ODMR

struct OdmrScan {
  int spin = 0, ms = 0;
  std::vector<double> freq, signal, stderr_;
  double true_center = 0.0;
  DecayFit fit;
  double center() const { return fit.center(); }
  double center_sigma() const { return fit.sigma(2); }
};

inline double odmr_pulse_ms() { return 0.6; }

// Spin-flip probability of a pi pulse of length T (ms) detuned by d (kHz).
inline double rabi_flip(double d, double t_ms = odmr_pulse_ms()) {
  const double om = 1.0 / (2.0 * t_ms);
  const double w = std::hypot(om, d);
  const double s = std::sin(kPi * w * t_ms);
  return om * om / (w * w) * s * s;
}

inline double odmr_frequency(int ms, const HyperfineParams& p, const FieldConfig& f) {
  const auto w = odmr_frequencies(p, f);
  switch (ms) {
    case 0:
      return w.w0;
    case 1:
      return w.wp1;
    case -1:
      return w.wm1;
  }
  throw std::invalid_argument("odmr: ms must be 0, +1 or -1");
}

// 41 points over +-1.4 kHz around the expected line of the nominal system.
inline std::vector<double> odmr_grid(double center, double half_span = 1.4, int n = 41) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = center - half_span + 2.0 * half_span * i / (n - 1);
  return g;
}

inline OdmrScan run_odmr_scan(int spin, int ms, const ExperimentConfig& cfg) {
  cfg.validate();
  if (spin != 0 && spin != 1) throw std::invalid_argument("odmr: spin index must be 0 or 1");
  OdmrScan out;
  out.spin = spin;
  out.ms = ms;
  out.true_center = odmr_frequency(ms, cfg.system.spins[spin], cfg.system.field);
  out.freq = cfg.grid.empty() ? odmr_grid(out.true_center) : cfg.grid;
  if (out.freq.size() < 5) throw std::invalid_argument("odmr: need at least 5 grid points");
  if (!(out.freq.front() < out.true_center && out.true_center < out.freq.back()))
    throw std::domain_error("odmr: scan grid does not bracket the resonance");
  const double c = cfg.contrast();
  for (std::size_t i = 0; i < out.freq.size(); ++i) {
    const double p = 0.5 * (1.0 - c) + c * rabi_flip(out.freq[i] - out.true_center);
    if (cfg.shots == 0) {
      out.signal.push_back(p);
      out.stderr_.push_back(0.0);
      continue;
    }
    auto eng = make_engine(cfg.seed, std::uint64_t(i) + 1000 * std::uint64_t(spin * 3 + ms + 1),
                           Stream::Shots);
    const double k = double(std::binomial_distribution<std::uint64_t>(cfg.shots, p)(eng));
    const double ph = k / double(cfg.shots);
    out.signal.push_back(ph);
    out.stderr_.push_back(std::sqrt(ph * (1 - ph) / double(cfg.shots)));
  }
  out.fit = fit_decay(out.freq, out.signal, FitModel::GaussianPeak);
  if (!(out.freq.front() < out.center() && out.center() < out.freq.back()))
    throw std::domain_error("odmr: fitted center outside the scan");
  return out;
}

// Three scans (ms = 0, +1, -1) inverted into (A_par, A_perp).
inline HyperfineParams calibrate_hyperfine(int spin, const ExperimentConfig& cfg,
                                           std::array<OdmrScan, 3>* scans = nullptr) {
  std::array<OdmrScan, 3> s{run_odmr_scan(spin, 0, cfg), run_odmr_scan(spin, 1, cfg),
                            run_odmr_scan(spin, -1, cfg)};
  if (scans) *scans = s;
  return invert_odmr({s[0].center(), s[1].center(), s[2].center()},
                     cfg.system.spins[spin].label);
}

// ---------------------------------------------------------------------------
// Gate repetition

struct RepetitionResult {
  std::vector<double> n, y, stderr_;
  std::optional<DecayFit> fit;
  std::string fit_error;
};

inline GateNoise sample_gate_noise(const ExperimentConfig& cfg, std::uint64_t index) {
  if (!cfg.field_jitter) return {};
  const double db = sample_field_gauss(cfg.field, cfg.seed, index);
  return {cfg.field.gamma_c13 * db, cfg.system.field.gamma_e * db};
}

// Applies `gate` N = 1..n_max times with the electron held in `branch` and
// records <sigma_y> of the target in its logical frame.
inline RepetitionResult run_gate_repetition(const GateSpec& gate, int branch, int n_max,
                                            const ExperimentConfig& cfg) {
  cfg.validate();
  if (n_max < 4) throw std::invalid_argument("gate repetition: n_max must be >= 4");
  GateCompiler gc(cfg.system, cfg.compile);
  std::vector<PulseSequence> steps;
  std::vector<Mat8> frames;
  std::vector<double> t_end;
  double t = 0.0;
  for (int k = 0; k < n_max; ++k) {
    steps.push_back(gc.compile_gate(gate));
    t += steps.back().total_duration_us() * 1e-3;
    t_end.push_back(t);
    GateCompiler probe = gc;
    frames.push_back(sequence_propagator(probe.frame_correction(), cfg.system));
  }
  const int tq = gate.target + 1;
  const Mat8 yop = tensor_embed(pauli::Y(), tq);
  const Mat2 up = projector(0), mix = Mat2::Identity() / 2.0;
  const Mat8 rho0 =
      gate.target == 0 ? kron(projector(branch), up, mix) : kron(projector(branch), mix, up);
  const bool noisy = cfg.field_jitter || cfg.t1;
  const std::size_t n_traj = noisy ? cfg.trajectories : 1;
  auto per = parallel_map<std::vector<double>>(
      n_traj,
      [&](std::size_t i) {
        const GateNoise nz = sample_gate_noise(cfg, i);
        double t_jump = std::numeric_limits<double>::infinity();
        if (cfg.t1) {
          const auto j = t1_trajectory({cfg.system.t1_electron, branch_ms(branch), true},
                                       t_end.back(), cfg.seed, i);
          if (!j.empty()) t_jump = j.front().time_ms;
        }
        std::vector<double> ys(n_max);
        Mat8 rho = rho0;
        for (int k = 0; k < n_max; ++k) {
          rho = apply_sequence(steps[k], cfg.system, rho, nz);
          // A relaxation event randomises the target phase.
          ys[k] = t_end[k] < t_jump
                      ? std::real((yop * conjugate<8>(frames[k], rho)).trace())
                      : 0.0;
        }
        return ys;
      },
      cfg.threads);
  RepetitionResult out;
  for (int k = 0; k < n_max; ++k) {
    double m = 0, m2 = 0;
    for (const auto& v : per) m += v[k], m2 += v[k] * v[k];
    m /= double(n_traj);
    const double var = n_traj > 1 ? (m2 / n_traj - m * m) * n_traj / (n_traj - 1) : 0.0;
    out.n.push_back(k + 1);
    out.y.push_back(m);
    out.stderr_.push_back(std::sqrt(std::max(0.0, var) / n_traj));
  }
  try {
    out.fit = fit_decay(out.n, out.y, FitModel::SinusoidEnvelope);
  } catch (const FitError& e) {
    out.fit_error = e.what();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Entanglement preparation

struct EntanglementResult {
  double phi = kPi;
  Mat4 prepared = Mat4::Identity() / 4.0;  // nuclear state before readout
  Mat4 measured = Mat4::Identity() / 4.0;  // after readout contrast
  double fidelity_prepared = 0.0;
  double fidelity = 0.0;                   // of the measured state
  double fidelity_stderr = 0.0;
  double duration_us = 0.0;
  std::size_t event_count = 0;
  std::optional<ReconstructionResult> tomography;
  double tomography_fidelity = 0.0;
};

inline Vec4 target_state(double phi) {
  return std::abs(wrap_pi(phi)) > kPi / 2 ? singlet() : triplet0();
}

namespace detail {

inline Mat8 mix_nuclear2(const Mat8& rho) {
  Mat8 out = Mat8::Zero();
  for (int e = 0; e < 2; ++e)
    for (int f = 0; f < 2; ++f) {
      const Mat4 blk = rho.block<4, 4>(4 * e, 4 * f);
      Mat2 red;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) red(a, b) = blk(2 * a, 2 * b) + blk(2 * a + 1, 2 * b + 1);
      out.block<4, 4>(4 * e, 4 * f) = kron(red, Mat2(Mat2::Identity() / 2.0));
    }
  return out;
}

// Splits a sequence after its first reset.
inline std::pair<PulseSequence, PulseSequence> split_at_reset(const PulseSequence& s) {
  std::pair<PulseSequence, PulseSequence> out;
  bool seen = false;
  for (const auto& e : s.events) {
    (seen ? out.second : out.first).events.push_back(e);
    if (e.kind == EventKind::ElectronReset) seen = true;
  }
  return out;
}

inline LogicalCircuit split_circuit(const LogicalCircuit& c, bool second) {
  LogicalCircuit out;
  bool seen = false;
  for (const auto& op : c) {
    if (seen == second) out.push_back(op);
    if (op.kind == LogicalOp::Kind::Reset) seen = true;
  }
  return out;
}

}  // namespace detail

inline EntanglementResult run_entanglement(double phi, const ExperimentConfig& cfg,
                                           bool with_tomography = false) {
  cfg.validate();
  EntanglementResult out;
  out.phi = phi;
  const Vec4 target = target_state(phi);
  const double pol = cfg.init_errors ? nuclear_polarization(cfg.init, cfg.scenario) : 1.0;

  auto branches = [&](const Mat8& mid, auto&& finish) {
    Mat4 good = partial_trace_electron(finish(mid));
    if (pol >= 1.0) return good;
    Mat4 bad = partial_trace_electron(finish(detail::mix_nuclear2(mid)));
    return apply_init_error<4>(good, cfg.init, cfg.scenario, bad);
  };

  std::vector<Mat4> per;
  if (!cfg.crosstalk) {
    const LogicalCircuit prog = entanglement_program(phi);
    const LogicalCircuit head = detail::split_circuit(prog, false), tail = detail::split_circuit(prog, true);
    const Mat8 mid = simulate_ideal(head);
    per.push_back(branches(mid, [&](const Mat8& r) { return simulate_ideal(tail, r); }));
  } else {
    const PulseSequence seq = entanglement_circuit(phi, cfg.system, cfg.compile);
    out.duration_us = seq.total_duration_us();
    out.event_count = seq.events.size();
    const auto [head, tail] = detail::split_at_reset(seq);
    const std::size_t n = cfg.field_jitter ? cfg.trajectories : 1;
    per = parallel_map<Mat4>(
        n,
        [&](std::size_t i) {
          const GateNoise nz = sample_gate_noise(cfg, i);
          const Mat8 mid = apply_sequence(head, cfg.system, initial_register(), nz);
          return branches(mid, [&](const Mat8& r) { return apply_sequence(tail, cfg.system, r, nz); });
        },
        cfg.threads);
  }
  Mat4 acc = Mat4::Zero();
  double m = 0, m2 = 0;
  const double c = cfg.contrast();
  for (const auto& r : per) {
    acc += r;
    const double f = state_fidelity(target, apply_readout_contrast(r, c));
    m += f, m2 += f * f;
  }
  const double n = double(per.size());
  out.prepared = acc / n;
  out.measured = apply_readout_contrast(out.prepared, c);
  out.fidelity_prepared = state_fidelity(target, out.prepared);
  out.fidelity = state_fidelity(target, out.measured);
  out.fidelity_stderr = n > 1 ? std::sqrt(std::max(0.0, m2 / n - (m / n) * (m / n)) / (n - 1)) : 0.0;
  if (with_tomography) {
    const Mat4 rho = 0.5 * (out.measured + out.measured.adjoint());
    out.tomography = mle_reconstruct(cfg.shots == 0
                                         ? exact_tomography(rho, 1e6)
                                         : simulate_tomography(rho, cfg.shots, cfg.seed));
    out.tomography_fidelity = fidelity_report(*out.tomography, target);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Storage

struct StorageResult {
  StoredState state = StoredState::S;
  NoiseMode mode = NoiseMode::DephasingOnly;
  std::vector<double> t_ms, fidelity, stderr_;
  std::optional<DecayFit> fit;
  std::string fit_error;
  double initial_fidelity = 0.0;
};

inline NoiseSet storage_noise(NoiseMode mode, const ExperimentConfig& cfg) {
  NoiseSet n;
  n.field = cfg.field;
  n.rf_spec = cfg.rf;
  n.t1 = cfg.t1;
  n.static_field = mode != NoiseMode::None && cfg.field_jitter;
  n.rf = mode == NoiseMode::GeneralCollective;
  return n;
}

inline double phi_for(StoredState s) { return s == StoredState::S ? kPi : 0.0; }

// Fidelity with the stored target versus storage time. `prepared` is the
// nuclear state before readout; by default it comes from run_entanglement.
inline StorageResult run_storage_experiment(StoredState state, NoiseMode mode,
                                            const ExperimentConfig& cfg,
                                            std::optional<Mat4> prepared = std::nullopt) {
  cfg.validate();
  StorageResult out;
  out.state = state;
  out.mode = mode;
  out.t_ms = cfg.grid.empty() ? default_storage_grid() : cfg.grid;
  if (out.t_ms.front() < 0) throw std::invalid_argument("storage: negative time");
  const Vec4 target = target_state(phi_for(state));
  const Mat4 rho0 = prepared ? *prepared : run_entanglement(phi_for(state), cfg).prepared;
  const NoiseSet ns = storage_noise(mode, cfg);
  const double c = cfg.contrast();
  out.initial_fidelity = state_fidelity(target, apply_readout_contrast(rho0, c));
  for (double t : out.t_ms) {
    const auto f = parallel_map<double>(
        cfg.trajectories,
        [&](std::size_t i) {
          const Mat4 r = storage_trajectory(rho0, t, cfg.system, ns, cfg.seed, i);
          return state_fidelity(target, apply_readout_contrast(r, c));
        },
        cfg.threads);
    double m = 0, m2 = 0;
    for (double v : f) m += v, m2 += v * v;
    const double n = double(f.size());
    m /= n;
    out.fidelity.push_back(m);
    out.stderr_.push_back(n > 1 ? std::sqrt(std::max(0.0, m2 / n - m * m) / (n - 1)) : 0.0);
  }
  try {
    out.fit = fit_decay(out.t_ms, out.fidelity, FitModel::ExpFloor);
  } catch (const FitError& e) {
    out.fit_error = e.what();
  }
  return out;
}

struct RfCalibration {
  double amplitude_scale = 0.0;
  double t_est_ms = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Bisects the rf amplitude until the fitted triplet lifetime lies in [lo, hi] ms.
inline RfCalibration calibrate_rf_amplitude(ExperimentConfig cfg, const Mat4& triplet_prepared,
                                            double lo = 0.300, double hi = 0.420,
                                            double a_lo = 0.0, double a_hi = 4.0,
                                            int max_iter = 30) {
  RfCalibration out;
  const double goal = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    const double a = it == 0 ? 0.5 * (a_lo + a_hi) : out.amplitude_scale;
    cfg.rf.amplitude_scale = a;
    const auto r = run_storage_experiment(StoredState::T, NoiseMode::GeneralCollective, cfg,
                                          triplet_prepared);
    ++out.evaluations;
    const double T = r.fit ? r.fit->t_est() : std::numeric_limits<double>::infinity();
    out.t_est_ms = T;
    if (T >= lo && T <= hi) {
      out.converged = true;
      out.amplitude_scale = a;
      return out;
    }
    if (T > goal)
      a_lo = a;
    else
      a_hi = a;
    out.amplitude_scale = 0.5 * (a_lo + a_hi);
  }
  return out;
}

}  // namespace nvdfs
