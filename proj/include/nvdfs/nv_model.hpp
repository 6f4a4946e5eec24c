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

#include <string>
#include <vector>

#include "nvdfs/spin_core.hpp"
#include "nvdfs/su2.hpp"

namespace nvdfs {

struct HyperfineParams {
  double a_par = 0.0;   // kHz, signed
  double a_perp = 0.0;  // kHz, >= 0
  std::string label;
};

struct FieldConfig {
  double b_z = 480.0;            // Gauss
  double gamma_c13 = 1.0705;     // kHz/G
  double gamma_e = 2802.5;       // kHz/G
  double omega_L() const { return gamma_c13 * b_z; }
};

struct NvSystem {
  FieldConfig field;
  std::array<HyperfineParams, 2> spins;
  double t1_electron = 2.5;  // ms
  // Time slot reserved for each electron pi pulse; pulses act instantaneously
  // at the slot centre.
  double pi_slot_us = 0.036;

  void validate() const {
    if (field.b_z <= 0 || field.omega_L() <= 0)
      throw std::invalid_argument("field must be positive");
    if (t1_electron <= 0) throw std::invalid_argument("t1 must be positive");
    if (spins[0].label == spins[1].label)
      throw std::invalid_argument("spin labels must be distinct");
    for (const auto& s : spins)
      if (s.a_perp < 0) throw std::invalid_argument("a_perp must be >= 0");
  }
};

inline NvSystem default_system() {
  NvSystem s;
  s.spins[0] = {-77.02, 114.5, "1"};
  s.spins[1] = {71.03, 58.7, "2"};
  return s;
}

inline bool weak_coupling_warning(const HyperfineParams& p, const FieldConfig& f) {
  return std::abs(p.a_par) > f.omega_L() / 2;
}

// Electron index (0 -> ms=0, 1 -> ms=-1) to ms.
inline int branch_ms(int b) { return b == 0 ? 0 : -1; }

// Nuclear Hamiltonian for electron state ms; offset shifts omega_L (kHz).
inline Mat2 branch_hamiltonian(int ms, const HyperfineParams& p, const FieldConfig& f,
                               double offset = 0.0) {
  const double wl = f.omega_L() + offset;
  switch (ms) {
    case 0:
      return wl * spin_z();
    case -1:
      return (wl + p.a_par) * spin_z() + p.a_perp * spin_x();
    case 1:
      return (wl - p.a_par) * spin_z() - p.a_perp * spin_x();
    default:
      throw std::invalid_argument("branch_hamiltonian: ms must be 0, -1 or +1");
  }
}

struct OdmrFrequencies {
  double w0, wp1, wm1;  // kHz
};

inline OdmrFrequencies odmr_frequencies(const HyperfineParams& p, const FieldConfig& f) {
  const double wl = f.omega_L();
  return {wl, std::hypot(p.a_par - wl, p.a_perp), std::hypot(p.a_par + wl, p.a_perp)};
}

// Recovers (A_par, A_perp) from the three nuclear resonance frequencies.
inline HyperfineParams invert_odmr(const OdmrFrequencies& w, std::string label = {}) {
  const double wl = w.w0;
  const double a_par = (w.wm1 * w.wm1 - w.wp1 * w.wp1) / (4.0 * wl);
  const double s = 0.5 * (w.wp1 * w.wp1 + w.wm1 * w.wm1) - a_par * a_par - wl * wl;
  return {a_par, std::sqrt(std::max(0.0, s)), std::move(label)};
}

// Conditional resonance seed (2k-1)/(2(2 wL + A_par)), in microseconds.
inline double resonance_tau_seed(int k, const HyperfineParams& p, const FieldConfig& f) {
  if (k < 1) throw std::invalid_argument("resonance order must be >= 1");
  const double den = 2.0 * (2.0 * f.omega_L() + p.a_par);
  if (den <= 0) throw std::invalid_argument("nonpositive resonance denominator");
  return 1e3 * (2.0 * k - 1.0) / den;
}

// Seed for the unconditional rotation between conditional orders.
inline double unconditional_tau_seed(int k, const HyperfineParams& p, const FieldConfig& f) {
  if (k < 1) throw std::invalid_argument("resonance order must be >= 1");
  const double den = 2.0 * (2.0 * f.omega_L() + p.a_par);
  if (den <= 0) throw std::invalid_argument("nonpositive resonance denominator");
  return 1e3 * (2.0 * k) / den;
}

// Nuclear propagator of N pulses with centre half-spacing tc_us, starting in
// electron index b0: tc, then (2 tc) between pulses, then tc.
inline Mat2 decoupling_block(const HyperfineParams& p, const FieldConfig& f, double tc_us,
                             int n_pulses, int b0, double offset = 0.0) {
  const double t = tc_us * 1e-3;
  const Mat2 u[2][2] = {
      {evolve2(branch_hamiltonian(0, p, f, offset), t),
       evolve2(branch_hamiltonian(0, p, f, offset), 2 * t)},
      {evolve2(branch_hamiltonian(-1, p, f, offset), t),
       evolve2(branch_hamiltonian(-1, p, f, offset), 2 * t)}};
  Mat2 M = u[b0][0];
  int b = b0;
  for (int i = 0; i < n_pulses; ++i) {
    b = 1 - b;
    M = (i + 1 < n_pulses ? u[b][1] : u[b][0]) * M;
  }
  return M;
}

// Net rotation of the tau-pi-2tau-pi-tau unit for electron state ms.
inline AxisAngle unit_rotation(double tau_us, const HyperfineParams& p, const FieldConfig& f,
                               int ms, double pi_slot_us = 0.0) {
  if (ms != 0 && ms != -1) throw std::invalid_argument("unit_rotation: ms must be 0 or -1");
  return axis_angle(decoupling_block(p, f, tau_us + 0.5 * pi_slot_us, 2, ms == 0 ? 0 : 1));
}

// Probability that electron coherence survives N pulses (N even).
inline double analytic_coherence(int N, double tau_us, const HyperfineParams& p,
                                 const FieldConfig& f, double pi_slot_us = 0.0) {
  if (N <= 0 || N % 2) throw std::invalid_argument("analytic_coherence: N must be even");
  const AxisAngle r0 = unit_rotation(tau_us, p, f, 0, pi_slot_us);
  const AxisAngle r1 = unit_rotation(tau_us, p, f, -1, pi_slot_us);
  const double dot = r0.axis.dot(r1.axis);
  const double s = std::sin(0.5 * N * (0.5 * r0.angle));
  const double M = 1.0 - (1.0 - dot) * s * s;
  return std::clamp(0.5 * (M + 1.0), 0.0, 1.0);
}

// Resonant weak-coupling approximation (cos(N mx) + 1)/2.
inline double resonant_coherence_approx(int N, const HyperfineParams& p, const FieldConfig& f) {
  const double mx = p.a_perp / std::hypot(p.a_par + f.omega_L(), p.a_perp);
  return 0.5 * (std::cos(N * mx) + 1.0);
}

}  // namespace nvdfs
