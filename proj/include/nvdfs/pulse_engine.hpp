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

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "nvdfs/nv_model.hpp"

namespace nvdfs {

class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Pulse events and sequences

enum class EventKind { ElectronPi, ElectronRotation, FreeEvolution, ElectronReset, NuclearRf };

struct PulseEvent {
  EventKind kind = EventKind::FreeEvolution;
  char phase = 'X';                      // ElectronPi: 'X' or 'Y'
  Eigen::Vector3d axis{1.0, 0.0, 0.0};   // ElectronRotation / NuclearRf
  double angle = 0.0;                    // rad
  double duration_us = 0.0;              // FreeEvolution / NuclearRf
  int spin = -1;                         // NuclearRf target

  static PulseEvent pi(char phase) {
    PulseEvent e;
    e.kind = EventKind::ElectronPi;
    e.phase = phase;
    e.angle = kPi;
    e.axis = phase == 'X' ? Eigen::Vector3d(1, 0, 0) : Eigen::Vector3d(0, 1, 0);
    return e;
  }
  static PulseEvent rotation(const Eigen::Vector3d& axis, double angle) {
    PulseEvent e;
    e.kind = EventKind::ElectronRotation;
    e.axis = axis;
    e.angle = angle;
    return e;
  }
  static PulseEvent free(double duration_us) {
    PulseEvent e;
    e.kind = EventKind::FreeEvolution;
    e.duration_us = duration_us;
    return e;
  }
  static PulseEvent reset() {
    PulseEvent e;
    e.kind = EventKind::ElectronReset;
    return e;
  }
  // Ideal nuclear rotation followed by `duration_us` of free evolution.
  static PulseEvent nuclear(int spin, const Eigen::Vector3d& axis, double angle,
                            double duration_us = 0.0) {
    PulseEvent e;
    e.kind = EventKind::NuclearRf;
    e.spin = spin;
    e.axis = axis;
    e.angle = angle;
    e.duration_us = duration_us;
    return e;
  }
};

struct PulseSequence {
  std::vector<PulseEvent> events;

  double total_duration_us() const {
    double t = 0.0;
    for (const auto& e : events) t += e.duration_us;
    return t;
  }
  std::size_t pulse_count() const {
    std::size_t n = 0;
    for (const auto& e : events) n += e.kind == EventKind::ElectronPi;
    return n;
  }
  bool has_reset() const {
    for (const auto& e : events)
      if (e.kind == EventKind::ElectronReset) return true;
    return false;
  }
  bool empty() const { return events.empty(); }
  void append(const PulseEvent& e) { events.push_back(e); }
  void append(const PulseSequence& s) {
    events.insert(events.end(), s.events.begin(), s.events.end());
  }
};

namespace detail {
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
inline std::string fmt_axis(const Eigen::Vector3d& a) {
  return fmt_double(a.x()) + "," + fmt_double(a.y()) + "," + fmt_double(a.z());
}
}  // namespace detail

// One event per line: kind axis angle duration_us.
inline void write_sequence(std::ostream& os, const PulseSequence& seq) {
  using detail::fmt_axis;
  using detail::fmt_double;
  for (const auto& e : seq.events) {
    switch (e.kind) {
      case EventKind::ElectronPi:
        os << "pi " << e.phase << ' ' << fmt_double(e.angle) << " 0\n";
        break;
      case EventKind::ElectronRotation:
        os << "rot " << fmt_axis(e.axis) << ' ' << fmt_double(e.angle) << " 0\n";
        break;
      case EventKind::FreeEvolution:
        os << "free - 0 " << fmt_double(e.duration_us) << '\n';
        break;
      case EventKind::ElectronReset:
        os << "reset - 0 0\n";
        break;
      case EventKind::NuclearRf:
        os << "rf" << (e.spin + 1) << ' ' << fmt_axis(e.axis) << ' ' << fmt_double(e.angle)
           << ' ' << fmt_double(e.duration_us) << '\n';
        break;
    }
  }
}

inline PulseSequence read_sequence(std::istream& is) {
  auto parse_axis = [](const std::string& s) {
    Eigen::Vector3d a;
    if (std::sscanf(s.c_str(), "%lf,%lf,%lf", &a.x(), &a.y(), &a.z()) != 3)
      throw std::invalid_argument("bad axis field: " + s);
    return a;
  };
  PulseSequence seq;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind, axis;
    double angle = 0, dur = 0;
    if (!(ls >> kind >> axis >> angle >> dur))
      throw std::invalid_argument("malformed sequence line: " + line);
    if (kind == "pi") {
      PulseEvent e = PulseEvent::pi(axis.at(0));
      e.angle = angle;
      seq.append(e);
    } else if (kind == "rot") {
      seq.append(PulseEvent::rotation(parse_axis(axis), angle));
    } else if (kind == "free") {
      seq.append(PulseEvent::free(dur));
    } else if (kind == "reset") {
      seq.append(PulseEvent::reset());
    } else if (kind == "rf1" || kind == "rf2") {
      seq.append(PulseEvent::nuclear(kind[2] - '1', parse_axis(axis), angle, dur));
    } else {
      throw std::invalid_argument("unknown event kind: " + kind);
    }
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Gate specifications and the per-spin phase ledger

enum class GateKind { ConditionalX, UnconditionalX, UnconditionalZ };

struct GateSpec {
  int target = 0;
  GateKind kind = GateKind::ConditionalX;
  double angle = kPi / 2;
  int k = 3;
  double azimuth = 0.0;  // rotation axis azimuth in the target's logical frame
};

// Lab-frame state of spin s is Rz(phase[s]) applied to its logical state.
struct PhaseLedger {
  std::array<double, 2> phase{0.0, 0.0};
  double get(int s) const { return phase.at(s); }
  void set(int s, double v) { phase.at(s) = wrap_pi(v); }
  void add(int s, double d) { set(s, phase.at(s) + d); }
};

// XY8 phase pattern cycled over the pulse train.
inline char xy8_phase(int i) {
  static constexpr char pattern[8] = {'X', 'Y', 'X', 'Y', 'Y', 'X', 'Y', 'X'};
  return pattern[i % 8];
}

struct ResonanceSolution {
  double tau_us;       // free gap between pulse slots
  double dot;          // n0 . n1 at tau
  double unit_angle;   // folded unit rotation angle (branch 0)
};

// Refines the gate spacing near its seed for a conditional (n0.n1 = -1) or
// unconditional (n0_z = 0) rotation.
inline ResonanceSolution solve_resonance(const GateSpec& spec, const HyperfineParams& p,
                                         const FieldConfig& f, double pi_slot_us = 0.0) {
  const bool cond = spec.kind == GateKind::ConditionalX;
  if (!cond && spec.kind != GateKind::UnconditionalX)
    throw std::invalid_argument("solve_resonance: X gates only");
  const double seed =
      cond ? resonance_tau_seed(spec.k, p, f) : unconditional_tau_seed(spec.k, p, f);
  auto rot = [&](double tc, int b) { return axis_angle(decoupling_block(p, f, tc, 2, b)); };
  auto cost = [&](double tc) {
    if (cond) return rot(tc, 0).axis.dot(rot(tc, 1).axis);
    return std::abs(rot(tc, 0).axis.z());
  };
  const double w = cond ? 0.10 : 0.05;
  const double lo = (1.0 - w) * seed, hi = (1.0 + w) * seed;
  const int n = 2000;
  int best = 0;
  double best_v = 1e300;
  for (int i = 0; i <= n; ++i) {
    const double v = cost(lo + (hi - lo) * i / n);
    if (v < best_v) best_v = v, best = i;
  }
  const double a = lo + (hi - lo) * std::max(0, best - 1) / n;
  const double b = lo + (hi - lo) * std::min(n, best + 1) / n;
  double tc;
  if (cond) {
    tc = boost::math::tools::brent_find_minima(cost, a, b, 52).first;
  } else {
    auto nz = [&](double x) { return rot(x, 0).axis.z(); };
    const double fa = nz(a), fb = nz(b);
    if ((fa < 0) == (fb < 0)) throw SynthesisError("no unconditional point near seed");
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(nz, a, b, fa, fb,
                                               boost::math::tools::eps_tolerance<double>(50), it);
    tc = 0.5 * (r.first + r.second);
  }
  const double dot = rot(tc, 0).axis.dot(rot(tc, 1).axis);
  if (cond ? dot > -1.0 + 1e-8 : std::abs(rot(tc, 0).axis.z()) > 1e-6)
    throw SynthesisError("no resonance within 10% of seed for spin " + p.label);
  const double tau = tc - 0.5 * pi_slot_us;
  if (tau <= 0) throw SynthesisError("resonance shorter than the pulse slot");
  return {tau, dot, folded(rot(tc, 0)).angle};
}

// Pulse count for a target angle: nearest integer ratio with the requested parity.
inline int choose_pulse_count(double per_pulse_angle, double target, bool odd) {
  if (per_pulse_angle <= 0) throw SynthesisError("zero rotation per pulse");
  const double nf = target / per_pulse_angle;
  int best = odd ? 1 : 2;
  for (int c = best; c < 4096; c += 2)
    if (std::abs(c - nf) < std::abs(best - nf)) best = c;
  return best;
}

// Gap tau >= 0 for which the 4-pulse block realises a lab-frame z-angle equal
// to `angle` modulo 2 pi on spin p.
inline double solve_z_gate(double angle, const HyperfineParams& p, const FieldConfig& f,
                           double pi_slot_us, int n_pulses = 4) {
  auto g = [&](double tau) {
    return wrap_pi(z_angle(decoupling_block(p, f, tau + 0.5 * pi_slot_us, n_pulses, 0)) - angle);
  };
  const double step = 1e-3, tmax = 2.0;
  double a = 0.0, ga = g(a);
  if (ga == 0.0) return 0.0;
  for (double b = step; b <= tmax; b += step) {
    const double gb = g(b);
    if (gb == 0.0) return b;
    if ((ga < 0) != (gb < 0) && std::abs(ga - gb) < kPi) {
      std::uintmax_t it = 200;
      auto r = boost::math::tools::toms748_solve(
          g, a, b, ga, gb, boost::math::tools::eps_tolerance<double>(50), it);
      return 0.5 * (r.first + r.second);
    }
    a = b;
    ga = gb;
  }
  throw SynthesisError("z angle unreachable");
}

// ---------------------------------------------------------------------------
// Gate compilation

struct CompiledGateInfo {
  double tau_us = 0.0;
  int n_pulses = 0;
  double total_us = 0.0;
  int k = 0;
};

struct CompileOptions {
  bool compensate = true;
  std::array<int, 2> conditional_order{3, 3};
  std::array<int, 2> unconditional_order{4, 4};
  double spectator_guard = 0.05;
  int max_order_retries = 4;
};

namespace detail {

// Nominal nuclear blocks [branch][spin] of a pulse train.
struct Blocks {
  Mat2 g[2][2];
};

inline Blocks nuclear_blocks(const NvSystem& sys, double tc_us, int n) {
  Blocks B;
  for (int b = 0; b < 2; ++b)
    for (int s = 0; s < 2; ++s) B.g[b][s] = decoupling_block(sys.spins[s], sys.field, tc_us, n, b);
  return B;
}

inline Mat2 pulse_product(int n) {
  Mat2 P = Mat2::Identity();
  for (int i = 0; i < n; ++i) P = (xy8_phase(i) == 'X' ? rx(kPi) : ry(kPi)) * P;
  return P;
}

inline double trace_phase(const Mat2& intended, const Mat2& actual) {
  return std::arg((intended.adjoint() * actual).trace());
}

}  // namespace detail

// Stateful compilation session owning the phase ledger.
class GateCompiler {
 public:
  explicit GateCompiler(NvSystem sys, CompileOptions opt = {})
      : sys_(std::move(sys)), opt_(opt) {}

  const NvSystem& system() const { return sys_; }
  const CompileOptions& options() const { return opt_; }
  PhaseLedger& ledger() { return ledger_; }
  const PhaseLedger& ledger() const { return ledger_; }

  // Resolved (tau, N) for an X gate, with spectator-collision retries.
  CompiledGateInfo gate_info(const GateSpec& spec) {
    auto key = std::make_tuple(spec.target, int(spec.kind), spec.k, spec.angle);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const bool cond = spec.kind == GateKind::ConditionalX;
    GateSpec s = spec;
    for (int attempt = 0; attempt <= opt_.max_order_retries; ++attempt, ++s.k) {
      ResonanceSolution r;
      try {
        r = solve_resonance(s, sys_.spins[s.target], sys_.field, sys_.pi_slot_us);
      } catch (const SynthesisError&) {
        if (attempt == opt_.max_order_retries) throw;
        continue;
      }
      const double tc = r.tau_us + 0.5 * sys_.pi_slot_us;
      const HyperfineParams& q = sys_.spins[1 - s.target];
      const double sdot = axis_angle(decoupling_block(q, sys_.field, tc, 2, 0))
                              .axis.dot(axis_angle(decoupling_block(q, sys_.field, tc, 2, 1)).axis);
      if (std::abs(sdot + 1.0) < opt_.spectator_guard) continue;
      const int n = choose_pulse_count(0.5 * r.unit_angle, std::abs(s.angle), cond);
      CompiledGateInfo info{r.tau_us, n, 2.0 * n * tc, s.k};
      cache_.emplace(key, info);
      return info;
    }
    throw SynthesisError("crosstalk collision for every tried resonance order");
  }

  // Z gate that moves spin s's ledger phase to `target_phase`.
  PulseSequence ledger_compensation(int s, double target_phase = 0.0) {
    const double delta = wrap_2pi(target_phase - ledger_.get(s));
    if (std::min(delta, kTwoPi - delta) < 1e-12) return {};
    GateSpec z{s, GateKind::UnconditionalZ, delta, 0, 0.0};
    return compile_gate(z);
  }

  PulseSequence compile_gate(const GateSpec& spec) {
    PulseSequence out;
    if (spec.angle == 0.0) return out;
    if (spec.kind == GateKind::UnconditionalZ) {
      const double tau =
          solve_z_gate(wrap_2pi(spec.angle), sys_.spins[spec.target], sys_.field, sys_.pi_slot_us);
      const double tc = tau + 0.5 * sys_.pi_slot_us;
      const detail::Blocks B = detail::nuclear_blocks(sys_, tc, 4);
      const double z[2] = {z_angle(B.g[0][0]), z_angle(B.g[0][1])};
      double chi[2];
      for (int b = 0; b < 2; ++b)
        chi[b] = detail::trace_phase(rz(z[0]), B.g[b][0]) + detail::trace_phase(rz(z[1]), B.g[b][1]);
      emit_train(out, tc, 4, chi);
      ledger_.add(0, z[0]);
      ledger_.add(1, z[1]);
      return out;
    }
    const int t = spec.target, o = 1 - t;
    const bool cond = spec.kind == GateKind::ConditionalX;
    GateSpec s = spec;
    s.k = cond ? (spec.k > 0 ? spec.k : opt_.conditional_order[t])
               : (spec.k > 0 ? spec.k : opt_.unconditional_order[t]);
    const CompiledGateInfo info = gate_info(s);
    const double tc = info.tau_us + 0.5 * sys_.pi_slot_us;
    const detail::Blocks B = detail::nuclear_blocks(sys_, tc, info.n_pulses);
    const EulerZXZ e = euler_zxz(B.g[0][t]);
    const double sign = spec.angle < 0 ? -1.0 : 1.0;
    const double az = spec.azimuth + (sign < 0 ? kPi : 0.0);
    if (opt_.compensate) out.append(ledger_compensation(t, -az - e.beta));
    const double zs = z_angle(B.g[0][o]);
    double chi[2];
    for (int b = 0; b < 2; ++b) {
      const double th = (cond && b == 1) ? -e.theta : e.theta;
      const Mat2 want = rz(e.alpha) * rx(th) * rz(e.beta);
      chi[b] = detail::trace_phase(want, B.g[b][t]) + detail::trace_phase(rz(zs), B.g[b][o]);
    }
    emit_train(out, tc, info.n_pulses, chi);
    if (opt_.compensate)
      ledger_.set(t, e.alpha - az);
    else
      ledger_.add(t, e.alpha + e.beta);
    ledger_.add(o, zs);
    return out;
  }

  static PulseSequence electron_rotation(double az, double theta) {
    PulseSequence s;
    if (theta != 0.0)
      s.append(PulseEvent::rotation({std::cos(az), std::sin(az), 0.0}, theta));
    return s;
  }

  static PulseSequence reset() {
    PulseSequence s;
    s.append(PulseEvent::reset());
    return s;
  }

  // Ideal (virtual) nuclear z rotations that return both spins to the logical frame.
  PulseSequence frame_correction() {
    PulseSequence s;
    for (int q = 0; q < 2; ++q) {
      if (ledger_.get(q) != 0.0)
        s.append(PulseEvent::nuclear(q, {0, 0, 1}, -ledger_.get(q)));
      ledger_.set(q, 0.0);
    }
    return s;
  }

 private:
  // Pulse train plus an ideal electron rotation that undoes the pulse product
  // and the branch-dependent global phase chi. Free intervals include the
  // pulse slots, so each pulse sits at the centre of its slot.
  void emit_train(PulseSequence& out, double tc, int n, const double chi[2]) const {
    out.append(PulseEvent::free(tc));
    for (int i = 0; i < n; ++i) {
      out.append(PulseEvent::pi(xy8_phase(i)));
      out.append(PulseEvent::free(i + 1 < n ? 2.0 * tc : tc));
    }
    const Mat2 fix = rz(chi[0] - chi[1]) * detail::pulse_product(n).adjoint();
    const AxisAngle r = axis_angle(fix);
    if (r.angle > 1e-14) out.append(PulseEvent::rotation(r.axis, r.angle));
  }

  NvSystem sys_;
  CompileOptions opt_;
  PhaseLedger ledger_;
  std::map<std::tuple<int, int, int, double>, CompiledGateInfo> cache_;
};

inline PulseSequence compile_gate(const GateSpec& spec, const NvSystem& sys, PhaseLedger& ledger,
                                  CompileOptions opt = {}) {
  GateCompiler c(sys, opt);
  c.ledger() = ledger;
  PulseSequence s = c.compile_gate(spec);
  ledger = c.ledger();
  return s;
}

inline PulseSequence ledger_compensation(PhaseLedger& ledger, int spin, const NvSystem& sys) {
  GateCompiler c(sys);
  c.ledger() = ledger;
  PulseSequence s = c.ledger_compensation(spin, 0.0);
  ledger = c.ledger();
  return s;
}

// ---------------------------------------------------------------------------
// Propagation

// Static offsets applied during gate sequences.
struct GateNoise {
  double nuclear_offset = 0.0;     // kHz, added to omega_L for both spins
  double electron_detuning = 0.0;  // kHz, ms=-1 level shift
};

namespace detail {

inline Mat8 free_propagator(const NvSystem& sys, double dur_us, const GateNoise& nz) {
  const double t = dur_us * 1e-3;
  Mat8 U = Mat8::Zero();
  for (int b = 0; b < 2; ++b) {
    const int ms = branch_ms(b);
    const Mat2 u1 = evolve2(branch_hamiltonian(ms, sys.spins[0], sys.field, nz.nuclear_offset), t);
    const Mat2 u2 = evolve2(branch_hamiltonian(ms, sys.spins[1], sys.field, nz.nuclear_offset), t);
    Mat4 blk = kron(u1, u2);
    if (b == 1 && nz.electron_detuning != 0.0)
      blk *= std::exp(-kI * (kTwoPi * nz.electron_detuning * t));
    U.block<4, 4>(4 * b, 4 * b) = blk;
  }
  return U;
}

inline Mat8 event_unitary(const PulseEvent& e) {
  switch (e.kind) {
    case EventKind::ElectronPi:
    case EventKind::ElectronRotation:
      return tensor_embed(rotation(e.axis, e.angle), RegisterLayout::kElectron);
    case EventKind::NuclearRf:
      return tensor_embed(rotation(e.axis, e.angle), e.spin + 1);
    default:
      return Mat8::Identity();
  }
}

inline Mat8 reset_electron(const Mat8& rho) {
  Mat8 out = Mat8::Zero();
  out.block<4, 4>(0, 0) = partial_trace_electron(rho);
  return out;
}

}  // namespace detail

// Applies a sequence (a channel when resets are present) to an 8-dim state.
inline Mat8 apply_sequence(const PulseSequence& seq, const NvSystem& sys, const Mat8& rho0,
                           const GateNoise& nz = {}) {
  Mat8 rho = rho0;
  Mat8 U = Mat8::Identity();
  bool pending = false;
  for (const auto& e : seq.events) {
    if (e.kind == EventKind::ElectronReset) {
      if (pending) rho = U * rho * U.adjoint();
      rho = detail::reset_electron(rho);
      U.setIdentity();
      pending = false;
      continue;
    }
    if (e.kind != EventKind::FreeEvolution) U = detail::event_unitary(e) * U;
    if (e.duration_us > 0.0) U = detail::free_propagator(sys, e.duration_us, nz) * U;
    pending = true;
  }
  if (pending) rho = U * rho * U.adjoint();
  return rho;
}

// Unitary of a reset-free sequence.
inline Mat8 sequence_propagator(const PulseSequence& seq, const NvSystem& sys,
                                const GateNoise& nz = {}) {
  if (seq.has_reset())
    throw std::invalid_argument("sequence_propagator: sequence contains a reset; use apply_sequence");
  Mat8 U = Mat8::Identity();
  for (const auto& e : seq.events) {
    if (e.kind != EventKind::FreeEvolution) U = detail::event_unitary(e) * U;
    if (e.duration_us > 0.0) U = detail::free_propagator(sys, e.duration_us, nz) * U;
  }
  return U;
}

// ---------------------------------------------------------------------------
// Logical circuits

struct LogicalOp {
  enum class Kind { ElectronRotation, ConditionalX, UnconditionalX, Reset } kind;
  int spin = -1;
  double theta = 0.0;
  double azimuth = 0.0;
};

using LogicalCircuit = std::vector<LogicalOp>;

inline LogicalOp e_rot(double az, double th) {
  return {LogicalOp::Kind::ElectronRotation, -1, th, az};
}
inline LogicalOp cx(int spin, double th, double az) {
  return {LogicalOp::Kind::ConditionalX, spin, th, az};
}
inline LogicalOp ux(int spin, double th, double az) {
  return {LogicalOp::Kind::UnconditionalX, spin, th, az};
}
inline LogicalOp e_reset() { return {LogicalOp::Kind::Reset}; }

// Electron <-> nuclear-2 polarisation transfer, the entangling conditional
// gate, a phase-controlled electron <-> nuclear-1 swap and a final X(pi/2) on
// nuclear 1. phi = pi gives the singlet, phi = 0 the triplet.
inline LogicalCircuit entanglement_program(double phi) {
  const double h = kPi / 2;
  return {
      e_rot(0, h), cx(1, h, 3 * h), e_rot(0, -h), e_rot(h, -h), cx(1, h, kPi), e_rot(h, h),
      e_reset(),
      e_rot(0, h), cx(1, h, 0.0),
      cx(0, h, 3 * h), ux(0, h, 0.0),
      e_rot(0, h), cx(0, h, 3 * h + phi), e_rot(0, -h),
      e_rot(h, -h), cx(0, h, kPi), e_rot(h, h),
      ux(0, h, 0.0),
      e_reset(),
  };
}

inline Mat8 ideal_unitary(const LogicalOp& op) {
  switch (op.kind) {
    case LogicalOp::Kind::ElectronRotation:
      return tensor_embed(raz(op.azimuth, op.theta), RegisterLayout::kElectron);
    case LogicalOp::Kind::UnconditionalX:
      return tensor_embed(raz(op.azimuth, op.theta), op.spin + 1);
    case LogicalOp::Kind::ConditionalX: {
      const Mat2 id = Mat2::Identity();
      const Mat2 r0 = raz(op.azimuth, op.theta), r1 = raz(op.azimuth, -op.theta);
      if (op.spin == 0) return kron(projector(0), r0, id) + kron(projector(1), r1, id);
      return kron(projector(0), id, r0) + kron(projector(1), id, r1);
    }
    default:
      return Mat8::Identity();
  }
}

inline Mat8 initial_register() {
  return kron(projector(0), maximally_mixed<4>());
}

// Ideal-gate simulation: every gate exact on its target, identity elsewhere.
inline Mat8 simulate_ideal(const LogicalCircuit& c, Mat8 rho = initial_register()) {
  for (const auto& op : c) {
    if (op.kind == LogicalOp::Kind::Reset)
      rho = detail::reset_electron(rho);
    else
      rho = conjugate<8>(ideal_unitary(op), rho);
  }
  return rho;
}

struct CompiledCircuit {
  PulseSequence sequence;
  PhaseLedger final_ledger;  // before the closing frame correction
};

inline CompiledCircuit compile_circuit(const LogicalCircuit& c, const NvSystem& sys,
                                       CompileOptions opt = {}) {
  GateCompiler gc(sys, opt);
  CompiledCircuit out;
  for (const auto& op : c) {
    switch (op.kind) {
      case LogicalOp::Kind::ElectronRotation:
        out.sequence.append(GateCompiler::electron_rotation(op.azimuth, op.theta));
        break;
      case LogicalOp::Kind::Reset:
        out.sequence.append(GateCompiler::reset());
        break;
      case LogicalOp::Kind::ConditionalX:
        out.sequence.append(gc.compile_gate(
            {op.spin, GateKind::ConditionalX, op.theta, 0, op.azimuth}));
        break;
      case LogicalOp::Kind::UnconditionalX:
        out.sequence.append(gc.compile_gate(
            {op.spin, GateKind::UnconditionalX, op.theta, 0, op.azimuth}));
        break;
    }
  }
  out.final_ledger = gc.ledger();
  if (opt.compensate) out.sequence.append(gc.frame_correction());
  return out;
}

inline PulseSequence entanglement_circuit(double phi, const NvSystem& sys, CompileOptions opt = {}) {
  return compile_circuit(entanglement_program(phi), sys, opt).sequence;
}

}  // namespace nvdfs
