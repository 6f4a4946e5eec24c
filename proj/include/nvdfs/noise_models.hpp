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

#include <cstdint>
#include <ostream>
#include <random>
#include <thread>
#include <vector>

#include "nvdfs/nv_model.hpp"

namespace nvdfs {

// ---------------------------------------------------------------------------
// Counter-based seeding: every (seed, index, stream) triple owns an engine.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class Stream : std::uint64_t { Field = 1, Rf = 2, T1 = 3, Counts = 4, Shots = 5 };

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t index, Stream s) {
  const std::uint64_t k =
      splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL) ^
                 splitmix64(static_cast<std::uint64_t>(s) * 0xd1b54a32d192ed03ULL));
  std::seed_seq sq{std::uint32_t(k), std::uint32_t(k >> 32)};
  return std::mt19937_64(sq);
}

// Runs f(i) for i in [0, n) over a thread pool; results are stored by index so
// callers can reduce in a fixed order.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, F&& f, unsigned threads = 0) {
  std::vector<R> out(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) out[i] = f(i);
    });
  for (auto& th : pool) th.join();
  return out;
}

// ---------------------------------------------------------------------------
// Quasi-static field

struct StaticFieldNoise {
  double sigma_b = 0.15;       // G
  double gamma_c13 = 1.0705;   // kHz/G
};

inline double sample_field_gauss(const StaticFieldNoise& n, std::uint64_t seed,
                                 std::uint64_t index = 0) {
  if (n.sigma_b < 0) throw std::invalid_argument("sigma_b must be >= 0");
  if (n.sigma_b == 0) return 0.0;
  auto eng = make_engine(seed, index, Stream::Field);
  return std::normal_distribution<double>(0.0, n.sigma_b)(eng);
}

// Collective nuclear Larmor shift in kHz.
inline double sample_static_field(const StaticFieldNoise& n, std::uint64_t seed,
                                  std::uint64_t index = 0) {
  return n.gamma_c13 * sample_field_gauss(n, seed, index);
}

// ---------------------------------------------------------------------------
// rf noise with an exp(-R|tau|) correlation

struct RfNoiseSpec {
  double correlation_rate = 7.0;  // R, 1/ms
  double bandwidth = 10.0;        // kHz
  double delta_omega = 1.0;       // kHz
  double amplitude_scale = 0.0;   // kHz

  int n_max() const { return int(std::floor(bandwidth / delta_omega + 1e-9)); }

  void validate() const {
    if (!(bandwidth >= delta_omega && delta_omega > 0))
      throw std::invalid_argument("rf noise: need bandwidth >= delta_omega > 0");
    if (correlation_rate <= 0) throw std::invalid_argument("rf noise: R must be positive");
    if (amplitude_scale < 0) throw std::invalid_argument("rf noise: amplitude_scale < 0");
  }

  double weight(int n) const {
    const double w = kTwoPi * n * delta_omega;
    return std::sqrt(2.0 * delta_omega * correlation_rate /
                     (w * w + correlation_rate * correlation_rate));
  }
};

// Omega(t) = sum_n c_n exp(i 2 pi n dw t), t in ms.
class RfWaveform {
 public:
  RfWaveform() = default;
  RfWaveform(const RfNoiseSpec& spec, std::uint64_t seed, std::uint64_t index)
      : dw_(spec.delta_omega), nmax_(spec.n_max()), c_(2 * spec.n_max() + 1) {
    spec.validate();
    auto eng = make_engine(seed, index, Stream::Rf);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    for (int n = -nmax_; n <= nmax_; ++n)
      c_[n + nmax_] = std::polar(spec.amplitude_scale * spec.weight(n), phase(eng));
  }

  cplx operator()(double t_ms) const {
    if (c_.empty()) return 0.0;
    const cplx z = std::polar(1.0, kTwoPi * dw_ * t_ms);
    cplx zp = 1.0, acc = c_[nmax_];
    for (int n = 1; n <= nmax_; ++n) {
      zp *= z;
      acc += c_[nmax_ + n] * zp + c_[nmax_ - n] * std::conj(zp);
    }
    return acc;
  }

  bool zero() const {
    for (const auto& c : c_)
      if (c != 0.0) return false;
    return true;
  }

 private:
  double dw_ = 1.0;
  int nmax_ = 0;
  std::vector<cplx> c_;
};

struct SampledWaveform {
  double dt_us = 0.5;
  std::vector<cplx> samples;
};

inline SampledWaveform synth_rf_noise(const RfNoiseSpec& spec, double duration_us,
                                      std::uint64_t seed, std::uint64_t index = 0,
                                      double dt_us = 0.5) {
  if (duration_us <= 0) throw std::invalid_argument("synth_rf_noise: duration must be > 0");
  if (dt_us > 1e3 / (20.0 * spec.bandwidth))
    throw std::invalid_argument("synth_rf_noise: dt too coarse for the bandwidth");
  RfWaveform w(spec, seed, index);
  SampledWaveform out{dt_us, {}};
  const auto n = std::size_t(std::floor(duration_us / dt_us + 1e-9)) + 1;
  out.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.samples.push_back(w(i * dt_us * 1e-3));
  return out;
}

inline void write_noise_csv(std::ostream& os, const SampledWaveform& w) {
  char buf[96];
  os << "time_us,re,im\n";
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", i * w.dt_us,
                  w.samples[i].real(), w.samples[i].imag());
    os << buf;
  }
}

// <Omega*(t0) Omega(t0 + tau)> / scale^2 averaged over seeds and over a uniform
// grid of t0 covering one period 1/delta_omega.
inline std::vector<cplx> rf_autocorrelation(RfNoiseSpec spec, const std::vector<double>& lags_ms,
                                            std::size_t n_seeds, std::uint64_t seed,
                                            int n_t0 = 64) {
  spec.amplitude_scale = 1.0;
  std::vector<cplx> acc(lags_ms.size(), 0.0);
  const double period = 1.0 / spec.delta_omega;
  for (std::size_t s = 0; s < n_seeds; ++s) {
    RfWaveform w(spec, seed, s);
    for (int j = 0; j < n_t0; ++j) {
      const double t0 = period * j / n_t0;
      const cplx a = std::conj(w(t0));
      for (std::size_t l = 0; l < lags_ms.size(); ++l) acc[l] += a * w(t0 + lags_ms[l]);
    }
  }
  for (auto& v : acc) v /= double(n_seeds) * n_t0;
  return acc;
}

// ---------------------------------------------------------------------------
// Electron T1 as a jump process over ms in {0, -1, +1}

struct T1Process {
  double t1 = 2.5;        // ms
  int initial_ms = 0;
  bool relax = true;      // false: no relaxation at all
};

struct Jump {
  double time_ms;
  int ms;
};

inline std::vector<Jump> t1_trajectory(const T1Process& p, double duration_ms, std::uint64_t seed,
                                       std::uint64_t index = 0) {
  if (p.t1 <= 0) throw std::invalid_argument("t1 must be positive");
  if (duration_ms < 0) throw std::invalid_argument("duration must be >= 0");
  std::vector<Jump> jumps;
  if (!p.relax || !std::isfinite(p.t1)) return jumps;
  auto eng = make_engine(seed, index, Stream::T1);
  std::exponential_distribution<double> wait(1.0 / p.t1);
  std::bernoulli_distribution coin(0.5);
  double t = 0.0;
  int ms = p.initial_ms;
  for (;;) {
    t += wait(eng);
    if (t > duration_ms) break;
    static constexpr int others[3][2] = {{-1, 1}, {0, 1}, {0, -1}};  // from 0, -1, +1
    const int row = ms == 0 ? 0 : (ms == -1 ? 1 : 2);
    ms = others[row][coin(eng) ? 1 : 0];
    jumps.push_back({t, ms});
  }
  return jumps;
}

// ---------------------------------------------------------------------------
// Storage under collective noise

struct NoiseSet {
  bool static_field = false;
  StaticFieldNoise field{};
  bool rf = false;
  RfNoiseSpec rf_spec{};
  bool t1 = false;
  double rf_on_delay_us = 5.0;
  double rf_off_advance_us = 5.0;
  double dt_us = 0.5;
};

struct NoiseRealization {
  double field_offset = 0.0;  // kHz
  RfWaveform rf;
  std::vector<Jump> jumps;
  std::uint64_t seed = 0, index = 0;
};

inline NoiseRealization realize(const NoiseSet& n, const NvSystem& sys, double duration_ms,
                                std::uint64_t seed, std::uint64_t index) {
  NoiseRealization r;
  r.seed = seed;
  r.index = index;
  if (n.static_field) r.field_offset = sample_static_field(n.field, seed, index);
  if (n.rf) r.rf = RfWaveform(n.rf_spec, seed, index);
  if (n.t1) r.jumps = t1_trajectory({sys.t1_electron, 0, true}, duration_ms, seed, index);
  return r;
}

namespace detail {
// Secular shift of each nuclear spin for electron state ms, rotating frame at omega_L.
inline double branch_shift(int ms, const HyperfineParams& p) {
  return ms == 0 ? 0.0 : (ms == -1 ? p.a_par : -p.a_par);
}
}  // namespace detail

// Per-spin propagators of one trajectory over [0, t].
inline std::array<Mat2, 2> storage_propagators(double t_ms, const NvSystem& sys, const NoiseSet& n,
                                               const NoiseRealization& r) {
  std::array<Mat2, 2> U{Mat2::Identity(), Mat2::Identity()};
  const double on = n.rf_on_delay_us * 1e-3, off = t_ms - n.rf_off_advance_us * 1e-3;
  const bool rf = n.rf && !r.rf.zero() && off > on;
  std::vector<double> cuts{0.0, t_ms};
  if (rf) {
    cuts.push_back(on);
    cuts.push_back(off);
  }
  for (const auto& j : r.jumps)
    if (j.time_ms < t_ms) cuts.push_back(j.time_ms);
  std::sort(cuts.begin(), cuts.end());
  const double dt = n.dt_us * 1e-3;
  std::size_t jn = 0;
  int ms = 0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c], b = cuts[c + 1];
    while (jn < r.jumps.size() && r.jumps[jn].time_ms <= a) ms = r.jumps[jn++].ms;
    if (b <= a) continue;
    const double hz[2] = {r.field_offset + detail::branch_shift(ms, sys.spins[0]),
                          r.field_offset + detail::branch_shift(ms, sys.spins[1])};
    const bool driven = rf && a >= on && b <= off;
    if (!driven) {
      for (int s = 0; s < 2; ++s) U[s] = evolve2(hz[s] * spin_z(), b - a) * U[s];
      continue;
    }
    const auto steps = std::max<std::size_t>(1, std::size_t(std::ceil((b - a) / dt - 1e-9)));
    const double h = (b - a) / steps;
    for (std::size_t k = 0; k < steps; ++k) {
      const cplx om = r.rf(a + (k + 0.5) * h);
      const Mat2 drive = om.real() * spin_x() + om.imag() * spin_y();
      const Mat2 u0 = evolve2(hz[0] * spin_z() + drive, h);
      U[0] = u0 * U[0];
      U[1] = (hz[1] == hz[0] ? u0 : evolve2(hz[1] * spin_z() + drive, h)) * U[1];
    }
  }
  return U;
}

inline Mat4 storage_trajectory(const Mat4& rho0, double t_ms, const NvSystem& sys,
                               const NoiseSet& n, std::uint64_t seed, std::uint64_t index) {
  const NoiseRealization r = realize(n, sys, t_ms, seed, index);
  const auto U = storage_propagators(t_ms, sys, n, r);
  const Mat4 W = kron(U[0], U[1]);
  return W * rho0 * W.adjoint();
}

// Trajectory-averaged nuclear state after storage time t.
inline Mat4 storage_channel(const Mat4& rho0, double t_ms, const NvSystem& sys, const NoiseSet& n,
                            std::size_t n_traj, std::uint64_t seed, unsigned threads = 0) {
  if (n_traj < 1) throw std::invalid_argument("storage_channel: n_traj must be >= 1");
  if (t_ms < 0) throw std::invalid_argument("storage_channel: negative time");
  auto parts = parallel_map<Mat4>(
      n_traj, [&](std::size_t i) { return storage_trajectory(rho0, t_ms, sys, n, seed, i); },
      threads);
  Mat4 acc = Mat4::Zero();
  for (const auto& p : parts) acc += p;
  return acc / double(n_traj);
}

}  // namespace nvdfs
