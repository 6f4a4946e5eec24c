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
#include <random>
#include <string>
#include <vector>

#include "nvdfs/noise_models.hpp"
#include "nvdfs/spin_core.hpp"

namespace nvdfs {

enum class Basis { I, X, Y, Z };

inline Mat2 basis_pauli(Basis b) {
  switch (b) {
    case Basis::X:
      return pauli::X();
    case Basis::Y:
      return pauli::Y();
    case Basis::Z:
      return pauli::Z();
    default:
      return pauli::I();
  }
}

inline char basis_char(Basis b) { return "IXYZ"[int(b)]; }

struct MeasurementSetting {
  Basis b1 = Basis::I, b2 = Basis::I;
  bool correlation() const { return b1 != Basis::I && b2 != Basis::I; }
  std::string name() const { return {basis_char(b1), basis_char(b2)}; }
  int n_outcomes() const { return correlation() ? 4 : 2; }
  bool operator==(const MeasurementSetting&) const = default;
};

inline MeasurementSetting setting_from_name(const std::string& s) {
  auto parse = [](char c) {
    switch (c) {
      case 'I':
        return Basis::I;
      case 'X':
        return Basis::X;
      case 'Y':
        return Basis::Y;
      case 'Z':
        return Basis::Z;
    }
    throw std::invalid_argument(std::string("bad basis letter ") + c);
  };
  if (s.size() != 2) throw std::invalid_argument("setting name must have two letters");
  return {parse(s[0]), parse(s[1])};
}

// XI, YI, ZI, IX, IY, IZ, then the nine correlations in row order.
inline std::vector<MeasurementSetting> measurement_settings() {
  const Basis xyz[3] = {Basis::X, Basis::Y, Basis::Z};
  std::vector<MeasurementSetting> v;
  for (Basis b : xyz) v.push_back({b, Basis::I});
  for (Basis b : xyz) v.push_back({Basis::I, b});
  for (Basis a : xyz)
    for (Basis b : xyz) v.push_back({a, b});
  return v;
}

// Outcome projectors; label bit 0 means eigenvalue +1.
inline std::vector<Mat4> outcome_projectors(const MeasurementSetting& s) {
  auto proj = [](Basis b, int o) {
    return Mat2((Mat2::Identity() + (o == 0 ? 1.0 : -1.0) * basis_pauli(b)) / 2.0);
  };
  const Mat2 id = Mat2::Identity();
  std::vector<Mat4> out;
  if (s.correlation()) {
    for (int o1 = 0; o1 < 2; ++o1)
      for (int o2 = 0; o2 < 2; ++o2) out.push_back(kron(proj(s.b1, o1), proj(s.b2, o2)));
  } else if (s.b1 != Basis::I) {
    for (int o = 0; o < 2; ++o) out.push_back(kron(proj(s.b1, o), id));
  } else {
    for (int o = 0; o < 2; ++o) out.push_back(kron(id, proj(s.b2, o)));
  }
  return out;
}

inline std::vector<std::string> outcome_labels(const MeasurementSetting& s) {
  if (s.correlation()) return {"00", "01", "10", "11"};
  return {"0", "1"};
}

inline double expectation(const Mat4& rho, const MeasurementSetting& s) {
  return std::real((kron(basis_pauli(s.b1), basis_pauli(s.b2)) * rho).trace());
}

inline std::vector<double> outcome_probabilities(const Mat4& rho, const MeasurementSetting& s) {
  std::vector<double> p;
  for (const auto& P : outcome_projectors(s)) p.push_back(std::max(0.0, std::real((P * rho).trace())));
  return p;
}

struct CountsRecord {
  MeasurementSetting setting;
  std::vector<double> counts;  // per outcome, label order
  double shots = 0;
  std::uint64_t seed = 0;
};

inline CountsRecord simulate_counts(const Mat4& rho, const MeasurementSetting& s,
                                    std::uint64_t shots, std::uint64_t seed,
                                    std::uint64_t index = 0) {
  if (shots < 1) throw std::invalid_argument("simulate_counts: shots must be >= 1");
  if (!check_density(rho, 1e-8, 1e-8).ok())
    throw std::invalid_argument("simulate_counts: invalid density matrix");
  auto p = outcome_probabilities(rho, s);
  auto eng = make_engine(seed, index, Stream::Counts);
  CountsRecord r{s, std::vector<double>(p.size(), 0.0), double(shots), seed};
  std::uint64_t left = shots;
  double mass = 0;
  for (double v : p) mass += v;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    const double q = mass > 0 ? std::clamp(p[k] / mass, 0.0, 1.0) : 0.0;
    const auto c = std::binomial_distribution<std::uint64_t>(left, q)(eng);
    r.counts[k] = double(c);
    left -= c;
    mass -= p[k];
  }
  r.counts.back() = double(left);
  return r;
}

// All 15 settings; setting i uses counter index i.
inline std::vector<CountsRecord> simulate_tomography(const Mat4& rho, std::uint64_t shots,
                                                     std::uint64_t seed) {
  std::vector<CountsRecord> out;
  const auto settings = measurement_settings();
  for (std::size_t i = 0; i < settings.size(); ++i)
    out.push_back(simulate_counts(rho, settings[i], shots, seed, i));
  return out;
}

// Records carrying expected (non-integer) counts.
inline std::vector<CountsRecord> exact_tomography(const Mat4& rho, double shots) {
  std::vector<CountsRecord> out;
  for (const auto& s : measurement_settings()) {
    CountsRecord r{s, outcome_probabilities(rho, s), shots, 0};
    for (auto& c : r.counts) c *= shots;
    out.push_back(r);
  }
  return out;
}

struct ReconstructionResult {
  Mat4 rho = Mat4::Identity() / 4.0;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

using Params = Eigen::Matrix<double, 16, 1>;

// Lower-triangular T: 4 real diagonal entries then 6 complex off-diagonals.
inline Mat4 params_to_t(const Params& x) {
  Mat4 T = Mat4::Zero();
  int k = 4;
  for (int i = 0; i < 4; ++i) T(i, i) = x(i);
  for (int i = 1; i < 4; ++i)
    for (int j = 0; j < i; ++j, k += 2) T(i, j) = cplx(x(k), x(k + 1));
  return T;
}

inline Params t_to_params(const Mat4& T) {
  Params x;
  int k = 4;
  for (int i = 0; i < 4; ++i) x(i) = std::real(T(i, i));
  for (int i = 1; i < 4; ++i)
    for (int j = 0; j < i; ++j, k += 2) x(k) = T(i, j).real(), x(k + 1) = T(i, j).imag();
  return x;
}

inline Mat4 params_to_rho(const Params& x) {
  const Mat4 T = params_to_t(x);
  const Mat4 A = T.adjoint() * T;
  return A / std::real(A.trace());
}

struct Likelihood {
  std::vector<std::vector<Mat4>> proj;
  std::vector<std::vector<double>> counts;
  double total = 0;

  explicit Likelihood(const std::vector<CountsRecord>& recs) {
    for (const auto& r : recs) {
      proj.push_back(outcome_projectors(r.setting));
      counts.push_back(r.counts);
      for (double c : r.counts) total += c;
    }
  }

  double loglik(const Mat4& rho) const {
    double l = 0;
    for (std::size_t s = 0; s < proj.size(); ++s)
      for (std::size_t k = 0; k < proj[s].size(); ++k)
        if (counts[s][k] > 0)
          l += counts[s][k] * std::log(std::max(std::real((proj[s][k] * rho).trace()), 1e-300));
    return l;
  }

  // Objective: -loglik/total plus a penalty pinning tr(T^dag T) to 1.
  double value(const Params& x) const {
    const double tr = x.squaredNorm();
    return -loglik(params_to_rho(x)) / total + (tr - 1) * (tr - 1);
  }

  Params gradient(const Params& x) const {
    const Mat4 T = params_to_t(x);
    const Mat4 A = T.adjoint() * T;
    const double tr = std::real(A.trace());
    const Mat4 rho = A / tr;
    Mat4 G = Mat4::Zero();
    for (std::size_t s = 0; s < proj.size(); ++s)
      for (std::size_t k = 0; k < proj[s].size(); ++k)
        if (counts[s][k] > 0) {
          const double p = std::max(std::real((proj[s][k] * rho).trace()), 1e-300);
          G -= (counts[s][k] / (p * total)) * proj[s][k];
        }
    const Mat4 Gs = (G - (G * rho).trace() * Mat4::Identity()) / tr;
    const Mat4 M = Gs * T.adjoint();
    Params g;
    int idx = 4;
    for (int i = 0; i < 4; ++i) g(i) = 2 * std::real(M(i, i));
    for (int i = 1; i < 4; ++i)
      for (int j = 0; j < i; ++j, idx += 2) {
        g(idx) = 2 * std::real(M(j, i));
        g(idx + 1) = -2 * std::imag(M(j, i));
      }
    return g + 4.0 * (tr - 1) * x;
  }
};

inline Mat4 linear_inversion(const std::vector<CountsRecord>& recs) {
  Mat4 rho = Mat4::Identity() / 4.0;
  for (const auto& r : recs) {
    double tot = 0;
    for (double c : r.counts) tot += c;
    if (tot <= 0) continue;
    double e = 0;
    const auto labels = outcome_labels(r.setting);
    for (std::size_t k = 0; k < labels.size(); ++k) {
      int parity = 0;
      for (char c : labels[k]) parity ^= (c == '1');
      e += (parity ? -1.0 : 1.0) * r.counts[k] / tot;
    }
    rho += e * kron(basis_pauli(r.setting.b1), basis_pauli(r.setting.b2)) / 4.0;
  }
  return rho;
}

}  // namespace detail

// Maximum-likelihood estimate with rho = T^dag T / tr(T^dag T), T lower
// triangular, minimised by BFGS with a monotone backtracking line search.
inline ReconstructionResult mle_reconstruct(const std::vector<CountsRecord>& records,
                                            int max_iter = 10000, double rel_tol = 1e-10) {
  const auto settings = measurement_settings();
  for (const auto& s : settings) {
    bool found = false;
    for (const auto& r : records) {
      if (!(r.setting == s)) continue;
      if (r.shots <= 0) throw std::invalid_argument("mle_reconstruct: shots must be > 0");
      found = true;
    }
    if (!found) throw std::invalid_argument("mle_reconstruct: missing setting " + s.name());
  }
  detail::Likelihood L(records);

  // Start from the linear estimate pulled inside the PSD cone.
  Mat4 r0 = detail::linear_inversion(records);
  Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (r0 + r0.adjoint()));
  Eigen::Vector4d ev = es.eigenvalues().cwiseMax(1e-3);
  ev /= ev.sum();
  r0 = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  Mat4 J = Mat4::Zero();
  for (int i = 0; i < 4; ++i) J(i, 3 - i) = 1.0;
  const Mat4 Lc = Eigen::LLT<Mat4>(J * r0 * J).matrixL();
  detail::Params x = detail::t_to_params(J * Lc.adjoint() * J);

  double f = L.value(x);
  detail::Params g = L.gradient(x);
  Eigen::Matrix<double, 16, 16> H = Eigen::Matrix<double, 16, 16>::Identity();
  ReconstructionResult res;
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    detail::Params d = -H * g;
    if (d.dot(g) >= 0) {
      H.setIdentity();
      d = -g;
    }
    double step = 1.0, fn = f;
    detail::Params xn = x;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      xn = x + step * d;
      fn = L.value(xn);
      if (fn <= f + 1e-4 * step * d.dot(g) && fn < f) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (H.isIdentity()) {
        res.converged = g.norm() < 1e-6;
        break;
      }
      H.setIdentity();
      continue;
    }
    const detail::Params gn = L.gradient(xn);
    const detail::Params s = xn - x, y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      const double rho_k = 1.0 / sy;
      const auto I16 = Eigen::Matrix<double, 16, 16>::Identity();
      H = (I16 - rho_k * s * y.transpose()) * H * (I16 - rho_k * y * s.transpose()) +
          rho_k * s * s.transpose();
    }
    const double rel = std::abs(f - fn) / std::max(std::abs(fn), 1e-300);
    x = xn;
    f = fn;
    g = gn;
    if (rel < rel_tol) {
      res.converged = true;
      ++res.iterations;
      break;
    }
  }
  res.rho = detail::params_to_rho(x);
  res.rho = 0.5 * (res.rho + res.rho.adjoint()).eval();
  res.log_likelihood = L.loglik(res.rho);
  return res;
}

inline double fidelity_report(const ReconstructionResult& r, const Vec4& target) {
  return state_fidelity(target, r.rho);
}

}  // namespace nvdfs
