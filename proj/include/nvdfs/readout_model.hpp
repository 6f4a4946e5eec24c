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

#include <array>
#include <map>
#include <vector>

#include "nvdfs/spin_core.hpp"

namespace nvdfs {

// Electron populations after green initialisation: desired ms=0, mixed
// ms=0/-1, ms=+1 and the NV0 charge state.
struct InitPopulations {
  double p1 = 0.75, p2 = 0.05, p3 = 0.10, p4 = 0.10;

  void validate() const {
    for (double v : {p1, p2, p3, p4})
      if (v < 0) throw std::invalid_argument("populations must be nonnegative");
    if (std::abs(p1 + p2 + p3 + p4 - 1.0) > 1e-12)
      throw std::invalid_argument("populations must sum to 1");
  }
  std::array<double, 4> as_array() const { return {p1, p2, p3, p4}; }
};

enum class Scenario { NoMemory, ChargePreserving };

// Polynomial with real coefficients in (p1, p2, p3, p4).
class Polynomial {
 public:
  using Exponents = std::array<int, 4>;

  Polynomial() = default;
  static Polynomial constant(double c) {
    Polynomial p;
    if (c != 0) p.terms_[{0, 0, 0, 0}] = c;
    return p;
  }
  static Polynomial var(int i) {
    Polynomial p;
    Exponents e{0, 0, 0, 0};
    e.at(i) = 1;
    p.terms_[e] = 1.0;
    return p;
  }

  Polynomial operator+(const Polynomial& o) const {
    Polynomial r = *this;
    for (const auto& [e, c] : o.terms_) r.terms_[e] += c;
    r.prune();
    return r;
  }
  Polynomial operator-(const Polynomial& o) const { return *this + o * constant(-1.0); }
  Polynomial operator*(const Polynomial& o) const {
    Polynomial r;
    for (const auto& [ea, ca] : terms_)
      for (const auto& [eb, cb] : o.terms_) {
        Exponents e;
        for (int i = 0; i < 4; ++i) e[i] = ea[i] + eb[i];
        r.terms_[e] += ca * cb;
      }
    r.prune();
    return r;
  }

  double operator()(const std::array<double, 4>& p) const {
    double s = 0;
    for (const auto& [e, c] : terms_) {
      double m = c;
      for (int i = 0; i < 4; ++i) m *= std::pow(p[i], e[i]);
      s += m;
    }
    return s;
  }

  bool is_zero() const { return terms_.empty(); }
  bool operator==(const Polynomial& o) const { return (*this - o).is_zero(); }
  const std::map<Exponents, double>& terms() const { return terms_; }

  bool nonnegative_coefficients() const {
    for (const auto& [e, c] : terms_)
      if (c < 0) return false;
    return true;
  }

 private:
  void prune() {
    for (auto it = terms_.begin(); it != terms_.end();)
      it = it->second == 0.0 ? terms_.erase(it) : std::next(it);
  }
  std::map<Exponents, double> terms_;
};

// num / den; 0/0 evaluates to 0.
struct Rational {
  Polynomial num;
  Polynomial den = Polynomial::constant(1.0);

  double operator()(const std::array<double, 4>& p) const {
    const double n = num(p), d = den(p);
    if (d == 0.0) {
      if (n == 0.0) return 0.0;
      throw std::domain_error("rational weight with vanishing denominator");
    }
    return n / d;
  }
};

enum class ElectronLabel { Rho0 = 0, RhoM = 1, RhoS = 2, RhoC = 3 };
enum class NuclearLabel { Rho0 = 0, RhoM = 1 };

struct ChainTerm {
  ElectronLabel electron;
  NuclearLabel nuclear;
  Rational weight;
};

// Populations after init -> swap -> electron re-init -> swap, term by term.
inline std::vector<ChainTerm> chain_state(Scenario sc) {
  using E = ElectronLabel;
  using N = NuclearLabel;
  const Polynomial p1 = Polynomial::var(0), p2 = Polynomial::var(1), p3 = Polynomial::var(2),
                   p4 = Polynomial::var(3);
  if (sc == Scenario::NoMemory) {
    // 1 - p1 written as p2 + p3 + p4.
    const Polynomial q = p2 + p3 + p4;
    return {
        {E::Rho0, N::Rho0, {p1 * p1}}, {E::RhoM, N::Rho0, {p1 * q}},
        {E::Rho0, N::RhoM, {p2 * p1}}, {E::RhoM, N::RhoM, {p2 * q}},
        {E::RhoS, N::Rho0, {p3 * p1}}, {E::RhoS, N::RhoM, {p3 * q}},
        {E::RhoC, N::Rho0, {p4 * p1}}, {E::RhoC, N::RhoM, {p4 * q}},
    };
  }
  const Polynomial P = p1 + p2 + p3, r = p2 + p3;
  return {
      {E::Rho0, N::Rho0, {p1 * p1, P}}, {E::Rho0, N::RhoM, {p1 * p2, P}},
      {E::RhoS, N::Rho0, {p1 * p3, P}}, {E::RhoM, N::Rho0, {r * p1, P}},
      {E::RhoM, N::RhoM, {r * p2, P}},  {E::RhoS, N::RhoM, {r * p3, P}},
      {E::RhoC, N::RhoM, {p4}},
  };
}

// Numeric population table [electron label][nuclear label].
inline std::array<std::array<double, 2>, 4> chain_state(const InitPopulations& p, Scenario sc) {
  p.validate();
  std::array<std::array<double, 2>, 4> t{};
  for (const auto& term : chain_state(sc))
    t[int(term.electron)][int(term.nuclear)] += term.weight(p.as_array());
  return t;
}

// Normalised readout contrast: ms=0 signal after the chain divided by p1.
inline double chain_contrast(const InitPopulations& p, Scenario sc) {
  const auto t = chain_state(p, sc);
  if (p.p1 == 0) return 0.0;
  return (t[0][0] + t[0][1]) / p.p1;
}

struct FidelityBounds {
  double c_max;
  double f_no_memory;
  double f_charge_preserving;
};

inline FidelityBounds fidelity_bounds(const InitPopulations& p) {
  p.validate();
  const double c = p.p1 + p.p2;
  const double P = p.p1 + p.p2 + p.p3;
  if (P <= 0) throw std::domain_error("fidelity_bounds: p1 + p2 + p3 must be positive");
  return {c, 0.5 + 0.5 * c, 0.5 + c / (2.0 * P)};
}

inline double readout_contrast(const InitPopulations& p, Scenario sc) {
  const auto b = fidelity_bounds(p);
  return sc == Scenario::NoMemory ? b.c_max : 2.0 * b.f_charge_preserving - 1.0;
}

// Probability that the swap-reset polarisation leaves the nucleus in rho0.
inline double nuclear_polarization(const InitPopulations& p, Scenario) {
  p.validate();
  return p.p1;
}

// Mixes the ideal pipeline output with the output obtained when nuclear
// polarisation failed.
template <int D>
CMat<D> apply_init_error(const CMat<D>& rho_ideal, const InitPopulations& p, Scenario sc,
                         const CMat<D>& rho_failed = maximally_mixed<D>()) {
  const double w = nuclear_polarization(p, sc);
  return w * rho_ideal + (1.0 - w) * rho_failed;
}

// Per-qubit depolarisation by the readout contrast: single-spin expectations
// scale by c, two-spin correlations by c^2.
inline Mat4 apply_readout_contrast(const Mat4& rho, double c) {
  const Mat2 id = Mat2::Identity();
  const Mat2 r1 = partial_trace_qubit(rho, 0), r2 = partial_trace_qubit(rho, 1);
  return c * c * rho + c * (1 - c) * (kron(r1, id) / 2.0 + kron(id, r2) / 2.0) +
         (1 - c) * (1 - c) * Mat4::Identity() / 4.0;
}

inline Mat2 apply_readout_contrast(const Mat2& rho, double c) {
  return c * rho + (1 - c) * Mat2::Identity() / 2.0;
}

// Init-and-readout fidelity 1/2 + C/2 of a single nuclear spin.
inline double single_spin_fidelity(const InitPopulations& p, Scenario sc) {
  return 0.5 + 0.5 * chain_contrast(p, sc);
}

}  // namespace nvdfs
