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

#include <gtest/gtest.h>

#include <random>

#include "nvdfs/readout_model.hpp"
#include "nvdfs/su2.hpp"

using namespace nvdfs;

namespace {

using Mat8r = Eigen::Matrix<double, 8, 8>;
using Mat4r = Eigen::Matrix4d;
using Mat2r = Eigen::Matrix2d;

// Electron levels: 0 = ms 0, 1 = ms -1, 2 = ms +1, 3 = NV0; nuclear qubit second.
Mat4r electron_label(int e) {
  Mat4r m = Mat4r::Zero();
  switch (e) {
    case 0:
      m(0, 0) = 1;
      break;
    case 1:
      m(0, 0) = m(1, 1) = 0.5;
      break;
    case 2:
      m(2, 2) = 1;
      break;
    default:
      m(3, 3) = 1;
  }
  return m;
}

Mat2r nuclear_label(int n) {
  return n == 0 ? Mat2r(Eigen::Vector2d(1, 0).asDiagonal()) : Mat2r(Mat2r::Identity() / 2);
}

Mat8r kron_r(const Mat4r& a, const Mat2r& b) {
  Mat8r k;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return k;
}

// Swap of the ms 0/-1 qubit with the nucleus; identity on the other levels.
Mat8r swap_gate() {
  Mat8r s = Mat8r::Identity();
  const int a = 0 * 2 + 1, b = 1 * 2 + 0;  // |0,1> <-> |1,0>
  s(a, a) = s(b, b) = 0;
  s(a, b) = s(b, a) = 1;
  return s;
}

Mat2r trace_electron(const Mat8r& rho) {
  Mat2r n = Mat2r::Zero();
  for (int e = 0; e < 4; ++e) n += rho.block<2, 2>(2 * e, 2 * e);
  return n;
}

Mat8r simulate_chain(const InitPopulations& p, Scenario sc) {
  const auto pa = p.as_array();
  Mat4r rho_e = Mat4r::Zero();
  for (int e = 0; e < 4; ++e) rho_e += pa[e] * electron_label(e);
  const Mat8r S = swap_gate();
  Mat8r rho = kron_r(rho_e, nuclear_label(1));
  rho = S * rho * S.transpose();
  if (sc == Scenario::NoMemory) {
    rho = kron_r(rho_e, trace_electron(rho));
  } else {
    const double P = pa[0] + pa[1] + pa[2];
    Mat4r spin = Mat4r::Zero();
    for (int e = 0; e < 3; ++e) spin += pa[e] / P * electron_label(e);
    Mat2r n_spin = Mat2r::Zero();
    for (int e = 0; e < 3; ++e) n_spin += rho.block<2, 2>(2 * e, 2 * e);
    rho = kron_r(spin, n_spin) + kron_r(electron_label(3), rho.block<2, 2>(6, 6));
  }
  return S * rho * S.transpose();
}

Mat8r table_state(const std::array<std::array<double, 2>, 4>& t) {
  Mat8r r = Mat8r::Zero();
  for (int e = 0; e < 4; ++e)
    for (int n = 0; n < 2; ++n) r += t[e][n] * kron_r(electron_label(e), nuclear_label(n));
  return r;
}

InitPopulations random_populations(std::mt19937_64& g) {
  std::gamma_distribution<double> d(1.0);
  double a[4], s = 0;
  for (double& v : a) s += (v = d(g));
  InitPopulations p{a[0] / s, a[1] / s, a[2] / s, 0.0};
  p.p4 = 1.0 - p.p1 - p.p2 - p.p3;
  return p;
}

}  // namespace

TEST(Populations, Validation) {
  EXPECT_NO_THROW(InitPopulations{}.validate());
  EXPECT_THROW((InitPopulations{0.5, 0.5, 0.1, -0.1}.validate()), std::invalid_argument);
  EXPECT_THROW((InitPopulations{0.5, 0.5, 0.1, 0.0}.validate()), std::invalid_argument);
}

TEST(Polynomial, Algebra) {
  const auto x = Polynomial::var(0), y = Polynomial::var(1);
  EXPECT_TRUE((x + y) * (x + y) == x * x + Polynomial::constant(2.0) * x * y + y * y);
  EXPECT_TRUE((x - x).is_zero());
  EXPECT_DOUBLE_EQ((x * y + Polynomial::constant(1))({2, 3, 0, 0}), 7.0);
  EXPECT_THROW((Rational{x, y}({1, 0, 0, 0})), std::domain_error);
  EXPECT_EQ((Rational{x, y}({0, 0, 0, 0})), 0.0);
}

TEST(ChainState, NoMemoryTermsMatchReportedMixture) {
  const auto p1 = Polynomial::var(0), p2 = Polynomial::var(1), p3 = Polynomial::var(2),
             p4 = Polynomial::var(3);
  const auto one_minus_p1 = p2 + p3 + p4;
  Polynomial total;
  for (const auto& t : chain_state(Scenario::NoMemory)) {
    EXPECT_TRUE(t.weight.num.nonnegative_coefficients());
    EXPECT_TRUE(t.weight.den == Polynomial::constant(1.0));
    total = total + t.weight.num;
    const int e = int(t.electron), n = int(t.nuclear);
    const Polynomial pe[4] = {p1, p2, p3, p4};
    if (e <= 1) {
      // p1 (p1 rho0 + (1 - p1) rho_m) x rho0  +  p2 (p1 rho0 + (1 - p1) rho_m) x rho_m
      const Polynomial outer = n == 0 ? p1 : p2;
      const Polynomial inner = e == 0 ? p1 : one_minus_p1;
      EXPECT_TRUE(t.weight.num == outer * inner);
    } else {
      // p3 rho_s x (...) and p4 rho_c x (...)
      EXPECT_TRUE(t.weight.num == pe[e] * (n == 0 ? p1 : one_minus_p1));
    }
  }
  const auto s = p1 + p2 + p3 + p4;
  EXPECT_TRUE(total == s * s);
}

TEST(ChainState, ChargePreservingWeightsSumToOne) {
  std::mt19937_64 g(3);
  for (int i = 0; i < 100; ++i) {
    const auto p = random_populations(g);
    double s = 0;
    for (const auto& row : chain_state(p, Scenario::ChargePreserving))
      for (double w : row) {
        s += w;
        EXPECT_GE(w, 0.0);
      }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  for (const auto& t : chain_state(Scenario::ChargePreserving))
    EXPECT_TRUE(t.weight.num.nonnegative_coefficients());
}

TEST(ChainState, MatchesExplicitDensityMatrices) {
  std::mt19937_64 g(4);
  for (auto sc : {Scenario::NoMemory, Scenario::ChargePreserving})
    for (int i = 0; i < 50; ++i) {
      const auto p = random_populations(g);
      const Mat8r want = simulate_chain(p, sc);
      const Mat8r got = table_state(chain_state(p, sc));
      EXPECT_LT((want - got).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(ChainState, LimitingCases) {
  for (auto sc : {Scenario::NoMemory, Scenario::ChargePreserving}) {
    const auto perfect = chain_state({1, 0, 0, 0}, sc);
    EXPECT_DOUBLE_EQ(perfect[0][0], 1.0);
    const auto dark = chain_state({0, 0, 0, 1}, sc);
    EXPECT_DOUBLE_EQ(dark[3][1], 1.0);
  }
}

TEST(FidelityBounds, WorkedExample) {
  const auto b = fidelity_bounds({0.8, 0.0, 0.1, 0.1});
  EXPECT_NEAR(b.c_max, 0.8, 1e-15);
  EXPECT_NEAR(b.f_no_memory, 0.9, 1e-15);
  EXPECT_NEAR(b.f_charge_preserving, 0.5 + 0.8 / 1.8, 1e-15);
  const auto one = fidelity_bounds({1, 0, 0, 0});
  EXPECT_EQ(one.c_max, 1.0);
  EXPECT_EQ(one.f_no_memory, 1.0);
  EXPECT_EQ(one.f_charge_preserving, 1.0);
  EXPECT_THROW(fidelity_bounds({0, 0, 0, 1}), std::domain_error);
}

TEST(FidelityBounds, NoMemoryInversion) {
  const double f = 0.9;
  const double c = 2.0 * f - 1.0;
  EXPECT_NEAR(c, 0.8, 1e-15);
  EXPECT_NEAR(fidelity_bounds({0.7, 0.1, 0.1, 0.1}).f_no_memory, f, 1e-15);
}

TEST(FidelityBounds, ChargePreservingIgnoresChargeFraction) {
  const double base = fidelity_bounds({0.6, 0.1, 0.2, 0.1}).f_charge_preserving;
  for (double lam : {0.3, 0.55, 0.8, 1.0 / 0.9}) {
    InitPopulations p{0.6 * lam, 0.1 * lam, 0.2 * lam, 0.0};
    p.p4 = 1.0 - p.p1 - p.p2 - p.p3;
    EXPECT_NEAR(fidelity_bounds(p).f_charge_preserving, base, 1e-12);
  }
}

TEST(FidelityBounds, NoMemoryMonotone) {
  double prev = 0;
  for (double p1 = 0.0; p1 <= 0.9; p1 += 0.1) {
    const double f = fidelity_bounds({p1, 0.05, 0.95 - p1, 0.0}).f_no_memory;
    EXPECT_GE(f, prev);
    prev = f;
  }
}

TEST(ChainContrast, AgreesWithClosedForms) {
  std::mt19937_64 g(5);
  for (int i = 0; i < 50; ++i) {
    const auto p = random_populations(g);
    const auto b = fidelity_bounds(p);
    EXPECT_NEAR(0.5 + 0.5 * chain_contrast(p, Scenario::NoMemory), b.f_no_memory, 1e-12);
    EXPECT_NEAR(0.5 + 0.5 * chain_contrast(p, Scenario::ChargePreserving), b.f_charge_preserving, 1e-12);
  }
}

TEST(SingleSpin, InitReadoutFidelityOfSpinOne) {
  const InitPopulations p{0.742, 0.05, 0.108, 0.1};
  EXPECT_NEAR(single_spin_fidelity(p, Scenario::NoMemory), 0.896, 1e-12);
}

TEST(ApplyInitError, MixesWithFailureBranch) {
  const Mat4 ideal = pure_density(singlet());
  EXPECT_TRUE(apply_init_error<4>(ideal, {1, 0, 0, 0}, Scenario::NoMemory).isApprox(ideal));
  const Mat4 mixed = apply_init_error<4>(ideal, {0.75, 0.05, 0.1, 0.1}, Scenario::NoMemory);
  EXPECT_NEAR(std::real(mixed.trace()), 1.0, 1e-14);
  EXPECT_NEAR(state_fidelity(singlet(), mixed), 0.75 + 0.25 * 0.25, 1e-14);
}

TEST(ReadoutContrast, ScalesExpectations) {
  const Mat2 up = projector(0);
  const Mat4 rho = kron(up, Mat2(raz(0.3, 1.1) * up * raz(0.3, 1.1).adjoint()));
  const double c = 0.8;
  const Mat4 out = apply_readout_contrast(rho, c);
  const Mat2 id = Mat2::Identity();
  const Mat4 zi = kron(pauli::Z(), id), iz = kron(id, pauli::Z()), zz = kron(pauli::Z(), pauli::Z());
  EXPECT_NEAR(std::real((zi * out).trace()), c * std::real((zi * rho).trace()), 1e-14);
  EXPECT_NEAR(std::real((iz * out).trace()), c * std::real((iz * rho).trace()), 1e-14);
  EXPECT_NEAR(std::real((zz * out).trace()), c * c * std::real((zz * rho).trace()), 1e-14);
  EXPECT_TRUE(apply_readout_contrast(rho, 1.0).isApprox(rho));
  EXPECT_NEAR(readout_contrast({0.75, 0.05, 0.1, 0.1}, Scenario::NoMemory), 0.8, 1e-15);
}
