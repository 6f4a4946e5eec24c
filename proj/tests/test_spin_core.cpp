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
#include <unsupported/Eigen/MatrixFunctions>

#include "nvdfs/spin_core.hpp"
#include "nvdfs/su2.hpp"

using namespace nvdfs;

namespace {

template <int D>
CMat<D> random_hermitian(std::mt19937_64& g) {
  std::normal_distribution<double> n;
  CMat<D> a;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) a(i, j) = cplx(n(g), n(g));
  return (a + a.adjoint()) / 2.0;
}

Mat2 random_su2(std::mt19937_64& g) {
  std::normal_distribution<double> n;
  Eigen::Vector4d q(n(g), n(g), n(g), n(g));
  q.normalize();
  Mat2 u;
  u << cplx(q(0), q(3)), cplx(q(2), q(1)), cplx(-q(2), q(1)), cplx(q(0), -q(3));
  return u;
}

}  // namespace

TEST(Pauli, ProductRelations) {
  EXPECT_TRUE((pauli::X() * pauli::Y()).isApprox(kI * pauli::Z()));
  EXPECT_TRUE((pauli::Y() * pauli::Z()).isApprox(kI * pauli::X()));
  EXPECT_TRUE((pauli::Z() * pauli::Z()).isApprox(Mat2::Identity()));
  EXPECT_TRUE((4.0 * spin_x() * spin_x()).isApprox(Mat2::Identity()));
}

TEST(Kron, MatchesIndexFormula) {
  std::mt19937_64 g(1);
  const Mat2 a = random_su2(g), b = random_su2(g);
  const Mat4 k = kron(a, b);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) EXPECT_EQ(k(2 * i + r, 2 * j + c), a(i, j) * b(r, c));
  static_assert(decltype(kron(a, b, a))::RowsAtCompileTime == 8);
}

TEST(TensorEmbed, SlotsAndErrors) {
  const Mat2 id = Mat2::Identity();
  EXPECT_TRUE(tensor_embed(pauli::X(), RegisterLayout::kElectron).isApprox(kron(pauli::X(), id, id)));
  EXPECT_TRUE(tensor_embed(pauli::Y(), RegisterLayout::kNuclear1).isApprox(kron(id, pauli::Y(), id)));
  EXPECT_TRUE(tensor_embed(pauli::Z(), RegisterLayout::kNuclear2).isApprox(kron(id, id, pauli::Z())));
  EXPECT_THROW(tensor_embed(MatX::Identity(3, 3), 0), DimensionError);
  EXPECT_THROW(tensor_embed(pauli::X(), 3), DimensionError);
}

TEST(Propagator, MatchesMatrixExponential) {
  std::mt19937_64 g(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat4 H = random_hermitian<4>(g);
    const double t = 0.37 * (trial + 1) / 20.0;
    const Mat4 want = (Mat4(-kI * kTwoPi * t * H)).exp();
    const Mat4 got = propagator(H, t);
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-11);
    EXPECT_TRUE(is_unitary(got));
  }
}

TEST(Propagator, RejectsBadInput) {
  Mat2 h = pauli::X();
  h(0, 1) = 2.0;
  EXPECT_THROW(propagator(h, 1.0), std::invalid_argument);
  EXPECT_THROW(propagator(Mat2(pauli::Z()), -1.0), std::invalid_argument);
  EXPECT_TRUE(propagator(Mat2(pauli::Z()), 0.0).isApprox(Mat2::Identity()));
}

TEST(Evolve2, AgreesWithGeneralPropagator) {
  std::mt19937_64 g(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat2 H = random_hermitian<2>(g) * 100.0;
    const double t = 0.01 * trial;
    EXPECT_LT((evolve2(H, t) - propagator(H, t)).cwiseAbs().maxCoeff(), 1e-11);
  }
}

TEST(PartialTrace, ProductStates) {
  std::mt19937_64 g(4);
  const Mat2 e = projector(1);
  const Mat2 u = random_su2(g);
  const Mat2 a = u * projector(0) * u.adjoint();
  const Mat2 b = maximally_mixed<2>();
  const Mat8 rho = kron(e, a, b);
  EXPECT_TRUE(partial_trace_electron(rho).isApprox(kron(a, b)));
  EXPECT_TRUE(partial_trace_qubit(kron(a, b), 0).isApprox(a));
  EXPECT_TRUE(partial_trace_qubit(kron(a, b), 1).isApprox(b));
  EXPECT_THROW(partial_trace_electron(MatX::Identity(4, 4)), DimensionError);
}

TEST(States, BellStatesAndFidelity) {
  const Vec4 s = singlet(), t = triplet0();
  EXPECT_NEAR(s.norm(), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(s.dot(t)), 0.0, 1e-15);
  EXPECT_NEAR(state_fidelity(s, pure_density(s)), 1.0, 1e-15);
  EXPECT_NEAR(state_fidelity(s, pure_density(t)), 0.0, 1e-15);
  EXPECT_NEAR(state_fidelity(s, maximally_mixed<4>()), 0.25, 1e-15);
  EXPECT_THROW(state_fidelity(s, MatX(MatX::Identity(2, 2))), DimensionError);
}

TEST(States, DensityCheckFlagsNonPhysical) {
  EXPECT_TRUE(check_density(maximally_mixed<4>()).ok());
  Mat4 bad = maximally_mixed<4>();
  bad(0, 0) = -0.25;
  bad(1, 1) = 0.75;
  const auto c = check_density(bad);
  EXPECT_FALSE(c.positive);
  EXPECT_TRUE(c.unit_trace);
}

TEST(Singlet, InvariantUnderCollectiveUnitaries) {
  std::mt19937_64 g(5);
  const Mat4 rho = pure_density(singlet());
  for (int i = 0; i < 100; ++i) {
    const Mat2 u = random_su2(g) * std::exp(kI * double(i));
    const Mat4 w = kron(u, u);
    EXPECT_NEAR(state_fidelity(singlet(), conjugate<4>(w, rho)), 1.0, 1e-10);
  }
}

TEST(Su2, AxisAngleRoundTrip) {
  std::mt19937_64 g(6);
  std::uniform_real_distribution<double> u(0.01, kTwoPi - 0.01);
  std::normal_distribution<double> n;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d axis = Eigen::Vector3d(n(g), n(g), n(g)).normalized();
    const double ang = u(g);
    const AxisAngle r = axis_angle(rotation(axis, ang) * std::exp(kI * 0.3));
    EXPECT_TRUE(rotation(r.axis, r.angle).isApprox(rotation(axis, ang), 1e-10) ||
                rotation(r.axis, r.angle).isApprox(-rotation(axis, ang), 1e-10));
    const AxisAngle f = folded(r);
    EXPECT_LE(f.angle, kPi + 1e-12);
  }
}

TEST(Su2, EulerDecompositionReconstructs) {
  std::mt19937_64 g(7);
  for (int i = 0; i < 100; ++i) {
    const Mat2 G = random_su2(g);
    const EulerZXZ e = euler_zxz(G);
    const Mat2 R = rz(e.alpha) * rx(e.theta) * rz(e.beta);
    const double overlap = std::abs((R.adjoint() * G).trace()) / 2.0;
    EXPECT_NEAR(overlap, 1.0, 1e-10);
  }
}

TEST(Su2, ZAngleOfZRotation) {
  for (double a : {-2.0, -0.5, 0.0, 0.7, 2.5}) EXPECT_NEAR(z_angle(rz(a)), a, 1e-12);
  EXPECT_NEAR(wrap_pi(3 * kPi - 0.1), kPi - 0.1, 1e-12);
  EXPECT_NEAR(wrap_2pi(-0.5), kTwoPi - 0.5, 1e-12);
}
