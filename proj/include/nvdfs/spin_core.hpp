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

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace nvdfs {

using cplx = std::complex<double>;

template <int D>
using CMat = Eigen::Matrix<cplx, D, D>;
template <int D>
using CVec = Eigen::Matrix<cplx, D, 1>;

using Mat2 = CMat<2>;
using Mat4 = CMat<4>;
using Mat8 = CMat<8>;
using MatX = Eigen::MatrixXcd;
using Vec4 = CVec<4>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Subsystem order [electron, nuclear1, nuclear2], each a qubit.
// Electron |0> is ms=0 and |1> is ms=-1.
struct RegisterLayout {
  enum Slot : int { kElectron = 0, kNuclear1 = 1, kNuclear2 = 2 };
  static constexpr std::array<int, 3> dims{2, 2, 2};
  static constexpr int size = 8;
};

namespace pauli {
inline Mat2 I() { return Mat2::Identity(); }
inline Mat2 X() {
  Mat2 m;
  m << 0, 1, 1, 0;
  return m;
}
inline Mat2 Y() {
  Mat2 m;
  m << 0, -kI, kI, 0;
  return m;
}
inline Mat2 Z() {
  Mat2 m;
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace pauli

// Spin-1/2 operators; Iz has eigenvalue +1/2 on |0> (spin up).
inline Mat2 spin_x() { return 0.5 * pauli::X(); }
inline Mat2 spin_y() { return 0.5 * pauli::Y(); }
inline Mat2 spin_z() { return 0.5 * pauli::Z(); }

inline Mat2 projector(int b) {
  Mat2 p = Mat2::Zero();
  p(b, b) = 1.0;
  return p;
}

template <class A, class B>
auto kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  constexpr int ra = int(A::RowsAtCompileTime), rb = int(B::RowsAtCompileTime);
  constexpr int ca = int(A::ColsAtCompileTime), cb = int(B::ColsAtCompileTime);
  constexpr int r = (ra == Eigen::Dynamic || rb == Eigen::Dynamic) ? Eigen::Dynamic : ra * rb;
  constexpr int c = (ca == Eigen::Dynamic || cb == Eigen::Dynamic) ? Eigen::Dynamic : ca * cb;
  Eigen::Matrix<cplx, r, c> out =
      Eigen::kroneckerProduct(a.template cast<cplx>(), b.template cast<cplx>());
  return out;
}

template <class A, class B, class C>
auto kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b,
          const Eigen::MatrixBase<C>& c) {
  return kron(kron(a, b), c);
}

template <class Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

template <class Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  MatX d = m.adjoint() * m - MatX::Identity(m.rows(), m.cols());
  return d.cwiseAbs().maxCoeff() <= tol;
}

// I x ... x op x ... x I on the 8-dim register.
inline Mat8 tensor_embed(const MatX& op, int slot) {
  if (op.rows() != 2 || op.cols() != 2)
    throw DimensionError("tensor_embed: operator must be 2x2");
  if (slot < 0 || slot >= 3) throw DimensionError("tensor_embed: bad slot");
  Mat2 m = op;
  Mat2 id = Mat2::Identity();
  switch (slot) {
    case 0:
      return kron(m, id, id);
    case 1:
      return kron(id, m, id);
    default:
      return kron(id, id, m);
  }
}

// exp(-i 2 pi H t) with H in kHz and t in ms.
template <class Derived>
auto propagator(const Eigen::MatrixBase<Derived>& H, double t_ms) {
  using Plain = typename Derived::PlainObject;
  if (!is_hermitian(H, 1e-12 * std::max(1.0, H.cwiseAbs().maxCoeff())))
    throw std::invalid_argument("propagator: generator is not Hermitian");
  if (t_ms < 0.0) throw std::invalid_argument("propagator: negative duration");
  Eigen::SelfAdjointEigenSolver<Plain> es(H.eval());
  auto ev = es.eigenvalues();
  Plain phases = Plain::Zero(H.rows(), H.cols());
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    phases(k, k) = std::exp(-kI * (kTwoPi * ev(k) * t_ms));
  Plain U = es.eigenvectors() * phases * es.eigenvectors().adjoint();
  return U;
}

inline Mat4 partial_trace_electron(const MatX& rho) {
  if (rho.rows() != 8 || rho.cols() != 8)
    throw DimensionError("partial_trace_electron: expected 8x8 input");
  return rho.block<4, 4>(0, 0) + rho.block<4, 4>(4, 4);
}

// Trace over one qubit of a two-qubit state; keep = 0 keeps the first.
inline Mat2 partial_trace_qubit(const Mat4& rho, int keep) {
  Mat2 r = Mat2::Zero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int o = 0; o < 2; ++o)
        r(a, b) += keep == 0 ? rho(2 * a + o, 2 * b + o) : rho(2 * o + a, 2 * o + b);
  return r;
}

template <class V, class M>
double state_fidelity(const Eigen::MatrixBase<V>& psi, const Eigen::MatrixBase<M>& rho) {
  if (psi.size() != rho.rows() || rho.rows() != rho.cols())
    throw DimensionError("state_fidelity: dimension mismatch");
  double f = std::real((psi.adjoint() * rho * psi)(0, 0));
  return std::clamp(f, 0.0, 1.0);
}

struct DensityCheck {
  bool hermitian;
  bool unit_trace;
  bool positive;
  bool ok() const { return hermitian && unit_trace && positive; }
};

template <class M>
DensityCheck check_density(const Eigen::MatrixBase<M>& rho, double tol = 1e-10,
                           double psd_tol = 1e-9) {
  DensityCheck c{};
  c.hermitian = is_hermitian(rho, tol);
  c.unit_trace = std::abs(rho.trace() - cplx(1.0)) <= tol;
  MatX h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<MatX> es(h, Eigen::EigenvaluesOnly);
  c.positive = es.eigenvalues().minCoeff() >= -psd_tol;
  return c;
}

// Two-qubit basis index 2*n1 + n2 with 0 = spin up.
inline Vec4 singlet() {
  Vec4 v = Vec4::Zero();
  v(1) = 1.0 / std::sqrt(2.0);
  v(2) = -1.0 / std::sqrt(2.0);
  return v;
}

inline Vec4 triplet0() {
  Vec4 v = Vec4::Zero();
  v(1) = 1.0 / std::sqrt(2.0);
  v(2) = 1.0 / std::sqrt(2.0);
  return v;
}

template <int D>
CMat<D> pure_density(const CVec<D>& psi) {
  return psi * psi.adjoint();
}

template <int D>
CMat<D> maximally_mixed() {
  return CMat<D>::Identity() / double(D);
}

template <int D>
CMat<D> conjugate(const CMat<D>& U, const CMat<D>& rho) {
  return U * rho * U.adjoint();
}

}  // namespace nvdfs
