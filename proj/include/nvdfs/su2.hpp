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

#include "nvdfs/spin_core.hpp"

namespace nvdfs {

struct AxisAngle {
  Eigen::Vector3d axis{0.0, 0.0, 1.0};
  double angle = 0.0;
};

// exp(-i angle n.sigma / 2)
inline Mat2 rotation(const Eigen::Vector3d& n, double angle) {
  Eigen::Vector3d u = n.normalized();
  Mat2 ns = u.x() * pauli::X() + u.y() * pauli::Y() + u.z() * pauli::Z();
  return std::cos(angle / 2) * Mat2::Identity() - kI * std::sin(angle / 2) * ns;
}

inline Mat2 rx(double a) { return rotation({1, 0, 0}, a); }
inline Mat2 ry(double a) { return rotation({0, 1, 0}, a); }
inline Mat2 rz(double a) { return rotation({0, 0, 1}, a); }

// Rotation by theta about the equatorial axis at azimuth az.
inline Mat2 raz(double az, double theta) {
  return rotation({std::cos(az), std::sin(az), 0.0}, theta);
}

// Closed-form exp(-i 2 pi H t) for a 2x2 Hermitian H (kHz, ms).
inline Mat2 evolve2(const Mat2& H, double t_ms) {
  const double tr = 0.5 * std::real(H(0, 0) + H(1, 1));
  const double hz = std::real(H(0, 0)) - tr;
  const double hx = std::real(H(0, 1));
  const double hy = -std::imag(H(0, 1));
  const double h = std::sqrt(hx * hx + hy * hy + hz * hz);
  const double ph = kTwoPi * h * t_ms;
  Mat2 U;
  if (h == 0.0) {
    U.setIdentity();
  } else {
    const double c = std::cos(ph), s = std::sin(ph) / h;
    U(0, 0) = cplx(c, -s * hz);
    U(1, 1) = cplx(c, s * hz);
    U(0, 1) = cplx(-s * hy, -s * hx);
    U(1, 0) = cplx(s * hy, -s * hx);
  }
  if (tr != 0.0) U *= std::exp(-kI * (kTwoPi * tr * t_ms));
  return U;
}

inline Mat2 to_su2(const Mat2& G) { return G / std::sqrt(G.determinant()); }

// Axis-angle of an SU(2) element up to global phase, angle in [0, 2pi).
inline AxisAngle axis_angle(const Mat2& G) {
  Mat2 U = to_su2(G);
  const double c = std::clamp(0.5 * std::real(U.trace()), -1.0, 1.0);
  AxisAngle r;
  r.angle = 2.0 * std::acos(c);
  const double s = std::sin(r.angle / 2);
  if (std::abs(s) < 1e-14) {
    r.axis = {0, 0, 1};
    return r;
  }
  r.axis = Eigen::Vector3d(-std::imag(U(0, 1) + U(1, 0)) / 2,
                           std::real(U(1, 0) - U(0, 1)) / 2,
                           -std::imag(U(0, 0) - U(1, 1)) / 2) /
           s;
  r.axis.normalize();
  return r;
}

// Same rotation with angle folded into [0, pi] by flipping the axis.
inline AxisAngle folded(AxisAngle r) {
  if (r.angle > kPi) {
    r.angle = kTwoPi - r.angle;
    r.axis = -r.axis;
  }
  return r;
}

struct EulerZXZ {
  double alpha, theta, beta;  // G ~ Rz(alpha) Rx(theta) Rz(beta)
};

inline EulerZXZ euler_zxz(const Mat2& G) {
  Mat2 U = to_su2(G);
  const double theta = 2.0 * std::atan2(std::abs(U(1, 0)), std::abs(U(0, 0)));
  const double s = -2.0 * std::arg(U(0, 0));
  const double d = 2.0 * std::arg(kI * U(1, 0));
  return {(s + d) / 2, theta, (s - d) / 2};
}

// Lab-frame z-angle: arg G11 - arg G00.
inline double z_angle(const Mat2& G) {
  return std::arg(G(1, 1)) - std::arg(G(0, 0));
}

inline double wrap_pi(double a) {
  a = std::fmod(a + kPi, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a - kPi;
}

inline double wrap_2pi(double a) {
  a = std::fmod(a, kTwoPi);
  return a < 0 ? a + kTwoPi : a;
}

}  // namespace nvdfs
