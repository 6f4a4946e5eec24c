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
#include <unsupported/Eigen/NonLinearOptimization>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace nvdfs {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FitModel {
  ExpFloor,          // F_inf + (F0 - F_inf) exp(-t / T)         params F0, F_inf, T
  GaussianPeak,      // base + a exp(-(x - c)^2 / (2 s^2))         params base, a, c, s
  SinusoidEnvelope,  // A sin(2 pi N / 4) (1 - b N)                params A, b
};

inline const char* model_name(FitModel m) {
  switch (m) {
    case FitModel::ExpFloor:
      return "exp-floor";
    case FitModel::GaussianPeak:
      return "gaussian-peak";
    default:
      return "sinusoid-envelope";
  }
}

struct DecayFit {
  FitModel model = FitModel::ExpFloor;
  Eigen::VectorXd params;
  Eigen::VectorXd sigma;
  double residual_rms = 0.0;

  double t_est() const { return params(2); }
  double floor() const { return params(1); }
  double center() const { return params(2); }
  double b() const { return params(1); }
  double operator()(double x) const;
};

inline double model_value(FitModel m, const Eigen::VectorXd& p, double x) {
  switch (m) {
    case FitModel::ExpFloor:
      return p(1) + (p(0) - p(1)) * std::exp(-x / p(2));
    case FitModel::GaussianPeak: {
      const double u = (x - p(2)) / p(3);
      return p(0) + p(1) * std::exp(-0.5 * u * u);
    }
    default:
      return p(0) * std::sin(2.0 * std::numbers::pi * x / 4.0) * (1.0 - p(1) * x);
  }
}

inline double DecayFit::operator()(double x) const { return model_value(model, params, x); }

namespace detail {

inline Eigen::VectorXd model_gradient(FitModel m, const Eigen::VectorXd& p, double x) {
  Eigen::VectorXd g(p.size());
  switch (m) {
    case FitModel::ExpFloor: {
      const double e = std::exp(-x / p(2));
      g << e, 1.0 - e, (p(0) - p(1)) * e * x / (p(2) * p(2));
      break;
    }
    case FitModel::GaussianPeak: {
      const double u = (x - p(2)) / p(3), e = std::exp(-0.5 * u * u);
      g << 1.0, e, p(1) * e * u / p(3), p(1) * e * u * u / p(3);
      break;
    }
    default: {
      const double s = std::sin(2.0 * std::numbers::pi * x / 4.0);
      g << s * (1.0 - p(1) * x), -p(0) * s * x;
    }
  }
  return g;
}

struct FitFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  FitModel model;
  const std::vector<double>& x;
  const std::vector<double>& y;
  int np;

  int inputs() const { return np; }
  int values() const { return int(x.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    for (std::size_t i = 0; i < x.size(); ++i) r(i) = model_value(model, p, x[i]) - y[i];
    return 0;
  }
  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& J) const {
    for (std::size_t i = 0; i < x.size(); ++i) J.row(i) = model_gradient(model, p, x[i]).transpose();
    return 0;
  }
};

inline Eigen::VectorXd initial_guess(FitModel m, const std::vector<double>& x,
                                     const std::vector<double>& y) {
  const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
  const double lo = *mn, hi = *mx, amp = hi - lo;
  Eigen::VectorXd p;
  switch (m) {
    case FitModel::ExpFloor: {
      // Log-linear regression of (y - floor) against x over points clearly above the floor.
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int n = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = y[i] - lo;
        if (d <= 1e-3 * amp) continue;
        const double l = std::log(d);
        sx += x[i], sy += l, sxx += x[i] * x[i], sxy += x[i] * l, ++n;
      }
      const double xspan = x.back() - x.front();
      double T = xspan;
      if (n >= 2) {
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        if (slope < 0 && std::isfinite(slope)) T = -1.0 / slope;
      }
      p.resize(3);
      p << lo + amp, lo, T;
      break;
    }
    case FitModel::GaussianPeak: {
      std::size_t imax = std::size_t(mx - y.begin());
      int above = 0;
      for (double v : y) above += (v - lo) > 0.5 * amp;
      const double dx = (x.back() - x.front()) / double(x.size() - 1);
      p.resize(4);
      p << lo, amp, x[imax], std::max(dx, above * dx / 2.3548);
      break;
    }
    default: {
      double a = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double s = std::sin(2.0 * std::numbers::pi * x[i] / 4.0);
        if (std::abs(s) > 0.5 && std::abs(y[i]) > std::abs(a)) a = y[i] * (s > 0 ? 1 : -1);
      }
      p.resize(2);
      p << a, 0.0;
    }
  }
  return p;
}

}  // namespace detail

// Levenberg-Marquardt least squares with a deterministic starting point.
inline DecayFit fit_decay(const std::vector<double>& x, const std::vector<double>& y,
                          FitModel model) {
  const int np = model == FitModel::ExpFloor ? 3 : (model == FitModel::GaussianPeak ? 4 : 2);
  if (x.size() != y.size()) throw std::invalid_argument("fit_decay: size mismatch");
  if (x.size() < 4 || int(x.size()) < np + 1)
    throw std::invalid_argument("fit_decay: need at least 4 points");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw FitError("fit_decay: non-finite data");

  detail::FitFunctor f{model, x, y, np};
  Eigen::VectorXd p = detail::initial_guess(model, x, y);
  Eigen::LevenbergMarquardt<detail::FitFunctor> lm(f);
  lm.parameters.maxfev = 4000;
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  const auto status = lm.minimize(p);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters ||
      status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation)
    throw FitError("fit_decay: no convergence");
  if (!p.allFinite()) throw FitError("fit_decay: non-finite parameters");

  DecayFit out;
  out.model = model;
  out.params = p;
  Eigen::VectorXd r(x.size());
  f(p, r);
  Eigen::MatrixXd J(x.size(), np);
  f.df(p, J);
  const double ssr = r.squaredNorm();
  out.residual_rms = std::sqrt(ssr / double(x.size()));
  const Eigen::MatrixXd JtJ = J.transpose() * J;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(JtJ);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0 || sv(np - 1) <= 1e-14 * sv(0)) throw FitError("fit_decay: singular Jacobian");
  const double s2 = ssr / double(x.size() - np);
  out.sigma = (s2 * JtJ.inverse()).diagonal().cwiseMax(0.0).cwiseSqrt();

  if (model == FitModel::ExpFloor && !(p(2) > 0)) throw FitError("fit_decay: T_est <= 0");
  if (model == FitModel::GaussianPeak) out.params(3) = std::abs(p(3));
  return out;
}

}  // namespace nvdfs
