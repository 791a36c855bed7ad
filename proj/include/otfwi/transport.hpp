// Copyright 2026-present the otfwi project
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

#include <vector>

#include "otfwi/errors.hpp"

namespace otfwi {

/// Trapezoidal integral of uniformly sampled values.
double trapezoid(const std::vector<double>& v, double dt);
/// Trapezoidal integral of the pointwise product a*b.
double trapezoid_product(const std::vector<double>& a, const std::vector<double>& b, double dt);

/// Nonnegative density on [0, t_f] with unit trapezoidal mass (1e-12).
struct ProbabilityTrace {
  std::vector<double> density;
  double dt = 0.0;
  double t_f = 0.0;

  int nt() const { return static_cast<int>(density.size()); }
  double mass() const { return trapezoid(density, dt); }
  void validate() const;
};

/// Normalize nonnegative raw samples into a ProbabilityTrace. Throws
/// degenerate_trace_error when the raw mass vanishes.
ProbabilityTrace make_probability_trace(std::vector<double> raw, double dt, double t_f);

/// Values of the cumulative distribution on the same axis: F(0)=0, F(t_f)=1,
/// non-decreasing.
struct CdfTable {
  std::vector<double> values;
  double dt = 0.0;
  double t_f = 0.0;
};

struct TransportMap {
  std::vector<double> t_map;  // T(t_k), non-decreasing, in [0, t_f]
  double dt = 0.0;
  double t_f = 0.0;
};

/// Running trapezoidal CDF, clamped to [0,1] with the final value renormalized
/// to exactly 1.
CdfTable cdf(const ProbabilityTrace& f);

/// Monotone piecewise-linear inverse of the CDF. On flat segments the left
/// endpoint is returned; p=0 maps to 0 and p=1 maps to t_f exactly.
double quantile(const CdfTable& g, double p);

struct W2Result {
  double value = 0.0;  // s^2
  TransportMap map;
};

/// 1-D quadratic Wasserstein distance via the closed form
///   W2^2(f,g) = integral |t - T(t)|^2 f(t) dt,  T = G^{-1} o F,
/// with trapezoidal quadrature throughout.
W2Result w2_squared(const ProbabilityTrace& f, const ProbabilityTrace& g);

/// Outer Frechet-gradient integrand U(t) = 2*int_0^t (tau - T(tau)) dtau.
/// Paired with zero-mean density perturbations this is the directional
/// derivative of w2_squared with respect to f in the continuum limit.
std::vector<double> outer_gradient(const ProbabilityTrace& f, const TransportMap& map);

/// The same gradient differentiated through the implemented quadrature
/// instead of the continuum integration by parts: returns u with
///   d w2_squared(f+h*df, g)/dh = trapezoid_product(u, df)
/// exact to round-off for the discrete functional (suffix-sum form). Squared
/// seismic signals make the map derivative extremely rough, where the
/// continuum form loses several digits; the whole adjoint chain therefore
/// runs on this variant. Both agree up to an additive constant as the
/// sampling refines.
std::vector<double> w2_gradient_f(const ProbabilityTrace& f, const ProbabilityTrace& g);

}  // namespace otfwi
