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

#include "otfwi/transport.hpp"

#include <algorithm>
#include <cmath>

namespace otfwi {

namespace {

// Compensated summation keeps long integrals accurate enough for the 1e-12
// unit-mass invariant at any practical sample count.
struct KahanSum {
  double s = 0.0;
  double c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

}  // namespace

double trapezoid(const std::vector<double>& v, double dt) {
  const size_t n = v.size();
  if (n < 2) return 0.0;
  KahanSum acc;
  acc.add(0.5 * (v[0] + v[n - 1]));
  for (size_t i = 1; i + 1 < n; ++i) acc.add(v[i]);
  return acc.s * dt;
}

double trapezoid_product(const std::vector<double>& a, const std::vector<double>& b, double dt) {
  const size_t n = a.size();
  if (n < 2 || b.size() != n) return 0.0;
  KahanSum acc;
  acc.add(0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]));
  for (size_t i = 1; i + 1 < n; ++i) acc.add(a[i] * b[i]);
  return acc.s * dt;
}

void ProbabilityTrace::validate() const {
  if (nt() < 2 || !(dt > 0.0)) throw config_error("ProbabilityTrace: bad axis");
  for (double v : density) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw config_error("ProbabilityTrace: density must be finite and nonnegative");
    }
  }
  if (std::abs(mass() - 1.0) > 1e-12) {
    throw config_error("ProbabilityTrace: trapezoidal mass differs from 1");
  }
}

ProbabilityTrace make_probability_trace(std::vector<double> raw, double dt, double t_f) {
  const double m = trapezoid(raw, dt);
  if (!(m > 1e-280) || !std::isfinite(m)) {
    throw degenerate_trace_error("cannot normalize a zero-mass trace");
  }
  for (double& v : raw) v /= m;
  ProbabilityTrace p{std::move(raw), dt, t_f};
  p.validate();
  return p;
}

CdfTable cdf(const ProbabilityTrace& f) {
  f.validate();
  const int n = f.nt();
  CdfTable g;
  g.dt = f.dt;
  g.t_f = f.t_f;
  g.values.resize(static_cast<size_t>(n));
  g.values[0] = 0.0;
  double acc = 0.0;
  for (int k = 1; k < n; ++k) {
    acc += 0.5 * (f.density[k - 1] + f.density[k]) * f.dt;
    g.values[k] = std::clamp(acc, 0.0, 1.0);
  }
  const double total = g.values[n - 1];
  if (!(total > 0.0)) throw degenerate_trace_error("cdf: zero total mass");
  for (double& v : g.values) v /= total;
  g.values[n - 1] = 1.0;
  return g;
}

namespace {

// First index j >= 1 with g[j] >= p, assuming g[0] = 0 < p <= 1.
int upper_cell(const std::vector<double>& g, double p, int hint) {
  int j = std::max(1, hint);
  const int n = static_cast<int>(g.size());
  while (j < n - 1 && g[j] < p) ++j;
  return j;
}

double invert_in_cell(const CdfTable& g, double p, int j) {
  const double g0 = g.values[j - 1];
  const double g1 = g.values[j];
  if (!(g1 > g0)) return (j - 1) * g.dt;  // defensive: fully flat cell
  const double t = (j - 1 + (p - g0) / (g1 - g0)) * g.dt;
  return std::clamp(t, 0.0, g.t_f);
}

}  // namespace

double quantile(const CdfTable& g, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw config_error("quantile: p outside [0, 1]");
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return g.t_f;
  const int j =
      static_cast<int>(std::lower_bound(g.values.begin() + 1, g.values.end(), p) - g.values.begin());
  return invert_in_cell(g, p, j);
}

W2Result w2_squared(const ProbabilityTrace& f, const ProbabilityTrace& g) {
  if (f.nt() != g.nt() || f.dt != g.dt) {
    throw config_error("w2_squared: density axes must match");
  }
  const CdfTable fc = cdf(f);
  const CdfTable gc = cdf(g);
  const int n = f.nt();

  W2Result out;
  out.map.dt = f.dt;
  out.map.t_f = f.t_f;
  out.map.t_map.resize(static_cast<size_t>(n));
  // Single merged sweep: F(t_k) is non-decreasing in k, so the inversion cell
  // index only moves forward.
  int j = 1;
  for (int k = 0; k < n; ++k) {
    const double p = fc.values[k];
    double t;
    if (p <= 0.0) {
      t = 0.0;
    } else if (p >= 1.0) {
      t = g.t_f;
    } else {
      j = upper_cell(gc.values, p, j);
      t = invert_in_cell(gc, p, j);
    }
    out.map.t_map[static_cast<size_t>(k)] = t;
  }

  std::vector<double> integrand(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double d = k * f.dt - out.map.t_map[static_cast<size_t>(k)];
    integrand[static_cast<size_t>(k)] = d * d * f.density[static_cast<size_t>(k)];
  }
  out.value = trapezoid(integrand, f.dt);
  return out;
}

std::vector<double> w2_gradient_f(const ProbabilityTrace& f, const ProbabilityTrace& g) {
  if (f.nt() != g.nt() || f.dt != g.dt) {
    throw config_error("w2_gradient_f: density axes must match");
  }
  const CdfTable fc = cdf(f);
  const CdfTable gc = cdf(g);
  const int n = f.nt();
  const double dt = f.dt;

  // Same inversion sweep as w2_squared; V_k carries the local inverse-slope
  // sensitivity dT_k/dF_k of the piecewise-linear quantile.
  std::vector<double> t_map(static_cast<size_t>(n));
  std::vector<double> v(static_cast<size_t>(n), 0.0);
  int j = 1;
  for (int k = 0; k < n; ++k) {
    const double p = fc.values[k];
    const double wk = (k == 0 || k == n - 1) ? 0.5 : 1.0;
    if (p <= 0.0) {
      t_map[static_cast<size_t>(k)] = 0.0;
    } else if (p >= 1.0) {
      t_map[static_cast<size_t>(k)] = g.t_f;
    } else {
      j = upper_cell(gc.values, p, j);
      t_map[static_cast<size_t>(k)] = invert_in_cell(gc, p, j);
      const double slope = (gc.values[j] - gc.values[j - 1]) / dt;
      if (slope > 0.0) {
        v[static_cast<size_t>(k)] = wk * dt * f.density[static_cast<size_t>(k)] * 2.0 *
                                    (t_map[static_cast<size_t>(k)] - k * dt) / slope;
      }
    }
  }
  std::vector<double> suffix(static_cast<size_t>(n) + 1, 0.0);
  for (int k = n - 1; k >= 0; --k) {
    suffix[static_cast<size_t>(k)] = suffix[static_cast<size_t>(k) + 1] + v[static_cast<size_t>(k)];
  }
  std::vector<double> u(static_cast<size_t>(n));
  for (int m = 0; m < n; ++m) {
    const double wm = (m == 0 || m == n - 1) ? 0.5 : 1.0;
    const double d = m * dt - t_map[static_cast<size_t>(m)];
    // Chain through dF_k/df_m (cumulative-trapezoid weights: full dt strictly
    // below k, half dt at the endpoints), expressed so the trapezoid pairing
    // against df reproduces the raw gradient.
    double tail;
    if (m == 0) {
      tail = 0.5 * suffix[1] / wm;
    } else {
      tail = (suffix[static_cast<size_t>(m) + 1] + 0.5 * v[static_cast<size_t>(m)]) / wm;
    }
    u[static_cast<size_t>(m)] = d * d + tail;
  }
  return u;
}

std::vector<double> outer_gradient(const ProbabilityTrace& f, const TransportMap& map) {
  const int n = f.nt();
  if (static_cast<int>(map.t_map.size()) != n) {
    throw config_error("outer_gradient: map axis does not match density axis");
  }
  std::vector<double> u(static_cast<size_t>(n));
  u[0] = 0.0;
  double prev = 0.0 - map.t_map[0];
  double acc = 0.0;
  for (int k = 1; k < n; ++k) {
    const double cur = k * f.dt - map.t_map[static_cast<size_t>(k)];
    acc += (prev + cur) * f.dt;  // 2 * trapezoid step
    u[static_cast<size_t>(k)] = acc;
    prev = cur;
  }
  return u;
}

}  // namespace otfwi
