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

// Reference kernels. The SIMD backends replicate this arithmetic exactly,
// operation for operation; any change here must be mirrored there.

#include "otfwi/simd/kernels.hpp"

namespace otfwi::simd::detail {

namespace {

void stag_grad(const double* u, double* g, int k_begin, int k_end, double c27, double c1) {
  for (int k = k_begin; k < k_end; ++k) {
    const double t1 = u[k + 1] - u[k];
    const double t2 = u[k - 1] - u[k + 2];
    g[k] = c27 * t1 + c1 * t2;
  }
}

void stag_grad4(const double* um1, const double* u0, const double* up1, const double* up2,
                double* g, int n, double c27, double c1) {
  for (int i = 0; i < n; ++i) {
    const double t1 = up1[i] - u0[i];
    const double t2 = um1[i] - up2[i];
    g[i] = c27 * t1 + c1 * t2;
  }
}

void sub_scale(const double* a, const double* b, double* g, double s, int n) {
  for (int i = 0; i < n; ++i) g[i] = s * (a[i] - b[i]);
}

void stag_div(const double* f, double* out, int i_begin, int i_end, double c27, double c1) {
  for (int i = i_begin; i < i_end; ++i) {
    const double t1 = f[i] - f[i - 1];
    const double t2 = f[i - 2] - f[i + 1];
    out[i] = c27 * t1 + c1 * t2;
  }
}

void stag_div4(const double* fm2, const double* fm1, const double* f0, const double* fp1,
               double* out, int n, double c27, double c1) {
  for (int i = 0; i < n; ++i) {
    const double t1 = f0[i] - fm1[i];
    const double t2 = fm2[i] - fp1[i];
    out[i] = c27 * t1 + c1 * t2;
  }
}

void flux_psi_a(const double* c2, const double* g, double* psi, double* flux, const double* decay,
                const double* phi, const double* sphi, double sig_other, int n) {
  for (int k = 0; k < n; ++k) {
    const double m = c2[k] * g[k];
    flux[k] = m + psi[k];
    psi[k] = decay[k] * psi[k] + (sig_other * phi[k] - sphi[k]) * m;
  }
}

void flux_psi_s(const double* c2, const double* g, double* psi, double* flux, double decay,
                double phi, double sphi, const double* sig_other, int n) {
  for (int k = 0; k < n; ++k) {
    const double m = c2[k] * g[k];
    flux[k] = m + psi[k];
    psi[k] = decay * psi[k] + (phi * sig_other[k] - sphi) * m;
  }
}

void leapfrog(const double* u, const double* uprev, double* unext, const double* tm2b,
              const double* om1a, const double* inv1pa, const double* divx, const double* divz,
              double dt2, int n) {
  for (int i = 0; i < n; ++i) {
    const double lap = divx[i] + divz[i];
    const double t = tm2b[i] * u[i] - om1a[i] * uprev[i];
    unext[i] = inv1pa[i] * (t + dt2 * lap);
  }
}

void adj_flux_psi_a(const double* c2, const double* gphi, const double* gu, double* lpsi,
                    double* lg, double* acc, const double* decay, const double* phi,
                    const double* sphi, double sig_other, double dt2, double wt, int n) {
  for (int k = 0; k < n; ++k) {
    const double lf = -dt2 * gphi[k];
    const double lm = lf + (sig_other * phi[k] - sphi[k]) * lpsi[k];
    acc[k] += wt * (lm * gu[k]);
    lg[k] = c2[k] * lm;
    lpsi[k] = decay[k] * lpsi[k] + lf;
  }
}

void adj_flux_psi_s(const double* c2, const double* gphi, const double* gu, double* lpsi,
                    double* lg, double* acc, double decay, double phi, double sphi,
                    const double* sig_other, double dt2, double wt, int n) {
  for (int k = 0; k < n; ++k) {
    const double lf = -dt2 * gphi[k];
    const double lm = lf + (phi * sig_other[k] - sphi) * lpsi[k];
    acc[k] += wt * (lm * gu[k]);
    lg[k] = c2[k] * lm;
    lpsi[k] = decay * lpsi[k] + lf;
  }
}

void axpy(double a, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

void corr_accum(double w, const double* x, const double* y, double* acc, int n) {
  for (int i = 0; i < n; ++i) {
    const double p = x[i] * y[i];
    acc[i] += w * p;
  }
}

double dot4(const double* x, const double* y, int n) {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  const int n4 = n - (n % 4);
  for (int k = 0; k < n4; k += 4) {
    a0 += x[k] * y[k];
    a1 += x[k + 1] * y[k + 1];
    a2 += x[k + 2] * y[k + 2];
    a3 += x[k + 3] * y[k + 3];
  }
  double s = ((a0 + a1) + a2) + a3;
  for (int k = n4; k < n; ++k) s += x[k] * y[k];
  return s;
}

}  // namespace

const Ops& scalar_table() {
  static const Ops table = {
      "scalar",   stag_grad,  stag_grad4,     sub_scale,      stag_div, stag_div4,
      flux_psi_a, flux_psi_s, leapfrog,       adj_flux_psi_a, adj_flux_psi_s,
      axpy,       corr_accum, dot4,
  };
  return table;
}

}  // namespace otfwi::simd::detail
