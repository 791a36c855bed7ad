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

// NEON (aarch64) variants, 2 doubles per vector. Same operation order as the
// scalar reference; vmulq/vaddq only, no fused multiply-add.

#if defined(__aarch64__)

#include <arm_neon.h>

#include "otfwi/simd/kernels.hpp"

namespace otfwi::simd::detail {

namespace {

void stag_grad(const double* u, double* g, int k_begin, int k_end, double c27, double c1) {
  const float64x2_t v27 = vdupq_n_f64(c27);
  const float64x2_t v1 = vdupq_n_f64(c1);
  int k = k_begin;
  for (; k + 2 <= k_end; k += 2) {
    const float64x2_t t1 = vsubq_f64(vld1q_f64(u + k + 1), vld1q_f64(u + k));
    const float64x2_t t2 = vsubq_f64(vld1q_f64(u + k - 1), vld1q_f64(u + k + 2));
    vst1q_f64(g + k, vaddq_f64(vmulq_f64(v27, t1), vmulq_f64(v1, t2)));
  }
  for (; k < k_end; ++k) {
    const double t1 = u[k + 1] - u[k];
    const double t2 = u[k - 1] - u[k + 2];
    g[k] = c27 * t1 + c1 * t2;
  }
}

void stag_grad4(const double* um1, const double* u0, const double* up1, const double* up2,
                double* g, int n, double c27, double c1) {
  const float64x2_t v27 = vdupq_n_f64(c27);
  const float64x2_t v1 = vdupq_n_f64(c1);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t t1 = vsubq_f64(vld1q_f64(up1 + i), vld1q_f64(u0 + i));
    const float64x2_t t2 = vsubq_f64(vld1q_f64(um1 + i), vld1q_f64(up2 + i));
    vst1q_f64(g + i, vaddq_f64(vmulq_f64(v27, t1), vmulq_f64(v1, t2)));
  }
  for (; i < n; ++i) {
    const double t1 = up1[i] - u0[i];
    const double t2 = um1[i] - up2[i];
    g[i] = c27 * t1 + c1 * t2;
  }
}

void sub_scale(const double* a, const double* b, double* g, double s, int n) {
  const float64x2_t vs = vdupq_n_f64(s);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(g + i, vmulq_f64(vs, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i))));
  }
  for (; i < n; ++i) g[i] = s * (a[i] - b[i]);
}

void stag_div(const double* f, double* out, int i_begin, int i_end, double c27, double c1) {
  const float64x2_t v27 = vdupq_n_f64(c27);
  const float64x2_t v1 = vdupq_n_f64(c1);
  int i = i_begin;
  for (; i + 2 <= i_end; i += 2) {
    const float64x2_t t1 = vsubq_f64(vld1q_f64(f + i), vld1q_f64(f + i - 1));
    const float64x2_t t2 = vsubq_f64(vld1q_f64(f + i - 2), vld1q_f64(f + i + 1));
    vst1q_f64(out + i, vaddq_f64(vmulq_f64(v27, t1), vmulq_f64(v1, t2)));
  }
  for (; i < i_end; ++i) {
    const double t1 = f[i] - f[i - 1];
    const double t2 = f[i - 2] - f[i + 1];
    out[i] = c27 * t1 + c1 * t2;
  }
}

void stag_div4(const double* fm2, const double* fm1, const double* f0, const double* fp1,
               double* out, int n, double c27, double c1) {
  const float64x2_t v27 = vdupq_n_f64(c27);
  const float64x2_t v1 = vdupq_n_f64(c1);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t t1 = vsubq_f64(vld1q_f64(f0 + i), vld1q_f64(fm1 + i));
    const float64x2_t t2 = vsubq_f64(vld1q_f64(fm2 + i), vld1q_f64(fp1 + i));
    vst1q_f64(out + i, vaddq_f64(vmulq_f64(v27, t1), vmulq_f64(v1, t2)));
  }
  for (; i < n; ++i) {
    const double t1 = f0[i] - fm1[i];
    const double t2 = fm2[i] - fp1[i];
    out[i] = c27 * t1 + c1 * t2;
  }
}

void flux_psi_a(const double* c2, const double* g, double* psi, double* flux, const double* decay,
                const double* phi, const double* sphi, double sig_other, int n) {
  const float64x2_t vsig = vdupq_n_f64(sig_other);
  int k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t m = vmulq_f64(vld1q_f64(c2 + k), vld1q_f64(g + k));
    const float64x2_t p = vld1q_f64(psi + k);
    vst1q_f64(flux + k, vaddq_f64(m, p));
    const float64x2_t gain =
        vsubq_f64(vmulq_f64(vsig, vld1q_f64(phi + k)), vld1q_f64(sphi + k));
    vst1q_f64(psi + k, vaddq_f64(vmulq_f64(vld1q_f64(decay + k), p), vmulq_f64(gain, m)));
  }
  for (; k < n; ++k) {
    const double m = c2[k] * g[k];
    flux[k] = m + psi[k];
    psi[k] = decay[k] * psi[k] + (sig_other * phi[k] - sphi[k]) * m;
  }
}

void flux_psi_s(const double* c2, const double* g, double* psi, double* flux, double decay,
                double phi, double sphi, const double* sig_other, int n) {
  const float64x2_t vdecay = vdupq_n_f64(decay);
  const float64x2_t vphi = vdupq_n_f64(phi);
  const float64x2_t vsphi = vdupq_n_f64(sphi);
  int k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t m = vmulq_f64(vld1q_f64(c2 + k), vld1q_f64(g + k));
    const float64x2_t p = vld1q_f64(psi + k);
    vst1q_f64(flux + k, vaddq_f64(m, p));
    const float64x2_t gain = vsubq_f64(vmulq_f64(vphi, vld1q_f64(sig_other + k)), vsphi);
    vst1q_f64(psi + k, vaddq_f64(vmulq_f64(vdecay, p), vmulq_f64(gain, m)));
  }
  for (; k < n; ++k) {
    const double m = c2[k] * g[k];
    flux[k] = m + psi[k];
    psi[k] = decay * psi[k] + (phi * sig_other[k] - sphi) * m;
  }
}

void leapfrog(const double* u, const double* uprev, double* unext, const double* tm2b,
              const double* om1a, const double* inv1pa, const double* divx, const double* divz,
              double dt2, int n) {
  const float64x2_t vdt2 = vdupq_n_f64(dt2);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t lap = vaddq_f64(vld1q_f64(divx + i), vld1q_f64(divz + i));
    const float64x2_t t = vsubq_f64(vmulq_f64(vld1q_f64(tm2b + i), vld1q_f64(u + i)),
                                    vmulq_f64(vld1q_f64(om1a + i), vld1q_f64(uprev + i)));
    const float64x2_t rhs = vaddq_f64(t, vmulq_f64(vdt2, lap));
    vst1q_f64(unext + i, vmulq_f64(vld1q_f64(inv1pa + i), rhs));
  }
  for (; i < n; ++i) {
    const double lap = divx[i] + divz[i];
    const double t = tm2b[i] * u[i] - om1a[i] * uprev[i];
    unext[i] = inv1pa[i] * (t + dt2 * lap);
  }
}

void adj_flux_psi_a(const double* c2, const double* gphi, const double* gu, double* lpsi,
                    double* lg, double* acc, const double* decay, const double* phi,
                    const double* sphi, double sig_other, double dt2, double wt, int n) {
  const float64x2_t vndt2 = vdupq_n_f64(-dt2);
  const float64x2_t vsig = vdupq_n_f64(sig_other);
  const float64x2_t vwt = vdupq_n_f64(wt);
  int k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t lf = vmulq_f64(vndt2, vld1q_f64(gphi + k));
    const float64x2_t gain =
        vsubq_f64(vmulq_f64(vsig, vld1q_f64(phi + k)), vld1q_f64(sphi + k));
    const float64x2_t p = vld1q_f64(lpsi + k);
    const float64x2_t lm = vaddq_f64(lf, vmulq_f64(gain, p));
    const float64x2_t prod = vmulq_f64(lm, vld1q_f64(gu + k));
    vst1q_f64(acc + k, vaddq_f64(vld1q_f64(acc + k), vmulq_f64(vwt, prod)));
    vst1q_f64(lg + k, vmulq_f64(vld1q_f64(c2 + k), lm));
    vst1q_f64(lpsi + k, vaddq_f64(vmulq_f64(vld1q_f64(decay + k), p), lf));
  }
  for (; k < n; ++k) {
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
  const float64x2_t vndt2 = vdupq_n_f64(-dt2);
  const float64x2_t vdecay = vdupq_n_f64(decay);
  const float64x2_t vphi = vdupq_n_f64(phi);
  const float64x2_t vsphi = vdupq_n_f64(sphi);
  const float64x2_t vwt = vdupq_n_f64(wt);
  int k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t lf = vmulq_f64(vndt2, vld1q_f64(gphi + k));
    const float64x2_t gain = vsubq_f64(vmulq_f64(vphi, vld1q_f64(sig_other + k)), vsphi);
    const float64x2_t p = vld1q_f64(lpsi + k);
    const float64x2_t lm = vaddq_f64(lf, vmulq_f64(gain, p));
    const float64x2_t prod = vmulq_f64(lm, vld1q_f64(gu + k));
    vst1q_f64(acc + k, vaddq_f64(vld1q_f64(acc + k), vmulq_f64(vwt, prod)));
    vst1q_f64(lg + k, vmulq_f64(vld1q_f64(c2 + k), lm));
    vst1q_f64(lpsi + k, vaddq_f64(vmulq_f64(vdecay, p), lf));
  }
  for (; k < n; ++k) {
    const double lf = -dt2 * gphi[k];
    const double lm = lf + (phi * sig_other[k] - sphi) * lpsi[k];
    acc[k] += wt * (lm * gu[k]);
    lg[k] = c2[k] * lm;
    lpsi[k] = decay * lpsi[k] + lf;
  }
}

void axpy(double a, const double* x, double* y, int n) {
  const float64x2_t va = vdupq_n_f64(a);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void corr_accum(double w, const double* x, const double* y, double* acc, int n) {
  const float64x2_t vw = vdupq_n_f64(w);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t p = vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vmulq_f64(vw, p)));
  }
  for (; i < n; ++i) {
    const double p = x[i] * y[i];
    acc[i] += w * p;
  }
}

double dot4(const double* x, const double* y, int n) {
  // Two vectors emulate the 4-lane accumulation pattern of the other backends.
  float64x2_t acc01 = vdupq_n_f64(0.0);
  float64x2_t acc23 = vdupq_n_f64(0.0);
  const int n4 = n - (n % 4);
  for (int k = 0; k < n4; k += 4) {
    acc01 = vaddq_f64(acc01, vmulq_f64(vld1q_f64(x + k), vld1q_f64(y + k)));
    acc23 = vaddq_f64(acc23, vmulq_f64(vld1q_f64(x + k + 2), vld1q_f64(y + k + 2)));
  }
  const double a0 = vgetq_lane_f64(acc01, 0);
  const double a1 = vgetq_lane_f64(acc01, 1);
  const double a2 = vgetq_lane_f64(acc23, 0);
  const double a3 = vgetq_lane_f64(acc23, 1);
  double s = ((a0 + a1) + a2) + a3;
  for (int k = n4; k < n; ++k) s += x[k] * y[k];
  return s;
}

}  // namespace

const Ops& neon_table() {
  static const Ops table = {
      "neon",     stag_grad,  stag_grad4,     sub_scale,      stag_div, stag_div4,
      flux_psi_a, flux_psi_s, leapfrog,       adj_flux_psi_a, adj_flux_psi_s,
      axpy,       corr_accum, dot4,
  };
  return table;
}

}  // namespace otfwi::simd::detail

#endif  // __aarch64__
