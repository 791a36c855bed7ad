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

// AVX2 variants of the reference kernels. Plain mul/add/sub only (no FMA), so
// every lane rounds exactly like the scalar reference and the two backends
// stay bit-identical.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "otfwi/simd/kernels.hpp"

namespace otfwi::simd::detail {

namespace {

void stag_grad(const double* u, double* g, int k_begin, int k_end, double c27, double c1) {
  const __m256d v27 = _mm256_set1_pd(c27);
  const __m256d v1 = _mm256_set1_pd(c1);
  int k = k_begin;
  for (; k + 4 <= k_end; k += 4) {
    const __m256d t1 = _mm256_sub_pd(_mm256_loadu_pd(u + k + 1), _mm256_loadu_pd(u + k));
    const __m256d t2 = _mm256_sub_pd(_mm256_loadu_pd(u + k - 1), _mm256_loadu_pd(u + k + 2));
    _mm256_storeu_pd(g + k, _mm256_add_pd(_mm256_mul_pd(v27, t1), _mm256_mul_pd(v1, t2)));
  }
  for (; k < k_end; ++k) {
    const double t1 = u[k + 1] - u[k];
    const double t2 = u[k - 1] - u[k + 2];
    g[k] = c27 * t1 + c1 * t2;
  }
}

void stag_grad4(const double* um1, const double* u0, const double* up1, const double* up2,
                double* g, int n, double c27, double c1) {
  const __m256d v27 = _mm256_set1_pd(c27);
  const __m256d v1 = _mm256_set1_pd(c1);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t1 = _mm256_sub_pd(_mm256_loadu_pd(up1 + i), _mm256_loadu_pd(u0 + i));
    const __m256d t2 = _mm256_sub_pd(_mm256_loadu_pd(um1 + i), _mm256_loadu_pd(up2 + i));
    _mm256_storeu_pd(g + i, _mm256_add_pd(_mm256_mul_pd(v27, t1), _mm256_mul_pd(v1, t2)));
  }
  for (; i < n; ++i) {
    const double t1 = up1[i] - u0[i];
    const double t2 = um1[i] - up2[i];
    g[i] = c27 * t1 + c1 * t2;
  }
}

void sub_scale(const double* a, const double* b, double* g, double s, int n) {
  const __m256d vs = _mm256_set1_pd(s);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(g + i, _mm256_mul_pd(vs, d));
  }
  for (; i < n; ++i) g[i] = s * (a[i] - b[i]);
}

void stag_div(const double* f, double* out, int i_begin, int i_end, double c27, double c1) {
  const __m256d v27 = _mm256_set1_pd(c27);
  const __m256d v1 = _mm256_set1_pd(c1);
  int i = i_begin;
  for (; i + 4 <= i_end; i += 4) {
    const __m256d t1 = _mm256_sub_pd(_mm256_loadu_pd(f + i), _mm256_loadu_pd(f + i - 1));
    const __m256d t2 = _mm256_sub_pd(_mm256_loadu_pd(f + i - 2), _mm256_loadu_pd(f + i + 1));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(v27, t1), _mm256_mul_pd(v1, t2)));
  }
  for (; i < i_end; ++i) {
    const double t1 = f[i] - f[i - 1];
    const double t2 = f[i - 2] - f[i + 1];
    out[i] = c27 * t1 + c1 * t2;
  }
}

void stag_div4(const double* fm2, const double* fm1, const double* f0, const double* fp1,
               double* out, int n, double c27, double c1) {
  const __m256d v27 = _mm256_set1_pd(c27);
  const __m256d v1 = _mm256_set1_pd(c1);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t1 = _mm256_sub_pd(_mm256_loadu_pd(f0 + i), _mm256_loadu_pd(fm1 + i));
    const __m256d t2 = _mm256_sub_pd(_mm256_loadu_pd(fm2 + i), _mm256_loadu_pd(fp1 + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(v27, t1), _mm256_mul_pd(v1, t2)));
  }
  for (; i < n; ++i) {
    const double t1 = f0[i] - fm1[i];
    const double t2 = fm2[i] - fp1[i];
    out[i] = c27 * t1 + c1 * t2;
  }
}

void flux_psi_a(const double* c2, const double* g, double* psi, double* flux, const double* decay,
                const double* phi, const double* sphi, double sig_other, int n) {
  const __m256d vsig = _mm256_set1_pd(sig_other);
  int k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d m = _mm256_mul_pd(_mm256_loadu_pd(c2 + k), _mm256_loadu_pd(g + k));
    const __m256d p = _mm256_loadu_pd(psi + k);
    _mm256_storeu_pd(flux + k, _mm256_add_pd(m, p));
    const __m256d gain =
        _mm256_sub_pd(_mm256_mul_pd(vsig, _mm256_loadu_pd(phi + k)), _mm256_loadu_pd(sphi + k));
    _mm256_storeu_pd(
        psi + k, _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(decay + k), p), _mm256_mul_pd(gain, m)));
  }
  for (; k < n; ++k) {
    const double m = c2[k] * g[k];
    flux[k] = m + psi[k];
    psi[k] = decay[k] * psi[k] + (sig_other * phi[k] - sphi[k]) * m;
  }
}

void flux_psi_s(const double* c2, const double* g, double* psi, double* flux, double decay,
                double phi, double sphi, const double* sig_other, int n) {
  const __m256d vdecay = _mm256_set1_pd(decay);
  const __m256d vphi = _mm256_set1_pd(phi);
  const __m256d vsphi = _mm256_set1_pd(sphi);
  int k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d m = _mm256_mul_pd(_mm256_loadu_pd(c2 + k), _mm256_loadu_pd(g + k));
    const __m256d p = _mm256_loadu_pd(psi + k);
    _mm256_storeu_pd(flux + k, _mm256_add_pd(m, p));
    const __m256d gain =
        _mm256_sub_pd(_mm256_mul_pd(vphi, _mm256_loadu_pd(sig_other + k)), vsphi);
    _mm256_storeu_pd(psi + k,
                     _mm256_add_pd(_mm256_mul_pd(vdecay, p), _mm256_mul_pd(gain, m)));
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
  const __m256d vdt2 = _mm256_set1_pd(dt2);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d lap = _mm256_add_pd(_mm256_loadu_pd(divx + i), _mm256_loadu_pd(divz + i));
    const __m256d t =
        _mm256_sub_pd(_mm256_mul_pd(_mm256_loadu_pd(tm2b + i), _mm256_loadu_pd(u + i)),
                      _mm256_mul_pd(_mm256_loadu_pd(om1a + i), _mm256_loadu_pd(uprev + i)));
    const __m256d rhs = _mm256_add_pd(t, _mm256_mul_pd(vdt2, lap));
    _mm256_storeu_pd(unext + i, _mm256_mul_pd(_mm256_loadu_pd(inv1pa + i), rhs));
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
  const __m256d vndt2 = _mm256_set1_pd(-dt2);
  const __m256d vsig = _mm256_set1_pd(sig_other);
  const __m256d vwt = _mm256_set1_pd(wt);
  int k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d lf = _mm256_mul_pd(vndt2, _mm256_loadu_pd(gphi + k));
    const __m256d gain =
        _mm256_sub_pd(_mm256_mul_pd(vsig, _mm256_loadu_pd(phi + k)), _mm256_loadu_pd(sphi + k));
    const __m256d p = _mm256_loadu_pd(lpsi + k);
    const __m256d lm = _mm256_add_pd(lf, _mm256_mul_pd(gain, p));
    const __m256d prod = _mm256_mul_pd(lm, _mm256_loadu_pd(gu + k));
    _mm256_storeu_pd(acc + k, _mm256_add_pd(_mm256_loadu_pd(acc + k), _mm256_mul_pd(vwt, prod)));
    _mm256_storeu_pd(lg + k, _mm256_mul_pd(_mm256_loadu_pd(c2 + k), lm));
    _mm256_storeu_pd(lpsi + k,
                     _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(decay + k), p), lf));
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
  const __m256d vndt2 = _mm256_set1_pd(-dt2);
  const __m256d vdecay = _mm256_set1_pd(decay);
  const __m256d vphi = _mm256_set1_pd(phi);
  const __m256d vsphi = _mm256_set1_pd(sphi);
  const __m256d vwt = _mm256_set1_pd(wt);
  int k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d lf = _mm256_mul_pd(vndt2, _mm256_loadu_pd(gphi + k));
    const __m256d gain =
        _mm256_sub_pd(_mm256_mul_pd(vphi, _mm256_loadu_pd(sig_other + k)), vsphi);
    const __m256d p = _mm256_loadu_pd(lpsi + k);
    const __m256d lm = _mm256_add_pd(lf, _mm256_mul_pd(gain, p));
    const __m256d prod = _mm256_mul_pd(lm, _mm256_loadu_pd(gu + k));
    _mm256_storeu_pd(acc + k, _mm256_add_pd(_mm256_loadu_pd(acc + k), _mm256_mul_pd(vwt, prod)));
    _mm256_storeu_pd(lg + k, _mm256_mul_pd(_mm256_loadu_pd(c2 + k), lm));
    _mm256_storeu_pd(lpsi + k, _mm256_add_pd(_mm256_mul_pd(vdecay, p), lf));
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
  const __m256d va = _mm256_set1_pd(a);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), t));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void corr_accum(double w, const double* x, const double* y, double* acc, int n) {
  const __m256d vw = _mm256_set1_pd(w);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_mul_pd(vw, p)));
  }
  for (; i < n; ++i) {
    const double p = x[i] * y[i];
    acc[i] += w * p;
  }
}

double dot4(const double* x, const double* y, int n) {
  __m256d vacc = _mm256_setzero_pd();
  const int n4 = n - (n % 4);
  for (int k = 0; k < n4; k += 4) {
    vacc = _mm256_add_pd(vacc, _mm256_mul_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vacc);
  double s = ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
  for (int k = n4; k < n; ++k) s += x[k] * y[k];
  return s;
}

}  // namespace

const Ops& avx2_table() {
  static const Ops table = {
      "avx2",     stag_grad,  stag_grad4,     sub_scale,      stag_div, stag_div4,
      flux_psi_a, flux_psi_s, leapfrog,       adj_flux_psi_a, adj_flux_psi_s,
      axpy,       corr_accum, dot4,
  };
  return table;
}

}  // namespace otfwi::simd::detail

#endif  // x86_64
