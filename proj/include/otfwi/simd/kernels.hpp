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

#include <string>

namespace otfwi::simd {

enum class Backend { scalar, avx2, neon };

/// Row kernels for the wave-equation inner loops. Every backend implements the
/// same arithmetic in the same per-element operation order, so backends agree
/// bit-for-bit on identical inputs (the equivalence tests assert exactly that).
/// No backend may use FMA or reassociate sums.
struct Ops {
  const char* name;

  // Staggered 4th-order derivative within one contiguous row:
  //   g[k] = c27*(u[k+1]-u[k]) + c1*(u[k-1]-u[k+2]),  k in [k_begin, k_end)
  void (*stag_grad)(const double* u, double* g, int k_begin, int k_end, double c27, double c1);

  // Same stencil across four prefetched rows (z direction), elementwise in x:
  //   g[i] = c27*(up1[i]-u0[i]) + c1*(um1[i]-up2[i])
  void (*stag_grad4)(const double* um1, const double* u0, const double* up1, const double* up2,
                     double* g, int n, double c27, double c1);

  // g[i] = s*(a[i]-b[i])
  void (*sub_scale)(const double* a, const double* b, double* g, double s, int n);

  // Interior part of the adjoint-consistent divergence within one row:
  //   out[i] = c27*(f[i]-f[i-1]) + c1*(f[i-2]-f[i+1]),  i in [i_begin, i_end)
  void (*stag_div)(const double* f, double* out, int i_begin, int i_end, double c27, double c1);

  // Divergence across four flux rows, elementwise in x:
  //   out[i] = c27*(f0[i]-fm1[i]) + c1*(fm2[i]-fp1[i])
  void (*stag_div4)(const double* fm2, const double* fm1, const double* f0, const double* fp1,
                    double* out, int n, double c27, double c1);

  // Flux assembly plus PML memory update, per-element coefficients
  // (x-direction strips; sig_other is the node value of the transverse profile):
  //   m       = c2[k]*g[k]
  //   flux[k] = m + psi[k]
  //   psi[k]  = decay[k]*psi[k] + (sig_other*phi[k] - sphi[k])*m
  void (*flux_psi_a)(const double* c2, const double* g, double* psi, double* flux,
                     const double* decay, const double* phi, const double* sphi, double sig_other,
                     int n);

  // Flux assembly plus PML memory update, scalar coefficients per row
  // (z-direction strips; sig_other varies along the row):
  //   psi[k] = decay*psi[k] + (phi*sig_other[k] - sphi)*m
  void (*flux_psi_s)(const double* c2, const double* g, double* psi, double* flux, double decay,
                     double phi, double sphi, const double* sig_other, int n);

  // Damped leapfrog update:
  //   unext[i] = inv1pa[i]*(tm2b[i]*u[i] - om1a[i]*uprev[i] + dt2*(divx[i]+divz[i]))
  void (*leapfrog)(const double* u, const double* uprev, double* unext, const double* tm2b,
                   const double* om1a, const double* inv1pa, const double* divx, const double* divz,
                   double dt2, int n);

  // Transpose of the flux/memory update, used by the exact-adjoint gradient:
  //   lf      = -dt2*gphi[k]
  //   lm      = lf + (sig_other*phi[k]-sphi[k])*lpsi[k]
  //   acc[k] += wt*lm*gu[k]
  //   lg[k]   = c2[k]*lm
  //   lpsi[k] = decay[k]*lpsi[k] + lf
  void (*adj_flux_psi_a)(const double* c2, const double* gphi, const double* gu, double* lpsi,
                         double* lg, double* acc, const double* decay, const double* phi,
                         const double* sphi, double sig_other, double dt2, double wt, int n);

  // Scalar-coefficient variant (z strips):
  //   lm = lf + (phi*sig_other[k]-sphi)*lpsi[k]
  void (*adj_flux_psi_s)(const double* c2, const double* gphi, const double* gu, double* lpsi,
                         double* lg, double* acc, double decay, double phi, double sphi,
                         const double* sig_other, double dt2, double wt, int n);

  // y[i] += a*x[i]
  void (*axpy)(double a, const double* x, double* y, int n);

  // acc[i] += w*x[i]*y[i]
  void (*corr_accum)(double w, const double* x, const double* y, double* acc, int n);

  // Dot product with a fixed 4-way interleaved accumulation order shared by
  // every backend: lane j sums x[4k+j]*y[4k+j], lanes reduced left to right,
  // then the tail is folded in sequentially.
  double (*dot4)(const double* x, const double* y, int n);
};

bool backend_available(Backend b);
const Ops& ops_for(Backend b);

/// Table chosen for this process: best available backend unless overridden.
const Ops& ops();
Backend active_backend();

/// Test hook. Throws config_error if the backend is unavailable on this host.
void force_backend(Backend b);
void clear_forced_backend();

std::string backend_name(Backend b);

namespace detail {
const Ops& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_table();
#endif
#if defined(__aarch64__)
const Ops& neon_table();
#endif
}  // namespace detail

}  // namespace otfwi::simd
