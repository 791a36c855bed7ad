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

#include "otfwi/simd/stencil.hpp"

#include "otfwi/errors.hpp"

namespace otfwi::fd {

namespace {

void check_dims(int nx, int nz) {
  if (nx < kMinStencilNodes || nz < kMinStencilNodes) {
    throw config_error("stencil: grid must be at least 7x7 nodes");
  }
}

}  // namespace

void grad_x(const simd::Ops& k, const double* u, double* gx, int nx, int nz, double inv_hx) {
  check_dims(nx, nz);
  const double c27 = 9.0 / 8.0 * inv_hx;  // 27/(24h)
  const double c1 = inv_hx / 24.0;
  const int ng = nx - 1;
  for (int iz = 0; iz < nz; ++iz) {
    const double* row = u + static_cast<size_t>(iz) * nx;
    double* g = gx + static_cast<size_t>(iz) * ng;
    g[0] = inv_hx * (row[1] - row[0]);
    k.stag_grad(row, g, 1, ng - 1, c27, c1);
    g[ng - 1] = inv_hx * (row[nx - 1] - row[nx - 2]);
  }
}

void grad_z(const simd::Ops& k, const double* u, double* gz, int nx, int nz, double inv_hz) {
  check_dims(nx, nz);
  const double c27 = 9.0 / 8.0 * inv_hz;
  const double c1 = inv_hz / 24.0;
  auto row = [&](int iz) { return u + static_cast<size_t>(iz) * nx; };
  k.sub_scale(row(1), row(0), gz, inv_hz, nx);
  for (int kz = 1; kz < nz - 2; ++kz) {
    k.stag_grad4(row(kz - 1), row(kz), row(kz + 1), row(kz + 2),
                 gz + static_cast<size_t>(kz) * nx, nx, c27, c1);
  }
  k.sub_scale(row(nz - 1), row(nz - 2), gz + static_cast<size_t>(nz - 2) * nx, inv_hz, nx);
}

// The six boundary columns below are the exact negative-transpose rows of the
// derivative above; see the dense-matrix consistency test.
void div_x(const simd::Ops& k, const double* fx, double* out, int nx, int nz, double inv_hx) {
  check_dims(nx, nz);
  const double c27 = 9.0 / 8.0 * inv_hx;
  const double c1 = inv_hx / 24.0;
  const int nf = nx - 1;
  for (int iz = 0; iz < nz; ++iz) {
    const double* f = fx + static_cast<size_t>(iz) * nf;
    double* o = out + static_cast<size_t>(iz) * nx;
    o[0] = inv_hx * f[0] - c1 * f[1];
    o[1] = -inv_hx * f[0] + c27 * f[1] - c1 * f[2];
    o[2] = c27 * (f[2] - f[1]) - c1 * f[3];
    k.stag_div(f, o, 3, nx - 3, c27, c1);
    o[nx - 3] = c27 * (f[nx - 3] - f[nx - 4]) + c1 * f[nx - 5];
    o[nx - 2] = inv_hx * f[nx - 2] - c27 * f[nx - 3] + c1 * f[nx - 4];
    o[nx - 1] = -inv_hx * f[nx - 2] + c1 * f[nx - 3];
  }
}

void div_z(const simd::Ops& k, const double* fz, double* out, int nx, int nz, double inv_hz) {
  check_dims(nx, nz);
  const double c27 = 9.0 / 8.0 * inv_hz;
  const double c1 = inv_hz / 24.0;
  auto f = [&](int kz) { return fz + static_cast<size_t>(kz) * nx; };
  auto o = [&](int iz) { return out + static_cast<size_t>(iz) * nx; };

  {
    const double *f0 = f(0), *f1 = f(1);
    double* r = o(0);
    for (int i = 0; i < nx; ++i) r[i] = inv_hz * f0[i] - c1 * f1[i];
  }
  {
    const double *f0 = f(0), *f1 = f(1), *f2 = f(2);
    double* r = o(1);
    for (int i = 0; i < nx; ++i) r[i] = -inv_hz * f0[i] + c27 * f1[i] - c1 * f2[i];
  }
  {
    const double *f1 = f(1), *f2 = f(2), *f3 = f(3);
    double* r = o(2);
    for (int i = 0; i < nx; ++i) r[i] = c27 * (f2[i] - f1[i]) - c1 * f3[i];
  }
  for (int iz = 3; iz < nz - 3; ++iz) {
    k.stag_div4(f(iz - 2), f(iz - 1), f(iz), f(iz + 1), o(iz), nx, c27, c1);
  }
  {
    const double *fm2 = f(nz - 5), *fm1 = f(nz - 4), *f0 = f(nz - 3);
    double* r = o(nz - 3);
    for (int i = 0; i < nx; ++i) r[i] = c27 * (f0[i] - fm1[i]) + c1 * fm2[i];
  }
  {
    const double *fm2 = f(nz - 4), *fm1 = f(nz - 3), *f0 = f(nz - 2);
    double* r = o(nz - 2);
    for (int i = 0; i < nx; ++i) r[i] = inv_hz * f0[i] - c27 * fm1[i] + c1 * fm2[i];
  }
  {
    const double *fm1 = f(nz - 3), *f0 = f(nz - 2);
    double* r = o(nz - 1);
    for (int i = 0; i < nx; ++i) r[i] = -inv_hz * f0[i] + c1 * fm1[i];
  }
}

}  // namespace otfwi::fd
