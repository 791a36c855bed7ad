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

#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "otfwi/simd/kernels.hpp"
#include "otfwi/simd/stencil.hpp"
#include "support/testing.hpp"

using namespace otfwi;
using testing::Rng;

namespace {

std::vector<double> random_vec(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(static_cast<size_t>(n));
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

// Dense matrix of a linear row operation, by probing unit vectors.
std::vector<std::vector<double>> probe_matrix(int rows, int cols,
                                              const std::function<void(const double*, double*)>& op) {
  std::vector<std::vector<double>> m(static_cast<size_t>(rows),
                                     std::vector<double>(static_cast<size_t>(cols), 0.0));
  std::vector<double> e(static_cast<size_t>(cols), 0.0);
  std::vector<double> out(static_cast<size_t>(rows), 0.0);
  for (int j = 0; j < cols; ++j) {
    e[static_cast<size_t>(j)] = 1.0;
    op(e.data(), out.data());
    for (int r = 0; r < rows; ++r) m[static_cast<size_t>(r)][static_cast<size_t>(j)] = out[r];
    e[static_cast<size_t>(j)] = 0.0;
  }
  return m;
}

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(simd::backend_available(simd::Backend::scalar));
  CHECK(simd::ops_for(simd::Backend::scalar).name == std::string("scalar"));
}

TEST_CASE("divergence is exactly the negative transpose of the gradient") {
  const int nx = 9, nz = 8;
  const simd::Ops& k = simd::ops_for(simd::Backend::scalar);
  const double inv_h = 1.0 / 0.25;

  SUBCASE("x direction") {
    auto d = probe_matrix((nx - 1) * nz, nx * nz, [&](const double* u, double* g) {
      fd::grad_x(k, u, g, nx, nz, inv_h);
    });
    auto div = probe_matrix(nx * nz, (nx - 1) * nz, [&](const double* f, double* o) {
      fd::div_x(k, f, o, nx, nz, inv_h);
    });
    for (int r = 0; r < (nx - 1) * nz; ++r) {
      for (int c = 0; c < nx * nz; ++c) {
        CHECK(div[c][r] == -d[r][c]);
      }
    }
  }
  SUBCASE("z direction") {
    auto d = probe_matrix(nx * (nz - 1), nx * nz, [&](const double* u, double* g) {
      fd::grad_z(k, u, g, nx, nz, inv_h);
    });
    auto div = probe_matrix(nx * nz, nx * (nz - 1), [&](const double* f, double* o) {
      fd::div_z(k, f, o, nx, nz, inv_h);
    });
    for (int r = 0; r < nx * (nz - 1); ++r) {
      for (int c = 0; c < nx * nz; ++c) {
        CHECK(div[c][r] == -d[r][c]);
      }
    }
  }
}

TEST_CASE("gradient stencil is 4th order on smooth data") {
  const simd::Ops& k = simd::ops_for(simd::Backend::scalar);
  auto max_err = [&](int n) {
    const double h = 2.0 / (n - 1);
    std::vector<double> u(static_cast<size_t>(n) * 7), g(static_cast<size_t>(n - 1) * 7);
    for (int iz = 0; iz < 7; ++iz) {
      for (int ix = 0; ix < n; ++ix) u[static_cast<size_t>(iz) * n + ix] = std::sin(1.7 * ix * h);
    }
    fd::grad_x(k, u.data(), g.data(), n, 7, 1.0 / h);
    double e = 0.0;
    for (int ix = 2; ix < n - 3; ++ix) {  // interior 4th-order rows
      const double x_half = (ix + 0.5) * h;
      e = std::max(e, std::abs(g[3 * (n - 1) + ix] - 1.7 * std::cos(1.7 * x_half)));
    }
    return e;
  };
  const double e1 = max_err(41);
  const double e2 = max_err(81);
  CHECK(e1 / e2 > 12.0);  // ~16 for a clean 4th order
}

TEST_CASE("simd backends match the scalar reference bit for bit") {
  if (simd::active_backend() == simd::Backend::scalar) {
    MESSAGE("no SIMD backend on this host; equivalence trivially holds");
    return;
  }
  const simd::Ops& s = simd::ops_for(simd::Backend::scalar);
  const simd::Ops& v = simd::ops_for(simd::active_backend());
  Rng rng(7);

  SUBCASE("stag_grad and stag_div with ragged lengths") {
    for (int n : {8, 13, 64, 129}) {
      auto u = random_vec(rng, n + 4);
      std::vector<double> g1(static_cast<size_t>(n)), g2(static_cast<size_t>(n));
      s.stag_grad(u.data() + 2, g1.data(), 0, n - 2, 1.125, 0.041666);
      v.stag_grad(u.data() + 2, g2.data(), 0, n - 2, 1.125, 0.041666);
      CHECK(bit_equal(g1, g2));
      s.stag_div(u.data() + 2, g1.data(), 2, n - 2, 1.125, 0.0417);
      v.stag_div(u.data() + 2, g2.data(), 2, n - 2, 1.125, 0.0417);
      CHECK(bit_equal(g1, g2));
    }
  }
  SUBCASE("row kernels") {
    const int n = 131;
    auto a = random_vec(rng, n), b = random_vec(rng, n), c = random_vec(rng, n),
         d = random_vec(rng, n);
    std::vector<double> o1(static_cast<size_t>(n)), o2(static_cast<size_t>(n));
    s.stag_grad4(a.data(), b.data(), c.data(), d.data(), o1.data(), n, 1.125, -0.04);
    v.stag_grad4(a.data(), b.data(), c.data(), d.data(), o2.data(), n, 1.125, -0.04);
    CHECK(bit_equal(o1, o2));
    s.stag_div4(a.data(), b.data(), c.data(), d.data(), o1.data(), n, 1.125, -0.04);
    v.stag_div4(a.data(), b.data(), c.data(), d.data(), o2.data(), n, 1.125, -0.04);
    CHECK(bit_equal(o1, o2));
    s.sub_scale(a.data(), b.data(), o1.data(), 3.7, n);
    v.sub_scale(a.data(), b.data(), o2.data(), 3.7, n);
    CHECK(bit_equal(o1, o2));
  }
  SUBCASE("flux_psi variants update psi identically") {
    const int n = 101;
    auto c2 = random_vec(rng, n, 20, 70), g = random_vec(rng, n);
    auto decay = random_vec(rng, n, 0.5, 1.0), phi = random_vec(rng, n, 0.0, 0.01),
         sphi = random_vec(rng, n, 0.0, 0.2), sig = random_vec(rng, n, 0.0, 40.0);
    auto psi1 = random_vec(rng, n), psi2 = psi1;
    std::vector<double> f1(static_cast<size_t>(n)), f2(static_cast<size_t>(n));
    s.flux_psi_a(c2.data(), g.data(), psi1.data(), f1.data(), decay.data(), phi.data(),
                 sphi.data(), 12.5, n);
    v.flux_psi_a(c2.data(), g.data(), psi2.data(), f2.data(), decay.data(), phi.data(),
                 sphi.data(), 12.5, n);
    CHECK(bit_equal(f1, f2));
    CHECK(bit_equal(psi1, psi2));
    psi2 = psi1;
    auto f3 = f1;
    s.flux_psi_s(c2.data(), g.data(), psi1.data(), f1.data(), 0.93, 0.004, 0.11, sig.data(), n);
    v.flux_psi_s(c2.data(), g.data(), psi2.data(), f3.data(), 0.93, 0.004, 0.11, sig.data(), n);
    CHECK(bit_equal(f1, f3));
    CHECK(bit_equal(psi1, psi2));
  }
  SUBCASE("transpose flux kernels update acc, lg and lpsi identically") {
    const int n = 103;
    auto c2 = random_vec(rng, n, 20, 70), gphi = random_vec(rng, n), gu = random_vec(rng, n);
    auto decay = random_vec(rng, n, 0.5, 1.0), phi = random_vec(rng, n, 0.0, 0.01),
         sphi = random_vec(rng, n, 0.0, 0.2), sig = random_vec(rng, n, 0.0, 40.0);
    auto lpsi1 = random_vec(rng, n), lpsi2 = lpsi1;
    auto acc1 = random_vec(rng, n), acc2 = acc1;
    std::vector<double> lg1(static_cast<size_t>(n)), lg2(static_cast<size_t>(n));
    s.adj_flux_psi_a(c2.data(), gphi.data(), gu.data(), lpsi1.data(), lg1.data(), acc1.data(),
                     decay.data(), phi.data(), sphi.data(), 12.5, 2.5e-5, 2.0, n);
    v.adj_flux_psi_a(c2.data(), gphi.data(), gu.data(), lpsi2.data(), lg2.data(), acc2.data(),
                     decay.data(), phi.data(), sphi.data(), 12.5, 2.5e-5, 2.0, n);
    CHECK(bit_equal(lpsi1, lpsi2));
    CHECK(bit_equal(lg1, lg2));
    CHECK(bit_equal(acc1, acc2));

    lpsi2 = lpsi1;
    acc2 = acc1;
    s.adj_flux_psi_s(c2.data(), gphi.data(), gu.data(), lpsi1.data(), lg1.data(), acc1.data(),
                     0.93, 0.004, 0.11, sig.data(), 2.5e-5, 1.0, n);
    v.adj_flux_psi_s(c2.data(), gphi.data(), gu.data(), lpsi2.data(), lg2.data(), acc2.data(),
                     0.93, 0.004, 0.11, sig.data(), 2.5e-5, 1.0, n);
    CHECK(bit_equal(lpsi1, lpsi2));
    CHECK(bit_equal(lg1, lg2));
    CHECK(bit_equal(acc1, acc2));
  }
  SUBCASE("leapfrog, axpy, corr_accum, dot4") {
    const int n = 127;
    auto u = random_vec(rng, n), up = random_vec(rng, n), t = random_vec(rng, n, 1.9, 2.0),
         om = random_vec(rng, n, 0.9, 1.0), inv = random_vec(rng, n, 0.9, 1.0),
         dx = random_vec(rng, n), dz = random_vec(rng, n);
    std::vector<double> o1(static_cast<size_t>(n)), o2(static_cast<size_t>(n));
    s.leapfrog(u.data(), up.data(), o1.data(), t.data(), om.data(), inv.data(), dx.data(),
               dz.data(), 2.5e-5, n);
    v.leapfrog(u.data(), up.data(), o2.data(), t.data(), om.data(), inv.data(), dx.data(),
               dz.data(), 2.5e-5, n);
    CHECK(bit_equal(o1, o2));

    auto y1 = random_vec(rng, n);
    auto y2 = y1;
    s.axpy(0.37, u.data(), y1.data(), n);
    v.axpy(0.37, u.data(), y2.data(), n);
    CHECK(bit_equal(y1, y2));

    y2 = y1;
    s.corr_accum(-0.01, u.data(), up.data(), y1.data(), n);
    v.corr_accum(-0.01, u.data(), up.data(), y2.data(), n);
    CHECK(bit_equal(y1, y2));

    CHECK(s.dot4(u.data(), up.data(), n) == v.dot4(u.data(), up.data(), n));
  }
  SUBCASE("full stencil wrappers agree through the dispatch layer") {
    const int nx = 47, nz = 31;
    auto u = random_vec(rng, nx * nz);
    std::vector<double> g1(static_cast<size_t>(nx - 1) * nz), g2(g1.size());
    fd::grad_x(s, u.data(), g1.data(), nx, nz, 8.0);
    fd::grad_x(v, u.data(), g2.data(), nx, nz, 8.0);
    CHECK(bit_equal(g1, g2));
    std::vector<double> z1(static_cast<size_t>(nx) * (nz - 1)), z2(z1.size());
    fd::grad_z(s, u.data(), z1.data(), nx, nz, 8.0);
    fd::grad_z(v, u.data(), z2.data(), nx, nz, 8.0);
    CHECK(bit_equal(z1, z2));
    std::vector<double> o1(static_cast<size_t>(nx) * nz), o2(o1.size());
    fd::div_x(s, g1.data(), o1.data(), nx, nz, 8.0);
    fd::div_x(v, g1.data(), o2.data(), nx, nz, 8.0);
    CHECK(bit_equal(o1, o2));
    fd::div_z(s, z1.data(), o1.data(), nx, nz, 8.0);
    fd::div_z(v, z1.data(), o2.data(), nx, nz, 8.0);
    CHECK(bit_equal(o1, o2));
  }
}

TEST_CASE("dot4 matches a high-precision reference") {
  Rng rng(11);
  for (int n : {1, 4, 5, 1000}) {
    auto x = random_vec(rng, n), y = random_vec(rng, n);
    long double ref = 0.0;
    for (int i = 0; i < n; ++i) ref += static_cast<long double>(x[i]) * y[i];
    const double got = simd::ops().dot4(x.data(), y.data(), n);
    CHECK(std::abs(got - static_cast<double>(ref)) < 1e-12 * (1.0 + std::abs(double(ref))));
  }
}

TEST_CASE("forcing an unavailable backend throws") {
  if (!simd::backend_available(simd::Backend::neon)) {
    CHECK_THROWS_AS(simd::force_backend(simd::Backend::neon), config_error);
  }
  simd::force_backend(simd::Backend::scalar);
  CHECK(simd::active_backend() == simd::Backend::scalar);
  simd::clear_forced_backend();
}
