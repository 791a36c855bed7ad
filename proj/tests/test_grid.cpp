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

#include "otfwi/models.hpp"
#include "otfwi/transfer.hpp"
#include "support/testing.hpp"

using namespace otfwi;

namespace {

Grid2D full_two_layer_grid() { return Grid2D(0.0, 0.0, 0.2, 0.2, 401, 301); }
Grid2D full_crustal_grid() { return Grid2D(0.0, 0.0, 0.2, 0.2, 401, 401); }

}  // namespace

TEST_CASE("grid invariants are enforced at construction") {
  CHECK_THROWS_AS(Grid2D(0, 0, 0.0, 0.1, 10, 10), config_error);
  CHECK_THROWS_AS(Grid2D(0, 0, 0.1, 0.1, 1, 10), config_error);
  const Grid2D g(1.0, 2.0, 0.5, 0.25, 9, 17);
  CHECK(g.x_max() == doctest::Approx(5.0));
  CHECK(g.z_max() == doctest::Approx(6.0));
  CHECK(g.idx(3, 2) == 2 * 9 + 3);
}

TEST_CASE("two-layer model probes") {
  const VelocityModel with = build_two_layer_model(full_two_layer_grid(), true);
  const VelocityModel without = build_two_layer_model(full_two_layer_grid(), false);
  CHECK(with.probe(40.0, 15.0) == 6.67);
  CHECK(without.probe(40.0, 15.0) == 5.8);
  CHECK(with.probe(40.0, 45.0) == 8.1);
  CHECK(with.probe(10.0, 10.0) == 5.8);
  CHECK(with.probe(35.0, 10.0) == 6.67);  // box edges included
}

TEST_CASE("crustal-root model probes") {
  const VelocityModel with = build_crustal_root_model(full_crustal_grid(), true);
  const VelocityModel without = build_crustal_root_model(full_crustal_grid(), false);
  // L(0) = 36 so z=40 is mantle; L(20) = 42.25 so z=40 is lower crust.
  CHECK(with.probe(0.0, 40.0) == 8.04);
  CHECK(with.probe(20.0, 40.0) == 6.5);
  CHECK(without.probe(20.0, 40.0) == 8.04);
  CHECK(with.probe(50.0, 10.0) == 5.8);
  CHECK(crustal_root_moho_depth(CrustalRootParams{}, 40.0, true) == doctest::Approx(61.0));
}

TEST_CASE("model builders are pure and positive") {
  const VelocityModel a = build_two_layer_model(full_two_layer_grid(), true);
  const VelocityModel b = build_two_layer_model(full_two_layer_grid(), true);
  REQUIRE(a.c.size() == b.c.size());
  for (size_t i = 0; i < a.c.size(); ++i) REQUIRE(a.c[i] == b.c[i]);
  CHECK(a.min_velocity() > 0.0);

  Field bad = a.c;
  bad[17] = -1.0;
  CHECK_THROWS_AS(VelocityModel(a.grid, bad), config_error);
}

TEST_CASE("velocity floor clamps updates") {
  Grid2D g(0, 0, 1.0, 1.0, 8, 8);
  VelocityModel m = sample_model(g, [](double, double) { return 2.0; });
  for (double& v : m.c) v -= 1.8;
  m.apply_floor();
  CHECK(m.min_velocity() == kVelocityFloorKms);
}

TEST_CASE("transfer: constants prolongate exactly") {
  const Grid2D coarse(1.0, 1.0, 2.0, 2.0, 10, 7);
  const Grid2D fine(0.0, 0.0, 0.125, 0.125, 161, 121);
  const GridTransfer tr(coarse, fine);
  Field a = make_field(coarse, 1.0);
  const Field f = tr.prolongate(a);
  for (double v : f) CHECK(v == 1.0);
}

TEST_CASE("transfer: adjoint identity holds to 1e-12") {
  const Grid2D coarse(1.0, 1.0, 2.0, 2.0, 10, 7);
  const Grid2D fine(0.0, 0.0, 0.125, 0.125, 161, 121);
  const GridTransfer tr(coarse, fine);
  testing::Rng rng(42);
  for (int rep = 0; rep < 5; ++rep) {
    Field a = make_field(coarse);
    for (double& v : a) v = rng.uniform(-1, 1);
    Field b = make_field(fine);
    for (double& v : b) v = rng.uniform(-1, 1);
    const double lhs = field_inner(fine, tr.prolongate(a), b);
    const double rhs = field_inner(coarse, a, tr.restrict_adjoint(b));
    CHECK(testing::rel_err(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("transfer: restrict(prolongate(linear)) reproduces interior nodes") {
  const Grid2D coarse(1.0, 1.0, 2.0, 2.0, 10, 7);
  const Grid2D fine(0.0, 0.0, 0.125, 0.125, 161, 121);
  const GridTransfer tr(coarse, fine);
  Field a = make_field(coarse);
  for (int iz = 0; iz < coarse.nz; ++iz) {
    for (int ix = 0; ix < coarse.nx; ++ix) {
      a[coarse.idx(ix, iz)] = 0.3 + 0.7 * coarse.x(ix) - 0.2 * coarse.z(iz);
    }
  }
  const Field back = tr.restrict_adjoint(tr.prolongate(a));
  // Interior coarse nodes see symmetric full hats; the exact-adjoint
  // restriction cannot reproduce linears at the boundary ring.
  for (int iz = 1; iz < coarse.nz - 1; ++iz) {
    for (int ix = 1; ix < coarse.nx - 1; ++ix) {
      CHECK(testing::rel_err(back[coarse.idx(ix, iz)], a[coarse.idx(ix, iz)]) < 1e-12);
    }
  }
}

TEST_CASE("transfer: nesting is validated") {
  const Grid2D fine(0.0, 0.0, 0.125, 0.125, 161, 121);
  CHECK_THROWS_AS(GridTransfer(Grid2D(0.95, 1.0, 2.0, 2.0, 10, 7), fine), config_error);
  CHECK_THROWS_AS(GridTransfer(Grid2D(1.0, 1.0, 2.1, 2.0, 10, 7), fine), config_error);
  CHECK_THROWS_AS(GridTransfer(Grid2D(1.0, 1.0, 2.0, 2.0, 11, 7), fine), config_error);
}
