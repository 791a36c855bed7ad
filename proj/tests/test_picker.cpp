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
#include <limits>

#include "otfwi/picker.hpp"
#include "support/testing.hpp"

using namespace otfwi;
using testing::Rng;

namespace {

VelocityModel homogeneous(double c, double lx, double lz, double h) {
  const int nx = static_cast<int>(std::llround(lx / h)) + 1;
  const int nz = static_cast<int>(std::llround(lz / h)) + 1;
  return sample_model(Grid2D(0, 0, h, h, nx, nz), [c](double, double) { return c; });
}

VelocityModel two_layer_small(double h) {
  // Crust 5.8 above z=12, mantle 8.1 below, on [0,20]x[0,15].
  const int nx = static_cast<int>(std::llround(20.0 / h)) + 1;
  const int nz = static_cast<int>(std::llround(15.0 / h)) + 1;
  return sample_model(Grid2D(0, 0, h, h, nx, nz),
                      [](double, double z) { return z > 12.0 ? 8.1 : 5.8; });
}

}  // namespace

TEST_CASE("homogeneous traveltimes match |x-xi|/c within 1 percent") {
  const double c = 5.8, h = 0.2;
  const VelocityModel m = homogeneous(c, 16, 12, h);
  const SourceSpec src{6.0, 6.0, 0.0, 2.0, 1.0};  // on a grid node
  const TraveltimeField tt = traveltime(m, src);
  CHECK(tt.at(src.x, src.z) == 0.0);
  double worst = 0.0;
  for (int iz = 0; iz < m.grid.nz; ++iz) {
    for (int ix = 0; ix < m.grid.nx; ++ix) {
      const double r = std::hypot(m.grid.x(ix) - src.x, m.grid.z(iz) - src.z);
      CHECK(tt.at_node(ix, iz) >= 0.0);
      if (r < 10.0 * h) continue;
      worst = std::max(worst, std::abs(tt.at_node(ix, iz) - r / c) / (r / c));
    }
  }
  CHECK(worst < 0.01);
}

TEST_CASE("straight-ray time in the source layer of a layered model") {
  const VelocityModel m = two_layer_small(0.2);
  const SourceSpec src{10.0, 4.0, 0.0, 2.0, 1.0};
  const TraveltimeField tt = traveltime(m, src);
  // Receiver directly above the source within the same layer.
  const double expected = 4.0 / 5.8;
  CHECK(std::abs(tt.at(10.0, 0.0) - expected) / expected < 0.01);
}

TEST_CASE("halving the grid spacing improves the homogeneous solution") {
  const double c = 6.0;
  auto max_err = [&](double h) {
    const VelocityModel m = homogeneous(c, 12, 12, h);
    const SourceSpec src{6.0, 6.0, 0.0, 2.0, 1.0};
    const TraveltimeField tt = traveltime(m, src);
    double worst = 0.0;
    for (int iz = 0; iz < m.grid.nz; ++iz) {
      for (int ix = 0; ix < m.grid.nx; ++ix) {
        const double r = std::hypot(m.grid.x(ix) - src.x, m.grid.z(iz) - src.z);
        if (r < 2.0) continue;
        worst = std::max(worst, std::abs(tt.at_node(ix, iz) - r / c));
      }
    }
    return worst;
  };
  CHECK(max_err(0.1) < max_err(0.2));
}

TEST_CASE("traveltime field satisfies the discrete eikonal residual") {
  const VelocityModel m = two_layer_small(0.2);
  const SourceSpec src{7.0, 5.0, 0.0, 2.0, 1.0};
  const TraveltimeField tt = traveltime(m, src);
  const Grid2D& g = m.grid;
  int checked = 0;
  for (int iz = 2; iz < g.nz - 2; ++iz) {
    for (int ix = 2; ix < g.nx - 2; ++ix) {
      const double r = std::hypot(g.x(ix) - src.x, g.z(iz) - src.z);
      if (r < 1.5 || std::abs(g.z(iz) - 12.0) < 0.5) continue;  // skip source disc + interface
      const double gx = (tt.at_node(ix + 1, iz) - tt.at_node(ix - 1, iz)) / (2 * g.dx);
      const double gz = (tt.at_node(ix, iz + 1) - tt.at_node(ix, iz - 1)) / (2 * g.dz);
      const double s = 1.0 / m.at(ix, iz);
      CHECK(std::abs(std::hypot(gx, gz) - s) < 0.08 * s);
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("window arithmetic from the picking policy") {
  const PickPolicy policy;
  const PhaseWindow w = make_window(5.0, 2.0, 21.0, policy);
  CHECK(w.accepted);
  CHECK(w.t_lo == doctest::Approx(4.5));
  CHECK(w.t_hi == doctest::Approx(6.5));
  CHECK(w.taper == doctest::Approx(0.25));
}

TEST_CASE("windows collapse near the end of the record") {
  const PickPolicy policy;
  const PhaseWindow w = make_window(21.2, 2.0, 21.0, policy);
  CHECK_FALSE(w.accepted);
  CHECK(w.reason == "window-collapse");
  const PhaseWindow nan_w =
      make_window(std::numeric_limits<double>::quiet_NaN(), 2.0, 21.0, policy);
  CHECK_FALSE(nan_w.accepted);
  CHECK(nan_w.reason == "no-arrival");
}

TEST_CASE("windowed traces vanish outside the window exactly") {
  Rng rng(3);
  Trace s = testing::random_smooth_trace(rng, 0.01, 12.0);
  PickPolicy policy;
  PhaseWindow w = make_window(6.0, 2.0, 12.0, policy);
  const Trace sw = apply_window(w, s);
  for (int k = 0; k < s.nt(); ++k) {
    const double t = k * s.dt;
    if (t < w.t_lo || t > w.t_hi) {
      CHECK(sw.samples[k] == 0.0);
    }
  }
  // Flat part passes through unchanged.
  const int k_mid = static_cast<int>(std::lround(6.2 / s.dt));
  CHECK(sw.samples[k_mid] == s.samples[k_mid]);
}

TEST_CASE("hard windows are idempotent; tapers are applied exactly once by the pipeline") {
  Rng rng(5);
  Trace s = testing::random_smooth_trace(rng, 0.01, 12.0);
  PickPolicy hard;
  hard.taper_periods = 0.0;
  const PhaseWindow w = make_window(6.0, 2.0, 12.0, hard);
  const Trace once = apply_window(w, s);
  const Trace twice = apply_window(w, once);
  for (int k = 0; k < s.nt(); ++k) CHECK(once.samples[k] == twice.samples[k]);
}

TEST_CASE("reflected two-leg estimate matches the image distance in a homogeneous medium") {
  const VelocityModel m = homogeneous(6.0, 20, 15, 0.2);
  const double xs = 5, zs = 8, xr = 15, zr = 0, zmoho = 12;
  const double t = reflected_time_estimate(m, xs, zs, xr, zr, zmoho);
  const double image = std::hypot(xr - xs, (2 * zmoho - zs) - zr);
  CHECK(std::abs(t - image / 6.0) < 1e-3);
  // No same-side reflection when the source sits below the interface.
  CHECK(std::isinf(reflected_time_estimate(m, xs, 13.0, xr, zr, zmoho)));
}

TEST_CASE("pair selection accepts clean pairs and rejects multipath and dead traces") {
  const VelocityModel m0 = two_layer_small(0.125);
  const TimeAxis axis{0.005, 6.0};
  const double f0 = 4.0;
  std::vector<SourceSpec> sources{
      SourceSpec{8.5, 4.0, 0.0, f0, 1.0},   // shallow: direct/reflected well separated
      SourceSpec{8.5, 11.0, 0.0, f0, 1.0},  // hugging the interface: multipath
  };
  std::vector<ReceiverSpec> receivers{{6.0, 0.0}, {18.0, 0.0}};

  // Observed traces: a pulse around the direct arrival everywhere except
  // pair (0,1), which is dead.
  std::vector<std::vector<Trace>> observed(sources.size());
  for (size_t i = 0; i < sources.size(); ++i) {
    const TraveltimeField tt = traveltime(m0, sources[i]);
    for (const ReceiverSpec& r : receivers) {
      Trace d = make_zero_trace(axis);
      const double ta = tt.at(r.x, r.z);
      for (int k = 0; k < d.nt(); ++k) d.samples[k] = ricker(k * axis.dt - ta, f0, 1.0);
      observed[i].push_back(d);
    }
  }
  for (double& v : observed[0][1].samples) v = 0.0;

  PickPolicy policy;
  const PairTable table = select_pairs(m0, sources, receivers, axis, {12.0}, &observed, policy);
  CHECK(table.at(0, 0).accepted);
  CHECK_FALSE(table.at(0, 1).accepted);
  CHECK(table.at(0, 1).reason == "low-energy");
  CHECK_FALSE(table.at(1, 0).accepted);
  CHECK(table.at(1, 0).reason == "multipath");
  CHECK(table.accepted_count() == 1);

  // Deterministic rejection: identical inputs give an identical table.
  const PairTable again = select_pairs(m0, sources, receivers, axis, {12.0}, &observed, policy);
  for (size_t r = 0; r < table.rows.size(); ++r) {
    CHECK(table.rows[r].accepted == again.rows[r].accepted);
    CHECK(table.rows[r].t_lo == again.rows[r].t_lo);
    CHECK(table.rows[r].t_hi == again.rows[r].t_hi);
    CHECK(table.rows[r].reason == again.rows[r].reason);
  }
}
