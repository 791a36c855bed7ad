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

#include <cstdio>
#include <filesystem>

#include "otfwi/config.hpp"
#include "otfwi/io.hpp"
#include "support/testing.hpp"

using namespace otfwi;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("full-scale presets carry the published acquisition") {
  ExperimentConfig tl = preset("two-layer", "full");
  tl.realize_placements();
  CHECK(tl.receivers.size() == 25);
  CHECK(tl.sources.size() == 80);
  CHECK(tl.t_f == 21.0);
  CHECK(tl.dt == 0.01);
  CHECK(tl.dx == 0.2);
  CHECK(tl.f0 == 2.0);
  const Grid2D inv = tl.inversion_grid();
  CHECK(inv.nx * inv.nz == 1200);
  tl.validate();

  ExperimentConfig cr = preset("crustal-root", "full");
  cr.realize_placements();
  CHECK(cr.receivers.size() == 40);
  CHECK(cr.sources.size() == 80);
  const Grid2D cr_inv = cr.inversion_grid();
  CHECK(cr_inv.nx * cr_inv.nz == 1600);
  cr.validate();
}

TEST_CASE("desk presets validate against CFL and nesting") {
  for (const char* name : {"two-layer", "crustal-root"}) {
    ExperimentConfig c = preset(name, "desk");
    c.realize_placements();
    c.validate();  // CFL, nesting, in-domain placement
    CHECK(c.sources.size() == 4);
    CHECK(c.receivers.size() == 5);
  }
  CHECK_THROWS_AS(preset("two-layer", "galactic"), config_error);
  CHECK_THROWS_AS(preset("three-layer", "desk"), config_error);
}

TEST_CASE("seeded placements are deterministic and seed-sensitive") {
  ExperimentConfig a = preset("two-layer", "full");
  ExperimentConfig b = preset("two-layer", "full");
  a.realize_placements();
  b.realize_placements();
  REQUIRE(a.sources.size() == b.sources.size());
  for (size_t i = 0; i < a.sources.size(); ++i) {
    CHECK(a.sources[i].x == b.sources[i].x);
    CHECK(a.sources[i].z == b.sources[i].z);
  }
  ExperimentConfig c = preset("two-layer", "full");
  c.seed = 99;
  c.realize_placements();
  CHECK(c.sources[0].x != a.sources[0].x);
  for (const ReceiverSpec& r : a.receivers) CHECK(r.z == 0.0);
  for (const SourceSpec& s : a.sources) {
    CHECK(s.z >= 3.0);
    CHECK(s.z <= 27.0);
  }
}

TEST_CASE("config json round-trips exactly") {
  ExperimentConfig c = preset("two-layer", "desk");
  c.realize_placements();
  const std::string text = config_to_json(c);
  ExperimentConfig back = config_from_json(text);
  CHECK(config_to_json(back) == text);
  CHECK(back.sources.size() == c.sources.size());
  CHECK(back.misfit == c.misfit);

  const std::string path = temp_path("otfwi_cfg_roundtrip.json");
  save_config(c, path);
  ExperimentConfig loaded = load_config(path);
  CHECK(config_to_json(loaded) == text);
  std::remove(path.c_str());
}

TEST_CASE("invalid configurations are rejected with actionable errors") {
  ExperimentConfig c = preset("two-layer", "desk");
  c.dt = 0.02;  // violates CFL
  CHECK_THROWS_AS(c.validate(), config_error);

  ExperimentConfig n = preset("two-layer", "desk");
  n.inversion_spacing = 1.9;  // not nested
  CHECK_THROWS_AS(n.validate(), config_error);

  ExperimentConfig p = preset("two-layer", "desk");
  p.sources[0].x = -4.0;  // outside the domain
  CHECK_THROWS_AS(p.validate(), config_error);
}

TEST_CASE("grid-field files round-trip bit for bit") {
  testing::Rng rng(3);
  const Grid2D g(0.5, -1.0, 0.25, 0.5, 9, 7);
  Field f = make_field(g);
  for (double& v : f) v = rng.uniform(-5, 5);
  const std::string path = temp_path("otfwi_field_roundtrip.txt");
  write_grid_field(path, g, f);
  const auto [g2, f2] = read_grid_field(path);
  CHECK(g2 == g);
  REQUIRE(f2.size() == f.size());
  for (size_t i = 0; i < f.size(); ++i) CHECK(f2[i] == f[i]);
  std::remove(path.c_str());
}

TEST_CASE("trace files round-trip bit for bit in both formats") {
  testing::Rng rng(5);
  Trace t = testing::random_smooth_trace(rng, 0.01, 3.0);
  t.source_id = 7;
  t.receiver_id = 3;

  const std::string csv = temp_path("otfwi_trace.csv");
  write_trace_csv(csv, t);
  const Trace tc = read_trace_csv(csv);
  CHECK(tc.source_id == 7);
  CHECK(tc.receiver_id == 3);
  CHECK(tc.dt == t.dt);
  REQUIRE(tc.nt() == t.nt());
  for (int k = 0; k < t.nt(); ++k) CHECK(tc.samples[k] == t.samples[k]);
  std::remove(csv.c_str());

  const std::string bin = temp_path("otfwi_trace.bin");
  write_trace_binary(bin, t);
  const Trace tb = read_trace_binary(bin);
  CHECK(tb.t_f == t.t_f);
  REQUIRE(tb.nt() == t.nt());
  for (int k = 0; k < t.nt(); ++k) CHECK(tb.samples[k] == t.samples[k]);
  std::remove(bin.c_str());
}

TEST_CASE("experiment assembly freezes windows and observes the seed policy") {
  ExperimentConfig c = preset("two-layer", "desk");
  c.t_f = 4.0;  // trim the axis for test speed
  Experiment e = assemble_experiment(c);
  CHECK(e.pairs.n_sources == 4);
  CHECK(e.pairs.n_receivers == 5);
  CHECK(e.pairs.accepted_count() > 0);
  CHECK(e.observed.size() == 4);
  CHECK(e.observed[0][0].nt() == e.cfg.time_axis().nt());
  // Windows disabled: every pair passes with the full axis.
  ExperimentConfig open = preset("two-layer", "desk");
  open.t_f = 4.0;
  open.windows_enabled = false;
  Experiment eo = assemble_experiment(open, &e.observed);
  CHECK(eo.pairs.accepted_count() == 20);
  CHECK(eo.pairs.at(0, 0).t_hi == 4.0);
}

TEST_CASE("desk crustal-root assembles with usable pairs") {
  ExperimentConfig c = preset("crustal-root", "desk");
  c.t_f = 5.0;  // trimmed for test speed
  Experiment e = assemble_experiment(c);
  CHECK(e.pairs.accepted_count() >= 6);
  CHECK(e.c_true.probe(5.0, 12.0) == 6.5);    // inside the root
  CHECK(e.c_init.probe(5.0, 12.0) == 8.04);   // flat Moho start
}

TEST_CASE("grid csv export round-trips") {
  testing::Rng rng(7);
  const Grid2D g(1.0, 0.5, 0.25, 0.75, 6, 5);
  Field f = make_field(g);
  for (double& v : f) v = rng.uniform(-2, 2);
  const std::string path = temp_path("otfwi_grid.csv");
  write_grid_field_csv(path, g, f);
  const auto [g2, f2] = read_grid_field_csv(path);
  CHECK(g2 == g);
  REQUIRE(f2.size() == f.size());
  for (size_t i = 0; i < f.size(); ++i) CHECK(f2[i] == f[i]);
  std::remove(path.c_str());
}
