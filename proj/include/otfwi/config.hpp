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

#include <cstdint>
#include <string>
#include <vector>

#include "otfwi/inversion.hpp"
#include "otfwi/models.hpp"
#include "otfwi/picker.hpp"
#include "otfwi/scaling.hpp"
#include "otfwi/wave.hpp"

namespace otfwi {

struct ModelConfig {
  std::string kind = "two-layer";  // two-layer | crustal-root
  TwoLayerParams two_layer;
  CrustalRootParams crustal_root;
};

/// Complete description of one experiment: geometry, discretization, data
/// acquisition, misfit, picking and optimizer settings. A resolved copy is
/// written next to every run's outputs.
struct ExperimentConfig {
  int schema_version = 1;
  std::string name = "two-layer";
  std::string scale = "desk";  // full | desk | custom

  // Physical domain and discretization (km, s).
  double x0 = 0.0, z0 = 0.0;
  double lx = 20.0, lz = 15.0;
  double dx = 0.125, dz = 0.125;
  double dt = 0.005, t_f = 6.0;
  int pml_layers = 10;
  double pml_reflection = 1e-3;
  double cfl_safety = 0.45;
  double snapshot_budget_mb = 512.0;
  double inversion_spacing = 2.0;  // cell-centered coarse grid

  // Acquisition.
  double f0 = 4.0;
  double amplitude = 1.0;
  double origin_time = 0.0;  // all events
  std::vector<SourceSpec> sources;      // explicit when non-empty
  std::vector<ReceiverSpec> receivers;  // explicit when non-empty
  int source_count = 0;                 // seeded placement when the lists are empty
  int receiver_count = 0;
  double placement_margin = 3.0;  // km kept clear of the lateral edges
  double source_zmin = 3.0, source_zmax = 9.0;

  // Misfit and picking.
  std::string misfit = "w2-p3";
  double epsilon = 1e-3;
  PickPolicy picking;
  std::vector<double> reflector_depths;
  bool windows_enabled = true;

  OptimizerPolicy optimizer;

  std::uint64_t seed = 20260808ull;
  int threads = 0;  // 0: hardware concurrency
  std::string out_dir = "runs/out";

  ModelConfig model;

  Grid2D sim_grid() const;
  Grid2D inversion_grid() const;
  TimeAxis time_axis() const;
  SolverOptions solver_options() const;
  ScalingOperator scaling_operator() const;
  VelocityModel true_model() const;       // on the simulation grid
  VelocityModel initial_model() const;
  VelocityFn true_velocity() const;
  VelocityFn initial_velocity() const;
  int resolved_threads() const;

  /// Fill empty source/receiver lists from the seeded placement policy.
  void realize_placements();
  void validate() const;
};

/// The paper-scale experiments and their CI-sized counterparts. Full scale
/// reproduces the published discretization and acquisition counts; desk scale
/// keeps the physics regime (phase shifts versus the dominant period) on a
/// quarter-size domain with 4 events and 5 stations.
ExperimentConfig preset(const std::string& name, const std::string& scale);

std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

/// Everything assembled and ready to drive the engine: models, geometry,
/// frozen pair table and the synthesized observed data.
struct Experiment {
  ExperimentConfig cfg;
  VelocityModel c_true;
  VelocityModel c_init;
  Field cT_coarse;
  Field c0_coarse;
  std::vector<std::vector<Trace>> observed;
  PairTable pairs;
};

/// Builds models, realizes placements, synthesizes (or adopts) the observed
/// data and freezes the pair table on the initial model.
Experiment assemble_experiment(ExperimentConfig cfg,
                               const std::vector<std::vector<Trace>>* preloaded_observed = nullptr);
InversionEngine::Setup make_engine_setup(const Experiment& e);

}  // namespace otfwi
