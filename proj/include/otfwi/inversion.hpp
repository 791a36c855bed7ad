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

#include <functional>
#include <optional>

#include "otfwi/adjoint.hpp"
#include "otfwi/picker.hpp"
#include "otfwi/scaling.hpp"
#include "otfwi/transfer.hpp"
#include "otfwi/wave.hpp"

namespace otfwi {

struct OptimizerPolicy {
  int max_iterations = 20;
  double armijo_c1 = 1e-4;
  int max_backtracks = 8;
  double step_cap_kms = 0.1;      // initial step scaled so max |dc| hits this
  double velocity_floor_kms = kVelocityFloorKms;
  int checkpoint_every = 10;
  bool mask_singular_cells = true;  // zero the kernel near sources/receivers
  int singular_radius_cells = 3;
  double kernel_smoothing_km = 0.0;  // optional Gaussian conditioning, off by default
};

struct InversionState {
  int iteration = 0;
  Field update_coarse;  // model = floor(c0_fine + prolongate(update))
  double misfit = 0.0;
  double rme = 0.0;
  double rmf = 0.0;
  double step_size = 0.0;
  double wall_seconds = 0.0;
  int accepted_pairs = 0;
  bool stalled = false;
};

/// RME = |c_k - c_T|^2 / |c_0 - c_T|^2 on the inversion grid, RMF = Xi_k/Xi_0.
struct Metrics {
  double rme = 0.0;
  double rmf = 0.0;
};
Metrics compute_metrics(const Field& c_k, const Field& c_0, const Field& c_T, double xi_k,
                        double xi_0);

/// Synthesize observed traces from the true model with the same solver
/// (one forward solve per source, parallel over sources).
std::vector<std::vector<Trace>> generate_observed(const VelocityModel& c_true,
                                                  std::span<const SourceSpec> sources,
                                                  std::span<const ReceiverSpec> receivers,
                                                  const TimeAxis& axis,
                                                  const SolverOptions& solver_opts, int threads);

/// Steepest-descent loop with Armijo backtracking over the coarse model
/// update. Windows, pair set and observed data stay frozen for the whole run.
class InversionEngine {
 public:
  struct Setup {
    VelocityModel c0_fine;
    Field c0_coarse;              // initial model sampled on the inversion grid
    Field cT_coarse;              // true model on the inversion grid (synthetic experiments)
    Grid2D inversion_grid;
    std::vector<SourceSpec> sources;
    std::vector<ReceiverSpec> receivers;
    TimeAxis axis;
    SolverOptions solver;
    ScalingOperator op;
    PairTable pairs;
    std::vector<std::vector<Trace>> observed;  // [source][receiver]
    OptimizerPolicy policy;
    int threads = 1;
  };

  explicit InversionEngine(Setup setup);

  /// Xi(m) summed over accepted, non-degenerate pairs. Optionally reports
  /// per-pair chi values and the contributing pair count.
  double evaluate_misfit(const Field& update_coarse,
                         std::vector<std::vector<double>>* chi = nullptr,
                         int* contributing_pairs = nullptr) const;

  /// Aggregated gradient dXi/dc on the inversion grid. `masked` applies the
  /// source/receiver singular-cell zeroing of the optimizer policy; the
  /// unmasked variant is the plain adjoint-state gradient.
  GradientField compute_gradient(const Field& update_coarse, bool masked) const;

  InversionState initial_state() const;
  InversionState step(const InversionState& state) const;
  std::vector<InversionState> run(int iterations,
                                  const std::function<void(const InversionState&)>& on_state = {});

  VelocityModel model_for(const Field& update_coarse) const;
  Field coarse_model_for(const Field& update_coarse) const;
  const GridTransfer& transfer() const { return transfer_; }
  const Setup& setup() const { return setup_; }
  double xi0() const { return xi0_; }

 private:
  Setup setup_;
  GridTransfer transfer_;
  double xi0_ = 0.0;
  int pairs0_ = 0;
};

}  // namespace otfwi
