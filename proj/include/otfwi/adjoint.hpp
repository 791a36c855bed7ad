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

#include "otfwi/picker.hpp"
#include "otfwi/scaling.hpp"
#include "otfwi/transfer.hpp"
#include "otfwi/wave.hpp"

namespace otfwi {

/// Per-receiver adjoint source series for one event. Rejected or degenerate
/// pairs carry an all-zero series.
struct AdjointSourceSet {
  int source_id = -1;
  std::vector<Trace> q;           // one per receiver, on the simulation axis
  std::vector<char> active;       // pair contributed a nonzero source
  std::vector<char> degenerate;   // pair flagged during assembly
  double misfit_sum = 0.0;        // sum of chi over contributing pairs
};

/// Assemble Q_ij for one source: window both traces with the pair's frozen
/// window, push the windowed synthetic through the operator chain (transport
/// map, outer gradient, operator adjoint), and taper the result like the
/// signal. The L2 baseline short-circuits to the windowed residual.
AdjointSourceSet build_adjoint_sources(const ScalingOperator& op, int source_id,
                                       const std::vector<Trace>& synthetic,
                                       const std::vector<Trace>& observed,
                                       const PairTable& pairs);

/// K_i(x) on the simulation grid: the first-order misfit change per unit
/// velocity perturbation, integrated with the solver's own stencil and the
/// trapezoid rule on the stored snapshot axis. Contributions from the PML
/// padding fold onto the nearest physical cells (the adjoint of the padded
/// model extension).
struct SensitivityKernel {
  Grid2D grid;  // simulation (physical) grid
  Field values;
  int source_id = -1;
};

/// Correlate two stored wavefields (same model, same snapshot axis).
SensitivityKernel compute_kernel(const VelocityModel& model, const Wavefield& forward,
                                 const Wavefield& adjoint);

/// Streaming variant: runs the adjoint solve on `solver` and correlates
/// against the stored forward field without materializing adjoint snapshots.
SensitivityKernel source_kernel(const WaveSolver& solver,
                                const std::vector<std::pair<ReceiverSpec, Trace>>& injections,
                                const Wavefield& forward, int source_id = -1);

/// Total gradient on the inversion grid: fixed-order sum of the kernels,
/// restricted with the adjoint-consistent transfer.
struct GradientField {
  Grid2D grid;  // inversion grid
  Field values;
};

GradientField aggregate_gradient(const std::vector<SensitivityKernel>& kernels,
                                 const GridTransfer& transfer);

/// Separable Gaussian blur (truncated at 3 std, renormalized at the edges).
/// Optional kernel conditioning; no smoothing is applied by default anywhere.
Field gaussian_smooth(const Grid2D& grid, const Field& values, double std_km);

/// Shared chain from the half-node stiffness sensitivities to node velocities
/// (through the harmonic interface average), folded onto the physical grid.
Field kernel_from_half_accums(const Grid2D& padded, const Field& cpad, int pml_layers,
                              const Grid2D& physical, const std::vector<double>& accum_x,
                              const std::vector<double>& accum_z);

}  // namespace otfwi
