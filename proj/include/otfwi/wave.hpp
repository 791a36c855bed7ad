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
#include <span>
#include <utility>
#include <vector>

#include "otfwi/grid.hpp"
#include "otfwi/models.hpp"
#include "otfwi/simd/kernels.hpp"

namespace otfwi {

/// Ricker wavelet A*(1 - 2 pi^2 f0^2 t^2) * exp(-pi^2 f0^2 t^2). The peak
/// value is A, reached at t = 0.
double ricker(double t, double f0, double amplitude);

/// Piecewise-quintic regularized delta with support |x| <= 3h; integrates to
/// 1/h-normalized unit mass on the grid (sum over nodes times h equals 1 for
/// any sub-grid shift). Used as a tensor product in 2-D for both source
/// injection and receiver sampling.
double discrete_delta(double x_offset, double h);

struct TimeAxis {
  double dt = 0.0;
  double t_f = 0.0;

  int nt() const;          // number of samples, round(t_f/dt)+1
  int steps() const { return nt() - 1; }
};

struct SourceSpec {
  double x = 0.0, z = 0.0;     // km
  double origin_time = 0.0;    // s
  double f0 = 2.0;             // Hz
  double amplitude = 1.0;
};

struct ReceiverSpec {
  double x = 0.0, z = 0.0;  // km
};

/// One receiver's time series, sampled at the simulation time step.
struct Trace {
  std::vector<double> samples;
  double dt = 0.0;
  double t_f = 0.0;
  int source_id = -1;
  int receiver_id = -1;

  int nt() const { return static_cast<int>(samples.size()); }
  double time(int k) const { return k * dt; }
};

Trace make_zero_trace(const TimeAxis& axis, int source_id = -1, int receiver_id = -1);

/// Stored wavefield snapshots on the padded solver grid, every `stride`
/// steps of the forward time axis (single precision; the stride is chosen
/// from the snapshot memory budget and always divides the step count).
struct Wavefield {
  Grid2D grid;      // padded grid including PML
  double dt = 0.0;
  int total_steps = 0;
  int stride = 0;
  std::vector<int> steps;               // ascending forward-time step indices
  std::vector<std::vector<float>> snaps;

  bool empty() const { return snaps.empty(); }
  int count() const { return static_cast<int>(snaps.size()); }
  double time_of(int j) const { return steps[j] * dt; }
  Field snapshot_as_double(int j) const;
  /// Linear interpolation in time between the bracketing stored snapshots.
  Field at_time(double t) const;
};

struct SolverOptions {
  int pml_layers = 10;
  double pml_reflection = 1e-3;   // theoretical reflection coefficient
  double cfl_safety = 0.45;
  bool pml = true;                // false: reflecting (zero-flux) boundary
  // Velocity scale of the damping ramp; 0 takes the model maximum. Freezing
  // it across model updates keeps the misfit differentiable in c.
  double pml_ref_velocity = 0.0;
  double snapshot_budget_mb = 512.0;
  int instability_check_every = 50;
  simd::Backend backend = simd::Backend::scalar;  // overwritten by ctor default
  bool backend_set = false;
};

struct ForwardResult {
  std::vector<Trace> traces;
  Wavefield wavefield;  // populated only when snapshot storage was requested
};

/// Second-order-in-time, fourth-order-in-space solver for
///   u_tt = div(c^2 grad u) + f
/// with PML absorbing strips (flux memory variables plus diagonal damping) or
/// a zero-flux reflecting boundary. One instance is bound to one model and one
/// time axis; instances share the immutable model and may run concurrently.
class WaveSolver {
 public:
  WaveSolver(const VelocityModel& model, const TimeAxis& axis, SolverOptions opt = {});

  ForwardResult solve_forward(const SourceSpec& source, std::span<const ReceiverSpec> receivers,
                              bool store_wavefield = false) const;

  /// Forward run driven by arbitrary per-point source series.
  ForwardResult solve_series(const std::vector<std::pair<ReceiverSpec, Trace>>& sources,
                             std::span<const ReceiverSpec> receivers,
                             bool store_wavefield = false) const;

  /// Adjoint solve: zero terminal conditions at t_f, integrated backward in
  /// (equivalently, forward in reversed) time with the time-reversed injection
  /// sum. The result is indexed on the forward time axis.
  Wavefield solve_with_adjoint_sources(
      const std::vector<std::pair<ReceiverSpec, Trace>>& injections) const;

  /// Gradient backpropagation: the exact transpose of the discrete forward
  /// recursion (PML memory variables included), driven by the adjoint-source
  /// traces and correlated against the stored forward states. Accumulates the
  /// misfit sensitivity with respect to the half-node stiffness c^2 into the
  /// per-half-node buffers, sized (nx-1)*nz and nx*(nz-1) of the padded grid,
  /// with the convention dXi = dx*dz*sum(acc*dc2). Matches the physical
  /// adjoint correlation of compute_kernel up to the boundary-layer
  /// discretization, and matches finite differences of Xi to round-off.
  void solve_adjoint_correlate(const std::vector<std::pair<ReceiverSpec, Trace>>& injections,
                               const Wavefield& forward, std::vector<double>& accum_x,
                               std::vector<double>& accum_z) const;

  const Grid2D& physical_grid() const { return model_grid_; }
  const Grid2D& padded_grid() const { return padded_; }
  const TimeAxis& axis() const { return axis_; }
  int pml_layers() const { return npml_; }
  int snapshot_stride() const { return stride_; }
  const Field& padded_velocity() const { return cpad_; }
  const std::vector<double>& c2_half_x() const { return c2x_; }
  const std::vector<double>& c2_half_z() const { return c2z_; }

  /// dt upper bound from the CFL precondition for this model/grid.
  static double cfl_dt_limit(const VelocityModel& model, double cfl_safety = 0.45);

 private:
  struct Injection {
    std::vector<std::pair<int, double>> weights;  // (padded cell, delta weight)
    std::vector<double> series;                   // one value per time sample
  };

  Injection make_injection(double x, double z, std::vector<double> series) const;
  std::vector<std::pair<int, double>> delta_weights(double x, double z) const;

  // Runs the scheme. `observe_steps` must be ascending step indices (may be
  // empty); on_snapshot(j, field) is called with the index into observe_steps.
  std::vector<Trace> run(const std::vector<Injection>& injections,
                         std::span<const ReceiverSpec> receivers,
                         const std::vector<int>& observe_steps,
                         const std::function<void(int, const double*)>& on_snapshot) const;

  std::vector<int> stored_steps() const;

  Grid2D model_grid_;
  Grid2D padded_;
  TimeAxis axis_;
  SolverOptions opt_;
  int npml_ = 0;
  int stride_ = 1;
  double c_max_ = 0.0;

  Field cpad_;                  // padded velocity
  std::vector<double> c2x_;     // c^2 at x half nodes (harmonic)
  std::vector<double> c2z_;     // c^2 at z half nodes
  std::vector<double> tm2b_, om1a_, inv1pa_;          // damping coefficient fields
  std::vector<double> decay_x_, phi_x_, sphi_x_;      // per x half node
  std::vector<double> decay_z_, phi_z_, sphi_z_;      // per z half row
  std::vector<double> sigx_node_, sigz_node_;
};

/// Harmonic mean of squared velocities, the interface rule for half-node
/// stiffness. Exposed because the kernel assembly differentiates through it.
inline double harmonic_c2(double ca, double cb) {
  const double a = ca * ca, b = cb * cb;
  return 2.0 * a * b / (a + b);
}

/// d(harmonic_c2)/d(ca): chain through a = ca^2.
inline double harmonic_c2_dca(double ca, double cb) {
  const double a = ca * ca, b = cb * cb;
  const double s = a + b;
  return (2.0 * b * b / (s * s)) * (2.0 * ca);
}

/// Padded-model helper shared by the solver and the kernel assembly.
struct PaddedModel {
  Grid2D grid;
  Field c;
  std::vector<double> c2x, c2z;
};
PaddedModel build_padded_model(const VelocityModel& model, int pml_layers);

}  // namespace otfwi
