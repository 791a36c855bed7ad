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

#include <span>
#include <string>
#include <vector>

#include "otfwi/models.hpp"
#include "otfwi/wave.hpp"

namespace otfwi {

/// First-arrival time field of one source, on the simulation grid.
struct TraveltimeField {
  Grid2D grid;
  Field t_arr;  // s

  double at_node(int ix, int iz) const { return t_arr[grid.idx(ix, iz)]; }
  /// Bilinear sample at a physical location.
  double at(double x, double z) const;
};

struct PickPolicy {
  // Window [t_arr - a/f0, t_arr + b/f0] with cosine tapers of width c/f0.
  double a_periods = 1.0;
  double b_periods = 3.0;
  double taper_periods = 0.5;
  // Pair rejection: required direct/reflected separation in window lengths,
  // and the windowed-energy floor relative to the full observed trace.
  double min_separation_windows = 1.0;
  double noise_floor_rel = 1e-8;
  // Eikonal solve controls.
  int eikonal_init_radius_cells = 8;
  int eikonal_max_sweeps = 256;
  double eikonal_tolerance = 1e-12;
};

/// Upwind fast-sweeping first-arrival solve (Godunov update, four sweep
/// orders, analytic initialization in a small disc around the source).
TraveltimeField traveltime(const VelocityModel& model, const SourceSpec& source,
                           const PickPolicy& policy = {});

struct PhaseWindow {
  int source_id = -1;
  int receiver_id = -1;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double taper = 0.0;
  bool accepted = false;
  std::string reason = "ok";  // ok | window-collapse | multipath | low-energy | no-arrival

  double length() const { return t_hi - t_lo; }
};

PhaseWindow make_window(double t_arr, double f0, double t_f, const PickPolicy& policy);

/// Taper weights of a window sampled on the time axis: zero outside
/// [t_lo, t_hi], cosine ramps of the taper width inside both ends.
std::vector<double> window_weights(const PhaseWindow& w, double dt, int nt);

/// Multiply a trace by the window taper. The same PhaseWindow is applied to
/// both traces of a pair so only like phases are ever compared.
Trace apply_window(const PhaseWindow& w, const Trace& s);

/// Accept/reject table over all source-receiver pairs, row index i*M+j.
struct PairTable {
  int n_sources = 0;
  int n_receivers = 0;
  std::vector<PhaseWindow> rows;

  const PhaseWindow& at(int i, int j) const { return rows[static_cast<size_t>(i) * n_receivers + j]; }
  PhaseWindow& at(int i, int j) { return rows[static_cast<size_t>(i) * n_receivers + j]; }
  int accepted_count() const;
};

/// Direct-phase pair selection on the initial model: windows are derived from
/// eikonal direct times; a pair is rejected when a two-leg reflection off any
/// configured horizontal discontinuity lands within one window length of the
/// direct arrival, or when the windowed observed energy falls under the noise
/// floor. Windows are computed once on the initial model and stay frozen.
PairTable select_pairs(const VelocityModel& model0, std::span<const SourceSpec> sources,
                       std::span<const ReceiverSpec> receivers, const TimeAxis& axis,
                       const std::vector<double>& reflector_depths,
                       const std::vector<std::vector<Trace>>* observed, const PickPolicy& policy);

/// Two-leg reflection traveltime estimate off a horizontal interface at depth
/// `z_reflect`, integrating model slowness along both straight legs through
/// the image point. Returns +inf when the geometry does not reflect.
double reflected_time_estimate(const VelocityModel& model, double xs, double zs, double xr,
                               double zr, double z_reflect);

}  // namespace otfwi
