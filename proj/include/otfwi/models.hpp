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

#include "otfwi/grid.hpp"

namespace otfwi {

/// Minimum admissible wave speed (km/s). Applied after every model update so
/// the CFL bound and the physics stay meaningful.
inline constexpr double kVelocityFloorKms = 0.5;

/// Wave speed c(x,z) sampled at the nodes of `grid`. Values are strictly
/// positive and finite; construction validates.
struct VelocityModel {
  Grid2D grid;
  Field c;

  VelocityModel() = default;
  VelocityModel(Grid2D g, Field values);

  double at(int ix, int iz) const { return c[grid.idx(ix, iz)]; }
  /// Nearest-node sample (used by model probes in tests).
  double probe(double x, double z) const;
  double max_velocity() const;
  double min_velocity() const;

  /// Clamp all values to at least `floor_kms`.
  void apply_floor(double floor_kms = kVelocityFloorKms);
};

using VelocityFn = std::function<double(double x, double z)>;

/// Sample an analytic velocity description pointwise at the grid nodes.
/// Discontinuities are sampled as-is, no smoothing.
VelocityModel sample_model(const Grid2D& grid, const VelocityFn& fn);

/// Two-layer crust/mantle model with an optional high-velocity box anomaly.
struct TwoLayerParams {
  double moho_depth = 30.0;   // km
  double v_crust = 5.8;       // km/s
  double v_mantle = 8.1;      // km/s
  double v_anomaly = 6.67;    // km/s (+15% over the crust)
  double anom_x0 = 35.0, anom_x1 = 45.0;
  double anom_z0 = 10.0, anom_z1 = 20.0;
};

VelocityFn two_layer_velocity(const TwoLayerParams& p, bool with_anomaly);

/// Three-layer crustal-root model. The Moho depth follows a quadratic root
/// profile L(x) when the root is present and is flat at `moho_flat` otherwise.
struct CrustalRootParams {
  double conrad_depth = 20.0;  // km
  double moho_flat = 36.0;     // km
  double root_amp = 25.0;      // km of extra depth at x=0... scaled by (x/half_width)^2
  double root_half_width = 40.0;
  double v_upper = 5.8;
  double v_lower = 6.5;
  double v_mantle = 8.04;
};

VelocityFn crustal_root_velocity(const CrustalRootParams& p, bool with_root);
double crustal_root_moho_depth(const CrustalRootParams& p, double x, bool with_root);

/// Paper-scale presets on a caller-provided grid.
VelocityModel build_two_layer_model(const Grid2D& grid, bool with_anomaly);
VelocityModel build_crustal_root_model(const Grid2D& grid, bool with_root);

}  // namespace otfwi
