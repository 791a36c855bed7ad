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

#include "otfwi/models.hpp"

#include <algorithm>

namespace otfwi {

VelocityModel::VelocityModel(Grid2D g, Field values) : grid(g), c(std::move(values)) {
  if (static_cast<int>(c.size()) != grid.count()) {
    throw config_error("VelocityModel: field size does not match grid");
  }
  for (double v : c) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw config_error("VelocityModel: velocities must be finite and strictly positive");
    }
  }
}

double VelocityModel::probe(double x, double z) const {
  int ix = static_cast<int>(std::lround((x - grid.x0) / grid.dx));
  int iz = static_cast<int>(std::lround((z - grid.z0) / grid.dz));
  ix = std::clamp(ix, 0, grid.nx - 1);
  iz = std::clamp(iz, 0, grid.nz - 1);
  return at(ix, iz);
}

double VelocityModel::max_velocity() const {
  return *std::max_element(c.begin(), c.end());
}

double VelocityModel::min_velocity() const {
  return *std::min_element(c.begin(), c.end());
}

void VelocityModel::apply_floor(double floor_kms) {
  for (double& v : c) v = std::max(v, floor_kms);
}

VelocityModel sample_model(const Grid2D& grid, const VelocityFn& fn) {
  Field values = make_field(grid);
  for (int iz = 0; iz < grid.nz; ++iz) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      values[grid.idx(ix, iz)] = fn(grid.x(ix), grid.z(iz));
    }
  }
  return VelocityModel(grid, std::move(values));
}

VelocityFn two_layer_velocity(const TwoLayerParams& p, bool with_anomaly) {
  return [p, with_anomaly](double x, double z) {
    if (with_anomaly && x >= p.anom_x0 && x <= p.anom_x1 && z >= p.anom_z0 && z <= p.anom_z1) {
      return p.v_anomaly;
    }
    return z > p.moho_depth ? p.v_mantle : p.v_crust;
  };
}

double crustal_root_moho_depth(const CrustalRootParams& p, double x, bool with_root) {
  if (!with_root || x > p.root_half_width) return p.moho_flat;
  const double r = x / p.root_half_width;
  return p.moho_flat + p.root_amp * r * r;
}

VelocityFn crustal_root_velocity(const CrustalRootParams& p, bool with_root) {
  return [p, with_root](double x, double z) {
    if (z <= p.conrad_depth) return p.v_upper;
    if (z <= crustal_root_moho_depth(p, x, with_root)) return p.v_lower;
    return p.v_mantle;
  };
}

VelocityModel build_two_layer_model(const Grid2D& grid, bool with_anomaly) {
  return sample_model(grid, two_layer_velocity(TwoLayerParams{}, with_anomaly));
}

VelocityModel build_crustal_root_model(const Grid2D& grid, bool with_root) {
  return sample_model(grid, crustal_root_velocity(CrustalRootParams{}, with_root));
}

}  // namespace otfwi
