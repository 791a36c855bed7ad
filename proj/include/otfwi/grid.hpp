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

#include <cmath>
#include <cstddef>
#include <vector>

#include "otfwi/errors.hpp"

namespace otfwi {

/// Uniform rectangular grid of nodes. Distances in km, node (ix, iz) sits at
/// (x0 + ix*dx, z0 + iz*dz). Fields on the grid are stored row-major with x
/// fastest: index = iz*nx + ix.
struct Grid2D {
  double x0 = 0.0;
  double z0 = 0.0;
  double dx = 0.0;
  double dz = 0.0;
  int nx = 0;
  int nz = 0;

  Grid2D() = default;
  Grid2D(double x0_, double z0_, double dx_, double dz_, int nx_, int nz_)
      : x0(x0_), z0(z0_), dx(dx_), dz(dz_), nx(nx_), nz(nz_) {
    if (!(dx > 0.0) || !(dz > 0.0) || nx < 2 || nz < 2) {
      throw config_error("Grid2D: require dx>0, dz>0, nx>=2, nz>=2");
    }
  }

  int count() const { return nx * nz; }
  int idx(int ix, int iz) const { return iz * nx + ix; }
  double x(int ix) const { return x0 + ix * dx; }
  double z(int iz) const { return z0 + iz * dz; }
  double extent_x() const { return dx * (nx - 1); }
  double extent_z() const { return dz * (nz - 1); }
  double x_max() const { return x0 + extent_x(); }
  double z_max() const { return z0 + extent_z(); }
  double cell_area() const { return dx * dz; }

  bool contains(double x_, double z_) const {
    const double tol = 1e-9;
    return x_ >= x0 - tol && x_ <= x_max() + tol && z_ >= z0 - tol && z_ <= z_max() + tol;
  }

  bool operator==(const Grid2D& o) const {
    return x0 == o.x0 && z0 == o.z0 && dx == o.dx && dz == o.dz && nx == o.nx && nz == o.nz;
  }
};

using Field = std::vector<double>;

inline Field make_field(const Grid2D& g, double value = 0.0) {
  return Field(static_cast<size_t>(g.count()), value);
}

/// Plain discrete inner product: sum(a*b) * dx*dz. Used consistently by the
/// grid-transfer pair and the gradient assembly.
double field_inner(const Grid2D& g, const Field& a, const Field& b);

bool field_all_finite(const Field& f);

}  // namespace otfwi
