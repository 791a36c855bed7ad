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

#include "otfwi/transfer.hpp"

#include <cmath>
#include <string>

namespace otfwi {

namespace {

bool near_integer(double v, double tol = 1e-9) {
  return std::abs(v - std::lround(v)) <= tol;
}

}  // namespace

std::vector<GridTransfer::Weight1D> GridTransfer::build_axis(double c0, double dc, int nc,
                                                             double f0, double df, int nf,
                                                             const char* axis_name) {
  const double ratio = dc / df;
  if (!near_integer(ratio) || std::lround(ratio) < 1) {
    throw config_error(std::string("GridTransfer: coarse spacing is not an integer multiple of "
                                   "fine spacing on axis ") +
                       axis_name);
  }
  if (!near_integer((c0 - f0) / df)) {
    throw config_error(std::string("GridTransfer: coarse origin does not land on a fine node on "
                                   "axis ") +
                       axis_name);
  }
  if (c0 < f0 - 1e-9 || c0 + dc * (nc - 1) > f0 + df * (nf - 1) + 1e-9) {
    throw config_error(std::string("GridTransfer: coarse grid extends beyond fine grid on axis ") +
                       axis_name);
  }

  std::vector<Weight1D> w(static_cast<size_t>(nf));
  for (int i = 0; i < nf; ++i) {
    const double x = f0 + i * df;
    double s = (x - c0) / dc;
    // Clamp to the coarse hull; outside it the nearest coarse row/column wins.
    if (s <= 0.0) {
      w[i] = {0, 0.0};
    } else if (s >= nc - 1) {
      w[i] = {nc - 2, 1.0};
    } else {
      int i0 = static_cast<int>(std::floor(s));
      if (i0 > nc - 2) i0 = nc - 2;
      double frac = s - i0;
      // Snap coincident nodes exactly so prolongation reproduces coarse values bitwise.
      if (near_integer(s)) {
        i0 = static_cast<int>(std::lround(s));
        frac = 0.0;
        if (i0 > nc - 2) {
          i0 = nc - 2;
          frac = 1.0;
        }
      }
      w[i] = {i0, frac};
    }
  }
  return w;
}

GridTransfer::GridTransfer(Grid2D coarse, Grid2D fine) : coarse_(coarse), fine_(fine) {
  wx_ = build_axis(coarse_.x0, coarse_.dx, coarse_.nx, fine_.x0, fine_.dx, fine_.nx, "x");
  wz_ = build_axis(coarse_.z0, coarse_.dz, coarse_.nz, fine_.z0, fine_.dz, fine_.nz, "z");
}

Field GridTransfer::prolongate(const Field& a) const {
  if (static_cast<int>(a.size()) != coarse_.count()) {
    throw config_error("prolongate: field size does not match coarse grid");
  }
  Field out = make_field(fine_);
  for (int iz = 0; iz < fine_.nz; ++iz) {
    const Weight1D& z = wz_[iz];
    for (int ix = 0; ix < fine_.nx; ++ix) {
      const Weight1D& x = wx_[ix];
      const double a00 = a[coarse_.idx(x.i0, z.i0)];
      const double a10 = a[coarse_.idx(x.i0 + 1, z.i0)];
      const double a01 = a[coarse_.idx(x.i0, z.i0 + 1)];
      const double a11 = a[coarse_.idx(x.i0 + 1, z.i0 + 1)];
      const double top = a00 + x.w1 * (a10 - a00);
      const double bot = a01 + x.w1 * (a11 - a01);
      out[fine_.idx(ix, iz)] = top + z.w1 * (bot - top);
    }
  }
  return out;
}

Field GridTransfer::restrict_adjoint(const Field& b) const {
  if (static_cast<int>(b.size()) != fine_.count()) {
    throw config_error("restrict_adjoint: field size does not match fine grid");
  }
  Field out = make_field(coarse_);
  const double scale = fine_.cell_area() / coarse_.cell_area();
  for (int iz = 0; iz < fine_.nz; ++iz) {
    const Weight1D& z = wz_[iz];
    for (int ix = 0; ix < fine_.nx; ++ix) {
      const Weight1D& x = wx_[ix];
      const double v = scale * b[fine_.idx(ix, iz)];
      const double wx0 = 1.0 - x.w1;
      const double wz0 = 1.0 - z.w1;
      out[coarse_.idx(x.i0, z.i0)] += wx0 * wz0 * v;
      out[coarse_.idx(x.i0 + 1, z.i0)] += x.w1 * wz0 * v;
      out[coarse_.idx(x.i0, z.i0 + 1)] += wx0 * z.w1 * v;
      out[coarse_.idx(x.i0 + 1, z.i0 + 1)] += x.w1 * z.w1 * v;
    }
  }
  return out;
}

}  // namespace otfwi
