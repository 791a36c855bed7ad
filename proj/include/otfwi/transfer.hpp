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

#include "otfwi/grid.hpp"

namespace otfwi {

/// Bilinear transfer between a coarse inversion grid and a fine simulation
/// grid. The grids must be nested: both spacings of the coarse grid are
/// integer multiples of the fine ones and every coarse node coincides with a
/// fine node. Fine nodes outside the coarse hull are clamped to the nearest
/// coarse row/column.
///
/// restrict_adjoint is the exact adjoint of prolongate with respect to the
/// plain inner products: <prolongate(a), b>_fine == <a, restrict_adjoint(b)>_coarse.
class GridTransfer {
 public:
  GridTransfer(Grid2D coarse, Grid2D fine);

  const Grid2D& coarse() const { return coarse_; }
  const Grid2D& fine() const { return fine_; }

  Field prolongate(const Field& coarse_field) const;
  Field restrict_adjoint(const Field& fine_field) const;

 private:
  struct Weight1D {
    int i0;      // left coarse index
    double w1;   // weight of i0+1 (w0 = 1 - w1)
  };

  Grid2D coarse_;
  Grid2D fine_;
  std::vector<Weight1D> wx_;  // one entry per fine ix
  std::vector<Weight1D> wz_;  // one entry per fine iz

  static std::vector<Weight1D> build_axis(double c0, double dc, int nc, double f0, double df,
                                          int nf, const char* axis_name);
};

/// A field represented on both grids of a transfer pair.
struct FieldPair {
  Field coarse;
  Field fine;
};

}  // namespace otfwi
