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

#include "otfwi/grid.hpp"

namespace otfwi {

double field_inner(const Grid2D& g, const Field& a, const Field& b) {
  double s = 0.0;
  const size_t n = a.size();
  for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s * g.cell_area();
}

bool field_all_finite(const Field& f) {
  for (double v : f) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace otfwi
