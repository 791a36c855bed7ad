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

#include "otfwi/simd/kernels.hpp"

namespace otfwi::fd {

// Staggered 4th-order derivative pair on an nx-by-nz node field (row-major,
// x fastest). Half-node layouts:
//   x derivative gx: (nx-1) per row, nz rows
//   z derivative gz: nx per row, nz-1 rows
// The outermost half-row/column on each side drops to 2nd order. The
// divergence below is the exact negative transpose of the derivative, both
// including those boundary rows, so the assembled operator
// -div(c^2 grad(.)) is symmetric by construction.
//
// Edge columns/rows are computed here once, shared by all SIMD backends; only
// the interior spans go through the dispatched kernels.

void grad_x(const simd::Ops& k, const double* u, double* gx, int nx, int nz, double inv_hx);
void grad_z(const simd::Ops& k, const double* u, double* gz, int nx, int nz, double inv_hz);
void div_x(const simd::Ops& k, const double* fx, double* out, int nx, int nz, double inv_hx);
void div_z(const simd::Ops& k, const double* fz, double* out, int nx, int nz, double inv_hz);

/// Smallest grid dimension the stencils accept.
inline constexpr int kMinStencilNodes = 7;

}  // namespace otfwi::fd
