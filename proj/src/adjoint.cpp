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

#include "otfwi/adjoint.hpp"

#include <algorithm>
#include <cmath>

#include "otfwi/simd/stencil.hpp"

namespace otfwi {

AdjointSourceSet build_adjoint_sources(const ScalingOperator& op, int source_id,
                                       const std::vector<Trace>& synthetic,
                                       const std::vector<Trace>& observed,
                                       const PairTable& pairs) {
  if (synthetic.size() != observed.size()) {
    throw config_error("build_adjoint_sources: trace list sizes differ");
  }
  const int m = static_cast<int>(synthetic.size());
  AdjointSourceSet out;
  out.source_id = source_id;
  out.q.resize(m);
  out.active.assign(m, 0);
  out.degenerate.assign(m, 0);

  for (int j = 0; j < m; ++j) {
    const Trace& s = synthetic[j];
    Trace zero = s;
    std::fill(zero.samples.begin(), zero.samples.end(), 0.0);
    zero.source_id = source_id;
    zero.receiver_id = j;
    out.q[j] = zero;

    const PhaseWindow& w = pairs.at(source_id, j);
    if (!w.accepted) continue;

    const Trace sw = apply_window(w, s);
    const Trace dw = apply_window(w, observed[j]);
    Trace q_raw;
    if (op.kind == MisfitKind::l2) {
      q_raw = l2_adjoint_source(sw, dw);
      std::vector<double> r(sw.samples.size());
      for (size_t k = 0; k < r.size(); ++k) r[k] = q_raw.samples[k] * q_raw.samples[k];
      out.misfit_sum += 0.5 * trapezoid(r, sw.dt);
    } else {
      try {
        const MisfitDetail detail = misfit_detail(op, sw, dw);
        q_raw = adjoint_apply(op, sw, detail.grad_f);
        out.misfit_sum += detail.value;
      } catch (const degenerate_trace_error&) {
        out.degenerate[j] = 1;
        continue;
      }
    }
    // The taper is part of the windowing operator, so it acts on Q as it did
    // on the signal.
    out.q[j] = apply_window(w, q_raw);
    out.q[j].source_id = source_id;
    out.q[j].receiver_id = j;
    out.active[j] = 1;
  }
  return out;
}

Field kernel_from_half_accums(const Grid2D& padded, const Field& cpad, int pml_layers,
                              const Grid2D& physical, const std::vector<double>& accum_x,
                              const std::vector<double>& accum_z) {
  const int nxp = padded.nx, nzp = padded.nz;
  Field kp = make_field(padded);
  for (int iz = 0; iz < nzp; ++iz) {
    for (int k = 0; k < nxp - 1; ++k) {
      const double p = accum_x[static_cast<size_t>(iz) * (nxp - 1) + k];
      if (p == 0.0) continue;
      const double ca = cpad[padded.idx(k, iz)];
      const double cb = cpad[padded.idx(k + 1, iz)];
      kp[padded.idx(k, iz)] += p * harmonic_c2_dca(ca, cb);
      kp[padded.idx(k + 1, iz)] += p * harmonic_c2_dca(cb, ca);
    }
  }
  for (int kz = 0; kz < nzp - 1; ++kz) {
    for (int ix = 0; ix < nxp; ++ix) {
      const double p = accum_z[static_cast<size_t>(kz) * nxp + ix];
      if (p == 0.0) continue;
      const double ca = cpad[padded.idx(ix, kz)];
      const double cb = cpad[padded.idx(ix, kz + 1)];
      kp[padded.idx(ix, kz)] += p * harmonic_c2_dca(ca, cb);
      kp[padded.idx(ix, kz + 1)] += p * harmonic_c2_dca(cb, ca);
    }
  }

  Field out = make_field(physical);
  for (int iz = 0; iz < nzp; ++iz) {
    const int mz = std::clamp(iz - pml_layers, 0, physical.nz - 1);
    for (int ix = 0; ix < nxp; ++ix) {
      const int mx = std::clamp(ix - pml_layers, 0, physical.nx - 1);
      out[physical.idx(mx, mz)] += kp[padded.idx(ix, iz)];
    }
  }
  return out;
}

SensitivityKernel compute_kernel(const VelocityModel& model, const Wavefield& forward,
                                 const Wavefield& adjoint) {
  if (!(forward.grid == adjoint.grid) || forward.stride != adjoint.stride ||
      forward.total_steps != adjoint.total_steps || forward.dt != adjoint.dt ||
      forward.steps != adjoint.steps || forward.count() != adjoint.count()) {
    throw numeric_error("compute_kernel: snapshot-axis mismatch between wavefields");
  }
  const Grid2D& padded = forward.grid;
  const int npml = (padded.nx - model.grid.nx) / 2;
  if (padded.nx != model.grid.nx + 2 * npml || padded.nz != model.grid.nz + 2 * npml) {
    throw numeric_error("compute_kernel: wavefield grid does not pad the model grid");
  }
  const PaddedModel pm = build_padded_model(model, npml);

  const simd::Ops& K = simd::ops();
  const int nxp = padded.nx, nzp = padded.nz;
  const double inv_hx = 1.0 / padded.dx;
  const double inv_hz = 1.0 / padded.dz;
  std::vector<double> accx(static_cast<size_t>(nxp - 1) * nzp, 0.0);
  std::vector<double> accz(static_cast<size_t>(nxp) * (nzp - 1), 0.0);
  std::vector<double> gxu(accx.size()), gxw(accx.size()), gzu(accz.size()), gzw(accz.size());

  // Same accumulation order as the streaming path: descending forward time.
  const int last = forward.count() - 1;
  for (int m = last; m >= 0; --m) {
    const double wt = (m == 0 || m == last ? 0.5 : 1.0) * forward.stride * forward.dt;
    const Field u = forward.snapshot_as_double(m);
    const Field w = adjoint.snapshot_as_double(m);
    fd::grad_x(K, u.data(), gxu.data(), nxp, nzp, inv_hx);
    fd::grad_z(K, u.data(), gzu.data(), nxp, nzp, inv_hz);
    fd::grad_x(K, w.data(), gxw.data(), nxp, nzp, inv_hx);
    fd::grad_z(K, w.data(), gzw.data(), nxp, nzp, inv_hz);
    K.corr_accum(-wt, gxu.data(), gxw.data(), accx.data(), static_cast<int>(accx.size()));
    K.corr_accum(-wt, gzu.data(), gzw.data(), accz.data(), static_cast<int>(accz.size()));
  }

  SensitivityKernel kernel;
  kernel.grid = model.grid;
  kernel.values = kernel_from_half_accums(padded, pm.c, npml, model.grid, accx, accz);
  return kernel;
}

SensitivityKernel source_kernel(const WaveSolver& solver,
                                const std::vector<std::pair<ReceiverSpec, Trace>>& injections,
                                const Wavefield& forward, int source_id) {
  const Grid2D& padded = solver.padded_grid();
  std::vector<double> accx(static_cast<size_t>(padded.nx - 1) * padded.nz, 0.0);
  std::vector<double> accz(static_cast<size_t>(padded.nx) * (padded.nz - 1), 0.0);
  solver.solve_adjoint_correlate(injections, forward, accx, accz);

  SensitivityKernel kernel;
  kernel.grid = solver.physical_grid();
  kernel.source_id = source_id;
  kernel.values = kernel_from_half_accums(padded, solver.padded_velocity(), solver.pml_layers(),
                                          solver.physical_grid(), accx, accz);
  return kernel;
}

Field gaussian_smooth(const Grid2D& grid, const Field& values, double std_km) {
  if (!(std_km > 0.0)) return values;
  auto axis_weights = [&](double h) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * std_km / h)));
    std::vector<double> w(static_cast<size_t>(radius) + 1);
    for (int k = 0; k <= radius; ++k) {
      const double x = k * h / std_km;
      w[static_cast<size_t>(k)] = std::exp(-0.5 * x * x);
    }
    return w;
  };
  const std::vector<double> wx = axis_weights(grid.dx);
  const std::vector<double> wz = axis_weights(grid.dz);

  Field tmp = make_field(grid);
  for (int iz = 0; iz < grid.nz; ++iz) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      double acc = 0.0, norm = 0.0;
      const int r = static_cast<int>(wx.size()) - 1;
      for (int k = -r; k <= r; ++k) {
        const int j = ix + k;
        if (j < 0 || j >= grid.nx) continue;
        const double w = wx[static_cast<size_t>(std::abs(k))];
        acc += w * values[grid.idx(j, iz)];
        norm += w;
      }
      tmp[grid.idx(ix, iz)] = acc / norm;
    }
  }
  Field out = make_field(grid);
  for (int iz = 0; iz < grid.nz; ++iz) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      double acc = 0.0, norm = 0.0;
      const int r = static_cast<int>(wz.size()) - 1;
      for (int k = -r; k <= r; ++k) {
        const int j = iz + k;
        if (j < 0 || j >= grid.nz) continue;
        const double w = wz[static_cast<size_t>(std::abs(k))];
        acc += w * tmp[grid.idx(ix, j)];
        norm += w;
      }
      out[grid.idx(ix, iz)] = acc / norm;
    }
  }
  return out;
}

GradientField aggregate_gradient(const std::vector<SensitivityKernel>& kernels,
                                 const GridTransfer& transfer) {
  Field total = make_field(transfer.fine());
  for (const SensitivityKernel& k : kernels) {
    if (!(k.grid == transfer.fine())) {
      throw config_error("aggregate_gradient: kernel grid does not match the transfer pair");
    }
    for (size_t i = 0; i < total.size(); ++i) total[i] += k.values[i];
  }
  GradientField g;
  g.grid = transfer.coarse();
  g.values = transfer.restrict_adjoint(total);
  return g;
}

}  // namespace otfwi
