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

#include "otfwi/wave.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "otfwi/simd/stencil.hpp"

namespace otfwi {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sigma_profile(double pos_cells, int inner_lo, int inner_hi, int layer_cells,
                     double sigma_max) {
  if (layer_cells <= 0) return 0.0;
  double depth = 0.0;
  if (pos_cells < inner_lo) depth = inner_lo - pos_cells;
  if (pos_cells > inner_hi) depth = pos_cells - inner_hi;
  if (depth <= 0.0) return 0.0;
  const double frac = depth / layer_cells;
  return sigma_max * frac * frac;
}

}  // namespace

double ricker(double t, double f0, double amplitude) {
  const double a = kPi * kPi * f0 * f0 * t * t;
  return amplitude * (1.0 - 2.0 * a) * std::exp(-a);
}

double discrete_delta(double x_offset, double h) {
  const double r = std::abs(x_offset) / h;
  double p = 0.0;
  if (r <= 1.0) {
    p = 1.0 + r * r * (-5.0 / 4.0 + r * (-35.0 / 12.0 + r * (21.0 / 4.0 + r * (-25.0 / 12.0))));
  } else if (r <= 2.0) {
    p = -4.0 +
        r * (75.0 / 4.0 +
             r * (-245.0 / 8.0 + r * (545.0 / 24.0 + r * (-63.0 / 8.0 + r * (25.0 / 24.0)))));
  } else if (r <= 3.0) {
    p = 18.0 +
        r * (-153.0 / 4.0 +
             r * (255.0 / 8.0 + r * (-313.0 / 24.0 + r * (21.0 / 8.0 + r * (-5.0 / 24.0)))));
  } else {
    return 0.0;
  }
  return p / h;
}

int TimeAxis::nt() const {
  if (!(dt > 0.0) || !(t_f > 0.0)) throw config_error("TimeAxis: dt and t_f must be positive");
  const double steps = t_f / dt;
  const long long n = std::llround(steps);
  if (n < 1 || std::abs(steps - static_cast<double>(n)) > 1e-6) {
    throw config_error("TimeAxis: t_f must be an integer number of time steps");
  }
  return static_cast<int>(n) + 1;
}

Trace make_zero_trace(const TimeAxis& axis, int source_id, int receiver_id) {
  Trace t;
  t.samples.assign(static_cast<size_t>(axis.nt()), 0.0);
  t.dt = axis.dt;
  t.t_f = axis.t_f;
  t.source_id = source_id;
  t.receiver_id = receiver_id;
  return t;
}

Field Wavefield::snapshot_as_double(int j) const {
  const auto& s = snaps[static_cast<size_t>(j)];
  Field out(s.size());
  for (size_t i = 0; i < s.size(); ++i) out[i] = static_cast<double>(s[i]);
  return out;
}

Field Wavefield::at_time(double t) const {
  if (empty()) throw numeric_error("Wavefield::at_time on empty wavefield");
  const double t0 = steps.front() * dt;
  const double tmax = steps.back() * dt;
  const double tc = std::clamp(t, t0, tmax);
  const double pos = (tc - t0) / (stride * dt);
  int j0 = static_cast<int>(std::floor(pos));
  j0 = std::clamp(j0, 0, count() - 1);
  const int j1 = std::min(j0 + 1, count() - 1);
  const double w1 = std::clamp(pos - j0, 0.0, 1.0);
  Field out = snapshot_as_double(j0);
  if (j1 != j0 && w1 > 0.0) {
    const auto& b = snaps[static_cast<size_t>(j1)];
    for (size_t i = 0; i < out.size(); ++i) {
      out[i] += w1 * (static_cast<double>(b[i]) - out[i]);
    }
  }
  return out;
}

PaddedModel build_padded_model(const VelocityModel& model, int pml_layers) {
  const Grid2D& g = model.grid;
  const int np = pml_layers;
  PaddedModel pm;
  pm.grid = Grid2D(g.x0 - np * g.dx, g.z0 - np * g.dz, g.dx, g.dz, g.nx + 2 * np, g.nz + 2 * np);
  pm.c = make_field(pm.grid);
  for (int iz = 0; iz < pm.grid.nz; ++iz) {
    const int mz = std::clamp(iz - np, 0, g.nz - 1);
    for (int ix = 0; ix < pm.grid.nx; ++ix) {
      const int mx = std::clamp(ix - np, 0, g.nx - 1);
      pm.c[pm.grid.idx(ix, iz)] = model.at(mx, mz);
    }
  }
  const int nxp = pm.grid.nx, nzp = pm.grid.nz;
  pm.c2x.assign(static_cast<size_t>(nxp - 1) * nzp, 0.0);
  for (int iz = 0; iz < nzp; ++iz) {
    for (int ix = 0; ix < nxp - 1; ++ix) {
      pm.c2x[static_cast<size_t>(iz) * (nxp - 1) + ix] =
          harmonic_c2(pm.c[pm.grid.idx(ix, iz)], pm.c[pm.grid.idx(ix + 1, iz)]);
    }
  }
  pm.c2z.assign(static_cast<size_t>(nxp) * (nzp - 1), 0.0);
  for (int kz = 0; kz < nzp - 1; ++kz) {
    for (int ix = 0; ix < nxp; ++ix) {
      pm.c2z[static_cast<size_t>(kz) * nxp + ix] =
          harmonic_c2(pm.c[pm.grid.idx(ix, kz)], pm.c[pm.grid.idx(ix, kz + 1)]);
    }
  }
  return pm;
}

double WaveSolver::cfl_dt_limit(const VelocityModel& model, double cfl_safety) {
  return cfl_safety * std::min(model.grid.dx, model.grid.dz) / model.max_velocity();
}

WaveSolver::WaveSolver(const VelocityModel& model, const TimeAxis& axis, SolverOptions opt)
    : model_grid_(model.grid), axis_(axis), opt_(opt) {
  if (!opt_.backend_set) {
    opt_.backend = simd::active_backend();
    opt_.backend_set = true;
  }
  axis_.nt();  // validates
  c_max_ = model.max_velocity();
  const double dt_lim = cfl_dt_limit(model, opt_.cfl_safety);
  if (axis_.dt > dt_lim + 1e-15) {
    throw config_error("CFL violation: dt=" + std::to_string(axis_.dt) + " exceeds " +
                       std::to_string(dt_lim) + " = cfl_safety*min(dx,dz)/c_max");
  }

  npml_ = opt_.pml ? opt_.pml_layers : 0;
  PaddedModel pm = build_padded_model(model, npml_);
  padded_ = pm.grid;
  if (padded_.nx < fd::kMinStencilNodes || padded_.nz < fd::kMinStencilNodes) {
    throw config_error("solver grid too small for the 4th-order stencil");
  }
  cpad_ = std::move(pm.c);
  c2x_ = std::move(pm.c2x);
  c2z_ = std::move(pm.c2z);

  const int nxp = padded_.nx, nzp = padded_.nz;
  const double dt = axis_.dt;

  // Quadratic damping ramps with the classical reflection-coefficient scaling.
  const double c_ref = opt_.pml_ref_velocity > 0.0 ? opt_.pml_ref_velocity : c_max_;
  const double lx = npml_ * padded_.dx;
  const double lz = npml_ * padded_.dz;
  const double lnr = std::log(1.0 / opt_.pml_reflection);
  const double smax_x = npml_ > 0 ? 3.0 * c_ref * lnr / (2.0 * lx) : 0.0;
  const double smax_z = npml_ > 0 ? 3.0 * c_ref * lnr / (2.0 * lz) : 0.0;
  const int in_lo = npml_;
  const int in_hi_x = npml_ + model_grid_.nx - 1;
  const int in_hi_z = npml_ + model_grid_.nz - 1;

  sigx_node_.resize(nxp);
  for (int ix = 0; ix < nxp; ++ix) {
    sigx_node_[ix] = sigma_profile(ix, in_lo, in_hi_x, npml_, smax_x);
  }
  sigz_node_.resize(nzp);
  for (int iz = 0; iz < nzp; ++iz) {
    sigz_node_[iz] = sigma_profile(iz, in_lo, in_hi_z, npml_, smax_z);
  }

  auto memory_coeffs = [dt](double sigma, double& decay, double& phi, double& sphi) {
    decay = std::exp(-sigma * dt);
    phi = sigma > 0.0 ? (1.0 - decay) / sigma : dt;
    sphi = sigma * phi;
  };
  decay_x_.resize(nxp - 1);
  phi_x_.resize(nxp - 1);
  sphi_x_.resize(nxp - 1);
  for (int k = 0; k < nxp - 1; ++k) {
    const double s = sigma_profile(k + 0.5, in_lo, in_hi_x, npml_, smax_x);
    memory_coeffs(s, decay_x_[k], phi_x_[k], sphi_x_[k]);
  }
  decay_z_.resize(nzp - 1);
  phi_z_.resize(nzp - 1);
  sphi_z_.resize(nzp - 1);
  for (int k = 0; k < nzp - 1; ++k) {
    const double s = sigma_profile(k + 0.5, in_lo, in_hi_z, npml_, smax_z);
    memory_coeffs(s, decay_z_[k], phi_z_[k], sphi_z_[k]);
  }

  const size_t cells = static_cast<size_t>(padded_.count());
  tm2b_.resize(cells);
  om1a_.resize(cells);
  inv1pa_.resize(cells);
  for (int iz = 0; iz < nzp; ++iz) {
    for (int ix = 0; ix < nxp; ++ix) {
      const double a = sigx_node_[ix] + sigz_node_[iz];
      const double b = sigx_node_[ix] * sigz_node_[iz];
      const size_t i = static_cast<size_t>(iz) * nxp + ix;
      tm2b_[i] = 2.0 - b * dt * dt;
      om1a_[i] = 1.0 - a * dt / 2.0;
      inv1pa_[i] = 1.0 / (1.0 + a * dt / 2.0);
    }
  }

  // Snapshot stride: largest time resolution that fits the budget and divides
  // the step count, so forward and adjoint snapshot axes always align.
  const int Nt = axis_.steps();
  const double budget_bytes = opt_.snapshot_budget_mb * 1048576.0;
  const double bytes_per_snap = static_cast<double>(cells) * sizeof(float);
  long long max_snaps = static_cast<long long>(budget_bytes / bytes_per_snap);
  if (max_snaps < 2) max_snaps = 2;
  int need = static_cast<int>((Nt + max_snaps - 2) / (max_snaps - 1));
  if (need < 1) need = 1;
  int s = need;
  while (Nt % s != 0) ++s;
  stride_ = s;
}

std::vector<int> WaveSolver::stored_steps() const {
  const int Nt = axis_.steps();
  std::vector<int> steps;
  steps.reserve(static_cast<size_t>(Nt / stride_) + 1);
  for (int n = 0; n <= Nt; n += stride_) steps.push_back(n);
  return steps;
}

std::vector<std::pair<int, double>> WaveSolver::delta_weights(double x, double z) const {
  if (!model_grid_.contains(x, z)) {
    throw config_error("source/receiver location (" + std::to_string(x) + ", " +
                       std::to_string(z) + ") outside the physical domain");
  }
  const double sx = (x - padded_.x0) / padded_.dx;
  const double sz = (z - padded_.z0) / padded_.dz;
  const int ix_lo = std::max(0, static_cast<int>(std::ceil(sx - 3.0)));
  const int ix_hi = std::min(padded_.nx - 1, static_cast<int>(std::floor(sx + 3.0)));
  const int iz_lo = std::max(0, static_cast<int>(std::ceil(sz - 3.0)));
  const int iz_hi = std::min(padded_.nz - 1, static_cast<int>(std::floor(sz + 3.0)));
  std::vector<std::pair<int, double>> w;
  for (int iz = iz_lo; iz <= iz_hi; ++iz) {
    const double wz = discrete_delta(padded_.z(iz) - z, padded_.dz);
    if (wz == 0.0) continue;
    for (int ix = ix_lo; ix <= ix_hi; ++ix) {
      const double wx = discrete_delta(padded_.x(ix) - x, padded_.dx);
      if (wx == 0.0) continue;
      w.emplace_back(padded_.idx(ix, iz), wx * wz);
    }
  }
  return w;
}

WaveSolver::Injection WaveSolver::make_injection(double x, double z,
                                                 std::vector<double> series) const {
  if (static_cast<int>(series.size()) != axis_.nt()) {
    throw config_error("injection series length does not match the time axis");
  }
  return Injection{delta_weights(x, z), std::move(series)};
}

std::vector<Trace> WaveSolver::run(const std::vector<Injection>& injections,
                                   std::span<const ReceiverSpec> receivers,
                                   const std::vector<int>& observe_steps,
                                   const std::function<void(int, const double*)>& on_snapshot) const {
  const simd::Ops& K = simd::ops_for(opt_.backend);
  const int nxp = padded_.nx, nzp = padded_.nz;
  const size_t cells = static_cast<size_t>(padded_.count());
  const int nt = axis_.nt();
  const int Nt = nt - 1;
  const double dt = axis_.dt;
  const double dt2 = dt * dt;
  const double inv_hx = 1.0 / padded_.dx;
  const double inv_hz = 1.0 / padded_.dz;
  const double area = padded_.cell_area();

  std::vector<std::vector<std::pair<int, double>>> rec_w;
  rec_w.reserve(receivers.size());
  for (const ReceiverSpec& r : receivers) {
    auto w = delta_weights(r.x, r.z);
    for (auto& e : w) e.second *= area;  // sampling quadrature
    rec_w.push_back(std::move(w));
  }
  std::vector<Trace> traces(receivers.size(), make_zero_trace(axis_));

  Field u_prev(cells, 0.0), u(cells, 0.0), u_next(cells, 0.0);
  std::vector<double> gx(static_cast<size_t>(nxp - 1) * nzp, 0.0), fx(gx.size(), 0.0);
  std::vector<double> psix(gx.size(), 0.0);
  std::vector<double> gz(static_cast<size_t>(nxp) * (nzp - 1), 0.0), fz(gz.size(), 0.0);
  std::vector<double> psiz(gz.size(), 0.0);
  std::vector<double> divx(cells, 0.0), divz(cells, 0.0);

  auto sample_all = [&](const Field& field, int k) {
    for (size_t r = 0; r < rec_w.size(); ++r) {
      double s = 0.0;
      for (const auto& [cell, w] : rec_w[r]) s += field[static_cast<size_t>(cell)] * w;
      traces[r].samples[static_cast<size_t>(k)] = s;
    }
  };
  size_t obs_pos = 0;
  auto maybe_observe = [&](int step, const double* field) {
    if (obs_pos < observe_steps.size() && observe_steps[obs_pos] == step) {
      if (on_snapshot) on_snapshot(static_cast<int>(obs_pos), field);
      ++obs_pos;
    }
  };

  sample_all(u, 0);
  maybe_observe(0, u.data());

  for (int n = 0; n < Nt; ++n) {
    if (n == 0) {
      // Centered start from zero initial data: u(dt) = dt^2/2 * f(0).
      std::fill(u_next.begin(), u_next.end(), 0.0);
      for (const Injection& inj : injections) {
        const double f = 0.5 * dt2 * inj.series[0];
        if (f == 0.0) continue;
        for (const auto& [cell, w] : inj.weights) {
          u_next[static_cast<size_t>(cell)] += inv1pa_[static_cast<size_t>(cell)] * f * w;
        }
      }
    } else {
      fd::grad_x(K, u.data(), gx.data(), nxp, nzp, inv_hx);
      fd::grad_z(K, u.data(), gz.data(), nxp, nzp, inv_hz);
      for (int iz = 0; iz < nzp; ++iz) {
        const size_t off = static_cast<size_t>(iz) * (nxp - 1);
        K.flux_psi_a(c2x_.data() + off, gx.data() + off, psix.data() + off, fx.data() + off,
                     decay_x_.data(), phi_x_.data(), sphi_x_.data(), sigz_node_[iz], nxp - 1);
      }
      for (int kz = 0; kz < nzp - 1; ++kz) {
        const size_t off = static_cast<size_t>(kz) * nxp;
        K.flux_psi_s(c2z_.data() + off, gz.data() + off, psiz.data() + off, fz.data() + off,
                     decay_z_[kz], phi_z_[kz], sphi_z_[kz], sigx_node_.data(), nxp);
      }
      fd::div_x(K, fx.data(), divx.data(), nxp, nzp, inv_hx);
      fd::div_z(K, fz.data(), divz.data(), nxp, nzp, inv_hz);
      K.leapfrog(u.data(), u_prev.data(), u_next.data(), tm2b_.data(), om1a_.data(),
                 inv1pa_.data(), divx.data(), divz.data(), dt2, static_cast<int>(cells));
      for (const Injection& inj : injections) {
        const double f = dt2 * inj.series[static_cast<size_t>(n)];
        if (f == 0.0) continue;
        for (const auto& [cell, w] : inj.weights) {
          u_next[static_cast<size_t>(cell)] += inv1pa_[static_cast<size_t>(cell)] * f * w;
        }
      }
    }

    std::swap(u_prev, u);
    std::swap(u, u_next);
    sample_all(u, n + 1);
    maybe_observe(n + 1, u.data());

    if ((n + 1) % opt_.instability_check_every == 0 || n + 1 == Nt) {
      for (size_t i = 0; i < cells; ++i) {
        if (!std::isfinite(u[i]) || std::abs(u[i]) > 1e50) {
          throw numeric_error("wavefield instability detected at step " + std::to_string(n + 1));
        }
      }
    }
  }
  return traces;
}

ForwardResult WaveSolver::solve_forward(const SourceSpec& source,
                                        std::span<const ReceiverSpec> receivers,
                                        bool store_wavefield) const {
  if (!(source.f0 > 0.0)) throw config_error("source f0 must be positive");
  if (source.origin_time < 0.0) throw config_error("source origin time must be nonnegative");
  const int nt = axis_.nt();
  std::vector<double> series(static_cast<size_t>(nt));
  for (int k = 0; k < nt; ++k) {
    series[static_cast<size_t>(k)] =
        ricker(k * axis_.dt - source.origin_time, source.f0, source.amplitude);
  }
  std::vector<Injection> inj;
  inj.push_back(make_injection(source.x, source.z, std::move(series)));

  ForwardResult result;
  if (store_wavefield) {
    auto steps = stored_steps();
    result.wavefield.grid = padded_;
    result.wavefield.dt = axis_.dt;
    result.wavefield.total_steps = axis_.steps();
    result.wavefield.stride = stride_;
    result.wavefield.steps = steps;
    result.wavefield.snaps.resize(steps.size());
    const size_t cells = static_cast<size_t>(padded_.count());
    result.traces = run(inj, receivers, steps, [&](int j, const double* f) {
      auto& s = result.wavefield.snaps[static_cast<size_t>(j)];
      s.resize(cells);
      for (size_t i = 0; i < cells; ++i) s[i] = static_cast<float>(f[i]);
    });
  } else {
    result.traces = run(inj, receivers, {}, nullptr);
  }
  return result;
}

ForwardResult WaveSolver::solve_series(const std::vector<std::pair<ReceiverSpec, Trace>>& sources,
                                       std::span<const ReceiverSpec> receivers,
                                       bool store_wavefield) const {
  std::vector<Injection> inj;
  inj.reserve(sources.size());
  for (const auto& [loc, trace] : sources) {
    inj.push_back(make_injection(loc.x, loc.z, trace.samples));
  }
  ForwardResult result;
  if (store_wavefield) {
    auto steps = stored_steps();
    result.wavefield.grid = padded_;
    result.wavefield.dt = axis_.dt;
    result.wavefield.total_steps = axis_.steps();
    result.wavefield.stride = stride_;
    result.wavefield.steps = steps;
    result.wavefield.snaps.resize(steps.size());
    const size_t cells = static_cast<size_t>(padded_.count());
    result.traces = run(inj, receivers, steps, [&](int j, const double* f) {
      auto& s = result.wavefield.snaps[static_cast<size_t>(j)];
      s.resize(cells);
      for (size_t i = 0; i < cells; ++i) s[i] = static_cast<float>(f[i]);
    });
  } else {
    result.traces = run(inj, receivers, {}, nullptr);
  }
  return result;
}

Wavefield WaveSolver::solve_with_adjoint_sources(
    const std::vector<std::pair<ReceiverSpec, Trace>>& injections) const {
  const int nt = axis_.nt();
  const int Nt = nt - 1;
  std::vector<Injection> inj;
  inj.reserve(injections.size());
  for (const auto& [loc, trace] : injections) {
    if (trace.nt() != nt) {
      throw config_error("adjoint injection trace length does not match the time axis");
    }
    std::vector<double> reversed(static_cast<size_t>(nt));
    for (int k = 0; k < nt; ++k) {
      reversed[static_cast<size_t>(k)] = trace.samples[static_cast<size_t>(Nt - k)];
    }
    inj.push_back(make_injection(loc.x, loc.z, std::move(reversed)));
  }

  auto sigma_steps = stored_steps();
  Wavefield w;
  w.grid = padded_;
  w.dt = axis_.dt;
  w.total_steps = Nt;
  w.stride = stride_;
  w.snaps.resize(sigma_steps.size());
  const size_t cells = static_cast<size_t>(padded_.count());
  run(inj, {}, sigma_steps, [&](int j, const double* f) {
    auto& s = w.snaps[static_cast<size_t>(j)];
    s.resize(cells);
    for (size_t i = 0; i < cells; ++i) s[i] = static_cast<float>(f[i]);
  });
  // Remap reversed time onto the forward axis: sigma = Nt - t_step. The
  // half-weighted start of the reversed run realizes the trapezoid endpoint
  // of the adjoint pairing exactly.
  std::reverse(w.snaps.begin(), w.snaps.end());
  w.steps = sigma_steps;  // same index set after reversal (stride divides Nt)
  return w;
}

// Exact transpose of the discrete forward recursion, including the PML memory
// variables: backpropagates lambda = dXi/du and accumulates dXi/d(c^2) at the
// half nodes against the stored forward states. The accumulators use the
// convention  dXi = dx*dz * sum_k acc[k] * d(c2half[k]).
void WaveSolver::solve_adjoint_correlate(
    const std::vector<std::pair<ReceiverSpec, Trace>>& injections, const Wavefield& forward,
    std::vector<double>& accum_x, std::vector<double>& accum_z) const {
  if (!(forward.grid == padded_) || forward.total_steps != axis_.steps() ||
      forward.stride != stride_) {
    throw numeric_error("solve_adjoint_correlate: forward snapshot axis mismatch");
  }
  const int nt = axis_.nt();
  const int Nt = nt - 1;
  const int nxp = padded_.nx, nzp = padded_.nz;
  const size_t cells = static_cast<size_t>(padded_.count());
  const size_t nhx = static_cast<size_t>(nxp - 1) * nzp;
  const size_t nhz = static_cast<size_t>(nxp) * (nzp - 1);
  if (accum_x.size() != nhx || accum_z.size() != nhz) {
    throw numeric_error("solve_adjoint_correlate: accumulator size mismatch");
  }

  struct Source {
    std::vector<std::pair<int, double>> weights;
    const std::vector<double>* series;
  };
  std::vector<Source> sources;
  sources.reserve(injections.size());
  for (const auto& [loc, trace] : injections) {
    if (trace.nt() != nt) {
      throw config_error("adjoint injection trace length does not match the time axis");
    }
    sources.push_back(Source{delta_weights(loc.x, loc.z), &trace.samples});
  }

  const simd::Ops& K = simd::ops_for(opt_.backend);
  const double dt = axis_.dt;
  const double dt2 = dt * dt;
  const double inv_hx = 1.0 / padded_.dx;
  const double inv_hz = 1.0 / padded_.dz;

  Field lam_next(cells, 0.0), lam_next2(cells, 0.0), lam(cells, 0.0);
  Field phi(cells, 0.0), phi2(cells, 0.0);
  Field ones(cells, 1.0);
  std::vector<double> lpsix(nhx, 0.0), lpsiz(nhz, 0.0);
  std::vector<double> gphix(nhx), lgx(nhx), gphiz(nhz), lgz(nhz);
  std::vector<double> gxu(nhx, 0.0), gzu(nhz, 0.0);
  Field divlx(cells), divlz(cells), u_d(cells);

  // lambda_u at the final step collects the half-weighted endpoint source.
  for (const Source& s : sources) {
    const double q = 0.5 * dt * (*s.series)[static_cast<size_t>(Nt)];
    for (const auto& [cell, w] : s.weights) lam_next[static_cast<size_t>(cell)] += q * w;
  }

  for (int n = Nt - 1; n >= 1; --n) {
    for (size_t i = 0; i < cells; ++i) phi[i] = inv1pa_[i] * lam_next[i];
    for (size_t i = 0; i < cells; ++i) phi2[i] = inv1pa_[i] * lam_next2[i];
    fd::grad_x(K, phi.data(), gphix.data(), nxp, nzp, inv_hx);
    fd::grad_z(K, phi.data(), gphiz.data(), nxp, nzp, inv_hz);

    double wt = 0.0;
    if (n % stride_ == 0) {
      wt = static_cast<double>(stride_);
      const auto& us = forward.snaps[static_cast<size_t>(n / stride_)];
      for (size_t i = 0; i < cells; ++i) u_d[i] = static_cast<double>(us[i]);
      fd::grad_x(K, u_d.data(), gxu.data(), nxp, nzp, inv_hx);
      fd::grad_z(K, u_d.data(), gzu.data(), nxp, nzp, inv_hz);
    }

    for (int iz = 0; iz < nzp; ++iz) {
      const size_t off = static_cast<size_t>(iz) * (nxp - 1);
      K.adj_flux_psi_a(c2x_.data() + off, gphix.data() + off, gxu.data() + off,
                       lpsix.data() + off, lgx.data() + off, accum_x.data() + off,
                       decay_x_.data(), phi_x_.data(), sphi_x_.data(), sigz_node_[iz], dt2, wt,
                       nxp - 1);
    }
    for (int kz = 0; kz < nzp - 1; ++kz) {
      const size_t off = static_cast<size_t>(kz) * nxp;
      K.adj_flux_psi_s(c2z_.data() + off, gphiz.data() + off, gzu.data() + off,
                       lpsiz.data() + off, lgz.data() + off, accum_z.data() + off, decay_z_[kz],
                       phi_z_[kz], sphi_z_[kz], sigx_node_.data(), dt2, wt, nxp);
    }
    fd::div_x(K, lgx.data(), divlx.data(), nxp, nzp, inv_hx);
    fd::div_z(K, lgz.data(), divlz.data(), nxp, nzp, inv_hz);
    // lambda_u^n = tm2b.phi - om1a.phi2 - div(lambda_g) + G_n
    K.leapfrog(phi.data(), phi2.data(), lam.data(), tm2b_.data(), om1a_.data(), ones.data(),
               divlx.data(), divlz.data(), -1.0, static_cast<int>(cells));
    for (const Source& s : sources) {
      const double q = dt * (*s.series)[static_cast<size_t>(n)];
      for (const auto& [cell, w] : s.weights) lam[static_cast<size_t>(cell)] += q * w;
    }

    std::swap(lam_next2, lam_next);
    std::swap(lam_next, lam);
  }
}

}  // namespace otfwi
