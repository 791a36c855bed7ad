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

#include "otfwi/picker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "otfwi/transport.hpp"

namespace otfwi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

// One axis of the upwind stencil: the effective one-sided data (a, h) with a
// second-order extension where two monotone upwind values exist.
struct UpwindAxis {
  double a = kInf;     // effective upwind value
  double h = 0.0;      // effective spacing
  double t1 = kInf;    // nearest upwind value (causality check)
  bool valid = false;
};

UpwindAxis upwind_axis(double t1m, double t2m, double t1p, double t2p, double h,
                       double slowness) {
  UpwindAxis u;
  double t1 = t1m, t2 = t2m;
  if (t1p < t1) {
    t1 = t1p;
    t2 = t2p;
  }
  if (!(t1 < kInf)) return u;
  u.valid = true;
  u.t1 = t1;
  if (t2 < kInf && t2 <= t1) {
    const double a2 = (4.0 * t1 - t2) / 3.0;
    const double h2 = 2.0 * h / 3.0;
    // The second-order branch must stay causal; otherwise drop an order.
    if (a2 + slowness * h2 >= t1) {
      u.a = a2;
      u.h = h2;
      return u;
    }
  }
  u.a = t1;
  u.h = h;
  return u;
}

// Godunov update from the two axis stencils.
double eikonal_update(const UpwindAxis& x, const UpwindAxis& z, double slowness) {
  double t = kInf;
  if (x.valid) t = std::min(t, x.a + slowness * x.h);
  if (z.valid) t = std::min(t, z.a + slowness * z.h);
  if (x.valid && z.valid) {
    const double ax = 1.0 / (x.h * x.h), az = 1.0 / (z.h * z.h);
    const double A = ax + az;
    const double B = x.a * ax + z.a * az;
    const double C = x.a * x.a * ax + z.a * z.a * az - slowness * slowness;
    const double disc = B * B - A * C;
    if (disc >= 0.0) {
      const double cand = (B + std::sqrt(disc)) / A;
      if (cand >= std::max(x.t1, z.t1)) t = std::min(t, cand);
    }
  }
  return t;
}

}  // namespace

double TraveltimeField::at(double x, double z) const {
  double sx = (x - grid.x0) / grid.dx;
  double sz = (z - grid.z0) / grid.dz;
  sx = std::clamp(sx, 0.0, static_cast<double>(grid.nx - 1));
  sz = std::clamp(sz, 0.0, static_cast<double>(grid.nz - 1));
  const int ix = std::min(static_cast<int>(sx), grid.nx - 2);
  const int iz = std::min(static_cast<int>(sz), grid.nz - 2);
  const double fx = sx - ix, fz = sz - iz;
  const double t00 = at_node(ix, iz), t10 = at_node(ix + 1, iz);
  const double t01 = at_node(ix, iz + 1), t11 = at_node(ix + 1, iz + 1);
  const double top = t00 + fx * (t10 - t00);
  const double bot = t01 + fx * (t11 - t01);
  return top + fz * (bot - top);
}

TraveltimeField traveltime(const VelocityModel& model, const SourceSpec& source,
                           const PickPolicy& policy) {
  const Grid2D& g = model.grid;
  if (!g.contains(source.x, source.z)) {
    throw config_error("traveltime: source outside the model grid");
  }
  const int nx = g.nx, nz = g.nz;
  Field t(static_cast<size_t>(g.count()), kInf);
  std::vector<char> frozen(static_cast<size_t>(g.count()), 0);

  // Analytic initialization in a disc around the source; midpoint slowness
  // keeps it second-order for smooth media and exact for homogeneous ones.
  const double s_src = 1.0 / model.probe(source.x, source.z);
  const int r0 = std::max(2, policy.eikonal_init_radius_cells);
  const int ix_c = static_cast<int>(std::lround((source.x - g.x0) / g.dx));
  const int iz_c = static_cast<int>(std::lround((source.z - g.z0) / g.dz));
  const double rmax = r0 * std::min(g.dx, g.dz);
  for (int iz = std::max(0, iz_c - r0 - 1); iz <= std::min(nz - 1, iz_c + r0 + 1); ++iz) {
    for (int ix = std::max(0, ix_c - r0 - 1); ix <= std::min(nx - 1, ix_c + r0 + 1); ++ix) {
      const double rx = g.x(ix) - source.x;
      const double rz = g.z(iz) - source.z;
      const double r = std::hypot(rx, rz);
      if (r <= rmax) {
        const double s_node = 1.0 / model.at(ix, iz);
        t[g.idx(ix, iz)] = r * 0.5 * (s_src + s_node);
        frozen[g.idx(ix, iz)] = 1;
      }
    }
  }

  auto value_at = [&](int ix, int iz) {
    return (ix >= 0 && ix < nx && iz >= 0 && iz < nz) ? t[g.idx(ix, iz)] : kInf;
  };
  auto sweep = [&](int x0, int x1, int sx, int z0, int z1, int sz) {
    double max_change = 0.0;
    for (int iz = z0; iz != z1; iz += sz) {
      for (int ix = x0; ix != x1; ix += sx) {
        const int id = g.idx(ix, iz);
        if (frozen[id]) continue;
        const double slowness = 1.0 / model.c[id];
        const UpwindAxis ux =
            upwind_axis(value_at(ix - 1, iz), value_at(ix - 2, iz), value_at(ix + 1, iz),
                        value_at(ix + 2, iz), g.dx, slowness);
        const UpwindAxis uz =
            upwind_axis(value_at(ix, iz - 1), value_at(ix, iz - 2), value_at(ix, iz + 1),
                        value_at(ix, iz + 2), g.dz, slowness);
        const double cand = eikonal_update(ux, uz, slowness);
        if (cand < t[id]) {
          max_change = std::max(max_change, t[id] < kInf ? t[id] - cand : kInf);
          t[id] = cand;
        }
      }
    }
    return max_change;
  };

  const double scale = std::hypot(g.extent_x(), g.extent_z()) / model.min_velocity();
  bool converged = false;
  for (int it = 0; it < policy.eikonal_max_sweeps; it += 4) {
    double ch = 0.0;
    ch = std::max(ch, sweep(0, nx, 1, 0, nz, 1));
    ch = std::max(ch, sweep(nx - 1, -1, -1, 0, nz, 1));
    ch = std::max(ch, sweep(0, nx, 1, nz - 1, -1, -1));
    ch = std::max(ch, sweep(nx - 1, -1, -1, nz - 1, -1, -1));
    if (ch <= policy.eikonal_tolerance * scale) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw numeric_error("traveltime: fast sweeping did not converge");
  }
  return TraveltimeField{g, std::move(t)};
}

PhaseWindow make_window(double t_arr, double f0, double t_f, const PickPolicy& policy) {
  PhaseWindow w;
  if (!std::isfinite(t_arr) || !(f0 > 0.0)) {
    w.accepted = false;
    w.reason = "no-arrival";
    return w;
  }
  w.t_lo = std::max(0.0, t_arr - policy.a_periods / f0);
  w.t_hi = std::min(t_f, t_arr + policy.b_periods / f0);
  w.taper = policy.taper_periods / f0;
  if (w.t_hi - w.t_lo < 2.0 * w.taper || w.t_hi <= w.t_lo) {
    w.accepted = false;
    w.reason = "window-collapse";
  } else {
    w.accepted = true;
    w.reason = "ok";
  }
  return w;
}

std::vector<double> window_weights(const PhaseWindow& w, double dt, int nt) {
  std::vector<double> ww(static_cast<size_t>(nt), 0.0);
  for (int k = 0; k < nt; ++k) {
    const double t = k * dt;
    if (t < w.t_lo || t > w.t_hi) continue;
    double v = 1.0;
    if (w.taper > 0.0) {
      if (t < w.t_lo + w.taper) {
        v = 0.5 * (1.0 - std::cos(kPi * (t - w.t_lo) / w.taper));
      } else if (t > w.t_hi - w.taper) {
        v = 0.5 * (1.0 - std::cos(kPi * (w.t_hi - t) / w.taper));
      }
    }
    ww[static_cast<size_t>(k)] = v;
  }
  return ww;
}

Trace apply_window(const PhaseWindow& w, const Trace& s) {
  const std::vector<double> ww = window_weights(w, s.dt, s.nt());
  Trace out = s;
  for (int k = 0; k < s.nt(); ++k) out.samples[k] = s.samples[k] * ww[k];
  return out;
}

int PairTable::accepted_count() const {
  int n = 0;
  for (const PhaseWindow& w : rows) n += w.accepted ? 1 : 0;
  return n;
}

double reflected_time_estimate(const VelocityModel& model, double xs, double zs, double xr,
                               double zr, double z_reflect) {
  if (zs >= z_reflect || zr >= z_reflect) return kInf;  // no same-side reflection
  // Image of the source across the interface; the straight image ray crosses
  // the interface at the reflection point.
  const double zi = 2.0 * z_reflect - zs;
  const double denom = zi - zr;
  if (denom <= 0.0) return kInf;
  const double frac = (zi - z_reflect) / denom;
  const double xp = xs + frac * (xr - xs);

  auto leg_time = [&](double xa, double za, double xb, double zb) {
    const int n = 256;
    const double len = std::hypot(xb - xa, zb - za);
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const double f = (k + 0.5) / n;
      s += 1.0 / model.probe(xa + f * (xb - xa), za + f * (zb - za));
    }
    return len * s / n;
  };
  return leg_time(xs, zs, xp, z_reflect) + leg_time(xp, z_reflect, xr, zr);
}

PairTable select_pairs(const VelocityModel& model0, std::span<const SourceSpec> sources,
                       std::span<const ReceiverSpec> receivers, const TimeAxis& axis,
                       const std::vector<double>& reflector_depths,
                       const std::vector<std::vector<Trace>>* observed, const PickPolicy& policy) {
  PairTable table;
  table.n_sources = static_cast<int>(sources.size());
  table.n_receivers = static_cast<int>(receivers.size());
  table.rows.resize(sources.size() * receivers.size());

  for (int i = 0; i < table.n_sources; ++i) {
    const SourceSpec& src = sources[i];
    const TraveltimeField tt = traveltime(model0, src, policy);
    for (int j = 0; j < table.n_receivers; ++j) {
      const ReceiverSpec& rec = receivers[j];
      const double t_direct = src.origin_time + tt.at(rec.x, rec.z);
      PhaseWindow w = make_window(t_direct, src.f0, axis.t_f, policy);
      w.source_id = i;
      w.receiver_id = j;

      if (w.accepted) {
        for (double zr : reflector_depths) {
          const double t_refl =
              src.origin_time + reflected_time_estimate(model0, src.x, src.z, rec.x, rec.z, zr);
          if (t_refl - t_direct < policy.min_separation_windows * w.length()) {
            w.accepted = false;
            w.reason = "multipath";
            break;
          }
        }
      }
      if (w.accepted && observed != nullptr) {
        const Trace& d = (*observed)[i][j];
        const Trace dw = apply_window(w, d);
        std::vector<double> d2(dw.samples.size());
        for (size_t k = 0; k < d2.size(); ++k) d2[k] = dw.samples[k] * dw.samples[k];
        std::vector<double> full2(d.samples.size());
        for (size_t k = 0; k < full2.size(); ++k) full2[k] = d.samples[k] * d.samples[k];
        const double e_win = trapezoid(d2, d.dt);
        const double e_full = trapezoid(full2, d.dt);
        if (e_win <= std::max(policy.noise_floor_rel * e_full, 1e-300)) {
          w.accepted = false;
          w.reason = "low-energy";
        }
      }
      table.at(i, j) = w;
    }
  }
  return table;
}

}  // namespace otfwi
