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

#include "otfwi/inversion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "otfwi/parallel.hpp"

namespace otfwi {

Metrics compute_metrics(const Field& c_k, const Field& c_0, const Field& c_T, double xi_k,
                        double xi_0) {
  if (c_k.size() != c_0.size() || c_0.size() != c_T.size()) {
    throw config_error("compute_metrics: field sizes differ");
  }
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < c_k.size(); ++i) {
    const double dk = c_k[i] - c_T[i];
    const double d0 = c_0[i] - c_T[i];
    num += dk * dk;
    den += d0 * d0;
  }
  if (!(den > 0.0)) {
    throw config_error("compute_metrics: c_0 equals c_T, relative model error is undefined");
  }
  if (!(xi_0 > 0.0)) {
    throw config_error("compute_metrics: Xi(c_0) vanishes, relative misfit is undefined");
  }
  return Metrics{num / den, xi_k / xi_0};
}

std::vector<std::vector<Trace>> generate_observed(const VelocityModel& c_true,
                                                  std::span<const SourceSpec> sources,
                                                  std::span<const ReceiverSpec> receivers,
                                                  const TimeAxis& axis,
                                                  const SolverOptions& solver_opts, int threads) {
  std::vector<std::vector<Trace>> data(sources.size());
  const WaveSolver solver(c_true, axis, solver_opts);
  parallel_for(static_cast<int>(sources.size()), threads, [&](int i) {
    ForwardResult r = solver.solve_forward(sources[i], receivers, false);
    for (int j = 0; j < static_cast<int>(receivers.size()); ++j) {
      r.traces[j].source_id = i;
      r.traces[j].receiver_id = j;
    }
    data[static_cast<size_t>(i)] = std::move(r.traces);
  });
  return data;
}

InversionEngine::InversionEngine(Setup setup)
    : setup_(std::move(setup)), transfer_(setup_.inversion_grid, setup_.c0_fine.grid) {
  if (setup_.observed.size() != setup_.sources.size()) {
    throw config_error("InversionEngine: observed data does not cover the source list");
  }
  if (setup_.solver.pml_ref_velocity <= 0.0) {
    // Freeze the damping ramp across iterations so Xi stays smooth in c.
    setup_.solver.pml_ref_velocity = setup_.c0_fine.max_velocity();
  }
  if (setup_.pairs.n_sources != static_cast<int>(setup_.sources.size()) ||
      setup_.pairs.n_receivers != static_cast<int>(setup_.receivers.size())) {
    throw config_error("InversionEngine: pair table does not match the geometry");
  }
  Field zero = make_field(setup_.inversion_grid);
  xi0_ = evaluate_misfit(zero, nullptr, &pairs0_);
}

VelocityModel InversionEngine::model_for(const Field& update_coarse) const {
  Field fine = transfer_.prolongate(update_coarse);
  const Field& base = setup_.c0_fine.c;
  for (size_t i = 0; i < fine.size(); ++i) {
    fine[i] = std::max(base[i] + fine[i], setup_.policy.velocity_floor_kms);
  }
  return VelocityModel(setup_.c0_fine.grid, std::move(fine));
}

Field InversionEngine::coarse_model_for(const Field& update_coarse) const {
  Field ck = setup_.c0_coarse;
  for (size_t i = 0; i < ck.size(); ++i) {
    ck[i] = std::max(ck[i] + update_coarse[i], setup_.policy.velocity_floor_kms);
  }
  return ck;
}

double InversionEngine::evaluate_misfit(const Field& update_coarse,
                                        std::vector<std::vector<double>>* chi,
                                        int* contributing_pairs) const {
  const VelocityModel model = model_for(update_coarse);
  const WaveSolver solver(model, setup_.axis, setup_.solver);
  const int n = static_cast<int>(setup_.sources.size());
  const int m = static_cast<int>(setup_.receivers.size());

  std::vector<double> xi_per_source(static_cast<size_t>(n), 0.0);
  std::vector<int> used_per_source(static_cast<size_t>(n), 0);
  if (chi) chi->assign(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(m), 0.0));

  parallel_for(n, setup_.threads, [&](int i) {
    ForwardResult fwd = solver.solve_forward(setup_.sources[i], setup_.receivers, false);
    double xi = 0.0;
    int used = 0;
    for (int j = 0; j < m; ++j) {
      const PhaseWindow& w = setup_.pairs.at(i, j);
      if (!w.accepted) continue;
      const Trace sw = apply_window(w, fwd.traces[static_cast<size_t>(j)]);
      const Trace dw = apply_window(w, setup_.observed[static_cast<size_t>(i)][static_cast<size_t>(j)]);
      double value = 0.0;
      try {
        value = misfit(setup_.op, sw, dw);
      } catch (const degenerate_trace_error&) {
        continue;  // pair skipped for this model, reported via the pair count
      }
      xi += value;
      ++used;
      if (chi) (*chi)[static_cast<size_t>(i)][static_cast<size_t>(j)] = value;
    }
    xi_per_source[static_cast<size_t>(i)] = xi;
    used_per_source[static_cast<size_t>(i)] = used;
  });

  double xi = 0.0;
  int used = 0;
  for (int i = 0; i < n; ++i) {
    xi += xi_per_source[static_cast<size_t>(i)];
    used += used_per_source[static_cast<size_t>(i)];
  }
  if (contributing_pairs) *contributing_pairs = used;
  return xi;
}

GradientField InversionEngine::compute_gradient(const Field& update_coarse, bool masked) const {
  const VelocityModel model = model_for(update_coarse);
  const WaveSolver solver(model, setup_.axis, setup_.solver);
  const int n = static_cast<int>(setup_.sources.size());

  std::vector<SensitivityKernel> kernels(static_cast<size_t>(n));
  parallel_for(n, setup_.threads, [&](int i) {
    ForwardResult fwd = solver.solve_forward(setup_.sources[i], setup_.receivers, true);
    AdjointSourceSet qs = build_adjoint_sources(setup_.op, i, fwd.traces,
                                                setup_.observed[static_cast<size_t>(i)], setup_.pairs);
    std::vector<std::pair<ReceiverSpec, Trace>> injections;
    for (size_t j = 0; j < qs.q.size(); ++j) {
      if (qs.active[j]) injections.emplace_back(setup_.receivers[j], qs.q[j]);
    }
    if (injections.empty()) {
      kernels[static_cast<size_t>(i)] =
          SensitivityKernel{model.grid, make_field(model.grid), i};
      return;
    }
    kernels[static_cast<size_t>(i)] = source_kernel(solver, injections, fwd.wavefield, i);
  });

  if (setup_.policy.kernel_smoothing_km > 0.0) {
    for (SensitivityKernel& k : kernels) {
      k.values = gaussian_smooth(k.grid, k.values, setup_.policy.kernel_smoothing_km);
    }
  }
  if (masked && setup_.policy.mask_singular_cells) {
    const Grid2D& g = model.grid;
    const int r = setup_.policy.singular_radius_cells;
    auto mask_point = [&](Field& f, double x, double z) {
      const int ix_c = static_cast<int>(std::lround((x - g.x0) / g.dx));
      const int iz_c = static_cast<int>(std::lround((z - g.z0) / g.dz));
      for (int iz = std::max(0, iz_c - r); iz <= std::min(g.nz - 1, iz_c + r); ++iz) {
        for (int ix = std::max(0, ix_c - r); ix <= std::min(g.nx - 1, ix_c + r); ++ix) {
          f[g.idx(ix, iz)] = 0.0;
        }
      }
    };
    for (SensitivityKernel& k : kernels) {
      for (const SourceSpec& s : setup_.sources) mask_point(k.values, s.x, s.z);
      for (const ReceiverSpec& rec : setup_.receivers) mask_point(k.values, rec.x, rec.z);
    }
  }
  return aggregate_gradient(kernels, transfer_);
}

InversionState InversionEngine::initial_state() const {
  InversionState s;
  s.iteration = 0;
  s.update_coarse = make_field(setup_.inversion_grid);
  s.misfit = xi0_;
  s.accepted_pairs = pairs0_;
  const Metrics m = compute_metrics(coarse_model_for(s.update_coarse), setup_.c0_coarse,
                                    setup_.cT_coarse, xi0_, xi0_);
  s.rme = m.rme;
  s.rmf = m.rmf;
  return s;
}

InversionState InversionEngine::step(const InversionState& state) const {
  const auto t_begin = std::chrono::steady_clock::now();
  InversionState next = state;
  next.iteration = state.iteration + 1;
  next.stalled = false;

  const GradientField g = compute_gradient(state.update_coarse, true);
  double gmax = 0.0;
  for (double v : g.values) gmax = std::max(gmax, std::abs(v));
  if (!(gmax > 0.0)) {
    next.stalled = true;
    next.step_size = 0.0;
    return next;
  }

  // <g, d> with d = -g, in the coarse inner product used by the aggregation.
  double gd = 0.0;
  for (double v : g.values) gd -= v * v;
  gd *= setup_.inversion_grid.cell_area();

  const double alpha0 = setup_.policy.step_cap_kms / gmax;
  bool accepted = false;
  for (int trial = 0; trial < setup_.policy.max_backtracks; ++trial) {
    const double alpha = alpha0 / static_cast<double>(1 << trial);
    Field m_trial = state.update_coarse;
    for (size_t i = 0; i < m_trial.size(); ++i) m_trial[i] -= alpha * g.values[i];
    int used = 0;
    const double xi_trial = evaluate_misfit(m_trial, nullptr, &used);
    if (xi_trial <= state.misfit + setup_.policy.armijo_c1 * alpha * gd) {
      next.update_coarse = std::move(m_trial);
      next.misfit = xi_trial;
      next.step_size = alpha;
      next.accepted_pairs = used;
      accepted = true;
      break;
    }
  }
  if (!accepted) {
    next.stalled = true;
    next.step_size = 0.0;
    return next;
  }

  const Metrics m = compute_metrics(coarse_model_for(next.update_coarse), setup_.c0_coarse,
                                    setup_.cT_coarse, next.misfit, xi0_);
  next.rme = m.rme;
  next.rmf = m.rmf;
  next.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return next;
}

std::vector<InversionState> InversionEngine::run(
    int iterations, const std::function<void(const InversionState&)>& on_state) {
  std::vector<InversionState> history;
  history.push_back(initial_state());
  if (on_state) on_state(history.back());
  for (int k = 0; k < iterations; ++k) {
    InversionState next = step(history.back());
    if (next.stalled) {
      next.misfit = history.back().misfit;
      next.rme = history.back().rme;
      next.rmf = history.back().rmf;
      history.push_back(next);
      if (on_state) on_state(next);
      break;
    }
    if (!(next.misfit < history.back().misfit)) {
      throw numeric_error("inversion: accepted step failed to decrease the misfit");
    }
    history.push_back(next);
    if (on_state) on_state(history.back());
  }
  return history;
}

}  // namespace otfwi
