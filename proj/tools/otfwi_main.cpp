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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "otfwi/adjoint.hpp"
#include "otfwi/config.hpp"
#include "otfwi/io.hpp"

namespace fs = std::filesystem;
using namespace otfwi;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string preset_name = "two-layer";
  std::string scale = "desk";
  std::string misfit;
  double epsilon = -1.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "JSON config file (overrides --preset)");
  cmd->add_option("--preset", a.preset_name, "preset name: two-layer | crustal-root");
  cmd->add_option("--scale", a.scale, "preset scale: full | desk");
  cmd->add_option("--misfit", a.misfit, "misfit kind: l2 | w2-p1 | w2-p2 | w2-p3");
  cmd->add_option("--epsilon", a.epsilon, "normalization epsilon for P2/P3");
  cmd->add_option("--seed", a.seed, "placement seed")->each([&](const std::string&) {
    a.seed_set = true;
  });
  cmd->add_option("--threads", a.threads, "worker threads (0: hardware)");
  cmd->add_option("--out", a.out_dir, "output directory");
}

ExperimentConfig resolve_config(const CommonArgs& a) {
  ExperimentConfig cfg =
      a.config_path.empty() ? preset(a.preset_name, a.scale) : load_config(a.config_path);
  if (!a.misfit.empty()) cfg.misfit = a.misfit;
  if (a.epsilon >= 0.0) cfg.epsilon = a.epsilon;
  if (a.seed_set) cfg.seed = a.seed;
  if (a.threads > 0) cfg.threads = a.threads;
  if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
  return cfg;
}

std::string trace_path(const std::string& dir, int i, int j) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "trace_%04d_%04d.bin", i, j);
  return dir + "/" + buf;
}

std::optional<std::vector<std::vector<Trace>>> load_observed_if_present(
    const ExperimentConfig& cfg) {
  const std::string dir = cfg.out_dir + "/observed";
  if (!fs::is_directory(dir)) return std::nullopt;
  std::vector<std::vector<Trace>> data(cfg.sources.size());
  for (size_t i = 0; i < cfg.sources.size(); ++i) {
    data[i].resize(cfg.receivers.size());
    for (size_t j = 0; j < cfg.receivers.size(); ++j) {
      const std::string p = trace_path(dir, static_cast<int>(i), static_cast<int>(j));
      if (!fs::exists(p)) return std::nullopt;
      data[i][j] = read_trace_binary(p);
    }
  }
  std::cout << "loaded observed traces from " << dir << "\n";
  return data;
}

void write_run_provenance(const Experiment& e) {
  ensure_directory(e.cfg.out_dir);
  save_config(e.cfg, e.cfg.out_dir + "/config.json");
  write_pair_table_csv(e.cfg.out_dir + "/windows.csv", e.pairs);
}

int cmd_generate(const CommonArgs& a) {
  ExperimentConfig cfg = resolve_config(a);
  Experiment e = assemble_experiment(std::move(cfg));
  write_run_provenance(e);
  const std::string dir = e.cfg.out_dir + "/observed";
  ensure_directory(dir);
  for (size_t i = 0; i < e.observed.size(); ++i) {
    for (size_t j = 0; j < e.observed[i].size(); ++j) {
      write_trace_binary(trace_path(dir, static_cast<int>(i), static_cast<int>(j)),
                         e.observed[i][j]);
    }
  }
  write_grid_field(e.cfg.out_dir + "/model_true.txt", e.c_true.grid, e.c_true.c);
  write_grid_field(e.cfg.out_dir + "/model_init.txt", e.c_init.grid, e.c_init.c);
  std::cout << "wrote " << e.observed.size() * (e.observed.empty() ? 0 : e.observed[0].size())
            << " observed traces to " << dir << "\n";
  return 0;
}

int cmd_invert(const CommonArgs& a, int iterations_override) {
  ExperimentConfig cfg = resolve_config(a);
  cfg.realize_placements();
  auto preloaded = load_observed_if_present(cfg);
  Experiment e = assemble_experiment(std::move(cfg), preloaded ? &*preloaded : nullptr);
  write_run_provenance(e);

  InversionEngine engine(make_engine_setup(e));
  const int iters =
      iterations_override > 0 ? iterations_override : e.cfg.optimizer.max_iterations;
  ConvergenceLog log(e.cfg.out_dir + "/convergence.csv");
  const int every = std::max(1, e.cfg.optimizer.checkpoint_every);

  auto history = engine.run(iters, [&](const InversionState& s) {
    log.append(s);
    std::cout << "iter " << s.iteration << "  misfit " << format_double(s.misfit) << "  rme "
              << format_double(s.rme) << "  rmf " << format_double(s.rmf)
              << (s.stalled ? "  (stalled)" : "") << "\n";
    if (s.iteration % every == 0 || s.iteration == iters) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "/model_iter_%04d.txt", s.iteration);
      const VelocityModel m = engine.model_for(s.update_coarse);
      write_grid_field(e.cfg.out_dir + buf, m.grid, m.c);
    }
  });
  const VelocityModel final_model = engine.model_for(history.back().update_coarse);
  write_grid_field(e.cfg.out_dir + "/model_final.txt", final_model.grid, final_model.c);
  std::cout << "final rme " << format_double(history.back().rme) << " rmf "
            << format_double(history.back().rmf) << " after " << history.back().iteration
            << " iterations\n";
  return 0;
}

void dump_snapshots(const WaveSolver& solver, const Wavefield& w, const std::string& out_dir,
                    int count) {
  if (count <= 0 || w.empty()) return;
  const Grid2D& pg = solver.padded_grid();
  const Grid2D& phys = solver.physical_grid();
  const int np = solver.pml_layers();
  char buf[64];
  for (int n = 0; n < count; ++n) {
    const int j = static_cast<int>((static_cast<long long>(n + 1) * (w.count() - 1)) / count);
    const Field full = w.snapshot_as_double(std::min(j, w.count() - 1));
    Field crop = make_field(phys);
    for (int iz = 0; iz < phys.nz; ++iz) {
      for (int ix = 0; ix < phys.nx; ++ix) {
        crop[phys.idx(ix, iz)] = full[pg.idx(ix + np, iz + np)];
      }
    }
    std::snprintf(buf, sizeof(buf), "/snapshot_%06.3fs.txt", w.time_of(std::min(j, w.count() - 1)));
    write_grid_field(out_dir + buf, phys, crop);
  }
}

int cmd_kernel(const CommonArgs& a, int source_index, const std::string& windows,
               int snapshot_count) {
  ExperimentConfig cfg = resolve_config(a);
  if (windows == "off") {
    cfg.windows_enabled = false;
  } else if (windows != "on") {
    throw config_error("--windows expects on|off");
  }
  Experiment e = assemble_experiment(std::move(cfg));
  if (source_index < 0 || source_index >= static_cast<int>(e.cfg.sources.size())) {
    throw config_error("--source index out of range");
  }
  write_run_provenance(e);

  const ScalingOperator op = e.cfg.scaling_operator();
  const WaveSolver solver(e.c_init, e.cfg.time_axis(), e.cfg.solver_options());
  ForwardResult fwd = solver.solve_forward(e.cfg.sources[source_index], e.cfg.receivers, true);
  AdjointSourceSet qs = build_adjoint_sources(op, source_index, fwd.traces,
                                              e.observed[source_index], e.pairs);
  std::vector<std::pair<ReceiverSpec, Trace>> injections;
  for (size_t j = 0; j < qs.q.size(); ++j) {
    if (qs.active[j]) injections.emplace_back(e.cfg.receivers[j], qs.q[j]);
  }
  if (injections.empty()) {
    std::cout << "no contributing pairs for source " << source_index << "; kernel is zero\n";
  }
  SensitivityKernel kernel =
      injections.empty()
          ? SensitivityKernel{e.c_init.grid, make_field(e.c_init.grid), source_index}
          : source_kernel(solver, injections, fwd.wavefield, source_index);

  char buf[96];
  std::snprintf(buf, sizeof(buf), "/kernel_src%03d_%s_win-%s.txt", source_index,
                e.cfg.misfit.c_str(), windows.c_str());
  write_grid_field(e.cfg.out_dir + buf, kernel.grid, kernel.values);
  std::cout << "wrote kernel to " << e.cfg.out_dir + buf << "\n";
  dump_snapshots(solver, fwd.wavefield, e.cfg.out_dir, snapshot_count);

  if (is_transport_kind(op.kind)) {
    for (size_t j = 0; j < qs.q.size(); ++j) {
      const PhaseWindow& w = e.pairs.at(source_index, static_cast<int>(j));
      if (!w.accepted || qs.degenerate[j]) continue;
      const Trace sw = apply_window(w, fwd.traces[j]);
      const Trace dw = apply_window(w, e.observed[source_index][j]);
      try {
        const MisfitDetail detail = misfit_detail(op, sw, dw);
        std::snprintf(buf, sizeof(buf), "/map_%03d_%03d.csv", source_index,
                      static_cast<int>(j));
        write_transport_map_csv(e.cfg.out_dir + buf, detail.map, detail.outer);
      } catch (const degenerate_trace_error&) {
        continue;
      }
    }
  }
  return 0;
}

int cmd_compare_traces(const CommonArgs& a, int i, int j) {
  ExperimentConfig cfg = resolve_config(a);
  Experiment e = assemble_experiment(std::move(cfg));
  if (i < 0 || i >= static_cast<int>(e.cfg.sources.size()) || j < 0 ||
      j >= static_cast<int>(e.cfg.receivers.size())) {
    throw config_error("pair index out of range");
  }
  const WaveSolver solver(e.c_init, e.cfg.time_axis(), e.cfg.solver_options());
  ForwardResult fwd = solver.solve_forward(e.cfg.sources[i], e.cfg.receivers, false);
  const PhaseWindow& w = e.pairs.at(i, j);
  std::cout << "pair (" << i << "," << j << ") window [" << w.t_lo << ", " << w.t_hi << "] "
            << (w.accepted ? "accepted" : ("rejected: " + w.reason)) << "\n";
  const Trace sw = apply_window(w, fwd.traces[j]);
  const Trace dw = apply_window(w, e.observed[i][j]);
  for (const char* kind : {"l2", "w2-p1", "w2-p2", "w2-p3"}) {
    ScalingOperator op{misfit_kind_from_string(kind), e.cfg.epsilon};
    double chi = 0.0;
    try {
      chi = misfit(op, sw, dw);
      std::cout << "  " << kind << "  chi = " << format_double(chi) << "\n";
    } catch (const degenerate_trace_error&) {
      std::cout << "  " << kind << "  degenerate pair (zero windowed energy)\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seismic velocity inversion with quadratic-Wasserstein misfits"};
  app.require_subcommand(1);

  CommonArgs gen_args, inv_args, ker_args, cmp_args;
  int iterations = 0;
  int kernel_source = 0;
  std::string kernel_windows = "on";
  int kernel_snapshots = 0;
  int cmp_i = 0, cmp_j = 0;

  CLI::App* gen = app.add_subcommand("generate", "synthesize observed traces from the true model");
  add_common(gen, gen_args);

  CLI::App* inv = app.add_subcommand("invert", "run the inversion loop");
  add_common(inv, inv_args);
  inv->add_option("--iterations", iterations, "override the preset iteration count");

  CLI::App* ker = app.add_subcommand("kernel", "dump one source's sensitivity kernel and OT maps");
  add_common(ker, ker_args);
  ker->add_option("--source", kernel_source, "source index");
  ker->add_option("--windows", kernel_windows, "phase windows: on | off");
  ker->add_option("--snapshots", kernel_snapshots, "also dump this many wavefield snapshots");

  CLI::App* cmp = app.add_subcommand("compare-traces", "print every misfit for one pair");
  add_common(cmp, cmp_args);
  cmp->add_option("--source", cmp_i, "source index");
  cmp->add_option("--receiver", cmp_j, "receiver index");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(gen_args);
    if (inv->parsed()) return cmd_invert(inv_args, iterations);
    if (ker->parsed()) return cmd_kernel(ker_args, kernel_source, kernel_windows, kernel_snapshots);
    if (cmp->parsed()) return cmd_compare_traces(cmp_args, cmp_i, cmp_j);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
