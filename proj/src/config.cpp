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

#include "otfwi/config.hpp"

#include <cmath>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "otfwi/transfer.hpp"

namespace otfwi {

namespace {

using nlohmann::json;

// Deterministic generator for the seeded placement policy; never touches any
// ambient randomness.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + uniform() * (b - a); }
};

bool near_multiple(double v, double q) {
  const double r = v / q;
  return std::abs(r - std::llround(r)) < 1e-9;
}

}  // namespace

Grid2D ExperimentConfig::sim_grid() const {
  const int nx = static_cast<int>(std::llround(lx / dx)) + 1;
  const int nz = static_cast<int>(std::llround(lz / dz)) + 1;
  return Grid2D(x0, z0, dx, dz, nx, nz);
}

Grid2D ExperimentConfig::inversion_grid() const {
  const double h = inversion_spacing;
  const int nxc = static_cast<int>(std::floor(lx / h + 1e-9));
  const int nzc = static_cast<int>(std::floor(lz / h + 1e-9));
  return Grid2D(x0 + h / 2.0, z0 + h / 2.0, h, h, nxc, nzc);
}

TimeAxis ExperimentConfig::time_axis() const { return TimeAxis{dt, t_f}; }

SolverOptions ExperimentConfig::solver_options() const {
  SolverOptions o;
  o.pml_layers = pml_layers;
  o.pml_reflection = pml_reflection;
  o.cfl_safety = cfl_safety;
  o.snapshot_budget_mb = snapshot_budget_mb;
  return o;
}

ScalingOperator ExperimentConfig::scaling_operator() const {
  return ScalingOperator{misfit_kind_from_string(misfit), epsilon};
}

VelocityFn ExperimentConfig::true_velocity() const {
  if (model.kind == "two-layer") return two_layer_velocity(model.two_layer, true);
  if (model.kind == "crustal-root") return crustal_root_velocity(model.crustal_root, true);
  throw config_error("unknown model kind '" + model.kind + "'");
}

VelocityFn ExperimentConfig::initial_velocity() const {
  if (model.kind == "two-layer") return two_layer_velocity(model.two_layer, false);
  if (model.kind == "crustal-root") return crustal_root_velocity(model.crustal_root, false);
  throw config_error("unknown model kind '" + model.kind + "'");
}

VelocityModel ExperimentConfig::true_model() const { return sample_model(sim_grid(), true_velocity()); }
VelocityModel ExperimentConfig::initial_model() const {
  return sample_model(sim_grid(), initial_velocity());
}

int ExperimentConfig::resolved_threads() const {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void ExperimentConfig::realize_placements() {
  SplitMix64 rng{seed};
  if (receivers.empty()) {
    if (receiver_count <= 0) throw config_error("no receivers configured");
    receivers.reserve(static_cast<size_t>(receiver_count));
    // Stations on the surface line, uniform between the lateral margins.
    for (int j = 0; j < receiver_count; ++j) {
      receivers.push_back(
          ReceiverSpec{rng.uniform(x0 + placement_margin, x0 + lx - placement_margin), z0});
    }
  }
  if (sources.empty()) {
    if (source_count <= 0) throw config_error("no sources configured");
    sources.reserve(static_cast<size_t>(source_count));
    for (int i = 0; i < source_count; ++i) {
      SourceSpec s;
      s.x = rng.uniform(x0 + placement_margin, x0 + lx - placement_margin);
      s.z = rng.uniform(source_zmin, source_zmax);
      s.f0 = f0;
      s.amplitude = amplitude;
      s.origin_time = origin_time;
      sources.push_back(s);
    }
  }
  for (SourceSpec& s : sources) {
    if (s.f0 <= 0.0) s.f0 = f0;
    if (s.amplitude == 0.0) s.amplitude = amplitude;
  }
}

void ExperimentConfig::validate() const {
  const Grid2D sg = sim_grid();
  if (!near_multiple(lx, dx) || !near_multiple(lz, dz)) {
    throw config_error("domain extents must be integer multiples of the grid spacing");
  }
  time_axis().nt();
  if (!near_multiple(inversion_spacing, dx) || !near_multiple(inversion_spacing / 2.0, dx) ||
      !near_multiple(inversion_spacing, dz) || !near_multiple(inversion_spacing / 2.0, dz)) {
    throw config_error(
        "inversion grid is not nested: spacing and half-spacing must be multiples of dx and dz");
  }
  GridTransfer(inversion_grid(), sg);  // validates nesting
  const VelocityModel ct = true_model();
  const double dt_lim = WaveSolver::cfl_dt_limit(ct, cfl_safety);
  if (dt > dt_lim + 1e-15) {
    throw config_error("dt=" + std::to_string(dt) + " violates the CFL precondition (limit " +
                       std::to_string(dt_lim) + ")");
  }
  if (sources.empty() && source_count <= 0) throw config_error("no sources configured");
  if (receivers.empty() && receiver_count <= 0) throw config_error("no receivers configured");
  for (const SourceSpec& s : sources) {
    if (!sg.contains(s.x, s.z)) throw config_error("source outside the physical domain");
    if (!(s.f0 > 0.0)) throw config_error("source f0 must be positive");
    if (s.origin_time < 0.0) throw config_error("source origin time must be nonnegative");
  }
  for (const ReceiverSpec& r : receivers) {
    if (!sg.contains(r.x, r.z)) throw config_error("receiver outside the physical domain");
  }
  scaling_operator().validate();
  if (!(optimizer.step_cap_kms > 0.0)) throw config_error("optimizer step cap must be positive");
}

ExperimentConfig preset(const std::string& name, const std::string& scale) {
  ExperimentConfig c;
  c.name = name;
  c.scale = scale;
  if (name == "two-layer") {
    c.model.kind = "two-layer";
    if (scale == "full") {
      c.lx = 80.0;
      c.lz = 60.0;
      c.dx = c.dz = 0.2;
      c.dt = 0.01;
      c.t_f = 21.0;
      c.f0 = 2.0;
      c.amplitude = 0.01;  // O(1) trace peaks for the epsilon regime
      c.inversion_spacing = 2.0;
      c.source_count = 80;
      c.receiver_count = 25;
      c.source_zmin = 3.0;
      c.source_zmax = 27.0;  // crust minus the 3 km margins
      c.model.two_layer = TwoLayerParams{};
      c.reflector_depths = {c.model.two_layer.moho_depth};
      c.optimizer.max_iterations = 80;
    } else if (scale == "desk") {
      // Quarter-size domain; f0 and the anomaly footprint keep the direct-path
      // delay near half the dominant period, the regime the full problem is in.
      c.lx = 20.0;
      c.lz = 15.0;
      c.dx = c.dz = 0.125;
      c.dt = 0.005;
      c.t_f = 6.0;
      c.f0 = 5.0;
      // Keeps windowed trace amplitudes O(1) so the P2 floor sits in the
      // published epsilon regime.
      c.amplitude = 1000.0;
      c.inversion_spacing = 2.0;
      TwoLayerParams p;
      p.moho_depth = 12.0;
      p.anom_x0 = 6.0;
      p.anom_x1 = 14.0;
      p.anom_z0 = 3.0;
      p.anom_z1 = 7.5;
      c.model.two_layer = p;
      c.reflector_depths = {p.moho_depth};
      c.sources = {
          SourceSpec{3.5, 9.2, 0.0, c.f0, 1.0},
          SourceSpec{8.5, 9.5, 0.0, c.f0, 1.0},
          SourceSpec{12.5, 9.2, 0.0, c.f0, 1.0},
          SourceSpec{16.5, 9.5, 0.0, c.f0, 1.0},
      };
      c.receivers = {ReceiverSpec{2.0, 0.0}, ReceiverSpec{6.0, 0.0}, ReceiverSpec{10.0, 0.0},
                     ReceiverSpec{14.0, 0.0}, ReceiverSpec{18.0, 0.0}};
      c.optimizer.max_iterations = 20;
    } else {
      throw config_error("unknown scale '" + scale + "' (expected full|desk)");
    }
  } else if (name == "crustal-root") {
    c.model.kind = "crustal-root";
    if (scale == "full") {
      c.lx = 80.0;
      c.lz = 80.0;
      c.dx = c.dz = 0.2;
      c.dt = 0.01;
      c.t_f = 21.0;
      c.f0 = 2.0;
      c.amplitude = 0.01;
      c.inversion_spacing = 2.0;
      c.source_count = 80;
      c.receiver_count = 40;
      c.source_zmin = 3.0;
      c.source_zmax = 33.0;  // above the shallowest Moho minus margin
      c.model.crustal_root = CrustalRootParams{};
      c.reflector_depths = {c.model.crustal_root.conrad_depth, c.model.crustal_root.moho_flat};
      c.optimizer.max_iterations = 160;
    } else if (scale == "desk") {
      c.lx = 20.0;
      c.lz = 20.0;
      c.dx = c.dz = 0.125;
      c.dt = 0.005;
      c.t_f = 7.0;
      c.f0 = 4.0;
      c.amplitude = 1000.0;
      c.inversion_spacing = 2.0;
      CrustalRootParams p;
      p.conrad_depth = 5.0;
      p.moho_flat = 11.0;
      p.root_amp = 6.25;
      p.root_half_width = 10.0;
      c.model.crustal_root = p;
      c.reflector_depths = {p.conrad_depth, p.moho_flat};
      c.sources = {
          SourceSpec{3.0, 7.0, 0.0, c.f0, 1.0},
          SourceSpec{8.0, 7.5, 0.0, c.f0, 1.0},
          SourceSpec{13.0, 7.0, 0.0, c.f0, 1.0},
          SourceSpec{17.0, 7.5, 0.0, c.f0, 1.0},
      };
      c.receivers = {ReceiverSpec{2.0, 0.0}, ReceiverSpec{6.0, 0.0}, ReceiverSpec{10.0, 0.0},
                     ReceiverSpec{14.0, 0.0}, ReceiverSpec{18.0, 0.0}};
      c.optimizer.max_iterations = 20;
    } else {
      throw config_error("unknown scale '" + scale + "' (expected full|desk)");
    }
  } else {
    throw config_error("unknown preset '" + name + "' (expected two-layer|crustal-root)");
  }
  for (SourceSpec& s : c.sources) {
    s.f0 = c.f0;
    s.amplitude = c.amplitude;
    s.origin_time = c.origin_time;
  }
  return c;
}

namespace {

json source_to_json(const SourceSpec& s) {
  return json{{"x", s.x}, {"z", s.z}, {"origin_time", s.origin_time}, {"f0", s.f0},
              {"amplitude", s.amplitude}};
}

SourceSpec source_from_json(const json& j) {
  SourceSpec s;
  s.x = j.at("x");
  s.z = j.at("z");
  s.origin_time = j.value("origin_time", 0.0);
  s.f0 = j.at("f0");
  s.amplitude = j.value("amplitude", 1.0);
  return s;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["scale"] = c.scale;
  j["domain"] = {{"x0", c.x0}, {"z0", c.z0}, {"lx", c.lx}, {"lz", c.lz}};
  j["simulation"] = {{"dx", c.dx},
                     {"dz", c.dz},
                     {"dt", c.dt},
                     {"t_f", c.t_f},
                     {"pml_layers", c.pml_layers},
                     {"pml_reflection", c.pml_reflection},
                     {"cfl_safety", c.cfl_safety},
                     {"snapshot_budget_mb", c.snapshot_budget_mb}};
  j["inversion_spacing"] = c.inversion_spacing;
  j["acquisition"] = {{"f0", c.f0},
                      {"amplitude", c.amplitude},
                      {"origin_time", c.origin_time},
                      {"source_count", c.source_count},
                      {"receiver_count", c.receiver_count},
                      {"placement_margin", c.placement_margin},
                      {"source_zmin", c.source_zmin},
                      {"source_zmax", c.source_zmax}};
  j["sources"] = json::array();
  for (const SourceSpec& s : c.sources) j["sources"].push_back(source_to_json(s));
  j["receivers"] = json::array();
  for (const ReceiverSpec& r : c.receivers) j["receivers"].push_back(json{{"x", r.x}, {"z", r.z}});
  j["misfit"] = {{"kind", c.misfit}, {"epsilon", c.epsilon}};
  j["picking"] = {{"a_periods", c.picking.a_periods},
                  {"b_periods", c.picking.b_periods},
                  {"taper_periods", c.picking.taper_periods},
                  {"min_separation_windows", c.picking.min_separation_windows},
                  {"noise_floor_rel", c.picking.noise_floor_rel},
                  {"eikonal_init_radius_cells", c.picking.eikonal_init_radius_cells},
                  {"windows_enabled", c.windows_enabled},
                  {"reflector_depths", c.reflector_depths}};
  j["optimizer"] = {{"max_iterations", c.optimizer.max_iterations},
                    {"armijo_c1", c.optimizer.armijo_c1},
                    {"max_backtracks", c.optimizer.max_backtracks},
                    {"step_cap_kms", c.optimizer.step_cap_kms},
                    {"velocity_floor_kms", c.optimizer.velocity_floor_kms},
                    {"checkpoint_every", c.optimizer.checkpoint_every},
                    {"mask_singular_cells", c.optimizer.mask_singular_cells},
                    {"singular_radius_cells", c.optimizer.singular_radius_cells},
                    {"kernel_smoothing_km", c.optimizer.kernel_smoothing_km}};
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["out_dir"] = c.out_dir;
  json m;
  m["kind"] = c.model.kind;
  if (c.model.kind == "two-layer") {
    const TwoLayerParams& p = c.model.two_layer;
    m["moho_depth"] = p.moho_depth;
    m["v_crust"] = p.v_crust;
    m["v_mantle"] = p.v_mantle;
    m["v_anomaly"] = p.v_anomaly;
    m["anomaly_box"] = {p.anom_x0, p.anom_x1, p.anom_z0, p.anom_z1};
  } else {
    const CrustalRootParams& p = c.model.crustal_root;
    m["conrad_depth"] = p.conrad_depth;
    m["moho_flat"] = p.moho_flat;
    m["root_amp"] = p.root_amp;
    m["root_half_width"] = p.root_half_width;
    m["v_upper"] = p.v_upper;
    m["v_lower"] = p.v_lower;
    m["v_mantle"] = p.v_mantle;
  }
  j["model"] = m;
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  json j = json::parse(text);
  ExperimentConfig c;
  c.schema_version = j.value("schema_version", 1);
  if (c.schema_version != 1) throw config_error("unsupported config schema version");
  c.name = j.value("name", "custom");
  c.scale = j.value("scale", "custom");
  const json& d = j.at("domain");
  c.x0 = d.at("x0");
  c.z0 = d.at("z0");
  c.lx = d.at("lx");
  c.lz = d.at("lz");
  const json& s = j.at("simulation");
  c.dx = s.at("dx");
  c.dz = s.at("dz");
  c.dt = s.at("dt");
  c.t_f = s.at("t_f");
  c.pml_layers = s.value("pml_layers", 10);
  c.pml_reflection = s.value("pml_reflection", 1e-3);
  c.cfl_safety = s.value("cfl_safety", 0.45);
  c.snapshot_budget_mb = s.value("snapshot_budget_mb", 512.0);
  c.inversion_spacing = j.value("inversion_spacing", 2.0);
  const json& a = j.at("acquisition");
  c.f0 = a.at("f0");
  c.amplitude = a.value("amplitude", 1.0);
  c.origin_time = a.value("origin_time", 0.0);
  c.source_count = a.value("source_count", 0);
  c.receiver_count = a.value("receiver_count", 0);
  c.placement_margin = a.value("placement_margin", 3.0);
  c.source_zmin = a.value("source_zmin", 3.0);
  c.source_zmax = a.value("source_zmax", 9.0);
  for (const json& e : j.value("sources", json::array())) c.sources.push_back(source_from_json(e));
  for (const json& e : j.value("receivers", json::array())) {
    c.receivers.push_back(ReceiverSpec{e.at("x"), e.at("z")});
  }
  const json& mi = j.at("misfit");
  c.misfit = mi.at("kind");
  c.epsilon = mi.value("epsilon", 1e-3);
  const json& p = j.at("picking");
  c.picking.a_periods = p.value("a_periods", 1.0);
  c.picking.b_periods = p.value("b_periods", 3.0);
  c.picking.taper_periods = p.value("taper_periods", 0.5);
  c.picking.min_separation_windows = p.value("min_separation_windows", 1.0);
  c.picking.noise_floor_rel = p.value("noise_floor_rel", 1e-8);
  c.picking.eikonal_init_radius_cells = p.value("eikonal_init_radius_cells", 8);
  c.windows_enabled = p.value("windows_enabled", true);
  c.reflector_depths = p.value("reflector_depths", std::vector<double>{});
  const json& o = j.at("optimizer");
  c.optimizer.max_iterations = o.value("max_iterations", 20);
  c.optimizer.armijo_c1 = o.value("armijo_c1", 1e-4);
  c.optimizer.max_backtracks = o.value("max_backtracks", 8);
  c.optimizer.step_cap_kms = o.value("step_cap_kms", 0.1);
  c.optimizer.velocity_floor_kms = o.value("velocity_floor_kms", kVelocityFloorKms);
  c.optimizer.checkpoint_every = o.value("checkpoint_every", 10);
  c.optimizer.mask_singular_cells = o.value("mask_singular_cells", true);
  c.optimizer.singular_radius_cells = o.value("singular_radius_cells", 3);
  c.optimizer.kernel_smoothing_km = o.value("kernel_smoothing_km", 0.0);
  c.seed = j.value("seed", static_cast<std::uint64_t>(1));
  c.threads = j.value("threads", 0);
  c.out_dir = j.value("out_dir", "runs/out");
  const json& m = j.at("model");
  c.model.kind = m.at("kind");
  if (c.model.kind == "two-layer") {
    TwoLayerParams& t = c.model.two_layer;
    t.moho_depth = m.value("moho_depth", t.moho_depth);
    t.v_crust = m.value("v_crust", t.v_crust);
    t.v_mantle = m.value("v_mantle", t.v_mantle);
    t.v_anomaly = m.value("v_anomaly", t.v_anomaly);
    if (m.contains("anomaly_box")) {
      const auto box = m.at("anomaly_box").get<std::vector<double>>();
      if (box.size() != 4) throw config_error("anomaly_box must have 4 entries");
      t.anom_x0 = box[0];
      t.anom_x1 = box[1];
      t.anom_z0 = box[2];
      t.anom_z1 = box[3];
    }
  } else if (c.model.kind == "crustal-root") {
    CrustalRootParams& t = c.model.crustal_root;
    t.conrad_depth = m.value("conrad_depth", t.conrad_depth);
    t.moho_flat = m.value("moho_flat", t.moho_flat);
    t.root_amp = m.value("root_amp", t.root_amp);
    t.root_half_width = m.value("root_half_width", t.root_half_width);
    t.v_upper = m.value("v_upper", t.v_upper);
    t.v_lower = m.value("v_lower", t.v_lower);
    t.v_mantle = m.value("v_mantle", t.v_mantle);
  } else {
    throw config_error("unknown model kind '" + c.model.kind + "'");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json(text);
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write config file '" + path + "'");
  out << config_to_json(cfg) << "\n";
}

Experiment assemble_experiment(ExperimentConfig cfg,
                               const std::vector<std::vector<Trace>>* preloaded_observed) {
  cfg.realize_placements();
  cfg.validate();

  Experiment e;
  e.c_true = cfg.true_model();
  e.c_init = cfg.initial_model();
  const Grid2D inv = cfg.inversion_grid();
  e.cT_coarse = sample_model(inv, cfg.true_velocity()).c;
  e.c0_coarse = sample_model(inv, cfg.initial_velocity()).c;

  const TimeAxis axis = cfg.time_axis();
  const int threads = cfg.resolved_threads();
  if (preloaded_observed) {
    if (preloaded_observed->size() != cfg.sources.size()) {
      throw config_error("preloaded observed data does not match the source list");
    }
    e.observed = *preloaded_observed;
  } else {
    e.observed =
        generate_observed(e.c_true, cfg.sources, cfg.receivers, axis, cfg.solver_options(), threads);
  }

  if (cfg.windows_enabled) {
    e.pairs = select_pairs(e.c_init, cfg.sources, cfg.receivers, axis, cfg.reflector_depths,
                           &e.observed, cfg.picking);
  } else {
    // Full-axis pass-through windows: every pair accepted, no tapering.
    e.pairs.n_sources = static_cast<int>(cfg.sources.size());
    e.pairs.n_receivers = static_cast<int>(cfg.receivers.size());
    e.pairs.rows.resize(cfg.sources.size() * cfg.receivers.size());
    for (int i = 0; i < e.pairs.n_sources; ++i) {
      for (int j = 0; j < e.pairs.n_receivers; ++j) {
        PhaseWindow w;
        w.source_id = i;
        w.receiver_id = j;
        w.t_lo = 0.0;
        w.t_hi = axis.t_f;
        w.taper = 0.0;
        w.accepted = true;
        e.pairs.at(i, j) = w;
      }
    }
  }
  e.cfg = std::move(cfg);
  return e;
}

InversionEngine::Setup make_engine_setup(const Experiment& e) {
  InversionEngine::Setup s;
  s.c0_fine = e.c_init;
  s.c0_coarse = e.c0_coarse;
  s.cT_coarse = e.cT_coarse;
  s.inversion_grid = e.cfg.inversion_grid();
  s.sources = e.cfg.sources;
  s.receivers = e.cfg.receivers;
  s.axis = e.cfg.time_axis();
  s.solver = e.cfg.solver_options();
  s.op = e.cfg.scaling_operator();
  s.pairs = e.pairs;
  s.observed = e.observed;
  s.policy = e.cfg.optimizer;
  s.threads = e.cfg.resolved_threads();
  return s;
}

}  // namespace otfwi
