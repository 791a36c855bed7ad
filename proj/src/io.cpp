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

#include "otfwi/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace otfwi {

namespace {

constexpr char kTraceMagic[8] = {'O', 'T', 'F', 'W', 'T', 'R', 'C', '1'};

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw io_error("cannot create directory '" + path + "': " + ec.message());
}

void write_grid_field(const std::string& path, const Grid2D& grid, const Field& values) {
  if (static_cast<int>(values.size()) != grid.count()) {
    throw io_error("write_grid_field: field size does not match grid");
  }
  std::ofstream out = open_out(path);
  out << grid.nx << " " << grid.nz << " " << format_double(grid.dx) << " "
      << format_double(grid.dz) << " " << format_double(grid.x0) << " " << format_double(grid.z0)
      << "\n";
  for (int iz = 0; iz < grid.nz; ++iz) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      out << format_double(values[grid.idx(ix, iz)]) << (ix + 1 == grid.nx ? "\n" : " ");
    }
  }
  if (!out) throw io_error("error writing '" + path + "'");
}

std::pair<Grid2D, Field> read_grid_field(const std::string& path) {
  std::ifstream in = open_in(path);
  int nx = 0, nz = 0;
  double dx = 0, dz = 0, x0 = 0, z0 = 0;
  if (!(in >> nx >> nz >> dx >> dz >> x0 >> z0)) {
    throw io_error("bad grid-field header in '" + path + "'");
  }
  Grid2D grid(x0, z0, dx, dz, nx, nz);
  Field values(static_cast<size_t>(grid.count()));
  for (double& v : values) {
    if (!(in >> v)) throw io_error("truncated grid-field file '" + path + "'");
  }
  return {grid, std::move(values)};
}

void write_grid_field_csv(const std::string& path, const Grid2D& grid, const Field& values) {
  std::ofstream out = open_out(path);
  out << "x,z,value\n";
  for (int iz = 0; iz < grid.nz; ++iz) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      out << format_double(grid.x(ix)) << "," << format_double(grid.z(iz)) << ","
          << format_double(values[grid.idx(ix, iz)]) << "\n";
    }
  }
}

std::pair<Grid2D, Field> read_grid_field_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw io_error("empty grid csv '" + path + "'");
  struct Node {
    double x, z, v;
  };
  std::vector<Node> nodes;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Node n{};
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &n.x, &n.z, &n.v) != 3) {
      throw io_error("bad grid csv row in '" + path + "': " + line);
    }
    nodes.push_back(n);
  }
  if (nodes.size() < 4) throw io_error("grid csv '" + path + "' has too few nodes");
  // Rows are written x-fastest; recover the axis structure from the layout.
  int nx = 1;
  while (nx < static_cast<int>(nodes.size()) && nodes[static_cast<size_t>(nx)].z == nodes[0].z) {
    ++nx;
  }
  if (nx < 2 || nodes.size() % static_cast<size_t>(nx) != 0) {
    throw io_error("grid csv '" + path + "' is not a row-major lattice");
  }
  const int nz = static_cast<int>(nodes.size()) / nx;
  const Grid2D grid(nodes[0].x, nodes[0].z, nodes[1].x - nodes[0].x,
                    nodes[static_cast<size_t>(nx)].z - nodes[0].z, nx, nz);
  Field values(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) values[i] = nodes[i].v;
  return {grid, std::move(values)};
}

void write_trace_csv(const std::string& path, const Trace& trace) {
  std::ofstream out = open_out(path);
  out << "i,j,dt,t_f\n";
  out << trace.source_id << "," << trace.receiver_id << "," << format_double(trace.dt) << ","
      << format_double(trace.t_f) << "\n";
  for (double v : trace.samples) out << format_double(v) << "\n";
}

Trace read_trace_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw io_error("empty trace file '" + path + "'");
  if (!std::getline(in, line)) throw io_error("missing trace header in '" + path + "'");
  Trace t;
  {
    std::istringstream hs(line);
    std::string tok;
    std::getline(hs, tok, ',');
    t.source_id = std::stoi(tok);
    std::getline(hs, tok, ',');
    t.receiver_id = std::stoi(tok);
    std::getline(hs, tok, ',');
    t.dt = std::stod(tok);
    std::getline(hs, tok, ',');
    t.t_f = std::stod(tok);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.samples.push_back(std::stod(line));
  }
  return t;
}

void write_trace_binary(const std::string& path, const Trace& trace) {
  std::ofstream out = open_out(path, std::ios::binary);
  out.write(kTraceMagic, sizeof(kTraceMagic));
  const std::int32_t i = trace.source_id, j = trace.receiver_id;
  const std::int64_t n = trace.nt();
  out.write(reinterpret_cast<const char*>(&i), sizeof(i));
  out.write(reinterpret_cast<const char*>(&j), sizeof(j));
  out.write(reinterpret_cast<const char*>(&trace.dt), sizeof(double));
  out.write(reinterpret_cast<const char*>(&trace.t_f), sizeof(double));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(trace.samples.data()),
            static_cast<std::streamsize>(sizeof(double) * trace.samples.size()));
  if (!out) throw io_error("error writing '" + path + "'");
}

Trace read_trace_binary(const std::string& path) {
  std::ifstream in = open_in(path, std::ios::binary);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kTraceMagic, sizeof(magic)) != 0) {
    throw io_error("'" + path + "' is not a trace file");
  }
  std::int32_t i = 0, j = 0;
  std::int64_t n = 0;
  Trace t;
  in.read(reinterpret_cast<char*>(&i), sizeof(i));
  in.read(reinterpret_cast<char*>(&j), sizeof(j));
  in.read(reinterpret_cast<char*>(&t.dt), sizeof(double));
  in.read(reinterpret_cast<char*>(&t.t_f), sizeof(double));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in || n < 0 || n > (1ll << 32)) throw io_error("bad trace header in '" + path + "'");
  t.source_id = i;
  t.receiver_id = j;
  t.samples.resize(static_cast<size_t>(n));
  in.read(reinterpret_cast<char*>(t.samples.data()),
          static_cast<std::streamsize>(sizeof(double) * t.samples.size()));
  if (!in) throw io_error("truncated trace file '" + path + "'");
  return t;
}

void write_pair_table_csv(const std::string& path, const PairTable& table) {
  std::ofstream out = open_out(path);
  out << "i,j,t_lo,t_hi,accepted,reason\n";
  for (int i = 0; i < table.n_sources; ++i) {
    for (int j = 0; j < table.n_receivers; ++j) {
      const PhaseWindow& w = table.at(i, j);
      out << i << "," << j << "," << format_double(w.t_lo) << "," << format_double(w.t_hi) << ","
          << (w.accepted ? 1 : 0) << "," << w.reason << "\n";
    }
  }
}

void write_transport_map_csv(const std::string& path, const TransportMap& map,
                             const std::vector<double>& outer) {
  if (outer.size() != map.t_map.size()) {
    throw io_error("write_transport_map_csv: axis mismatch");
  }
  std::ofstream out = open_out(path);
  out << "t,T,U\n";
  for (size_t k = 0; k < map.t_map.size(); ++k) {
    out << format_double(static_cast<double>(k) * map.dt) << "," << format_double(map.t_map[k])
        << "," << format_double(outer[k]) << "\n";
  }
}

ConvergenceLog::ConvergenceLog(const std::string& path) : path_(path) {
  std::ofstream out = open_out(path_);
  out << "k,misfit,rme,rmf,step,accepted_pairs\n";
}

void ConvergenceLog::append(const InversionState& s) {
  std::ofstream out(path_, std::ios::app);
  if (!out) throw io_error("cannot append to '" + path_ + "'");
  out << s.iteration << "," << format_double(s.misfit) << "," << format_double(s.rme) << ","
      << format_double(s.rmf) << "," << format_double(s.step_size) << "," << s.accepted_pairs
      << "\n";
}

}  // namespace otfwi
