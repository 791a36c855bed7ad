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

#include <string>
#include <utility>
#include <vector>

#include "otfwi/grid.hpp"
#include "otfwi/inversion.hpp"
#include "otfwi/picker.hpp"
#include "otfwi/transport.hpp"
#include "otfwi/wave.hpp"

namespace otfwi {

/// Shortest decimal that round-trips the double ("%.17g" fallback).
std::string format_double(double v);

// Grid fields (models, kernels, snapshots): plain-text header
//   nx nz dx dz x0 z0
// followed by nz rows of nx node values, row-major.
void write_grid_field(const std::string& path, const Grid2D& grid, const Field& values);
std::pair<Grid2D, Field> read_grid_field(const std::string& path);

/// CSV variant for plotting: header "x,z,value", one node per row.
void write_grid_field_csv(const std::string& path, const Grid2D& grid, const Field& values);
std::pair<Grid2D, Field> read_grid_field_csv(const std::string& path);

// Traces: CSV with a header row (i, j, dt, t_f) and one sample per row, plus
// a binary variant with the identical layout.
void write_trace_csv(const std::string& path, const Trace& trace);
Trace read_trace_csv(const std::string& path);
void write_trace_binary(const std::string& path, const Trace& trace);
Trace read_trace_binary(const std::string& path);

/// Pair-selection table: i, j, t_lo, t_hi, accepted, reason.
void write_pair_table_csv(const std::string& path, const PairTable& table);

/// Transport-map export: t, T(t), U(t).
void write_transport_map_csv(const std::string& path, const TransportMap& map,
                             const std::vector<double>& outer);

/// Convergence log: k, misfit, rme, rmf, step, accepted_pairs.
class ConvergenceLog {
 public:
  explicit ConvergenceLog(const std::string& path);
  void append(const InversionState& s);

 private:
  std::string path_;
};

void ensure_directory(const std::string& path);

}  // namespace otfwi
