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

#include "otfwi/transport.hpp"
#include "otfwi/wave.hpp"

namespace otfwi {

/// Trace-to-density normalization family. The squared-signal operators:
///   P1(s) = s^2 / |s^2|
///   P2(s) = (s^2 + eps) / |s^2 + eps|
///   P3(s) = (s^2/|s^2| + eps) / (1 + t_f*eps)
/// with |v| the trapezoidal time integral. The L2 baseline bypasses the
/// density form entirely: chi = 1/2 * integral (s-d)^2 dt.
enum class MisfitKind { l2, w2_p1, w2_p2, w2_p3 };

MisfitKind misfit_kind_from_string(const std::string& name);
std::string to_string(MisfitKind kind);
bool is_transport_kind(MisfitKind kind);

struct ScalingOperator {
  MisfitKind kind = MisfitKind::w2_p3;
  double epsilon = 1e-3;  // used by P2 and P3; feasible range roughly 1e-4..1e-2

  void validate() const;
};

/// Convert a trace into a probability density. Throws degenerate_trace_error
/// for P1/P3 on a trace with vanishing squared mass; the caller skips the
/// pair. Throws config_error for the L2 baseline, which has no density form.
ProbabilityTrace apply(const ScalingOperator& op, const Trace& s);

/// Jacobian-transpose action of the operator: Q = [dP/ds]^T U evaluated at s,
/// with all pairings trapezoidal. U must come from outer_gradient of the
/// matched pair. Not defined for the L2 baseline.
Trace adjoint_apply(const ScalingOperator& op, const Trace& s, const std::vector<double>& u);

/// Adjoint source of the L2 baseline: Q = s - d.
Trace l2_adjoint_source(const Trace& s, const Trace& d);

/// chi = W2^2(P(s), P(d)) for the transport kinds, 1/2*integral (s-d)^2 for l2.
double misfit(const ScalingOperator& op, const Trace& s, const Trace& d);

/// Full evaluation of one transport-misfit pair, for adjoint-source assembly
/// and map exports.
struct MisfitDetail {
  double value = 0.0;
  ProbabilityTrace fs;          // P(s)
  ProbabilityTrace fd;          // P(d)
  TransportMap map;             // T = G^{-1} o F
  std::vector<double> outer;    // U(t), the continuum form (map exports)
  std::vector<double> grad_f;   // discrete-exact dW2^2/df, drives the adjoint chain
};
MisfitDetail misfit_detail(const ScalingOperator& op, const Trace& s, const Trace& d);

}  // namespace otfwi
