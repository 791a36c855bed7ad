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

#include "otfwi/scaling.hpp"

#include <cmath>

namespace otfwi {

namespace {

constexpr double kDegenerateMass = 1e-280;

std::vector<double> squared(const Trace& s) {
  std::vector<double> v(s.samples.size());
  for (size_t i = 0; i < v.size(); ++i) v[i] = s.samples[i] * s.samples[i];
  return v;
}

double squared_mass(const Trace& s) { return trapezoid(squared(s), s.dt); }

void check_axes(const Trace& a, const Trace& b, const char* who) {
  if (a.nt() != b.nt() || a.dt != b.dt) {
    throw config_error(std::string(who) + ": traces must share the time axis");
  }
}

}  // namespace

MisfitKind misfit_kind_from_string(const std::string& name) {
  if (name == "l2") return MisfitKind::l2;
  if (name == "w2-p1") return MisfitKind::w2_p1;
  if (name == "w2-p2") return MisfitKind::w2_p2;
  if (name == "w2-p3") return MisfitKind::w2_p3;
  throw config_error("unknown misfit kind '" + name + "' (expected l2|w2-p1|w2-p2|w2-p3)");
}

std::string to_string(MisfitKind kind) {
  switch (kind) {
    case MisfitKind::l2: return "l2";
    case MisfitKind::w2_p1: return "w2-p1";
    case MisfitKind::w2_p2: return "w2-p2";
    case MisfitKind::w2_p3: return "w2-p3";
  }
  return "unknown";
}

bool is_transport_kind(MisfitKind kind) { return kind != MisfitKind::l2; }

void ScalingOperator::validate() const {
  if ((kind == MisfitKind::w2_p2 || kind == MisfitKind::w2_p3) && !(epsilon > 0.0)) {
    throw config_error("P2/P3 require epsilon > 0");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw config_error("epsilon must be finite and nonnegative");
  }
}

ProbabilityTrace apply(const ScalingOperator& op, const Trace& s) {
  op.validate();
  if (s.nt() < 2) throw config_error("apply: trace too short");
  const double tf = s.t_f;
  switch (op.kind) {
    case MisfitKind::l2:
      throw config_error("the L2 baseline has no probability-trace form");
    case MisfitKind::w2_p1: {
      std::vector<double> v = squared(s);
      const double n = trapezoid(v, s.dt);
      if (!(n > kDegenerateMass)) {
        throw degenerate_trace_error("P1 on a trace with vanishing squared mass");
      }
      for (double& x : v) x /= n;
      ProbabilityTrace p{std::move(v), s.dt, tf};
      p.validate();
      return p;
    }
    case MisfitKind::w2_p2: {
      std::vector<double> v = squared(s);
      const double n = trapezoid(v, s.dt) + op.epsilon * tf;
      for (double& x : v) x = (x + op.epsilon) / n;
      ProbabilityTrace p{std::move(v), s.dt, tf};
      p.validate();
      return p;
    }
    case MisfitKind::w2_p3: {
      std::vector<double> v = squared(s);
      const double n = trapezoid(v, s.dt);
      if (!(n > kDegenerateMass)) {
        throw degenerate_trace_error("P3 on a trace with vanishing squared mass");
      }
      const double denom = 1.0 + tf * op.epsilon;
      for (double& x : v) x = (x / n + op.epsilon) / denom;
      ProbabilityTrace p{std::move(v), s.dt, tf};
      p.validate();
      return p;
    }
  }
  throw config_error("apply: unreachable");
}

Trace adjoint_apply(const ScalingOperator& op, const Trace& s, const std::vector<double>& u) {
  op.validate();
  if (static_cast<int>(u.size()) != s.nt()) {
    throw config_error("adjoint_apply: outer gradient axis mismatch");
  }
  Trace q = s;
  switch (op.kind) {
    case MisfitKind::l2:
      throw config_error("adjoint_apply is not defined for the L2 baseline; use l2_adjoint_source");
    case MisfitKind::w2_p1: {
      const double n = squared_mass(s);
      if (!(n > kDegenerateMass)) {
        throw degenerate_trace_error("P1 adjoint on a trace with vanishing squared mass");
      }
      std::vector<double> sq = squared(s);
      const double uf = trapezoid_product(u, sq, s.dt) / n;
      for (int k = 0; k < s.nt(); ++k) {
        q.samples[k] = (2.0 * s.samples[k] / n) * (u[k] - uf);
      }
      return q;
    }
    case MisfitKind::w2_p2: {
      std::vector<double> sq = squared(s);
      const double n2 = trapezoid(sq, s.dt) + op.epsilon * s.t_f;
      std::vector<double> f2(sq.size());
      for (size_t i = 0; i < sq.size(); ++i) f2[i] = (sq[i] + op.epsilon) / n2;
      const double uf = trapezoid_product(u, f2, s.dt);
      for (int k = 0; k < s.nt(); ++k) {
        q.samples[k] = (2.0 * s.samples[k] / n2) * (u[k] - uf);
      }
      return q;
    }
    case MisfitKind::w2_p3: {
      const double n = squared_mass(s);
      if (!(n > kDegenerateMass)) {
        throw degenerate_trace_error("P3 adjoint on a trace with vanishing squared mass");
      }
      std::vector<double> sq = squared(s);
      const double uf = trapezoid_product(u, sq, s.dt) / n;
      const double denom = n * (1.0 + s.t_f * op.epsilon);
      for (int k = 0; k < s.nt(); ++k) {
        q.samples[k] = (2.0 * s.samples[k] / denom) * (u[k] - uf);
      }
      return q;
    }
  }
  throw config_error("adjoint_apply: unreachable");
}

Trace l2_adjoint_source(const Trace& s, const Trace& d) {
  check_axes(s, d, "l2_adjoint_source");
  Trace q = s;
  for (int k = 0; k < s.nt(); ++k) q.samples[k] = s.samples[k] - d.samples[k];
  return q;
}

double misfit(const ScalingOperator& op, const Trace& s, const Trace& d) {
  check_axes(s, d, "misfit");
  if (op.kind == MisfitKind::l2) {
    std::vector<double> r(s.samples.size());
    for (size_t i = 0; i < r.size(); ++i) {
      const double e = s.samples[i] - d.samples[i];
      r[i] = e * e;
    }
    return 0.5 * trapezoid(r, s.dt);
  }
  return w2_squared(apply(op, s), apply(op, d)).value;
}

MisfitDetail misfit_detail(const ScalingOperator& op, const Trace& s, const Trace& d) {
  check_axes(s, d, "misfit_detail");
  if (!is_transport_kind(op.kind)) {
    throw config_error("misfit_detail requires a transport misfit kind");
  }
  MisfitDetail out;
  out.fs = apply(op, s);
  out.fd = apply(op, d);
  W2Result w2 = w2_squared(out.fs, out.fd);
  out.value = w2.value;
  out.map = std::move(w2.map);
  out.outer = outer_gradient(out.fs, out.map);
  out.grad_f = w2_gradient_f(out.fs, out.fd);
  return out;
}

}  // namespace otfwi
