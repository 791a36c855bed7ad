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

#include <doctest.h>

#include <cmath>

#include "otfwi/scaling.hpp"
#include "support/testing.hpp"

using namespace otfwi;
using testing::Rng;

namespace {

Trace constant_trace(double value, double dt, double t_f) {
  Trace t = make_zero_trace(TimeAxis{dt, t_f});
  for (double& v : t.samples) v = value;
  return t;
}

Trace shifted(const Trace& s, double shift) {
  Trace out = s;
  for (int k = 0; k < s.nt(); ++k) {
    const double t = k * s.dt - shift;
    const double pos = t / s.dt;
    const int k0 = static_cast<int>(std::floor(pos));
    const double f = pos - k0;
    double v = 0.0;
    if (k0 >= 0 && k0 < s.nt() - 1) {
      v = s.samples[k0] + f * (s.samples[k0 + 1] - s.samples[k0]);
    }
    out.samples[k] = v;
  }
  return out;
}

}  // namespace

TEST_CASE("P1 and P3 of a constant trace are the uniform density") {
  const double t_f = 10.0;
  const Trace s = constant_trace(0.7, 0.01, t_f);
  for (MisfitKind kind : {MisfitKind::w2_p1, MisfitKind::w2_p3}) {
    const ProbabilityTrace f = apply(ScalingOperator{kind, 1e-3}, s);
    for (double v : f.density) CHECK(testing::rel_err(v, 1.0 / t_f) < 1e-12);
  }
}

TEST_CASE("P3 baseline floor is exactly eps/(1+t_f*eps) where s vanishes") {
  const double t_f = 8.0;
  const double eps = 1e-3;
  Trace s = make_zero_trace(TimeAxis{0.01, t_f});
  for (int k = 300; k < 500; ++k) s.samples[k] = std::sin(0.13 * (k - 300));
  const ProbabilityTrace f = apply(ScalingOperator{MisfitKind::w2_p3, eps}, s);
  const double floor = eps / (1.0 + t_f * eps);
  CHECK(f.density[0] == floor);
  CHECK(f.density[10] == floor);
  CHECK(f.density[700] == floor);
  CHECK(f.density[400] > floor);
}

TEST_CASE("degenerate traces raise for P1 and P3 but not P2") {
  const Trace z = make_zero_trace(TimeAxis{0.01, 5.0});
  CHECK_THROWS_AS(apply(ScalingOperator{MisfitKind::w2_p1, 1e-3}, z), degenerate_trace_error);
  CHECK_THROWS_AS(apply(ScalingOperator{MisfitKind::w2_p3, 1e-3}, z), degenerate_trace_error);
  const ProbabilityTrace f = apply(ScalingOperator{MisfitKind::w2_p2, 1e-3}, z);
  for (double v : f.density) CHECK(testing::rel_err(v, 1.0 / 5.0) < 1e-12);
}

TEST_CASE("operator validation") {
  const ScalingOperator zero_eps{MisfitKind::w2_p3, 0.0};
  CHECK_THROWS_AS(zero_eps.validate(), config_error);
  const ScalingOperator neg_eps{MisfitKind::w2_p2, -1e-3};
  CHECK_THROWS_AS(neg_eps.validate(), config_error);
  const Trace s = constant_trace(1.0, 0.01, 2.0);
  const ScalingOperator l2op{MisfitKind::l2, 0.0};
  CHECK_THROWS_AS(apply(l2op, s), config_error);
}

TEST_CASE("apply output is a unit-mass nonnegative density") {
  Rng rng(11);
  for (MisfitKind kind : {MisfitKind::w2_p1, MisfitKind::w2_p2, MisfitKind::w2_p3}) {
    for (int rep = 0; rep < 5; ++rep) {
      const Trace s = testing::random_smooth_trace(rng, 0.01, 12.0);
      const ProbabilityTrace f = apply(ScalingOperator{kind, 1e-3}, s);
      f.validate();  // nonneg + unit trapezoid mass within 1e-12
      CHECK(testing::rel_err(f.mass(), 1.0) < 1e-12);
    }
  }
}

TEST_CASE("P1 and P3 are invariant under trace scaling") {
  Rng rng(13);
  const Trace s = testing::random_smooth_trace(rng, 0.01, 10.0);
  for (MisfitKind kind : {MisfitKind::w2_p1, MisfitKind::w2_p3}) {
    const ScalingOperator op{kind, 1e-3};
    const ProbabilityTrace base = apply(op, s);
    for (double alpha : {-3.7, 0.02, 11.0}) {
      Trace scaled = s;
      for (double& v : scaled.samples) v *= alpha;
      const ProbabilityTrace f = apply(op, scaled);
      for (int k = 0; k < f.nt(); ++k) {
        CHECK(testing::rel_err(f.density[k], base.density[k]) < 1e-12);
      }
    }
  }
}

TEST_CASE("adjoint_apply is the exact discrete adjoint of the operator Jacobian") {
  Rng rng(17);
  const double dt = 0.01, t_f = 10.0;
  for (MisfitKind kind : {MisfitKind::w2_p1, MisfitKind::w2_p2, MisfitKind::w2_p3}) {
    const ScalingOperator op{kind, 1e-3};
    const Trace s = testing::random_smooth_trace(rng, dt, t_f);
    const Trace ds = testing::random_smooth_trace(rng, dt, t_f);
    std::vector<double> v(static_cast<size_t>(s.nt()));
    for (double& x : v) x = rng.uniform(-1, 1);

    // <J ds, v> via finite differences of apply (J is linear to O(h)).
    const double h = 1e-7;
    Trace sp = s, sm = s;
    for (int k = 0; k < s.nt(); ++k) {
      sp.samples[k] += h * ds.samples[k];
      sm.samples[k] -= h * ds.samples[k];
    }
    const ProbabilityTrace fp = apply(op, sp);
    const ProbabilityTrace fm = apply(op, sm);
    std::vector<double> jds(static_cast<size_t>(s.nt()));
    for (int k = 0; k < s.nt(); ++k) jds[k] = (fp.density[k] - fm.density[k]) / (2.0 * h);
    const double lhs = trapezoid_product(jds, v, dt);

    const Trace q = adjoint_apply(op, s, v);
    const double rhs = trapezoid_product(q.samples, ds.samples, dt);
    CHECK(testing::rel_err(lhs, rhs) < 1e-7);
  }
}

TEST_CASE("adjoint source vanishes for identical traces") {
  Rng rng(19);
  const Trace s = testing::random_smooth_trace(rng, 0.01, 10.0);
  for (MisfitKind kind : {MisfitKind::w2_p1, MisfitKind::w2_p2, MisfitKind::w2_p3}) {
    const ScalingOperator op{kind, 1e-3};
    const MisfitDetail d = misfit_detail(op, s, s);
    CHECK(d.value < 1e-12);
    const Trace q = adjoint_apply(op, s, d.grad_f);
    CHECK(testing::max_abs(q.samples) < 1e-10 * testing::max_abs(s.samples));
  }
}

TEST_CASE("full-chain gradient check against central finite differences") {
  Rng rng(23);
  const double dt = 0.005, t_f = 10.0;
  for (MisfitKind kind : {MisfitKind::w2_p1, MisfitKind::w2_p2, MisfitKind::w2_p3}) {
    const ScalingOperator op{kind, 1e-3};
    for (int rep = 0; rep < 3; ++rep) {
      const Trace s = testing::random_smooth_trace(rng, dt, t_f);
      const Trace d = testing::random_smooth_trace(rng, dt, t_f);
      const Trace ds = testing::random_smooth_trace(rng, dt, t_f);

      const MisfitDetail detail = misfit_detail(op, s, d);
      const Trace q = adjoint_apply(op, s, detail.grad_f);
      const double predicted = trapezoid_product(q.samples, ds.samples, dt);

      const double h = 1e-6 * testing::max_abs(s.samples) / testing::max_abs(ds.samples);
      Trace sp = s, sm = s;
      for (int k = 0; k < s.nt(); ++k) {
        sp.samples[k] += h * ds.samples[k];
        sm.samples[k] -= h * ds.samples[k];
      }
      const double fd = (misfit(op, sp, d) - misfit(op, sm, d)) / (2.0 * h);
      CHECK(testing::rel_err(fd, predicted) < 1e-4);
    }
  }
}

TEST_CASE("L2 adjoint source is the residual") {
  Rng rng(29);
  const Trace d = testing::random_smooth_trace(rng, 0.01, 8.0);
  Trace s = d;
  for (double& v : s.samples) v *= 2.0;
  const Trace q = l2_adjoint_source(s, d);
  for (int k = 0; k < d.nt(); ++k) CHECK(q.samples[k] == d.samples[k]);
}

TEST_CASE("misfit of identical traces vanishes for every kind") {
  Rng rng(31);
  const Trace s = testing::random_smooth_trace(rng, 0.01, 9.0);
  for (MisfitKind kind : {MisfitKind::l2, MisfitKind::w2_p1, MisfitKind::w2_p2, MisfitKind::w2_p3}) {
    CHECK(misfit(ScalingOperator{kind, 1e-3}, s, s) < 1e-12);
  }
}

TEST_CASE("P3 misfit grows monotonically with the shift magnitude") {
  Rng rng(37);
  Trace s = make_zero_trace(TimeAxis{0.01, 12.0});
  // A Ricker-like pulse well inside the window.
  for (int k = 0; k < s.nt(); ++k) {
    const double t = k * 0.01 - 5.0;
    const double a = 3.14159 * 3.14159 * 2.0 * 2.0 * t * t;
    s.samples[k] = (1.0 - 2.0 * a) * std::exp(-a);
  }
  const ScalingOperator op{MisfitKind::w2_p3, 1e-3};
  double prev_neg = -1.0, prev_pos = -1.0;
  for (int step = 0; step <= 10; ++step) {
    const double shift = 0.1 * step;
    const double chi_pos = misfit(op, shifted(s, shift), s);
    const double chi_neg = misfit(op, shifted(s, -shift), s);
    if (step > 0) {
      CHECK(chi_pos > prev_pos);
      CHECK(chi_neg > prev_neg);
    }
    prev_pos = chi_pos;
    prev_neg = chi_neg;
  }
}

TEST_CASE("P2 baseline floors differ between traces of unequal energy, P3 floors agree") {
  const double t_f = 10.0, eps = 1e-3;
  Trace s = make_zero_trace(TimeAxis{0.01, t_f});
  Trace d = make_zero_trace(TimeAxis{0.01, t_f});
  for (int k = 200; k < 400; ++k) {
    s.samples[k] = std::sin(0.2 * (k - 200));
    d.samples[k] = 2.5 * std::sin(0.2 * (k - 200));
  }
  const ProbabilityTrace p2s = apply(ScalingOperator{MisfitKind::w2_p2, eps}, s);
  const ProbabilityTrace p2d = apply(ScalingOperator{MisfitKind::w2_p2, eps}, d);
  CHECK(p2s.density[0] != p2d.density[0]);  // eps/|s^2+eps| vs eps/|d^2+eps|

  const ProbabilityTrace p3s = apply(ScalingOperator{MisfitKind::w2_p3, eps}, s);
  const ProbabilityTrace p3d = apply(ScalingOperator{MisfitKind::w2_p3, eps}, d);
  CHECK(p3s.density[0] == p3d.density[0]);
}

TEST_CASE("misfit kind parsing round-trips") {
  for (const char* name : {"l2", "w2-p1", "w2-p2", "w2-p3"}) {
    CHECK(to_string(misfit_kind_from_string(name)) == name);
  }
  CHECK_THROWS_AS(misfit_kind_from_string("huber"), config_error);
}
