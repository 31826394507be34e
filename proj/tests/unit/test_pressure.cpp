#include <doctest.h>

#include "freegeom/pressure.hpp"

#include <cmath>

using namespace freegeom;
namespace fm = freegeom::formulas;

namespace {

MatrixTuple none(int n) { return MatrixTuple::zeros(n, 0); }

bool within(double value, double expected, double se, double k = 3.0) {
  return std::abs(value - expected) <= k * se + 1e-12;
}

}  // namespace

TEST_CASE("direct pressure closed forms") {
  SUBCASE("zero formula") {
    PressureEstimate p = pressure_direct(fm::zero(), none(4), 4, 200, RngSeed{41, 0});
    CHECK(p.value == 0.0);
  }
  SUBCASE("linear, -c^2/2") {
    for (double c : {1.0, 0.5}) {
      PressureEstimate p = pressure_direct(fm::linear(0, c), none(8), 8, 2000, RngSeed{42, 0});
      CHECK(within(p.value, -0.5 * c * c, p.stderr));
    }
  }
  SUBCASE("half squared norm, log 2") {
    PressureEstimate p = pressure_direct(fm::half_norm_sq({0}), none(8), 8, 2000, RngSeed{43, 0});
    CHECK(within(p.value, std::log(2.0), p.stderr));
  }
  SUBCASE("fixed outer variables") {
    // phi(x, y) = Re tr(x) + Re tr(y) with y = 2 I: pressure -1/2 + 2.
    MatrixTuple Y = MatrixTuple::identity(4, 1) * 2.0;
    PressureEstimate p =
        pressure_direct(fm::sum({fm::linear(0), fm::linear(1)}), Y, 4, 1000, RngSeed{44, 0});
    CHECK(within(p.value, 1.5, p.stderr));
  }
  CHECK_THROWS_AS(pressure_direct(fm::linear(0), none(4), 4, 10, RngSeed{45, 0}), DomainError);
}

TEST_CASE("plain Monte Carlo agrees with the adaptive estimator on a bounded formula") {
  Formula phi = fm::sum({fm::resolvent(0), fm::resolvent_well(1, 0.5)});
  PressureOptions plain;
  plain.adaptive = false;
  PressureEstimate a = pressure_direct(phi, none(4), 4, 4000, RngSeed{46, 0});
  PressureEstimate b = pressure_direct(phi, none(4), 4, 4000, RngSeed{46, 1}, plain);
  CHECK(within(a.value, b.value, std::hypot(a.stderr, b.stderr)));
}

TEST_CASE("control composition") {
  SUBCASE("zero formula") {
    Formula f = control_composition(fm::zero(), 2, 1.0);
    Evaluator ev(f, 2);
    CHECK(ev.eval(MatrixTuple::zeros(2, 0)).value == doctest::Approx(0.0));
  }
  SUBCASE("linear formula telescopes to -c^2/2") {
    for (int k : {2, 4, 8}) {
      EvalOptions o;
      o.heat_samples = 2;
      o.quantifier.restarts = 1;  // restarts multiply across nested quantifiers
      Evaluator ev(control_composition(fm::linear(0, 1.0), k, 2.0), 1, o);
      CHECK(ev.eval(MatrixTuple::zeros(1, 1)).value == doctest::Approx(-0.5).epsilon(1e-3));
    }
  }
  SUBCASE("non-increasing in r") {
    double prev = 1e300;
    for (double r : {0.5, 1.0, 2.0}) {
      EvalOptions o;
      o.heat_samples = 8;
      Evaluator ev(control_step_T(fm::resolvent(0), 0.5, r), 2, o);
      double v = ev.eval(MatrixTuple::zeros(2, 1)).value;
      CHECK(v <= prev + 1e-6);
      prev = v;
    }
  }
}

TEST_CASE("Boue-Dupuis solver") {
  SUBCASE("zero formula") {
    ControlResult r = boue_dupuis_solve(fm::zero(), none(4), 4, 2, 1.0, 20, RngSeed{47, 0});
    CHECK(r.estimate.value == doctest::Approx(0.0));
  }
  SUBCASE("linear formula recovers -I") {
    ControlOptions o;
    o.eval_samples = 1024;
    ControlResult r = boue_dupuis_solve(fm::linear(0), none(4), 4, 2, 3.0, 150, RngSeed{48, 0}, o);
    CHECK(std::abs(r.estimate.value + 0.5) <= 0.05);
    for (const auto& stage : r.policy.a) CHECK(norm2(stage[0] + CMatrix::Identity(4, 4)) <= 0.1);
  }
}

TEST_CASE("discretization scan of the zero formula") {
  ScanOptions o;
  o.direct_samples = 100;
  o.control_iters = 5;
  ScanResult s = discretization_error_scan(fm::zero(), 4, 1.0, {2, 4}, RngSeed{49, 0}, o);
  for (const auto& row : s.rows) CHECK(row.gap == doctest::Approx(0.0));
  CHECK(s.monotone);
}

TEST_CASE("chain rule") {
  SUBCASE("zero formula") {
    ChainResult c = pressure_chain_check(fm::zero(), 1, 1, none(4), 4, 100, RngSeed{50, 0});
    CHECK(c.joint.value == 0.0);
    CHECK(c.nested.value == doctest::Approx(0.0));
  }
  SUBCASE("two linear terms give -1") {
    ChainOptions o;
    o.inner_samples = 128;
    o.pressure.pilot_samples = 200;
    ChainResult c = pressure_chain_check(fm::sum({fm::linear(0), fm::linear(1)}), 1, 1, none(4), 4, 300,
                                         RngSeed{51, 0}, o);
    CHECK(within(c.joint.value, -1.0, c.joint.stderr));
    CHECK(within(c.nested.value, -1.0, c.nested.stderr));
  }
}

TEST_CASE("truncation L2 term shrinks with n") {
  CHECK(truncation_l2(16, 2.0, 100, RngSeed{52, 0}) > truncation_l2(64, 2.0, 100, RngSeed{52, 1}));
}
