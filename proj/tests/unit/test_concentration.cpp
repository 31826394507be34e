#include <doctest.h>

#include "freegeom/concentration.hpp"

#include <cmath>

using namespace freegeom;
namespace fm = freegeom::formulas;
using L = FreeLetter;

TEST_CASE("Herbst tails") {
  SUBCASE("constant formula") {
    TailReport r = herbst_check(fm::constant(1.0), 8, 1, {0.1, 0.5}, 200, RngSeed{81, 0});
    for (double t : r.tail) CHECK(t == 0.0);
    CHECK(r.all_pass());
  }
  SUBCASE("linear trace at n = 16") {
    TailReport r = herbst_check(fm::linear(0), 16, 1, {0.0, 0.05, 0.1, 0.5}, 10000, RngSeed{82, 0});
    CHECK(r.lipschitz == doctest::Approx(1.0));
    CHECK(r.bound[0] == doctest::Approx(2.0));
    CHECK(r.bound[3] == doctest::Approx(2.0 * std::exp(-32.0)));
    CHECK(r.tail[3] == 0.0);
    CHECK(r.all_pass());
    CHECK(r.rows().size() == 4);
  }
  SUBCASE("bounded resolvent trace with two coordinates") {
    Formula f = fm::sum({fm::resolvent(0), fm::resolvent_well(1, 0.5)});
    TailReport r = herbst_check(f, 16, 2, {0.02, 0.05, 0.1}, 2000, RngSeed{83, 0});
    CHECK(r.all_pass());
  }
  CHECK_THROWS_AS(herbst_check(Formula::sup_ball(1.0, 1, fm::bilinear(0, 1)), 4, 1, {0.1}, 10, RngSeed{84, 0}),
                  DomainError);
  CHECK_THROWS_AS(herbst_check(fm::linear(2), 4, 1, {0.1}, 10, RngSeed{84, 1}), DomainError);
}

TEST_CASE("Poincare variance") {
  CHECK(poincare_check(fm::constant(2.0), 8, 1, 100, RngSeed{85, 0}).variance == 0.0);

  PoincareReport lin = poincare_check(fm::linear(0), 16, 1, 5000, RngSeed{86, 0});
  CHECK(std::abs(lin.variance - 1.0 / 256.0) <= 3.0 * lin.variance_stderr);
  CHECK(lin.pass);

  PoincareReport a = poincare_check(fm::resolvent(0), 8, 1, 4000, RngSeed{87, 0});
  PoincareReport b = poincare_check(fm::resolvent(0), 32, 1, 4000, RngSeed{87, 1});
  CHECK(a.pass);
  CHECK(b.pass);
  const double ratio = a.variance / b.variance;
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("asymptotic freeness") {
  SUBCASE("s^2 and s^4") {
    FreenessReport r2 = freeness_check({L::s(0), L::s(0)}, nullptr, {16, 64}, 100, RngSeed{88, 0});
    CHECK(r2.rows.back().limit == doctest::Approx(1.0));
    CHECK(std::abs(r2.rows.back().mean - 1.0) <= 0.05);
    CHECK(r2.pass());
    FreenessReport r4 = freeness_check({L::s(0), L::s(0), L::s(0), L::s(0)}, nullptr, {16, 64}, 100, RngSeed{89, 0});
    CHECK(r4.rows.back().limit == doctest::Approx(2.0));
    CHECK(std::abs(r4.rows.back().mean - 2.0) <= 0.1);
  }
  SUBCASE("d s d s with a balanced sign diagonal") {
    DeterministicFamily d = [](int n) {
      CMatrix m = CMatrix::Zero(n, n);
      for (int i = 0; i < n; ++i) m(i, i) = i % 2 ? -1.0 : 1.0;
      return std::vector<CMatrix>{m};
    };
    FreenessReport r = freeness_check({L::d(0), L::s(0), L::d(0), L::s(0)}, d, {16, 64}, 100, RngSeed{90, 0});
    CHECK(r.rows.back().limit == doctest::Approx(0.0));
    CHECK(std::abs(r.rows.back().gap) <= 0.05);
  }
}

TEST_CASE("GUE norm convergence") {
  NormReport r = norm_convergence_check({16, 64}, 100, RngSeed{91, 0});
  CHECK(r.rows.size() == 2);
  CHECK(r.rows.back().median_norm == doctest::Approx(2.0).epsilon(0.1));
  CHECK(r.rows.back().truncation_l2 < r.rows.front().truncation_l2);
}

TEST_CASE("CSV rows") {
  std::string csv = concentration_csv({{16, CheckRow{"poincare_variance", 0.5, 0.0, 1.0, true}}});
  CHECK(csv == "n,statistic,value,bound,pass\n16,poincare_variance,0.5,1,1\n");
}
