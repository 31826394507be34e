#include <doctest.h>

#include "freegeom/entropy.hpp"
#include "freegeom/rng.hpp"
#include "freegeom/stats.hpp"
#include "freegeom/transport.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace freegeom;

namespace {

double max_abs_diff(const GridFunction& a, const std::function<double(double)>& f) {
  double m = 0.0;
  for (int i = 0; i < a.points(); ++i) m = std::max(m, std::abs(a.value(i) - f(a.x(i))));
  return m;
}

SpectralMeasure random_atoms(Rng& rng, int k) {
  std::vector<double> loc, w;
  for (int i = 0; i < k; ++i) {
    loc.push_back(4.0 * rng.uniform() - 2.0);
    w.push_back(0.1 + rng.uniform());
  }
  double s = 0.0;
  for (double x : w) s += x;
  for (double& x : w) x /= s;
  return SpectralMeasure::atoms(loc, w);
}

}  // namespace

TEST_CASE("spectral measures") {
  SpectralMeasure a = SpectralMeasure::atoms({1.0, -1.0, 1.0}, {0.25, 0.5, 0.25});
  CHECK(a.cells().size() == 2);
  CHECK(a.mean() == doctest::Approx(0.0));
  CHECK(a.variance() == doctest::Approx(1.0));
  CHECK(a.quantile(0.25) == doctest::Approx(-1.0));
  CHECK(a.quantile(0.75) == doctest::Approx(1.0));
  CHECK_THROWS_AS(SpectralMeasure::atoms({0.0}, {0.5}), DomainError);

  SpectralMeasure s = SpectralMeasure::semicircle(400);
  CHECK(s.mean() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.variance() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(s.cdf(0.0) == doctest::Approx(0.5));

  for (const SpectralMeasure& m : {a, s, SpectralMeasure::pieces({{0.0, 1.0, 0.5}, {2.0, 2.0, 0.5}})}) {
    SpectralMeasure back = SpectralMeasure::from_csv(m.to_csv());
    CHECK(back.kind() == m.kind());
    CHECK(wasserstein_1d(back, m).distance < 1e-9);
  }
}

TEST_CASE("Legendre transform") {
  SUBCASE("half square is self-dual") {
    GridFunction f = GridFunction::sample([](double x) { return 0.5 * x * x; }, -3.0, 3.0, 601);
    GridFunction g = legendre(f, -2.0, 2.0, 401);
    CHECK(max_abs_diff(g, [](double y) { return 0.5 * y * y; }) < 1e-6);
  }
  SUBCASE("absolute value") {
    GridFunction f = GridFunction::sample([](double x) { return std::abs(x); }, -5.0, 5.0, 1001);
    GridFunction g = legendre(f, -1.0, 1.0, 201);
    CHECK(max_abs_diff(g, [](double) { return 0.0; }) < 1e-12);
    GridFunction wide = legendre(f, -2.0, 2.0, 401);
    CHECK(wide(1.5) == doctest::Approx(2.5));  // grows like 5 (|y| - 1) on the truncated grid
  }
  SUBCASE("biconjugation of a convex sample") {
    auto fx = [](double x) { return 0.25 * x * x * x * x + x + std::cosh(0.5 * x); };
    GridFunction f = GridFunction::sample(fx, -2.0, 2.0, 801);
    GridFunction g = legendre(f);
    GridFunction ff = legendre(g, f.left(), f.right(), f.points());
    CHECK(max_abs_diff(ff, fx) < 1e-4);
  }
}

TEST_CASE("inf-convolution") {
  GridFunction zero = GridFunction::sample([](double) { return 0.0; }, -1.0, 1.0, 101);
  CHECK(max_abs_diff(inf_convolution(2.0, zero), [](double) { return 0.0; }) == 0.0);

  GridFunction q = GridFunction::sample([](double x) { return 0.5 * x * x; }, -2.0, 2.0, 4001);
  GridFunction env = inf_convolution(1.0, q);
  CHECK(max_abs_diff(env, [](double x) { return 0.25 * x * x; }) < 1e-6);
  CHECK(env.semiconcave.value() == 1.0);

  SUBCASE("Moreau duality") {
    const double c = 2.0;
    auto fx = [](double x) { return 0.25 * x * x * x * x; };
    GridFunction f = GridFunction::sample(fx, -3.0, 3.0, 1201);
    GridFunction lhs = legendre(inf_convolution(c, f), -1.0, 1.0, 201);
    GridFunction fs = legendre(f, -1.0, 1.0, 201);
    double m = 0.0;
    for (int j = 0; j < lhs.points(); ++j) {
      double y = lhs.x(j);
      m = std::max(m, std::abs(lhs.value(j) - (0.5 * y * y / c + fs.value(j))));
    }
    CHECK(m < 1e-4);
  }
}

TEST_CASE("semiconvex-semiconcave regularization") {
  const double r = 1.0, R = 2.0;
  SUBCASE("affine functions shift by t a^2 / 2") {
    const double a = 0.8, b = -0.3, t = 0.05;
    GridFunction f = GridFunction::sample([&](double z) { return a * z + b; }, -R, R, 801);
    GridFunction psi = regularize_scsc(f, t, r, R);
    // Interior points whose maximizer x + t a stays inside the window.
    for (int i = 0; i < psi.points(); ++i) {
      double x = psi.x(i);
      if (std::abs(x + t * a) > r) continue;
      CHECK(psi.value(i) == doctest::Approx(a * x + b - 0.5 * t * a * a).epsilon(1e-9));
    }
  }
  SUBCASE("second differences within +-1/t on random Lipschitz functions") {
    Rng rng(RngSeed{71, 0});
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> v(401);
      v[0] = 0.0;
      for (size_t i = 1; i < v.size(); ++i) v[i] = v[i - 1] + 0.01 * (2.0 * rng.uniform() - 1.0);
      GridFunction f(-R, R, v);
      for (double t : {0.05, 0.2}) {
        GridFunction psi = regularize_scsc(f, t, r, R);
        CHECK(psi.max_second_difference() <= 1.0 / t + 1e-6);
        CHECK(psi.min_second_difference() >= -1.0 / t - 1e-6);
      }
    }
  }
  SUBCASE("small t approximates a smooth function") {
    auto fx = [](double z) { return std::sin(2.0 * z) + 0.3 * z * z; };
    GridFunction f = GridFunction::sample(fx, -R, R, 1601);
    GridFunction psi = regularize_scsc(f, 0.01, r, R);
    CHECK(max_abs_diff(psi, fx) <= 0.05);
  }
  CHECK_THROWS_AS(regularize_scsc(GridFunction::sample([](double) { return 0.0; }, -1.0, 1.0, 21), 0.1, 1.0, 2.0),
                  DomainError);
}

TEST_CASE("Wasserstein distance") {
  SpectralMeasure g = SpectralMeasure::gaussian(0.0, 1.0, -6.0, 6.0, 200);
  CHECK(wasserstein_1d(g, g).distance == doctest::Approx(0.0));
  CHECK(wasserstein_1d(SpectralMeasure::atoms({0.3}, {1.0}), SpectralMeasure::atoms({-1.2}, {1.0})).distance ==
        doctest::Approx(1.5));
  CHECK(wasserstein_1d(g, g.translated(0.7)).distance == doctest::Approx(0.7).epsilon(1e-9));

  Rng rng(RngSeed{72, 0});
  for (int trial = 0; trial < 5; ++trial) {
    SpectralMeasure mu = random_atoms(rng, 5), nu = random_atoms(rng, 5);
    std::vector<double> x, p, y, q;
    for (const Cell& c : mu.cells()) x.push_back(c.a), p.push_back(c.mass);
    for (const Cell& c : nu.cells()) y.push_back(c.a), q.push_back(c.mass);
    double lp = oracle::transport_lp_cost(x, p, y, q);
    WassersteinResult w = wasserstein_1d(mu, nu);
    CHECK(std::abs(w.distance * w.distance - lp) <= 1e-8);
    CHECK(w.coupling.is_monotone());
  }
}

TEST_CASE("displacement interpolation") {
  SpectralMeasure g0 = SpectralMeasure::gaussian(0.0, 1.0, -8.0, 8.0, 800);
  SpectralMeasure g1 = SpectralMeasure::gaussian(0.0, 2.0, -16.0, 16.0, 800);
  Coupling1D c = monotone_coupling(g0, g1);
  CHECK(wasserstein_1d(displacement_interpolate(c, 0.0), g0).distance < 1e-12);
  CHECK(wasserstein_1d(displacement_interpolate(c, 1.0), g1).distance < 1e-12);

  const double W = wasserstein_1d(g0, g1).distance;
  const std::vector<double> ts{0.0, 0.2, 0.5, 0.7, 1.0};
  for (double s : ts)
    for (double t : ts) {
      double d = wasserstein_1d(displacement_interpolate(c, s), displacement_interpolate(c, t)).distance;
      CHECK(std::abs(d - std::abs(t - s) * W) <= 1e-6);
    }

  for (double t : {0.25, 0.5, 0.75}) {
    SpectralMeasure mt = displacement_interpolate(c, t);
    const double sd = 1.0 + t;
    for (double x : {-2.0, -0.5, 0.0, 1.0, 2.5}) CHECK(std::abs(mt.cdf(x) - oracle::normal_cdf(x / sd)) <= 1e-3);
  }
}

TEST_CASE("Monge-Kantorovich dual pair") {
  SUBCASE("identical measures give the half square") {
    SpectralMeasure g = SpectralMeasure::gaussian(0.0, 1.0, -5.0, 5.0, 200);
    MkDualResult r = mk_dual_pair_1d(g, g);
    CHECK(r.max_violation <= 1e-6);
    CHECK(r.max_equality_gap <= 1e-4);
    // phi0 is piecewise linear on half-cell nodes.
    for (double x : {-2.0, 0.0, 1.5}) CHECK(std::abs(r.pair.phi0_slope(x) - x) <= 0.5 * g.spacing());
  }
  SUBCASE("translation recovers the shift map") {
    SpectralMeasure g = SpectralMeasure::gaussian(0.0, 1.0, -5.0, 5.0, 200);
    MkDualResult r = mk_dual_pair_1d(g, g.translated(1.0));
    for (double x : {-2.0, 0.3, 2.0}) CHECK(std::abs(r.pair.phi0_slope(x) - (x + 1.0)) <= 0.5 * g.spacing());
    CHECK(r.max_equality_gap <= 1e-4);
  }
  SUBCASE("random 20-atom pairs") {
    Rng rng(RngSeed{73, 0});
    for (int trial = 0; trial < 5; ++trial) {
      MkDualResult r = mk_dual_pair_1d(random_atoms(rng, 20), random_atoms(rng, 20));
      CHECK(r.max_violation <= 1e-6);
      CHECK(r.max_equality_gap <= 1e-4);
    }
  }
}

TEST_CASE("geodesic concavity") {
  const std::vector<double> ts{0.0, 0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9, 1.0};
  SUBCASE("constant geodesic") {
    SpectralMeasure g = SpectralMeasure::gaussian(0.0, 1.0, -6.0, 6.0, 300);
    GeodesicReport r = geodesic_concavity_check(g, g, EntropyFunctional::Differential, ts);
    for (double h : r.entropy) CHECK(h == doctest::Approx(r.entropy.front()).epsilon(1e-12));
    CHECK(r.pass());
  }
  SUBCASE("Gaussian dilation, differential entropy") {
    SpectralMeasure g0 = SpectralMeasure::gaussian(0.0, 1.0, -8.0, 8.0, 800);
    SpectralMeasure g1 = SpectralMeasure::gaussian(0.0, 2.0, -16.0, 16.0, 800);
    GeodesicReport r = geodesic_concavity_check(g0, g1, EntropyFunctional::Differential, ts);
    for (size_t i = 0; i < ts.size(); ++i)
      CHECK(std::abs(r.entropy[i] - r.entropy[0] - std::log1p(ts[i])) <= 1e-3);
    CHECK(r.pass());
  }
  SUBCASE("semicircle dilation, log-energy entropy") {
    SpectralMeasure s0 = SpectralMeasure::semicircle(256);
    SpectralMeasure s1 = SpectralMeasure::semicircle(256, 0.0, 4.0);
    GeodesicReport r = geodesic_concavity_check(s0, s1, EntropyFunctional::LogEnergy, ts);
    for (size_t i = 0; i < ts.size(); ++i)
      CHECK(std::abs(r.entropy[i] - r.entropy[0] - std::log1p(ts[i])) <= 1e-6);
    CHECK(r.pass());
  }
}

TEST_CASE("heat flow and EVI") {
  SpectralMeasure g = SpectralMeasure::gaussian(0.0, 1.0, -12.0, 12.0, 2048);
  SUBCASE("heat flow of a Gaussian matches the closed form") {
    for (double t : {0.25, 1.0}) {
      SpectralMeasure h = heat_flow(g, t);
      CHECK(h.variance() == doctest::Approx(1.0 + t).epsilon(1e-3));
      CHECK(std::abs(differential_entropy(h) - 0.5 * std::log(2.0 * M_PI * M_E * (1.0 + t))) <= 1e-3);
    }
  }
  SUBCASE("Gaussian closed-form instance") {
    EviReport r = evi_check_1d(g, g, {0.0, 1.0});
    REQUIRE(r.rows.size() == 1);
    CHECK(std::abs(r.rows[0].lhs - 0.5 * std::pow(std::sqrt(2.0) - 1.0, 2)) <= 1e-3);
    CHECK(std::abs(r.rows[0].rhs - 0.5 * std::log(2.0)) <= 1e-3);
    CHECK(r.pass());
    CHECK(r.sharp_pass());
  }
  SUBCASE("coincident times") {
    EviReport r = evi_check_1d(g, g, {0.5, 0.5});
    CHECK(r.rows.empty());
    CHECK(r.pass());
  }
}
