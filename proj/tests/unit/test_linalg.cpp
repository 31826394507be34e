#include <doctest.h>

#include "freegeom/ensembles.hpp"
#include "freegeom/linalg.hpp"

#include <cmath>

using namespace freegeom;

namespace {

CMatrix random_hermitian(int n, Rng& rng, double scale = 1.0) {
  return sample_gue(n, rng).matrix() * scale;
}

}  // namespace

TEST_CASE("normalized trace and inner product") {
  CHECK(tr_n(CMatrix::Identity(4, 4)).real() == doctest::Approx(1.0));
  CHECK(normalized_inner(CMatrix::Identity(4, 4), CMatrix::Identity(4, 4)).real() == doctest::Approx(1.0));
  CHECK(std::abs(normalized_inner(CMatrix::Zero(3, 3), CMatrix::Random(3, 3))) == 0.0);

  Rng rng(RngSeed{11, 0});
  CMatrix a = sample_ginibre(2, rng), b = sample_ginibre(2, rng);
  cplx brute = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) brute += std::conj(a(i, j)) * b(i, j);
  brute /= 2.0;
  cplx got = normalized_inner(a, b);
  CHECK(std::abs(got - brute) < 1e-12);
}

TEST_CASE("trace norm and operator norm of a diagonal matrix") {
  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 3.0;
  d(1, 1) = -1.0;
  d(2, 2) = cplx(0.0, 2.0);
  CHECK(norm1(d) == doctest::Approx(2.0));
  CHECK(op_norm(d) == doctest::Approx(3.0));
  CHECK(norm2_sq(d) == doctest::Approx(14.0 / 3.0));
}

TEST_CASE("HermitianMatrix rejects non-Hermitian input") {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(HermitianMatrix{m}, DomainError);
}

TEST_CASE("truncate_FR") {
  SUBCASE("inside the ball is unchanged") {
    CMatrix m = CMatrix::Identity(3, 3) * 0.5;
    CHECK((truncate_FR(HermitianMatrix(m), 1.0).matrix() - m).norm() < 1e-14);
  }
  SUBCASE("scalar clamp") {
    CMatrix m(1, 1);
    m(0, 0) = 5.0;
    CHECK(truncate_FR(HermitianMatrix(m), 2.0).matrix()(0, 0).real() == doctest::Approx(2.0));
  }
  SUBCASE("trace-norm inequality, closest point and idempotence on random draws") {
    Rng rng(RngSeed{12, 0});
    const double R = 1.0;
    for (int trial = 0; trial < 200; ++trial) {
      HermitianMatrix x(random_hermitian(6, rng, 1.5));
      CMatrix fx = truncate_FR(x, R).matrix();
      CHECK(op_norm(fx) <= R + 1e-12);
      CHECK(2.0 * R * norm1(x.matrix() - fx) <= norm2_sq(x.matrix()) - norm2_sq(fx) + 1e-12);
      CMatrix y = project_op_ball(sample_ginibre(6, rng), R);
      CHECK(norm2(x.matrix() - fx) <= norm2(x.matrix() - y) + 1e-12);
      CHECK((truncate_FR(HermitianMatrix::symmetrized(fx), R).matrix() - fx).norm() < 1e-12);
    }
  }
}

TEST_CASE("tuple_truncate clamps real and imaginary parts") {
  CMatrix z(1, 1);
  z(0, 0) = cplx(3.0, 4.0);
  CMatrix t = truncate_parts(z, 2.0);
  CHECK(t(0, 0).real() == doctest::Approx(2.0));
  CHECK(t(0, 0).imag() == doctest::Approx(2.0));

  MatrixTuple small = MatrixTuple::identity(3, 2) * 0.5;
  MatrixTuple same = tuple_truncate(small, 1.0);
  CHECK(norm2(same - small) < 1e-14);
}

TEST_CASE("tuple truncation error shrinks with n") {
  auto err = [](int n, double R) {
    Rng rng(RngSeed{13, static_cast<std::uint64_t>(n)});
    double s = 0.0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
      CMatrix z = sample_ginibre(n, rng);
      s += norm2_sq(z - truncate_parts(z, R));
    }
    return std::sqrt(s / trials);
  };
  // The parts have spectra near [-2, 2], so R = 3 only sees roundoff.
  for (int n : {16, 64, 256}) CHECK(err(n, 3.0) < 1e-12);
  double e16 = err(16, 2.0), e64 = err(64, 2.0), e256 = err(256, 2.0);
  CHECK(e64 < e16);
  CHECK(e256 < e64);
}

TEST_CASE("project_op_ball") {
  Rng rng(RngSeed{14, 0});
  for (int trial = 0; trial < 50; ++trial) {
    CMatrix x = sample_ginibre(5, rng) * 1.5;
    CMatrix p = project_op_ball(x, 1.0);
    CHECK(op_norm(p) <= 1.0 + 1e-10);
    for (int k = 0; k < 5; ++k) {
      CMatrix y = project_op_ball(sample_ginibre(5, rng), 1.0);
      CHECK(norm2(x - p) <= norm2(x - y) + 1e-12);
    }
  }
}

TEST_CASE("apply_lipschitz") {
  Rng rng(RngSeed{15, 0});
  HermitianMatrix x(random_hermitian(4, rng));
  SUBCASE("identity") {
    LipschitzFunction id{[](double t) { return t; }, 1.0};
    CHECK((apply_lipschitz(id, x).matrix() - x.matrix()).norm() < 1e-12);
  }
  SUBCASE("constant") {
    LipschitzFunction c{[](double) { return 2.5; }, 0.0};
    CHECK((apply_lipschitz(c, x).matrix() - 2.5 * CMatrix::Identity(4, 4)).norm() < 1e-12);
  }
  SUBCASE("absolute value is 1-Lipschitz in the 2-norm") {
    LipschitzFunction ab{[](double t) { return std::abs(t); }, 1.0};
    for (int trial = 0; trial < 100; ++trial) {
      HermitianMatrix a(random_hermitian(4, rng)), b(random_hermitian(4, rng));
      double lhs = norm2(apply_lipschitz(ab, a).matrix() - apply_lipschitz(ab, b).matrix());
      CHECK(lhs <= norm2(a.matrix() - b.matrix()) + 1e-12);
    }
  }
}

TEST_CASE("smooth cutoff") {
  const double R = 1.3;
  CHECK(cutoff_g(2.0 * R, R) == doctest::Approx(1.5 * R));
  CHECK(cutoff_g(-2.0 * R, R) == doctest::Approx(-1.5 * R));
  CHECK(cutoff_g_prime(2.0 * R, R) == doctest::Approx(0.25));

  MatrixTuple inside = MatrixTuple::identity(3, 2) * 0.5;
  CHECK(norm2(cutoff_map_G(inside, 1.0) - inside) < 1e-14);

  Rng rng(RngSeed{16, 0});
  for (int i = 0; i < 1000; ++i) {
    double s = 6.0 * (rng.uniform() - 0.5), t = 6.0 * (rng.uniform() - 0.5);
    if (s == t) continue;
    double q = (cutoff_g(s, R) - cutoff_g(t, R)) / (s - t);
    double bound = R * R / (std::max(std::abs(s), R) * std::max(std::abs(t), R));
    CHECK(q >= bound - 1e-12);
  }
}

TEST_CASE("spectral derivative adjoint matches finite differences") {
  Rng rng(RngSeed{17, 0});
  HermitianMatrix x(random_hermitian(5, rng));
  HermitianMatrix h(random_hermitian(5, rng));
  CMatrix g = random_hermitian(5, rng);
  auto f = [](double t) { return std::atan(t); };
  auto fp = [](double t) { return 1.0 / (1.0 + t * t); };
  CMatrix adj = spectral_derivative_adjoint(x.spectrum(), f, fp, g);
  const double eps = 1e-6;
  CMatrix plus = apply_function(f, HermitianMatrix::symmetrized(x.matrix() + eps * h.matrix())).matrix();
  CMatrix minus = apply_function(f, HermitianMatrix::symmetrized(x.matrix() - eps * h.matrix())).matrix();
  double fd = normalized_inner(g, (plus - minus) / (2.0 * eps)).real();
  double an = normalized_inner(adj, h.matrix()).real();
  CHECK(an == doctest::Approx(fd).epsilon(1e-6));
}
