// One line per criterion: "[PASS] NN name: detail" or "[FAIL] ...".
// Usage: acceptance            run every criterion
//        acceptance N [M ...]  run the listed criteria only

#include "freegeom/concentration.hpp"
#include "freegeom/ensembles.hpp"
#include "freegeom/entropy.hpp"
#include "freegeom/pressure.hpp"
#include "freegeom/stats.hpp"
#include "freegeom/transport.hpp"
#include "oracles.hpp"

#ifdef FREEGEOM_HAVE_CLI
#include "freegeom_cli/cli.hpp"
#endif

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

using namespace freegeom;
namespace fm = freegeom::formulas;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Detail {
 public:
  template <class... A>
  void add(const char* fmt, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, a...);
    if (!s_.empty()) s_ += "; ";
    s_ += buf;
  }
  const std::string& str() const { return s_; }

 private:
  std::string s_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

MatrixTuple none(int n) { return MatrixTuple::zeros(n, 0); }

// Gaussian mixture with 1 to 3 components, means U(-2, 2), sds U(0.3, 1.5), weights U(0.2, 1),
// binned with exact CDF masses.
SpectralMeasure random_mixture(Rng& rng, double left, double right, int bins) {
  const int k = 1 + static_cast<int>(rng.uniform() * 3.0) % 3;
  std::vector<double> mean, sd, w;
  double wsum = 0.0;
  for (int i = 0; i < k; ++i) {
    mean.push_back(-2.0 + 4.0 * rng.uniform());
    sd.push_back(0.3 + 1.2 * rng.uniform());
    w.push_back(0.2 + 0.8 * rng.uniform());
    wsum += w.back();
  }
  const double h = (right - left) / bins;
  std::vector<double> masses(static_cast<size_t>(bins), 0.0);
  double total = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double a = left + b * h, c = a + h;
    for (int i = 0; i < k; ++i)
      masses[b] += w[i] / wsum * (oracle::normal_cdf((c - mean[i]) / sd[i]) - oracle::normal_cdf((a - mean[i]) / sd[i]));
    total += masses[b];
  }
  for (double& m : masses) m /= total;
  return SpectralMeasure::grid_masses(left, right, masses);
}

// 1. Pressure closed forms.
Outcome c01() {
  Outcome o;
  Detail d;
  auto t0 = std::chrono::steady_clock::now();
  PressureEstimate lin = pressure_direct(fm::linear(0, 1.0), none(32), 32, 10000, RngSeed{101, 0});
  PressureEstimate quad = pressure_direct(fm::half_norm_sq({0}), none(32), 32, 10000, RngSeed{101, 1});
  const double secs = seconds_since(t0);
  const bool a = std::abs(lin.value + 0.5) <= 3.0 * lin.stderr;
  const bool b = std::abs(quad.value - std::log(2.0)) <= 3.0 * quad.stderr;
  d.add("linear %.7f +- %.1e vs -0.5", lin.value, lin.stderr);
  d.add("half square %.7f +- %.1e vs log 2", quad.value, quad.stderr);
  d.add("%.1f s", secs);
  o.pass = a && b && secs < 30.0;
  o.detail = d.str();
  return o;
}

// 2. Control value against the direct pressure at n = 8.
Outcome c02() {
  Outcome o;
  Detail d;
  const int n = 8, k = 8, iters = 300;
  const double r = 3.0;
  struct Case {
    const char* name;
    Formula f;
    PolicyClass policy;
    bool bounded;
  };
  const std::vector<Case> cases{{"linear", fm::linear(0, 1.0), PolicyClass::Constant, false},
                                {"half square", fm::half_norm_sq({0}), PolicyClass::AffineFeedback, false},
                                {"resolvent", fm::resolvent(0, 1.0), PolicyClass::AffineFeedback, true}};
  std::uint64_t idx = 0;
  for (const Case& c : cases) {
    PressureEstimate direct = pressure_direct(c.f, none(n), n, 4000, RngSeed{102, idx});
    ControlOptions opts;
    opts.policy = c.policy;
    ControlResult cr = boue_dupuis_solve(c.f, none(n), n, k, r, iters, RngSeed{103, idx}, opts);
    const double gap = std::abs(cr.estimate.value - direct.value);
    const double tol = c.bounded ? std::max(0.05, 3.0 * std::hypot(direct.stderr, cr.estimate.stderr)) : 0.05;
    d.add("%s control %.4f direct %.4f gap %.4f (tol %.3f)", c.name, cr.estimate.value, direct.value, gap, tol);
    o.pass = o.pass && gap <= tol;
    if (idx == 0) {
      double worst = 0.0;
      for (const auto& stage : cr.policy.a) worst = std::max(worst, norm2(stage[0] + CMatrix::Identity(n, n)));
      d.add("max |beta + I| %.4f", worst);
      o.pass = o.pass && worst <= 0.1;
    }
    ++idx;
  }
  o.detail = d.str();
  return o;
}

// 3. Discretization trend in k.
Outcome c03() {
  Outcome o;
  Detail d;
  ScanOptions opts;
  opts.control.policy = PolicyClass::AffineFeedback;
  opts.direct_samples = 4000;
  ScanResult s = discretization_error_scan(fm::resolvent(0, 1.0), 8, 3.0, {2, 4, 8}, RngSeed{104, 0}, opts);
  bool within = true;
  for (const ScanRow& row : s.rows) {
    d.add("k=%d gap %.4f bound %.4f", row.k, row.gap, row.bound);
    within = within && row.within_bound;
  }
  d.add("monotone %s", s.monotone ? "yes" : "no");
  o.pass = within && s.monotone;
  o.detail = d.str();
  return o;
}

// 4. Chain rule at n = 16.
Outcome c04() {
  Outcome o;
  Detail d;
  ChainOptions opts;
  opts.inner_samples = 128;
  opts.pressure.pilot_samples = 300;
  const int n = 16;
  struct Case {
    const char* name;
    Formula f;
  };
  const std::vector<Case> cases{
      {"separable", fm::sum({fm::resolvent(0, 1.0), fm::resolvent_well(1, 0.5)})},
      {"linear", fm::sum({fm::linear(0, 1.0), fm::linear(1, -0.5)})}};
  std::uint64_t idx = 0;
  for (const Case& c : cases) {
    ChainResult r = pressure_chain_check(c.f, 1, 1, none(n), n, 400, RngSeed{105, idx++}, opts);
    const double se = std::hypot(r.joint.stderr, r.nested.stderr);
    const double diff = std::abs(r.joint.value - r.nested.value);
    d.add("%s joint %.5f nested %.5f diff %.5f (3se %.5f)", c.name, r.joint.value, r.nested.value, diff, 3.0 * se);
    o.pass = o.pass && diff <= 3.0 * se;
  }
  o.detail = d.str();
  return o;
}

// 5. Moments, freeness and the GUE norm at n = 256.
Outcome c05() {
  using L = FreeLetter;
  Outcome o;
  Detail d;
  const std::vector<int> ns{32, 256};
  const int trials = 1000;
  FreenessReport s2 = freeness_check({L::s(0), L::s(0)}, nullptr, ns, trials, RngSeed{106, 0});
  FreenessReport s4 = freeness_check({L::s(0), L::s(0), L::s(0), L::s(0)}, nullptr, ns, trials, RngSeed{106, 1});
  DeterministicFamily diag = [](int n) {
    CMatrix m = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = i % 2 ? -1.0 : 1.0;
    return std::vector<CMatrix>{m};
  };
  FreenessReport dsds = freeness_check({L::d(0), L::s(0), L::d(0), L::s(0)}, diag, ns, trials, RngSeed{106, 2});
  NormReport norm = norm_convergence_check({16, 256}, trials, RngSeed{106, 3});

  const double m2 = s2.rows.back().mean, m4 = s4.rows.back().mean, g = dsds.rows.back().gap;
  const double med = norm.rows.back().median_norm;
  d.add("tr S^2 %.4f", m2);
  d.add("tr S^4 %.4f", m4);
  d.add("dsds gap %.4f", g);
  d.add("median |S| %.4f", med);
  const bool trends = s2.pass() && s4.pass() && dsds.pass() && norm.pass();
  d.add("trend checks %s", trends ? "ok" : "failed");
  o.pass = std::abs(m2 - 1.0) <= 0.05 && std::abs(m4 - 2.0) <= 0.1 && std::abs(g) <= 0.05 && med >= 1.85 &&
           med <= 2.15 && trends;
  o.detail = d.str();
  return o;
}

// 6. Herbst and Poincare on the suite.
Outcome c06() {
  Outcome o;
  Detail d;
  struct Case {
    const char* name;
    Formula f;
  };
  const std::vector<Case> cases{{"linear", fm::linear(0, 1.0)}, {"resolvent", fm::resolvent(0, 1.0)}};
  const std::vector<double> deltas{0.005, 0.01, 0.02, 0.05, 0.1, 0.2};
  int violations = 0, checks = 0;
  std::uint64_t idx = 0;
  for (const Case& c : cases)
    for (int n : {16, 64}) {
      TailReport t = herbst_check(c.f, n, 1, deltas, 4000, RngSeed{107, idx});
      PoincareReport p = poincare_check(c.f, n, 1, 4000, RngSeed{108, idx});
      ++idx;
      for (bool ok : t.pass) violations += ok ? 0 : 1;
      violations += p.pass ? 0 : 1;
      checks += static_cast<int>(t.pass.size()) + 1;
      d.add("%s n=%d variance %.2e +- %.1e, bound %.2e", c.name, n, p.variance, p.variance_stderr, p.bound);
    }
  d.add("%d violations in %d checks", violations, checks);
  o.pass = violations == 0;
  o.detail = d.str();
  return o;
}

// 7. Cutoff Jacobian bounds.
Outcome c07() {
  Outcome o;
  Detail d;
  Rng rng(RngSeed{109, 0});
  int bad = 0;
  double worst_gap = kInf;
  for (int i = 0; i < 1000; ++i) {
    CutoffJacobian j = cutoff_jacobian_bounds(sample_ginibre_tuple(8, 1, rng), 1.0);
    if (!j.holds) ++bad;
    worst_gap = std::min(worst_gap, std::min(-j.lhs, j.lhs - j.rhs));
  }
  CMatrix x(1, 1);
  x(0, 0) = 2.0;
  const double spot = cutoff_jacobian_bounds(MatrixTuple::single(x), 1.0).lhs;
  d.add("%d violations in 1000 draws", bad);
  d.add("smallest margin %.3e", worst_gap);
  d.add("spot value error %.1e", std::abs(spot - std::log(0.25)));
  o.pass = bad == 0 && std::abs(spot - std::log(0.25)) <= 1e-10;
  o.detail = d.str();
  return o;
}

// 8. Projection and functional calculus inequalities.
Outcome c08() {
  Outcome o;
  Detail d;
  Rng rng(RngSeed{110, 0});
  const int n = 6, count = 1000;
  const double R = 1.0;
  int closest = 0, norm1_ok = 0, lip_ok = 0;
  const std::vector<LipschitzFunction> fs{{[](double t) { return std::abs(t); }, 1.0},
                                          {[](double t) { return std::sin(t); }, 1.0},
                                          {[](double t) { return 2.0 * std::atan(t); }, 2.0},
                                          {[](double t) { return clamp_scalar(t, 0.5); }, 1.0}};
  for (int i = 0; i < count; ++i) {
    HermitianMatrix x(sample_gue(n, rng).matrix() * 1.5);
    CMatrix fx = truncate_FR(x, R).matrix();
    // Closest point: no sampled point of the ball is closer, and the variational inequality holds.
    CMatrix y = project_op_ball(sample_ginibre(n, rng), R);
    bool ok = norm2(x.matrix() - fx) <= norm2(x.matrix() - y) + 1e-12 &&
              normalized_inner(fx - y, x.matrix() - fx).real() >= -1e-12 && op_norm(fx) <= R + 1e-12;
    closest += ok;
    norm1_ok += 2.0 * R * norm1(x.matrix() - fx) <= norm2_sq(x.matrix()) - norm2_sq(fx) + 1e-12;
    const LipschitzFunction& f = fs[static_cast<size_t>(i) % fs.size()];
    HermitianMatrix a(sample_gue(n, rng).matrix()), b(sample_gue(n, rng).matrix());
    lip_ok += norm2(apply_lipschitz(f, a).matrix() - apply_lipschitz(f, b).matrix()) <=
              f.lipschitz * norm2(a.matrix() - b.matrix()) + 1e-12;
  }
  d.add("closest point %d/%d", closest, count);
  d.add("1-norm inequality %d/%d", norm1_ok, count);
  d.add("Lipschitz calculus %d/%d", lip_ok, count);
  o.pass = closest == count && norm1_ok == count && lip_ok == count;
  o.detail = d.str();
  return o;
}

double max_grid_error(const GridFunction& g, const std::function<double(double)>& f) {
  double m = 0.0;
  for (int i = 0; i < g.points(); ++i) m = std::max(m, std::abs(g.value(i) - f(g.x(i))));
  return m;
}

// 9. Transport identities.
Outcome c09() {
  Outcome o;
  Detail d;
  Rng rng(RngSeed{111, 0});

  double biconj = 0.0, moreau = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const double a = 0.5 + rng.uniform(), b = 2.0 * rng.uniform() - 1.0, c = 0.2 + rng.uniform();
    // Lipschitz plus quadratic: |x - b| c + a x^2 / 2.
    auto fx = [=](double x) { return c * std::abs(x - b) + 0.5 * a * x * x; };
    GridFunction f = GridFunction::sample(fx, -3.0, 3.0, 1201);
    GridFunction ff = legendre(legendre(f), f.left(), f.right(), f.points());
    biconj = std::max(biconj, max_grid_error(ff, fx));
    const double cc = 1.0 + rng.uniform();
    GridFunction lhs = legendre(inf_convolution(cc, f), -1.0, 1.0, 201);
    GridFunction fs = legendre(f, -1.0, 1.0, 201);
    for (int j = 0; j < lhs.points(); ++j) {
      const double y = lhs.x(j);
      moreau = std::max(moreau, std::abs(lhs.value(j) - (0.5 * y * y / cc + fs.value(j))));
    }
  }
  d.add("biconjugation %.1e", biconj);
  d.add("Moreau duality %.1e", moreau);

  double lp_err = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x, p, y, q;
    double sp = 0.0, sq = 0.0;
    for (int i = 0; i < 5; ++i) {
      x.push_back(4.0 * rng.uniform() - 2.0);
      y.push_back(4.0 * rng.uniform() - 2.0);
      p.push_back(0.1 + rng.uniform());
      q.push_back(0.1 + rng.uniform());
      sp += p.back();
      sq += q.back();
    }
    for (double& v : p) v /= sp;
    for (double& v : q) v /= sq;
    const double w = wasserstein_1d(SpectralMeasure::atoms(x, p), SpectralMeasure::atoms(y, q)).distance;
    lp_err = std::max(lp_err, std::abs(w * w - oracle::transport_lp_cost(x, p, y, q)));
  }
  d.add("quantile vs LP %.1e", lp_err);

  double viol = 0.0, gap = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    SpectralMeasure mu = random_mixture(rng, -8.0, 8.0, 200), nu = random_mixture(rng, -8.0, 8.0, 200);
    MkDualResult r = mk_dual_pair_1d(mu, nu);
    viol = std::max(viol, r.max_violation);
    gap = std::max(gap, r.max_equality_gap);
  }
  d.add("MK violation %.1e", viol);
  d.add("MK equality gap %.1e", gap);
  o.pass = biconj <= 1e-4 && moreau <= 1e-4 && lp_err <= 1e-8 && viol <= 1e-6 && gap <= 1e-4;
  o.detail = d.str();
  return o;
}

// 10. Geodesic concavity.
Outcome c10() {
  Outcome o;
  Detail d;
  std::vector<double> ts;
  for (int i = 0; i <= 10; ++i) ts.push_back(i / 10.0);
  Rng rng(RngSeed{112, 0});
  int fails = 0;
  double defect = -kInf;
  for (int pair = 0; pair < 20; ++pair) {
    SpectralMeasure a = random_mixture(rng, -8.0, 8.0, 1024), b = random_mixture(rng, -8.0, 8.0, 1024);
    GeodesicReport r = geodesic_concavity_check(a, b, EntropyFunctional::Differential, ts);
    SpectralMeasure a2 = random_mixture(rng, -8.0, 8.0, 256), b2 = random_mixture(rng, -8.0, 8.0, 256);
    GeodesicReport r2 = geodesic_concavity_check(a2, b2, EntropyFunctional::LogEnergy, ts);
    fails += !r.pass() + !r2.pass();
    defect = std::max({defect, r.max_concavity_defect, r2.max_concavity_defect});
  }
  d.add("%d failing profiles of 40", fails);
  d.add("worst midpoint defect %.1e", defect);

  SpectralMeasure g0 = SpectralMeasure::gaussian(0.0, 1.0, -8.0, 8.0, 1024);
  SpectralMeasure g1 = SpectralMeasure::gaussian(0.0, 2.0, -16.0, 16.0, 1024);
  GeodesicReport gr = geodesic_concavity_check(g0, g1, EntropyFunctional::Differential, ts);
  double dev = 0.0;
  for (size_t i = 0; i < ts.size(); ++i)
    dev = std::max(dev, std::abs(gr.entropy[i] - gr.entropy[0] - std::log1p(ts[i])));
  d.add("Gaussian dilation deviation %.1e", dev);
  o.pass = fails == 0 && dev <= 1e-3;
  o.detail = d.str();
  return o;
}

// 11. EVI.
Outcome c11() {
  Outcome o;
  Detail d;
  std::vector<double> times;
  for (int i = 0; i < 10; ++i) times.push_back(i / 9.0);
  Rng rng(RngSeed{113, 0});
  int fails = 0, sharp_fails = 0;
  double excess = -kInf, sharp_excess = -kInf;
  for (int pair = 0; pair < 20; ++pair) {
    SpectralMeasure mu0 = random_mixture(rng, -12.0, 12.0, 2048), sigma = random_mixture(rng, -12.0, 12.0, 2048);
    EviReport r = evi_check_1d(mu0, sigma, times);
    fails += !r.pass();
    sharp_fails += !r.sharp_pass();
    excess = std::max(excess, r.max_excess);
    sharp_excess = std::max(sharp_excess, r.max_sharp_excess);
  }
  d.add("%d of 20 random pairs fail", fails);
  d.add("largest lhs - rhs %.2e against tolerance %.2e", excess, 2.0 * 24.0 / 2048 + 1e-6);
  d.add("with the halved rhs: %d fail, largest lhs - rhs %.2e", sharp_fails, sharp_excess);

  SpectralMeasure g = SpectralMeasure::gaussian(0.0, 1.0, -12.0, 12.0, 2048);
  EviReport gr = evi_check_1d(g, g, {0.0, 1.0});
  const double lhs = gr.rows.at(0).lhs, rhs = gr.rows.at(0).rhs;
  const bool closed = std::abs(lhs - 0.5 * std::pow(std::sqrt(2.0) - 1.0, 2)) <= 1e-3 &&
                      std::abs(rhs - 0.5 * std::log(2.0)) <= 1e-3;
  d.add("Gaussian lhs %.4f rhs %.4f", lhs, rhs);
  o.pass = fails == 0 && closed && gr.pass();
  o.detail = d.str();
  return o;
}

// 12. Entropy consistency.
Outcome c12() {
  Outcome o;
  Detail d;
  const bool exact = gaussian_tuple_entropy(1, 1, 1.0) == chi_from_tilde(0.0, 1, 2.0) &&
                     std::abs(gaussian_tuple_entropy(1, 1, 1.0) - std::log(2.0 * M_PI * M_E)) <= 1e-15;
  d.add("log(2 pi e) identity %s", exact ? "exact" : "differs");
  const double eps = 0.5;
  EntropyReport m = microstate_gaussian_entropy({fm::linear(0)}, {0.0}, eps, 1, 20000, RngSeed{114, 0});
  const double target = -std::log(2.0 * oracle::normal_cdf(eps) - 1.0);
  const bool micro = std::abs(m.value - target) <= 3.0 * m.stderr;
  d.add("microstate %.4f +- %.4f vs %.4f", m.value, m.stderr, target);
  const double semi = log_energy_entropy(SpectralMeasure::semicircle(1024));
  const double semi_target = 0.5 + 0.5 * std::log(2.0 * M_PI);
  d.add("semicircle %.6f vs %.6f", semi, semi_target);
  o.pass = exact && micro && std::abs(semi - semi_target) <= 1e-3;
  o.detail = d.str();
  return o;
}

// 13. Byte-identical reports.
Outcome c13() {
  Outcome o;
#ifdef FREEGEOM_HAVE_CLI
  Detail d;
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "freegeom_acceptance_repro";
  fs::remove_all(root);
  int identical = 0, total = 0;
  std::vector<std::string> differing;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  for (const auto& info : freegeom::cli::list_experiments()) {
    ++total;
    std::string first;
    bool same = true;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / (info.name + "_" + std::to_string(rep));
      freegeom::cli::RunOptions opts;
      opts.out_dir = out.string();
      freegeom::cli::run_config(freegeom::cli::smoke_config(info.name, 7), opts);
      std::string all;
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(out)) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) all += f.filename().string() + "\n" + slurp(f);
      if (rep == 0)
        first = all;
      else
        same = all == first;
    }
    if (same)
      ++identical;
    else
      differing.push_back(info.name);
  }
  fs::remove_all(root);
  d.add("%d of %d experiments reproduce byte for byte", identical, total);
  for (const auto& n : differing) d.add("differs: %s", n.c_str());
  o.pass = identical == total && total >= 10;
  o.detail = d.str();
#else
  o.pass = false;
  o.detail = "built without the command line tool";
#endif
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"pressure closed forms", c01},
      {"control vs direct pressure", c02},
      {"discretization trend", c03},
      {"chain rule at finite n", c04},
      {"moments and freeness", c05},
      {"concentration inequalities", c06},
      {"cutoff Jacobian", c07},
      {"projection and functional calculus", c08},
      {"transport identities", c09},
      {"geodesic concavity", c10},
      {"evolution variational inequality", c11},
      {"entropy consistency", c12},
      {"reproducible reports", c13},
  };
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %s\n", argv[i]);
      return 2;
    }
    which.push_back(k);
  }
  if (which.empty())
    for (size_t k = 1; k <= criteria.size(); ++k) which.push_back(static_cast<int>(k));

  int failed = 0;
  for (int k : which) {
    const auto& [name, fn] = criteria[static_cast<size_t>(k - 1)];
    auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %02d %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", k, name, r.detail.c_str(), seconds_since(t0));
    failed += !r.pass;
  }
  return failed == 0 ? 0 : 1;
}
