#include "experiments.hpp"

#include "freegeom/concentration.hpp"
#include "freegeom/ensembles.hpp"
#include "freegeom/entropy.hpp"
#include "freegeom/pressure.hpp"
#include "freegeom/stats.hpp"
#include "freegeom/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace freegeom::cli {
namespace {

namespace fm = freegeom::formulas;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

CheckRow row(std::string name, double value, double se, double bound, bool pass) {
  return CheckRow{std::move(name), value, se, bound, pass};
}

json curve(const std::string& label, const std::vector<double>& x, const std::vector<double>& y) {
  return json{{"label", label}, {"x", x}, {"y", y}};
}

json series(const std::string& title, const std::string& xl, const std::string& yl, bool log_x, bool log_y,
            json curves) {
  return json{{"title", title}, {"x_label", xl}, {"y_label", yl},
              {"log_x", log_x}, {"log_y", log_y}, {"curves", std::move(curves)}};
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

MatrixTuple none(int n) { return MatrixTuple::zeros(n, 0); }

Formula named_formula(const std::string& name, double c) {
  if (name == "linear") return fm::linear(0, c);
  if (name == "half_norm_sq") return fm::half_norm_sq({0}, c);
  if (name == "resolvent") return fm::resolvent(0, c);
  if (name == "resolvent_well") return fm::resolvent_well(0, c);
  throw ConfigError("unknown formula \"" + name + "\" (linear, half_norm_sq, resolvent, resolvent_well)");
}

/// Closed-form pressure for a single complex coordinate, NaN when unknown.
double closed_form_pressure(const std::string& name, double c) {
  if (name == "linear") return -0.5 * c * c;
  if (name == "half_norm_sq") return c > -1.0 ? std::log1p(c) : kNaN;
  return kNaN;
}

PolicyClass policy_of(const std::string& s) {
  if (s == "constant") return PolicyClass::Constant;
  if (s == "affine_feedback") return PolicyClass::AffineFeedback;
  throw ConfigError("unknown policy \"" + s + "\" (constant, affine_feedback)");
}

EntropyFunctional entropy_of_name(const std::string& s) {
  if (s == "differential") return EntropyFunctional::Differential;
  if (s == "log_energy") return EntropyFunctional::LogEnergy;
  throw ConfigError("unknown entropy \"" + s + "\" (differential, log_energy)");
}

double normal_cdf(double x) { return stats::normal_cdf(x); }

// Gaussian mixture with 1 to 3 components, binned with exact masses.
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
      masses[b] += w[i] / wsum * (normal_cdf((c - mean[i]) / sd[i]) - normal_cdf((a - mean[i]) / sd[i]));
    total += masses[b];
  }
  for (double& m : masses) m /= total;
  return SpectralMeasure::grid_masses(left, right, masses);
}

ExperimentOutput pressure_direct_exp(const json& p, RngSeed seed) {
  const std::string name = p["formula"];
  const double c = p["c"];
  const int n = p["n"];
  PressureEstimate e = pressure_direct(named_formula(name, c), none(n), n, p["samples"], seed);
  const double cf = closed_form_pressure(name, c);
  ExperimentOutput out;
  const bool ok = std::isnan(cf) ? e.converged : std::abs(e.value - cf) <= 3.0 * e.stderr;
  out.results.push_back(row("pressure", e.value, e.stderr, cf, ok));
  out.diagnostics = {{"ess", e.ess}, {"converged", e.converged}};
  return out;
}

ExperimentOutput direct_vs_control(const json& p, RngSeed seed) {
  const std::string name = p["formula"];
  const double c = p["c"];
  const int n = p["n"], k = p["k"];
  const double r = p["r"];
  Formula f = named_formula(name, c);
  PressureEstimate direct = pressure_direct(f, none(n), n, p["direct_samples"], seed.derive(0));
  ControlOptions opts;
  opts.policy = policy_of(p["policy"]);
  opts.eval_samples = p["eval_samples"];
  ControlResult cr = boue_dupuis_solve(f, none(n), n, k, r, p["iters"], seed.derive(1), opts);
  const double se = std::hypot(direct.stderr, cr.estimate.stderr);
  const double tol = std::isnan(closed_form_pressure(name, c)) ? std::max(p["tolerance"].get<double>(), 3.0 * se)
                                                               : p["tolerance"].get<double>();
  const double gap = cr.estimate.value - direct.value;
  ExperimentOutput out;
  out.results.push_back(row("control_minus_direct", gap, se, tol, std::abs(gap) <= tol));
  std::vector<double> stage, dev;
  if (name == "linear" && opts.policy == PolicyClass::Constant) {
    double worst = 0.0;
    for (size_t i = 0; i < cr.policy.a.size(); ++i) {
      const double d = norm2(cr.policy.a[i][0] + c * CMatrix::Identity(n, n));
      stage.push_back(static_cast<double>(i + 1));
      dev.push_back(d);
      worst = std::max(worst, d);
    }
    out.results.push_back(row("control_distance_to_minus_cI", worst, 0.0, 0.1, worst <= 0.1));
    out.series = series("recovered control", "stage", "|beta + cI|_2", false, false, json::array({curve("", stage, dev)}));
  }
  out.diagnostics = {{"direct", direct.value},
                     {"direct_stderr", direct.stderr},
                     {"control", cr.estimate.value},
                     {"control_stderr", cr.estimate.stderr},
                     {"gradient_norm", cr.gradient_norm}};
  return out;
}

ExperimentOutput discretization_scan(const json& p, RngSeed seed) {
  ScanOptions opts;
  opts.direct_samples = p["direct_samples"];
  opts.control_iters = p["iters"];
  opts.control.policy = policy_of(p["policy"]);
  const std::vector<int> ks = p["k_list"];
  const int n = p["n"];
  ScanResult s = discretization_error_scan(named_formula(p["formula"], p["c"]), n, p["r"], ks, seed, opts);
  ExperimentOutput out;
  std::vector<double> kx, gap, bound;
  std::string csv = "k,control,control_stderr,gap,bound,within_bound\n";
  for (const ScanRow& r : s.rows) {
    out.results.push_back(row("gap_k" + std::to_string(r.k), r.gap, r.control_stderr, r.bound, r.within_bound));
    kx.push_back(r.k);
    gap.push_back(std::abs(r.gap));
    bound.push_back(r.bound);
    csv += std::to_string(r.k) + "," + fmt(r.control) + "," + fmt(r.control_stderr) + "," + fmt(r.gap) + "," +
           fmt(r.bound) + "," + (r.within_bound ? "1" : "0") + "\n";
  }
  out.results.push_back(row("gap_non_increasing", s.monotone ? 1.0 : 0.0, 0.0, 1.0, s.monotone));
  out.series = series("discretization error", "k", "|control - direct|", true, true,
                      json::array({curve("gap", kx, gap), curve("bound", kx, bound)}));
  out.csv.emplace_back("scan", csv);
  out.diagnostics = {{"direct", s.direct.value},
                     {"direct_stderr", s.direct.stderr},
                     {"lipschitz", s.lipschitz},
                     {"truncation_term", s.truncation_term}};
  if (s.exponent_valid) out.diagnostics["exponent"] = s.exponent;
  return out;
}

ExperimentOutput chain_rule(const json& p, RngSeed seed) {
  const std::string name = p["formula"];
  Formula f;
  if (name == "separable")
    f = fm::sum({fm::resolvent(0, 1.0), fm::resolvent_well(1, 0.5)});
  else if (name == "linear")
    f = fm::sum({fm::linear(0, 1.0), fm::linear(1, -0.5)});
  else
    throw ConfigError("unknown formula \"" + name + "\" (separable, linear)");
  ChainOptions opts;
  opts.inner_samples = p["inner_samples"];
  opts.pressure.pilot_samples = p["pilot_samples"];
  const int n = p["n"];
  ChainResult r = pressure_chain_check(f, 1, 1, none(n), n, p["samples"], seed, opts);
  const double se = std::hypot(r.joint.stderr, r.nested.stderr);
  const double d = r.joint.value - r.nested.value;
  ExperimentOutput out;
  out.results.push_back(row("joint_minus_nested", d, se, 3.0 * se, std::abs(d) <= 3.0 * se));
  out.diagnostics = {{"joint", r.joint.value},
                     {"joint_stderr", r.joint.stderr},
                     {"nested", r.nested.value},
                     {"nested_stderr", r.nested.stderr}};
  return out;
}

ExperimentOutput free_moments(const json& p, RngSeed seed) {
  using L = FreeLetter;
  const std::vector<int> ns = p["n_list"];
  const int trials = p["trials"];
  DeterministicFamily diag = [](int n) {
    CMatrix m = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = i % 2 ? -1.0 : 1.0;
    return std::vector<CMatrix>{m};
  };
  struct Word {
    const char* name;
    FreeWord word;
    bool deterministic;
    double tol;
  };
  const std::vector<Word> words{{"s2", {L::s(0), L::s(0)}, false, 0.05},
                                {"s4", {L::s(0), L::s(0), L::s(0), L::s(0)}, false, 0.1},
                                {"dsds", {L::d(0), L::s(0), L::d(0), L::s(0)}, true, 0.05}};
  ExperimentOutput out;
  json curves = json::array();
  std::string csv = "word,n,mean,stderr,limit,gap\n";
  std::uint64_t idx = 0;
  for (const Word& w : words) {
    FreenessReport r = freeness_check(w.word, w.deterministic ? diag : nullptr, ns, trials, seed.derive(idx++));
    const FreenessRow& last = r.rows.back();
    out.results.push_back(row(std::string(w.name) + "_gap_at_largest_n", last.gap, last.stderr, w.tol,
                              std::abs(last.gap) <= w.tol));
    for (const CheckRow& c : r.checks) out.results.push_back(row(std::string(w.name) + "_" + c.name, c.value, c.stderr, c.bound, c.pass));
    std::vector<double> x, y;
    for (const FreenessRow& fr : r.rows) {
      x.push_back(fr.n);
      y.push_back(std::abs(fr.gap));
      csv += std::string(w.name) + "," + std::to_string(fr.n) + "," + fmt(fr.mean) + "," + fmt(fr.stderr) + "," +
             fmt(fr.limit) + "," + fmt(fr.gap) + "\n";
    }
    curves.push_back(curve(w.name, x, y));
  }
  out.series = series("distance to the free limit", "n", "|E tr_n - limit|", true, true, curves);
  out.csv.emplace_back("moments", csv);
  return out;
}

ExperimentOutput gue_norm(const json& p, RngSeed seed) {
  NormReport r = norm_convergence_check(p["n_list"].get<std::vector<int>>(), p["trials"], seed, p["radius"]);
  ExperimentOutput out;
  const double med = r.rows.back().median_norm;
  out.results.push_back(row("median_norm_at_largest_n", med, 0.0, 2.0, med >= 1.85 && med <= 2.15));
  for (const CheckRow& c : r.checks) out.results.push_back(c);
  std::vector<double> x, y;
  std::string csv = "n,median_norm,identity_frequency,truncation_l2,truncation_l2_stderr\n";
  for (const NormRow& nr : r.rows) {
    x.push_back(nr.n);
    y.push_back(nr.median_norm);
    csv += std::to_string(nr.n) + "," + fmt(nr.median_norm) + "," + fmt(nr.identity_frequency) + "," +
           fmt(nr.truncation_l2) + "," + fmt(nr.truncation_l2_stderr) + "\n";
  }
  out.series = series("GUE operator norm", "n", "median |S|", true, false, json::array({curve("median", x, y)}));
  out.csv.emplace_back("norms", csv);
  return out;
}

ExperimentOutput concentration(const json& p, RngSeed seed) {
  const std::vector<std::string> fs = p["formulas"];
  const std::vector<int> ns = p["n_list"];
  const std::vector<double> deltas = p["deltas"];
  const int trials = p["trials"];
  ExperimentOutput out;
  std::vector<std::pair<int, CheckRow>> rows;
  json curves = json::array();
  std::uint64_t idx = 0;
  for (const std::string& name : fs) {
    Formula f = named_formula(name, 1.0);
    for (int n : ns) {
      TailReport t = herbst_check(f, n, 1, deltas, trials, seed.derive(2 * idx));
      PoincareReport v = poincare_check(f, n, 1, trials, seed.derive(2 * idx + 1));
      ++idx;
      const std::string tag = name + "_n" + std::to_string(n) + "_";
      for (const CheckRow& c : t.rows()) {
        out.results.push_back(row(tag + c.name, c.value, c.stderr, c.bound, c.pass));
        rows.emplace_back(n, CheckRow{name + ":" + c.name, c.value, c.stderr, c.bound, c.pass});
      }
      CheckRow pv = v.row();
      out.results.push_back(row(tag + pv.name, pv.value, pv.stderr, pv.bound, pv.pass));
      rows.emplace_back(n, CheckRow{name + ":" + pv.name, pv.value, pv.stderr, pv.bound, pv.pass});
      if (curves.empty()) {
        curves.push_back(curve(tag + "tail", t.delta, t.tail));
        curves.push_back(curve(tag + "bound", t.delta, t.bound));
      }
    }
  }
  out.series = series("Herbst tail", "delta", "P(|f - E f| >= delta)", false, false, curves);
  out.csv.emplace_back("concentration", concentration_csv(rows));
  return out;
}

ExperimentOutput cutoff_jacobian(const json& p, RngSeed seed) {
  const int n = p["n"], m = p["m"], draws = p["draws"];
  const double R = p["R"];
  Rng rng(seed);
  int bad = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < draws; ++i) {
    CutoffJacobian j = cutoff_jacobian_bounds(sample_ginibre_tuple(n, m, rng), R);
    bad += !j.holds;
    lo = std::min(lo, j.lhs);
    hi = std::max(hi, j.lhs);
  }
  CMatrix x(1, 1);
  x(0, 0) = 2.0 * R;
  const double spot = cutoff_jacobian_bounds(MatrixTuple::single(x), R).lhs;
  ExperimentOutput out;
  out.results.push_back(row("violations", bad, 0.0, 0.0, bad == 0));
  out.results.push_back(row("scalar_at_2R", spot, 0.0, std::log(0.25), std::abs(spot - std::log(0.25)) <= 1e-10));
  out.diagnostics = {{"min_lhs", lo}, {"max_lhs", hi}};
  return out;
}

ExperimentOutput projection_inequalities(const json& p, RngSeed seed) {
  const int n = p["n"], count = p["instances"];
  const double R = p["R"];
  Rng rng(seed);
  const std::vector<LipschitzFunction> fs{{[](double t) { return std::abs(t); }, 1.0},
                                          {[](double t) { return std::sin(t); }, 1.0},
                                          {[](double t) { return 2.0 * std::atan(t); }, 2.0},
                                          {[R](double t) { return clamp_scalar(t, R); }, 1.0}};
  int closest = 0, norm1_ok = 0, lip_ok = 0;
  for (int i = 0; i < count; ++i) {
    HermitianMatrix x(sample_gue(n, rng).matrix() * 1.5);
    CMatrix fx = truncate_FR(x, R).matrix();
    CMatrix y = project_op_ball(sample_ginibre(n, rng), R);
    closest += norm2(x.matrix() - fx) <= norm2(x.matrix() - y) + 1e-12 &&
               normalized_inner(fx - y, x.matrix() - fx).real() >= -1e-12 && op_norm(fx) <= R + 1e-12;
    norm1_ok += 2.0 * R * norm1(x.matrix() - fx) <= norm2_sq(x.matrix()) - norm2_sq(fx) + 1e-12;
    const LipschitzFunction& f = fs[static_cast<size_t>(i) % fs.size()];
    HermitianMatrix a(sample_gue(n, rng).matrix()), b(sample_gue(n, rng).matrix());
    lip_ok += norm2(apply_lipschitz(f, a).matrix() - apply_lipschitz(f, b).matrix()) <=
              f.lipschitz * norm2(a.matrix() - b.matrix()) + 1e-12;
  }
  ExperimentOutput out;
  out.results.push_back(row("closest_point", closest, 0.0, count, closest == count));
  out.results.push_back(row("norm1_inequality", norm1_ok, 0.0, count, norm1_ok == count));
  out.results.push_back(row("lipschitz_calculus", lip_ok, 0.0, count, lip_ok == count));
  return out;
}

ExperimentOutput entropy_consistency(const json& p, RngSeed seed) {
  ExperimentOutput out;
  const double g = gaussian_tuple_entropy(1, 1, 1.0), l = std::log(2.0 * M_PI * M_E);
  out.results.push_back(row("gaussian_tuple_entropy", g, 0.0, l, g == chi_from_tilde(0.0, 1, 2.0) && std::abs(g - l) <= 1e-15));
  const double eps = p["microstate_eps"];
  EntropyReport m = microstate_gaussian_entropy({fm::linear(0)}, {0.0}, eps, 1, p["microstate_samples"], seed);
  const double target = -std::log(2.0 * normal_cdf(eps) - 1.0);
  out.results.push_back(row("microstate_n1", m.value, m.stderr, target, std::abs(m.value - target) <= 3.0 * m.stderr));
  const double s = log_energy_entropy(SpectralMeasure::semicircle(p["semicircle_bins"]));
  const double st = 0.5 + 0.5 * std::log(2.0 * M_PI);
  out.results.push_back(row("semicircle_log_energy_entropy", s, 0.0, st, std::abs(s - st) <= 1e-3));
  return out;
}

ExperimentOutput change_of_variables(const json& p, RngSeed seed) {
  const int bins = p["bins"], pieces = p["pieces"];
  const double c = p["c"], eps_max = p["eps"];
  const double lo = -8.0, hi = 8.0;
  Rng rng(seed);
  std::vector<double> knots, curv;
  for (int i = 0; i <= pieces; ++i) knots.push_back(lo + (hi - lo) * i / pieces);
  for (int i = 0; i < pieces; ++i) curv.push_back(c * (2.0 * rng.uniform() - 1.0));
  auto slope = [&](double x) {
    double s = 0.0;
    for (int i = 0; i < pieces; ++i) s += curv[i] * (std::clamp(x, knots[i], knots[i + 1]) - knots[i]);
    return s;
  };
  const int points = 3201;
  const double h = (hi - lo) / (points - 1);
  std::vector<double> vals(points, 0.0);
  for (int i = 1; i < points; ++i) {
    const double a = lo + (i - 1) * h;
    vals[i] = vals[i - 1] + 0.5 * (slope(a) + slope(a + h)) * h;
  }
  GridFunction phi(lo, hi, vals);
  SpectralMeasure mu0 = SpectralMeasure::gaussian(0.0, 1.0, -7.0, 7.0, bins);
  const double h0 = differential_entropy(mu0);
  ExperimentOutput out;
  std::vector<double> xs, gain;
  for (int i = 1; i <= 5; ++i) {
    const double eps = eps_max * i / 5.0;
    EntropyReport r = change_of_variables_check_1d(phi, c, mu0, eps);
    for (const CheckRow& ck : r.checks) {
      char tag[32];
      std::snprintf(tag, sizeof tag, "eps%.3g_", eps);
      out.results.push_back(row(tag + ck.name, ck.value, ck.stderr, ck.bound, ck.pass));
    }
    xs.push_back(eps);
    gain.push_back(r.value - h0);
  }
  out.series = series("entropy gain along the gradient map", "eps", "h(T_# mu) - h(mu)", false, false,
                      json::array({curve("gain", xs, gain)}));
  return out;
}

double max_grid_error(const GridFunction& g, const std::function<double(double)>& f) {
  double m = 0.0;
  for (int i = 0; i < g.points(); ++i) m = std::max(m, std::abs(g.value(i) - f(g.x(i))));
  return m;
}

ExperimentOutput transport_identities(const json& p, RngSeed seed) {
  const int count = p["instances"], atoms = p["atoms"], points = p["points"];
  Rng rng(seed);
  double biconj = 0.0, moreau = 0.0, lp = 0.0, viol = 0.0, gap = 0.0, quantile_monotone = 1.0;
  for (int trial = 0; trial < count; ++trial) {
    const double a = 0.5 + rng.uniform(), b = 2.0 * rng.uniform() - 1.0, c = 0.2 + rng.uniform();
    auto fx = [=](double x) { return c * std::abs(x - b) + 0.5 * a * x * x; };
    GridFunction f = GridFunction::sample(fx, -3.0, 3.0, points);
    biconj = std::max(biconj, max_grid_error(legendre(legendre(f), f.left(), f.right(), f.points()), fx));
    const double cc = 1.0 + rng.uniform();
    GridFunction lhs = legendre(inf_convolution(cc, f), -1.0, 1.0, 201);
    GridFunction fs = legendre(f, -1.0, 1.0, 201);
    for (int j = 0; j < lhs.points(); ++j)
      moreau = std::max(moreau, std::abs(lhs.value(j) - (0.5 * lhs.x(j) * lhs.x(j) / cc + fs.value(j))));

    std::vector<double> x, pw, y, qw;
    double sp = 0.0, sq = 0.0;
    for (int i = 0; i < atoms; ++i) {
      x.push_back(4.0 * rng.uniform() - 2.0);
      y.push_back(4.0 * rng.uniform() - 2.0);
      pw.push_back(0.1 + rng.uniform());
      qw.push_back(0.1 + rng.uniform());
      sp += pw.back();
      sq += qw.back();
    }
    for (double& v : pw) v /= sp;
    for (double& v : qw) v /= sq;
    WassersteinResult w = wasserstein_1d(SpectralMeasure::atoms(x, pw), SpectralMeasure::atoms(y, qw));
    lp = std::max(lp, std::abs(w.distance * w.distance - w.coupling.cost()));
    if (!w.coupling.is_monotone()) quantile_monotone = 0.0;

    MkDualResult mk = mk_dual_pair_1d(random_mixture(rng, -8.0, 8.0, 200), random_mixture(rng, -8.0, 8.0, 200));
    viol = std::max(viol, mk.max_violation);
    gap = std::max(gap, mk.max_equality_gap);
  }
  ExperimentOutput out;
  out.results.push_back(row("legendre_biconjugation", biconj, 0.0, 1e-4, biconj <= 1e-4));
  out.results.push_back(row("moreau_duality", moreau, 0.0, 1e-4, moreau <= 1e-4));
  out.results.push_back(row("coupling_cost_matches_distance", lp, 0.0, 1e-8, lp <= 1e-8 && quantile_monotone == 1.0));
  out.results.push_back(row("mk_dual_violation", viol, 0.0, 1e-6, viol <= 1e-6));
  out.results.push_back(row("mk_equality_gap", gap, 0.0, 1e-4, gap <= 1e-4));
  return out;
}

ExperimentOutput geodesic(const json& p, RngSeed seed) {
  const EntropyFunctional ent = entropy_of_name(p["entropy"]);
  const int pairs = p["pairs"], bins = p["bins"], tp = p["t_points"];
  if (tp < 3) throw ConfigError("t_points must be at least 3");
  std::vector<double> ts;
  for (int i = 0; i < tp; ++i) ts.push_back(static_cast<double>(i) / (tp - 1));
  Rng rng(seed);
  int fails = 0;
  double defect = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < pairs; ++i) {
    SpectralMeasure a = random_mixture(rng, -8.0, 8.0, bins), b = random_mixture(rng, -8.0, 8.0, bins);
    GeodesicReport r = geodesic_concavity_check(a, b, ent, ts);
    fails += !r.pass();
    defect = std::max(defect, r.max_concavity_defect);
  }
  ExperimentOutput out;
  out.results.push_back(row("failing_pairs", fails, 0.0, 0.0, fails == 0));
  out.diagnostics["max_concavity_defect"] = defect;

  // Dilation of a centred profile by 1 + t: entropy rises by log(1 + t).
  SpectralMeasure g0 = ent == EntropyFunctional::Differential ? SpectralMeasure::gaussian(0.0, 1.0, -8.0, 8.0, bins)
                                                              : SpectralMeasure::semicircle(bins);
  GeodesicReport gr = geodesic_concavity_check(g0, g0.dilated(2.0), ent, ts);
  double dev = 0.0;
  std::vector<double> shifted;
  for (size_t i = 0; i < ts.size(); ++i) {
    dev = std::max(dev, std::abs(gr.entropy[i] - gr.entropy[0] - std::log1p(ts[i])));
    shifted.push_back(gr.entropy[0] + std::log1p(ts[i]));
  }
  out.results.push_back(row("dilation_profile_deviation", dev, 0.0, 1e-3, dev <= 1e-3));
  std::string csv = "t,entropy,reference\n";
  for (size_t i = 0; i < ts.size(); ++i) csv += fmt(ts[i]) + "," + fmt(gr.entropy[i]) + "," + fmt(shifted[i]) + "\n";
  out.csv.emplace_back("dilation_profile", csv);
  out.series = series("entropy along the dilation geodesic", "t", "entropy", false, false,
                      json::array({curve("entropy", ts, gr.entropy), curve("log(1+t) + const", ts, shifted)}));
  return out;
}

ExperimentOutput evi(const json& p, RngSeed seed) {
  const int pairs = p["pairs"], bins = p["bins"], tc = p["times"];
  if (tc < 2) throw ConfigError("times must be at least 2");
  const double left = p["left"], right = p["right"];
  std::vector<double> times;
  for (int i = 0; i < tc; ++i) times.push_back(static_cast<double>(i) / (tc - 1));
  Rng rng(seed);
  ExperimentOutput out;
  std::string csv = "pair,s,t,lhs,rhs,rhs_sharp,pass\n";
  for (int i = 0; i < pairs; ++i) {
    SpectralMeasure mu0 = random_mixture(rng, left, right, bins), sigma = random_mixture(rng, left, right, bins);
    EviReport r = evi_check_1d(mu0, sigma, times);
    out.results.push_back(row("pair" + std::to_string(i), r.max_excess, 0.0, 0.0, r.pass()));
    for (const EviRow& e : r.rows)
      csv += std::to_string(i) + "," + fmt(e.s) + "," + fmt(e.t) + "," + fmt(e.lhs) + "," + fmt(e.rhs) + "," +
             fmt(e.rhs_sharp) + "," + (e.pass ? "1" : "0") + "\n";
  }
  out.csv.emplace_back("pairs", csv);

  SpectralMeasure g = SpectralMeasure::gaussian(0.0, 1.0, left, right, bins);
  EviReport gr = evi_check_1d(g, g, times);
  std::vector<double> lhs, rhs;
  for (const EviRow& e : gr.rows)
    if (e.s == 0.0) {
      lhs.push_back(e.lhs);
      rhs.push_back(e.rhs);
    }
  std::vector<double> tt(times.begin() + 1, times.end());
  const double l1 = lhs.back(), r1 = rhs.back();
  out.results.push_back(row("gaussian_lhs_at_1", l1, 0.0, 0.5 * std::pow(std::sqrt(2.0) - 1.0, 2),
                            std::abs(l1 - 0.5 * std::pow(std::sqrt(2.0) - 1.0, 2)) <= 1e-3));
  out.results.push_back(row("gaussian_rhs_at_1", r1, 0.0, 0.5 * std::log(2.0), std::abs(r1 - 0.5 * std::log(2.0)) <= 1e-3));
  out.results.push_back(row("gaussian_inequality", gr.max_excess, 0.0, 0.0, gr.pass()));
  out.series = series("EVI from the standard Gaussian", "t", "value", false, false,
                      json::array({curve("lhs", tt, lhs), curve("rhs", tt, rhs)}));
  return out;
}

std::vector<Experiment> build_registry() {
  std::vector<Experiment> r;
  r.push_back({"pressure-direct", "Direct Monte Carlo pressure against its closed form",
               json{{"formula", "linear"}, {"c", 1.0}, {"n", 32}, {"samples", 10000}}, {"n", "samples"},
               json{{"n", 4}, {"samples", 400}}, pressure_direct_exp});
  r.push_back({"pressure-direct-vs-control", "Stochastic control value against the direct pressure",
               json{{"formula", "resolvent"}, {"c", 1.0}, {"n", 8}, {"k", 8}, {"r", 3.0}, {"iters", 300},
                    {"direct_samples", 4000}, {"eval_samples", 4096}, {"policy", "affine_feedback"},
                    {"tolerance", 0.05}},
               {"n", "k", "r", "iters", "direct_samples", "eval_samples", "tolerance"},
               json{{"n", 2}, {"k", 2}, {"iters", 5}, {"direct_samples", 200}, {"eval_samples", 128}},
               direct_vs_control});
  r.push_back({"discretization-scan", "Control discretization error against k with its bound",
               json{{"formula", "resolvent"}, {"c", 1.0}, {"n", 8}, {"r", 3.0}, {"k_list", {2, 4, 8}},
                    {"iters", 300}, {"direct_samples", 4000}, {"policy", "affine_feedback"}},
               {"n", "r", "k_list", "iters", "direct_samples"},
               json{{"n", 2}, {"k_list", {1, 2}}, {"iters", 5}, {"direct_samples", 200}}, discretization_scan});
  r.push_back({"chain-rule", "Joint pressure against the nested pressure of the inner pressure",
               json{{"formula", "separable"}, {"n", 16}, {"samples", 400}, {"inner_samples", 128},
                    {"pilot_samples", 300}},
               {"n", "samples", "inner_samples", "pilot_samples"},
               json{{"n", 4}, {"samples", 200}, {"inner_samples", 64}, {"pilot_samples", 200}}, chain_rule});
  r.push_back({"free-moments", "GUE moments and a mixed moment against the free limit",
               json{{"n_list", {32, 256}}, {"trials", 1000}}, {"n_list", "trials"},
               json{{"n_list", {8, 32}}, {"trials", 20}}, free_moments});
  r.push_back({"gue-norm", "Operator norm of GUE matrices and the truncation residual",
               json{{"n_list", {16, 64, 256}}, {"trials", 1000}, {"radius", 2.5}}, {"n_list", "trials", "radius"},
               json{{"n_list", {16, 64}}, {"trials", 20}}, gue_norm});
  r.push_back({"concentration", "Herbst tails and Poincare variance on Lipschitz trace formulas",
               json{{"formulas", {"linear", "resolvent"}}, {"n_list", {16, 64}}, {"trials", 4000},
                    {"deltas", {0.005, 0.01, 0.02, 0.05, 0.1, 0.2}}},
               {"n_list", "trials"}, json{{"n_list", {4, 8}}, {"trials", 100}}, concentration});
  r.push_back({"cutoff-jacobian", "Log-determinant bounds for the smooth cutoff map",
               json{{"n", 8}, {"m", 1}, {"R", 1.0}, {"draws", 1000}}, {"n", "m", "R", "draws"},
               json{{"draws", 20}}, cutoff_jacobian});
  r.push_back({"projection-inequalities", "Closest point, trace-norm inequality and Lipschitz functional calculus",
               json{{"n", 6}, {"instances", 1000}, {"R", 1.0}}, {"n", "instances", "R"}, json{{"instances", 50}},
               projection_inequalities});
  r.push_back({"entropy-consistency", "Gaussian entropy identities, microstates at n = 1 and the semicircle",
               json{{"microstate_eps", 0.5}, {"microstate_samples", 20000}, {"semicircle_bins", 1024}},
               {"microstate_eps", "microstate_samples", "semicircle_bins"},
               json{{"microstate_samples", 2000}, {"semicircle_bins", 256}}, entropy_consistency});
  r.push_back({"change-of-variables", "Entropy of a gradient pushforward against its exact form and lower bound",
               json{{"bins", 700}, {"eps", 0.4}, {"c", 1.0}, {"pieces", 8}}, {"bins", "eps", "c", "pieces"},
               json{{"bins", 200}}, change_of_variables});
  r.push_back({"transport-identities", "Legendre, Moreau, Wasserstein and Kantorovich identities",
               json{{"instances", 5}, {"atoms", 5}, {"points", 1201}}, {"instances", "atoms", "points"},
               json{{"instances", 1}, {"points", 301}}, transport_identities});
  r.push_back({"geodesic-concavity", "Entropy along displacement interpolation between random pairs",
               json{{"entropy", "differential"}, {"pairs", 20}, {"bins", 1024}, {"t_points", 11}},
               {"pairs", "bins", "t_points"}, json{{"pairs", 2}, {"bins", 256}, {"t_points", 5}}, geodesic});
  r.push_back({"evi-1d", "Evolution variational inequality for the one-dimensional heat flow",
               json{{"pairs", 20}, {"bins", 2048}, {"times", 10}, {"left", -12.0}, {"right", 12.0}},
               {"pairs", "bins", "times"}, json{{"pairs", 2}, {"bins", 512}, {"times", 4}}, evi});
  return r;
}

}  // namespace

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> r = build_registry();
  return r;
}

const Experiment& find_experiment(const std::string& name) {
  for (const Experiment& e : registry())
    if (e.name == name) return e;
  throw ConfigError("unknown experiment \"" + name + "\"; see `list`");
}

}  // namespace freegeom::cli
