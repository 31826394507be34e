#include "freegeom/entropy.hpp"

#include "freegeom/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace freegeom {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kInf = std::numeric_limits<double>::infinity();

// K'' = log|x|, K(0) = 0.
double K(double x) {
  if (x == 0.0) return 0.0;
  return x * x * (0.5 * std::log(std::abs(x)) - 0.75);
}

// Integral of log|s - t| over [a1, b1] x [a2, b2].
double cell_pair_integral(double a1, double b1, double a2, double b2) {
  return K(b1 - a2) + K(a1 - b2) - K(b1 - b2) - K(a1 - a2);
}

}  // namespace

double gaussian_tuple_entropy(int n, int m, double c) {
  if (n < 0 || m < 0) throw DomainError("gaussian_tuple_entropy: n and m must be nonnegative");
  if (!(c > 0.0)) throw DomainError("gaussian_tuple_entropy: scale must be positive");
  if (m == 0) return 0.0;
  return m * (std::log(kTwoPi) + 1.0 + 2.0 * std::log(c));
}

double chi_from_tilde(double tilde_value, int m, double norm_sq) {
  if (tilde_value == kInf) return -kInf;
  return m * std::log(kTwoPi) + 0.5 * norm_sq - tilde_value;
}

EntropyReport microstate_gaussian_entropy(const std::vector<Formula>& phis, const std::vector<double>& targets,
                                          double eps, int n, int samples, RngSeed seed, const EvalOptions& eval) {
  if (n != 1 && n != 2) throw DomainError("microstate estimation is limited to n in {1, 2}");
  if (!(eps > 0.0)) throw DomainError("microstate estimation needs eps > 0");
  if (phis.size() != targets.size()) throw ShapeError("one target per formula");
  if (samples < 1) throw DomainError("microstate estimation needs samples >= 1");

  int m = 0;
  std::vector<std::unique_ptr<Evaluator>> evs;
  for (const Formula& phi : phis) {
    m = std::max(m, phi.arity());
    evs.push_back(std::make_unique<Evaluator>(phi, n, eval));
  }

  Rng rng(seed);
  long hits = 0;
  for (int s = 0; s < samples; ++s) {
    MatrixTuple z = sample_ginibre_tuple(n, m, rng);
    bool inside = true;
    for (size_t j = 0; j < evs.size() && inside; ++j)
      inside = std::abs(evs[j]->eval(z.matrices()).value - targets[j]) < eps;
    hits += inside ? 1 : 0;
  }

  const double nn = static_cast<double>(n) * n;
  const double N = samples;
  if (hits == 0) {
    double p_upper = 1.0 - std::pow(0.01, 1.0 / N);
    throw EmptyMicrostateEstimate("no sample hit the microstate set", -std::log(p_upper) / nn, samples);
  }
  const double p = static_cast<double>(hits) / N;
  EntropyReport r;
  r.name = "microstate_gaussian_entropy";
  r.value = -std::log(p) / nn;
  r.stderr = std::sqrt((1.0 - p) / (N * p)) / nn;
  r.inputs = {{"n", n}, {"eps", eps}, {"samples", N}, {"hits", static_cast<double>(hits)}, {"m", m}};
  return r;
}

Formula microstate_penalty(const std::vector<Formula>& phis, const std::vector<double>& targets, double a) {
  if (phis.empty() || phis.size() != targets.size()) throw ShapeError("penalty needs one target per formula");
  if (!(a > 0.0)) throw DomainError("penalty weight must be positive");
  std::vector<Formula> terms;
  for (size_t j = 0; j < phis.size(); ++j)
    terms.push_back(formulas::abs_of(formulas::affine({a}, -a * targets[j], {phis[j]})));
  if (terms.size() == 1) return terms.front();
  return formulas::max_of(std::move(terms));
}

MicrostateSandwich microstate_pressure_sandwich(const std::vector<Formula>& phis,
                                                const std::vector<double>& targets, double eps, double a, int n,
                                                int samples, RngSeed seed) {
  MicrostateSandwich out;
  out.microstate = microstate_gaussian_entropy(phis, targets, eps, n, samples, seed.derive(1));
  Formula penalty = microstate_penalty(phis, targets, a);
  out.pressure = pressure_direct(penalty, MatrixTuple::zeros(n, 0), n, samples, seed.derive(2));
  const double nn = static_cast<double>(n) * n;
  const double floor = std::min(out.microstate.value, a * eps) - std::log(2.0) / nn;
  const double slack = 3.0 * std::hypot(out.pressure.stderr, out.microstate.stderr);
  out.check = {"pressure_of_penalty_lower_bound", out.pressure.value, out.pressure.stderr, floor,
               out.pressure.value + slack >= floor};
  return out;
}

double differential_entropy(const SpectralMeasure& mu) {
  double h = 0.0;
  for (const Cell& c : mu.cells()) {
    if (c.mass <= 0.0) continue;
    if (c.is_atom()) return -kInf;
    h += c.mass * std::log((c.b - c.a) / c.mass);
  }
  return h;
}

double log_energy(const SpectralMeasure& mu) {
  if (mu.has_atoms()) return -kInf;
  std::vector<Cell> cells;
  for (const Cell& c : mu.cells())
    if (c.mass > 0.0) cells.push_back(c);
  const size_t P = cells.size();

  if (mu.kind() == SpectralMeasure::Kind::Grid) {
    // Equal cells: the pair integral depends only on the index offset.
    const double h = mu.spacing();
    const std::vector<double> m = mu.masses();
    const size_t B = m.size();
    std::vector<double> I(B);
    for (size_t k = 0; k < B; ++k) {
      double kh = static_cast<double>(k) * h;
      I[k] = (K(kh + h) + K(kh - h) - 2.0 * K(kh)) / (h * h);
    }
    double s = 0.0;
    for (size_t i = 0; i < B; ++i) {
      if (m[i] == 0.0) continue;
      double row = 0.5 * m[i] * I[0];
      for (size_t j = i + 1; j < B; ++j) row += m[j] * I[j - i];
      s += 2.0 * m[i] * row;
    }
    return s;
  }

  double s = 0.0;
  for (size_t i = 0; i < P; ++i) {
    const Cell& ci = cells[i];
    const double li = ci.b - ci.a;
    for (size_t j = i; j < P; ++j) {
      const Cell& cj = cells[j];
      const double lj = cj.b - cj.a;
      double v = ci.mass * cj.mass * cell_pair_integral(ci.a, ci.b, cj.a, cj.b) / (li * lj);
      s += (i == j) ? v : 2.0 * v;
    }
  }
  return s;
}

double log_energy_entropy(const SpectralMeasure& mu) {
  double e = log_energy(mu);
  if (e == -kInf) return -kInf;
  return e + 0.75 + 0.5 * std::log(kTwoPi);
}

CutoffJacobian cutoff_jacobian_bounds(const MatrixTuple& x, double R) {
  if (!(R > 0.0)) throw DomainError("cutoff radius must be positive");
  CutoffJacobian out;
  const int n = x.dim();
  const double nd = n;
  double logdet = 0.0;
  double diff = 0.0;
  double delta = 0.0;
  for (int j = 0; j < x.size(); ++j) {
    for (int part = 0; part < 2; ++part) {
      CMatrix p = part == 0 ? real_part(x[j]) : imag_part(x[j]);
      RVector lam = HermitianMatrix::symmetrized(p).eigenvalues();
      double inside = 0.0;
      for (int a = 0; a < n; ++a) {
        const double la = lam(a);
        const double ga = cutoff_g(la, R);
        logdet += std::log(cutoff_g_prime(la, R));
        diff += (la * la - ga * ga) / nd;
        if (std::abs(la) <= R) inside += 1.0;
        for (int b = 0; b < n; ++b) {
          if (b == a) continue;
          const double lb = lam(b);
          double q;
          if (std::abs(la - lb) <= 1e-12 * std::max(1.0, std::abs(la)))
            q = cutoff_g_prime(0.5 * (la + lb), R);
          else
            q = (ga - cutoff_g(lb, R)) / (la - lb);
          logdet += std::log(q);
        }
      }
      delta += 1.0 - inside / nd;
    }
  }
  out.lhs = logdet / (nd * nd);
  out.delta = delta;
  out.rhs = -(2.0 / R) * std::sqrt(delta) * std::sqrt(std::max(0.0, diff));
  const double tol = 1e-12;
  out.holds = out.lhs <= tol && out.lhs >= out.rhs - tol;
  return out;
}

double grid_derivative(const GridFunction& phi, double x) {
  const int P = phi.points();
  const double h = phi.spacing();
  auto node_slope = [&](int i) {
    if (i == 0) return (phi.value(1) - phi.value(0)) / h;
    if (i == P - 1) return (phi.value(P - 1) - phi.value(P - 2)) / h;
    return (phi.value(i + 1) - phi.value(i - 1)) / (2.0 * h);
  };
  if (x < phi.left() - 1e-12 || x > phi.right() + 1e-12) throw DomainError("derivative outside the grid");
  double s = std::clamp((x - phi.left()) / h, 0.0, static_cast<double>(P - 1));
  int i = std::min(static_cast<int>(s), P - 2);
  double f = s - i;
  return (1.0 - f) * node_slope(i) + f * node_slope(i + 1);
}

SpectralMeasure pushforward_gradient_map(const GridFunction& phi, const SpectralMeasure& mu0, double eps) {
  if (mu0.kind() != SpectralMeasure::Kind::Grid) throw DomainError("pushforward needs a grid measure");
  std::vector<Cell> out;
  for (const Cell& c : mu0.cells()) {
    if (c.mass <= 0.0) continue;
    double ta = c.a + eps * grid_derivative(phi, c.a);
    double tb = c.b + eps * grid_derivative(phi, c.b);
    if (!(tb > ta) || (!out.empty() && ta < out.back().b - 1e-12))
      throw DomainError("gradient map is not injective on the support");
    if (!out.empty()) ta = std::max(ta, out.back().b);
    out.push_back({ta, tb, c.mass});
  }
  double total = 0.0;
  for (const Cell& c : out) total += c.mass;
  for (Cell& c : out) c.mass /= total;
  return SpectralMeasure::pieces(std::move(out));
}

EntropyReport change_of_variables_check_1d(const GridFunction& phi, double c, const SpectralMeasure& mu0,
                                           double eps) {
  if (!(c > 0.0)) throw DomainError("semiconvexity constant must be positive");
  if (!(eps >= 0.0 && eps <= 0.5 / c + 1e-15)) throw DomainError("eps must lie in [0, 1/(2c)]");
  if (mu0.kind() != SpectralMeasure::Kind::Grid) throw DomainError("change of variables needs a grid measure");

  const double h0 = differential_entropy(mu0);
  double e_log = 0.0, e_second = 0.0, max_second = 0.0;
  for (const Cell& cell : mu0.cells()) {
    if (cell.mass <= 0.0) continue;
    double d2 = (grid_derivative(phi, cell.b) - grid_derivative(phi, cell.a)) / (cell.b - cell.a);
    max_second = std::max(max_second, std::abs(d2));
    e_log += cell.mass * std::log1p(eps * d2);
    e_second += cell.mass * d2;
  }
  SpectralMeasure pushed = pushforward_gradient_map(phi, mu0, eps);
  const double h1 = differential_entropy(pushed);

  EntropyReport r;
  r.name = "change_of_variables_1d";
  r.value = h1;
  r.error_estimate = std::abs(h1 - (h0 + e_log));
  r.inputs = {{"c", c}, {"eps", eps}, {"bins", mu0.bins()}, {"entropy_before", h0}};
  const double lower = h0 + eps * e_second - 4.0 * (c * eps) * (c * eps);
  const double tol = 1e-9 * std::max(1.0, std::abs(h1));
  r.checks.push_back({"second_derivative_within_c", max_second, 0.0, c, max_second <= c * (1.0 + 1e-9) + 1e-12});
  r.checks.push_back({"entropy_equals_jacobian_formula", h1, 0.0, h0 + e_log, std::abs(h1 - h0 - e_log) <= tol});
  r.checks.push_back({"entropy_lower_bound", h1, 0.0, lower, h1 >= lower - tol});
  return r;
}

}  // namespace freegeom
