#include "freegeom/ensembles.hpp"
#include "freegeom/pressure.hpp"
#include "freegeom/stats.hpp"

#include <algorithm>
#include <cmath>

namespace freegeom {

namespace {

CMatrix herm(const CMatrix& a) { return (a + a.adjoint()) * 0.5; }

// Cutoff of a stage control: F_r on real and imaginary parts.
CMatrix clamp_control(const CMatrix& u, double r) { return truncate_parts(u, r); }

// Gradient with respect to u of Re tr_n(g^* clamp(u)).
CMatrix clamp_adjoint(const CMatrix& u, double r, const CMatrix& g) {
  auto f = [r](double t) { return clamp_scalar(t, r); };
  auto fp = [r](double t) { return std::abs(t) < r ? 1.0 : (std::abs(t) == r ? 0.5 : 0.0); };
  CMatrix out = CMatrix::Zero(u.rows(), u.cols());
  const CMatrix parts[2] = {real_part(u), imag_part(u)};
  const CMatrix gparts[2] = {real_part(g), imag_part(g)};
  for (int p = 0; p < 2; ++p) {
    auto spec = HermitianMatrix::symmetrized(parts[p]).spectrum();
    CMatrix d;
    if (spec.values.size() == 0 || (spec.values(0) >= -r && spec.values(spec.values.size() - 1) <= r))
      d = gparts[p];
    else
      d = herm(spectral_derivative_adjoint(spec, f, fp, gparts[p]));
    out += p == 0 ? d : CMatrix(cplx(0.0, 1.0) * d);
  }
  return out;
}

struct PathRecord {
  std::vector<std::vector<CMatrix>> prev;  // state before each stage
  std::vector<std::vector<CMatrix>> u;     // pre-cutoff controls
  std::vector<std::vector<CMatrix>> beta;  // controls
};

}  // namespace

std::vector<CMatrix> ControlPolicy::control(int i, const std::vector<CMatrix>& state) const {
  std::vector<CMatrix> out;
  for (int j = 0; j < coords; ++j) {
    CMatrix u = a[static_cast<size_t>(i)][static_cast<size_t>(j)];
    double bij = b[static_cast<size_t>(i)][static_cast<size_t>(j)];
    if (bij != 0.0) u += bij * state[static_cast<size_t>(j)];
    out.push_back(clamp_control(u, radius));
  }
  return out;
}

ControlResult boue_dupuis_solve(const Formula& phi, const MatrixTuple& Y, int n, int k, double r, int iters,
                                RngSeed seed, const ControlOptions& opts) {
  if (k < 1) throw DomainError("control solver needs k >= 1");
  if (!(r > 0.0)) throw DomainError("control radius must be positive");
  if (!Y.empty() && Y.dim() != n) throw ShapeError("Y has the wrong dimension");
  const int m = std::max(phi.arity() - Y.size(), 0);
  Evaluator ev(phi, n, opts.eval);

  ControlResult res;
  ControlPolicy& pol = res.policy;
  pol.stages = k;
  pol.coords = m;
  pol.radius = r;
  pol.policy = opts.policy;
  pol.a.assign(static_cast<size_t>(k), std::vector<CMatrix>(static_cast<size_t>(m), CMatrix::Zero(n, n)));
  pol.b.assign(static_cast<size_t>(k), std::vector<double>(static_cast<size_t>(m), 0.0));

  std::vector<CMatrix> xfull(static_cast<size_t>(m + Y.size()), CMatrix::Zero(n, n));
  for (int j = 0; j < Y.size(); ++j) xfull[static_cast<size_t>(m + j)] = Y[j];

  const double dt = 1.0 / k;
  const double sdt = std::sqrt(dt);

  // One path: returns the cost and, when requested, accumulates parameter gradients.
  auto run_path = [&](const ControlPolicy& p, Rng& rng, std::vector<std::vector<CMatrix>>* ga,
                      std::vector<std::vector<double>>* gb, std::vector<double>* state_sq) {
    PathRecord rec;
    std::vector<CMatrix> x(static_cast<size_t>(m), CMatrix::Zero(n, n));
    double control_cost = 0.0;
    for (int i = 0; i < k; ++i) {
      rec.prev.push_back(x);
      std::vector<CMatrix> us, bs;
      for (int j = 0; j < m; ++j) {
        CMatrix u = p.a[i][j];
        if (p.b[i][j] != 0.0) u += p.b[i][j] * x[j];
        CMatrix beta = clamp_control(u, r);
        control_cost += 0.5 * dt * norm2_sq(beta);
        us.push_back(std::move(u));
        bs.push_back(std::move(beta));
      }
      for (int j = 0; j < m; ++j) x[j] += sdt * sample_ginibre(n, rng) + dt * bs[j];
      rec.u.push_back(std::move(us));
      rec.beta.push_back(std::move(bs));
    }
    for (int j = 0; j < m; ++j) xfull[static_cast<size_t>(j)] = x[j];
    if (!ga) return ev.eval(xfull).value + control_cost;

    SlotGradient g;
    double value = ev.eval_with_gradient(xfull, g).value;
    std::vector<CMatrix> G(g.begin(), g.begin() + m);
    for (int i = k - 1; i >= 0; --i) {
      for (int j = 0; j < m; ++j) {
        CMatrix gbeta = dt * (G[j] + rec.beta[i][j]);
        CMatrix gu = clamp_adjoint(rec.u[i][j], r, gbeta);
        (*ga)[i][j] += herm(gu);
        if (p.policy == PolicyClass::AffineFeedback) {
          (*gb)[i][j] += normalized_inner(rec.prev[i][j], gu).real();
          (*state_sq)[static_cast<size_t>(i)] += norm2_sq(rec.prev[i][j]);
          G[j] += p.b[i][j] * gu;
        }
      }
    }
    return value + control_cost;
  };

  if (m > 0 && iters > 0) {
    ControlPolicy avg = pol;
    int avg_count = 0;
    std::vector<std::vector<CMatrix>> gsum_a(static_cast<size_t>(k),
                                             std::vector<CMatrix>(static_cast<size_t>(m), CMatrix::Zero(n, n)));
    std::vector<std::vector<double>> gsum_b(static_cast<size_t>(k), std::vector<double>(static_cast<size_t>(m), 0.0));
    int gsum_count = 0;
    const int window_start = iters - std::max(1, iters / 10);
    const int avg_start = iters / 2;
    for (int it = 0; it < iters; ++it) {
      std::vector<std::vector<CMatrix>> ga(static_cast<size_t>(k),
                                           std::vector<CMatrix>(static_cast<size_t>(m), CMatrix::Zero(n, n)));
      std::vector<std::vector<double>> gb(static_cast<size_t>(k), std::vector<double>(static_cast<size_t>(m), 0.0));
      std::vector<double> state_sq(static_cast<size_t>(k), 0.0);
      Rng rng(seed.derive(static_cast<std::uint64_t>(it) + 1000));
      for (int s = 0; s < opts.batch; ++s) run_path(pol, rng, &ga, &gb, &state_sq);
      const double inv_b = 1.0 / opts.batch;
      const double eta = opts.step / std::sqrt(static_cast<double>(it + 1));
      // Preconditioning: stage controls enter the cost with weight 1/k, feedback
      // coefficients additionally with the running state's second moment.
      for (int i = 0; i < k; ++i) {
        double xsq = state_sq[static_cast<size_t>(i)] * inv_b / m;
        for (int j = 0; j < m; ++j) {
          CMatrix step_a = (k * inv_b) * ga[i][j];
          double step_b = 0.0;
          if (opts.policy == PolicyClass::AffineFeedback && i > 0 && xsq > 1e-12)
            step_b = k * inv_b * gb[i][j] / xsq;
          if (it >= window_start) {
            gsum_a[i][j] += step_a;
            gsum_b[i][j] += step_b;
          }
          pol.a[i][j] = truncate_FR(HermitianMatrix::symmetrized(pol.a[i][j] - eta * step_a), r).matrix();
          if (opts.policy == PolicyClass::AffineFeedback) pol.b[i][j] -= eta * step_b;
        }
      }
      if (it >= window_start) ++gsum_count;
      if (it >= avg_start) {
        ++avg_count;
        double w = 1.0 / avg_count;
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < m; ++j) {
            avg.a[i][j] = (1.0 - w) * avg.a[i][j] + w * pol.a[i][j];
            avg.b[i][j] = (1.0 - w) * avg.b[i][j] + w * pol.b[i][j];
          }
      }
    }
    double gn = 0.0;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < m; ++j) {
        gn += norm2_sq(gsum_a[i][j] / gsum_count) / k;
        double bb = gsum_b[i][j] / gsum_count;
        gn += bb * bb / k;
      }
    res.gradient_norm = std::sqrt(gn);
    pol.a = avg.a;
    pol.b = avg.b;
  }

  // Fresh paths for the reported value.
  std::vector<double> costs;
  const int evals = m == 0 ? 1 : opts.eval_samples;
  Rng rng(seed.derive(7));
  for (int s = 0; s < evals; ++s) costs.push_back(run_path(pol, rng, nullptr, nullptr, nullptr));
  res.estimate.value = stats::mean(costs);
  res.estimate.stderr = stats::stderr_of_mean(costs);
  res.estimate.n = n;
  res.estimate.samples = evals;
  res.estimate.method = PressureMethod::Control;
  res.estimate.converged = m == 0 || iters == 0 || res.gradient_norm <= opts.tolerance;
  return res;
}

Formula control_step_T(const Formula& phi, double t, double r, int m) {
  if (!(t > 0.0)) throw DomainError("control step needs t > 0");
  if (!(r > 0.0)) throw DomainError("control step needs r > 0");
  if (m < 0) m = phi.arity();
  std::vector<int> xs;
  for (int j = 0; j < m; ++j) xs.push_back(j);
  Formula inner = Formula::heat(t, xs, phi);
  const int base = std::max(phi.fresh_var(), m);
  std::vector<int> betas;
  for (int j = 0; j < m; ++j) {
    betas.push_back(base + j);
    inner = Formula::shift(j, base + j, t, inner);
  }
  Formula cost = m == 0 ? inner : formulas::affine({1.0, t}, 0.0, {inner, formulas::half_norm_sq(betas)});
  for (int j = 0; j < m; ++j) cost = Formula::inf_ball(r, betas[static_cast<size_t>(j)], cost, true);
  return cost;
}

Formula control_composition(const Formula& phi, int k, double r, int m) {
  if (k < 1) throw DomainError("composition needs k >= 1");
  if (m < 0) m = phi.arity();
  Formula f = phi;
  for (int i = 0; i < k; ++i) f = control_step_T(f, 1.0 / k, r, m);
  return f;
}

ScanResult discretization_error_scan(const Formula& phi, int n, double r, const std::vector<int>& k_list,
                                     RngSeed seed, const ScanOptions& opts) {
  ScanResult out;
  const int m = phi.arity();
  out.lipschitz = m == 0 ? 0.0 : lipschitz_constant(phi);
  if (r < out.lipschitz) throw DomainError("scan requires r >= L(phi)");
  out.direct = pressure_direct(phi, MatrixTuple::zeros(n, 0), n, std::max(opts.direct_samples, 100), seed.derive(1),
                               opts.pressure);
  out.truncation_term = m == 0 ? 0.0 : truncation_l2(n, 3.0, opts.truncation_samples, seed.derive(2));
  std::vector<double> lk, lg;
  for (size_t idx = 0; idx < k_list.size(); ++idx) {
    int k = k_list[idx];
    ControlResult cr = boue_dupuis_solve(phi, MatrixTuple::zeros(n, 0), n, k, r, opts.control_iters,
                                         seed.derive(100 + static_cast<std::uint64_t>(k)), opts.control);
    ScanRow row;
    row.k = k;
    row.control = cr.estimate.value;
    row.control_stderr = cr.estimate.stderr;
    row.gap = std::abs(cr.estimate.value - out.direct.value);
    double se = std::sqrt(cr.estimate.stderr * cr.estimate.stderr + out.direct.stderr * out.direct.stderr);
    row.bound = out.lipschitz * std::sqrt(static_cast<double>(m)) * out.truncation_term +
                out.lipschitz * out.lipschitz / k + 3.0 * se;
    row.within_bound = row.gap <= row.bound;
    if (!out.rows.empty()) {
      const auto& prev = out.rows.back();
      double se2 = std::sqrt(se * se + prev.control_stderr * prev.control_stderr);
      if (k > prev.k && row.gap > prev.gap + 3.0 * se2) out.monotone = false;
    }
    if (row.gap > 3.0 * se) {
      lk.push_back(std::log(static_cast<double>(k)));
      lg.push_back(std::log(row.gap));
    }
    out.rows.push_back(row);
  }
  if (lk.size() >= 2) {
    out.exponent = -stats::slope(lk, lg);
    out.exponent_valid = true;
  }
  return out;
}

}  // namespace freegeom
