#include "freegeom/pressure.hpp"

#include "freegeom/ensembles.hpp"
#include "freegeom/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace freegeom {

std::string to_string(PressureMethod m) { return m == PressureMethod::Direct ? "direct" : "control"; }

namespace {

struct Batch {
  std::vector<std::vector<CMatrix>> w;       // samples
  std::vector<double> base;                  // log (Ginibre density / proposal density)
  std::vector<double> f;                     // objective values
  std::vector<std::vector<CMatrix>> grad;    // objective gradients (optional)
};

double tuple_norm2_sq(const std::vector<CMatrix>& x) {
  double s = 0.0;
  for (const auto& m : x) s += norm2_sq(m);
  return s;
}

Batch draw_batch(const TupleObjective& f, int n, int m, const Proposal& q, int count, bool with_grad, Rng& rng) {
  Batch b;
  const double n2 = static_cast<double>(n) * n;
  const double log_s = std::log(q.scale);
  b.w.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::vector<CMatrix> z;
    z.reserve(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) z.push_back(sample_ginibre(n, rng));
    double zz = tuple_norm2_sq(z);
    std::vector<CMatrix> w(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) w[j] = q.mean[j] + q.scale * z[j];
    double ww = tuple_norm2_sq(w);
    b.base.push_back(-0.5 * n2 * ww + 0.5 * n2 * zz + 2.0 * m * n2 * log_s);
    if (with_grad) {
      std::vector<CMatrix> g;
      b.f.push_back(f(w, &g));
      if (g.size() != static_cast<size_t>(m)) g.assign(static_cast<size_t>(m), CMatrix::Zero(n, n));
      b.grad.push_back(std::move(g));
    } else {
      b.f.push_back(f(w, nullptr));
    }
    b.w.push_back(std::move(w));
  }
  return b;
}

std::vector<double> log_weights(const Batch& b, double beta, int n) {
  const double n2 = static_cast<double>(n) * n;
  std::vector<double> lw(b.f.size());
  for (size_t i = 0; i < lw.size(); ++i) {
    double v = b.base[i] - beta * n2 * b.f[i];
    lw[i] = std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  }
  return lw;
}

std::vector<double> normalized(const std::vector<double>& lw) {
  double mx = *std::max_element(lw.begin(), lw.end());
  std::vector<double> w(lw.size());
  double s = 0.0;
  for (size_t i = 0; i < lw.size(); ++i) {
    w[i] = std::exp(lw[i] - mx);
    s += w[i];
  }
  for (double& x : w) x /= s;
  return w;
}

// Moment fit of the tilted measure at inverse temperature beta. The mean uses the control
// variate W + beta grad f, which has mean zero under the tilted measure.
Proposal refit(const Batch& b, const std::vector<double>& lw, double beta, int n, int m, bool with_grad) {
  std::vector<double> w = normalized(lw);
  Proposal q;
  q.mean.assign(static_cast<size_t>(m), CMatrix::Zero(n, n));
  std::vector<CMatrix> cbar(static_cast<size_t>(m), CMatrix::Zero(n, n));
  for (size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    for (int j = 0; j < m; ++j) {
      q.mean[j] += w[i] * b.w[i][j];
      if (with_grad) cbar[j] += w[i] * (b.w[i][j] + beta * b.grad[i][j]);
    }
  }
  double spread = 0.0;
  for (size_t i = 0; i < w.size(); ++i)
    for (int j = 0; j < m; ++j) spread += w[i] * norm2_sq(b.w[i][j] - q.mean[j]);
  if (with_grad) {
    double cov = 0.0, var = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
      if (w[i] == 0.0) continue;
      for (int j = 0; j < m; ++j) {
        CMatrix dc = b.w[i][j] + beta * b.grad[i][j] - cbar[j];
        cov += w[i] * normalized_inner(b.w[i][j] - q.mean[j], dc).real();
        var += w[i] * norm2_sq(dc);
      }
    }
    double lambda = var > 0.0 ? cov / var : 0.0;
    for (int j = 0; j < m; ++j) q.mean[j] -= lambda * cbar[j];
  }
  double s2 = spread / (2.0 * m);
  q.scale = std::clamp(std::sqrt(std::max(s2, 0.0)), 0.05, 20.0);
  return q;
}

void require_finite_weights(const std::vector<double>& lw) {
  for (double v : lw)
    if (std::isfinite(v)) return;
  throw UnderflowError("all importance weights underflowed; use more samples or a smaller n");
}

}  // namespace

TiltedSampler adapt_proposal(const TupleObjective& f, int n, int m, const PressureOptions& opts, RngSeed seed) {
  TiltedSampler out;
  out.proposal.mean.assign(static_cast<size_t>(m), CMatrix::Zero(n, n));
  out.proposal.scale = 1.0;
  if (!opts.adaptive || m == 0) return out;
  const int N = std::max(opts.pilot_samples, 200);
  const double target = opts.ess_target * N;
  double beta = 0.0;
  out.reached_target = false;
  // The proposal with the best ESS at beta = 1 so far; stage 0 is the untilted Ginibre proposal.
  Proposal best = out.proposal;
  double best_ess = -1.0;
  int stalled = 0;
  for (int stage = 0; stage < opts.max_stages; ++stage) {
    Rng rng(seed.derive(static_cast<std::uint64_t>(stage)));
    Batch b = draw_batch(f, n, m, out.proposal, N, opts.use_gradients, rng);
    ++out.stages;
    auto ess_at = [&](double bt) { return stats::effective_sample_size(log_weights(b, bt, n)); };
    const double ess1 = ess_at(1.0);
    const bool improved = ess1 > best_ess;
    if (improved) {
      best_ess = ess1;
      best = out.proposal;
    }
    if (ess1 >= target) {
      out.reached_target = true;
      break;
    }
    double next = beta;
    if (beta < 1.0) {
      if (ess_at(beta) >= target) {
        double lo = beta, hi = 1.0;
        for (int it = 0; it < 40; ++it) {
          double mid = 0.5 * (lo + hi);
          if (ess_at(mid) >= target)
            lo = mid;
          else
            hi = mid;
        }
        next = lo;
      }
    }
    // Tempering progress counts as progress even while the ESS at beta = 1 stays flat.
    if (improved || next > beta + 1e-9)
      stalled = 0;
    else if (++stalled >= opts.patience)
      break;
    auto lw = log_weights(b, next, n);
    require_finite_weights(lw);
    out.proposal = refit(b, lw, next, n, m, opts.use_gradients);
    beta = next;
  }
  if (!out.reached_target) out.proposal = best;
  return out;
}

PressureEstimate pressure_of(const TupleObjective& f, int n, int m, int samples, RngSeed seed,
                             const PressureOptions& opts) {
  if (n < 1) throw DomainError("pressure: n must be positive");
  if (m < 0) throw DomainError("pressure: negative coordinate count");
  PressureEstimate est;
  est.n = n;
  est.samples = samples;
  est.method = PressureMethod::Direct;
  if (m == 0) {
    est.value = f({}, nullptr);
    est.ess = samples;
    return est;
  }
  if (samples < 2) throw DomainError("pressure: need at least two samples");
  TiltedSampler ts = adapt_proposal(f, n, m, opts, seed.derive(1));
  Rng rng(seed.derive(2));
  Batch b = draw_batch(f, n, m, ts.proposal, samples, false, rng);
  auto lw = log_weights(b, 1.0, n);
  require_finite_weights(lw);
  const double n2 = static_cast<double>(n) * n;
  double lme = stats::log_mean_exp(lw);
  est.value = -lme / n2;
  // Delta method: relative standard error of the mean weight.
  double mx = *std::max_element(lw.begin(), lw.end());
  std::vector<double> w(lw.size());
  for (size_t i = 0; i < lw.size(); ++i) w[i] = std::exp(lw[i] - mx);
  double mw = stats::mean(w);
  est.stderr = stats::stderr_of_mean(w) / mw / n2;
  est.ess = stats::effective_sample_size(lw);
  est.converged = ts.reached_target;
  return est;
}

PressureEstimate pressure_direct(const Formula& phi, const MatrixTuple& Y, int n, int samples, RngSeed seed,
                                 const PressureOptions& opts) {
  if (samples < 100) throw DomainError("pressure_direct needs at least 100 samples");
  if (!Y.empty() && Y.dim() != n) throw ShapeError("Y has the wrong dimension");
  const int m = std::max(phi.arity() - Y.size(), 0);
  auto ev = std::make_shared<Evaluator>(phi, n, opts.eval);
  std::vector<CMatrix> x(static_cast<size_t>(m + Y.size()), CMatrix::Zero(n, n));
  for (int j = 0; j < Y.size(); ++j) x[static_cast<size_t>(m + j)] = Y[j];
  TupleObjective f = [ev, x, m](const std::vector<CMatrix>& z, std::vector<CMatrix>* grad) mutable {
    for (int j = 0; j < m; ++j) x[static_cast<size_t>(j)] = z[static_cast<size_t>(j)];
    if (!grad) return ev->eval(x).value;
    SlotGradient g;
    double v = ev->eval_with_gradient(x, g).value;
    grad->assign(g.begin(), g.begin() + m);
    return v;
  };
  return pressure_of(f, n, m, samples, seed, opts);
}

ChainResult pressure_chain_check(const Formula& phi, int m1, int m2, const MatrixTuple& W, int n, int samples,
                                 RngSeed seed, const ChainOptions& opts) {
  if (m1 < 0 || m2 < 0) throw DomainError("chain check: negative block size");
  if (phi.arity() > m1 + m2 + W.size()) throw DomainError("chain check: formula has more free variables than slots");
  ChainResult out;
  MatrixTuple joint_y = W;
  if (W.empty()) joint_y = MatrixTuple::zeros(n, 0);
  auto ev = std::make_shared<Evaluator>(phi, n, opts.pressure.eval);
  const int total = m1 + m2 + W.size();

  // Joint pressure over (x, y).
  {
    std::vector<CMatrix> x(static_cast<size_t>(total), CMatrix::Zero(n, n));
    for (int j = 0; j < W.size(); ++j) x[static_cast<size_t>(m1 + m2 + j)] = W[j];
    TupleObjective f = [ev, x, m = m1 + m2](const std::vector<CMatrix>& z, std::vector<CMatrix>* grad) mutable {
      for (int j = 0; j < m; ++j) x[static_cast<size_t>(j)] = z[static_cast<size_t>(j)];
      if (!grad) return ev->eval(x).value;
      SlotGradient g;
      double v = ev->eval_with_gradient(x, g).value;
      grad->assign(g.begin(), g.begin() + m);
      return v;
    };
    out.joint = pressure_of(f, n, m1 + m2, samples, seed.derive(10), opts.pressure);
  }

  // Inner pressure over x as a function of y, with a proposal adapted at y = 0 and fixed draws.
  const double n2 = static_cast<double>(n) * n;
  std::vector<CMatrix> base_x(static_cast<size_t>(total), CMatrix::Zero(n, n));
  for (int j = 0; j < W.size(); ++j) base_x[static_cast<size_t>(m1 + m2 + j)] = W[j];

  auto inner_at = [ev, base_x, m1](const std::vector<CMatrix>& xs, std::vector<CMatrix>* grad) mutable {
    for (int j = 0; j < m1; ++j) base_x[static_cast<size_t>(j)] = xs[static_cast<size_t>(j)];
    if (!grad) return ev->eval(base_x).value;
    SlotGradient g;
    double v = ev->eval_with_gradient(base_x, g).value;
    grad->assign(g.begin(), g.begin() + m1);
    return v;
  };
  TiltedSampler inner = adapt_proposal(inner_at, n, m1, opts.pressure, seed.derive(20));

  struct InnerDraws {
    std::vector<std::vector<CMatrix>> x;
    std::vector<double> base;
  };
  auto draws = std::make_shared<InnerDraws>();
  {
    Rng rng(seed.derive(21));
    const double log_s = std::log(inner.proposal.scale);
    const int count = m1 == 0 ? 1 : opts.inner_samples;
    for (int i = 0; i < count; ++i) {
      std::vector<CMatrix> xs;
      double zz = 0.0, ww = 0.0;
      for (int j = 0; j < m1; ++j) {
        CMatrix z = sample_ginibre(n, rng);
        zz += norm2_sq(z);
        xs.push_back(inner.proposal.mean[j] + inner.proposal.scale * z);
        ww += norm2_sq(xs.back());
      }
      draws->x.push_back(std::move(xs));
      draws->base.push_back(-0.5 * n2 * ww + 0.5 * n2 * zz + 2.0 * m1 * n2 * log_s);
    }
  }

  double inner_rel_se = 0.0;
  TupleObjective g = [ev, draws, base_x, m1, m2, n, n2, &inner_rel_se](const std::vector<CMatrix>& y,
                                                                       std::vector<CMatrix>* grad) mutable {
    for (int j = 0; j < m2; ++j) base_x[static_cast<size_t>(m1 + j)] = y[static_cast<size_t>(j)];
    const size_t S = draws->x.size();
    std::vector<double> lw(S);
    std::vector<SlotGradient> grads(grad ? S : 0);
    for (size_t i = 0; i < S; ++i) {
      for (int j = 0; j < m1; ++j) base_x[static_cast<size_t>(j)] = draws->x[i][static_cast<size_t>(j)];
      double v = grad ? ev->eval_with_gradient(base_x, grads[i]).value : ev->eval(base_x).value;
      lw[i] = draws->base[i] - n2 * v;
    }
    require_finite_weights(lw);
    double lme = stats::log_mean_exp(lw);
    std::vector<double> w = normalized(lw);
    double s2 = 0.0;
    for (double x : w) s2 += x * x;
    inner_rel_se = std::sqrt(std::max(s2 - 1.0 / static_cast<double>(S), 0.0));
    if (grad) {
      grad->assign(static_cast<size_t>(m2), CMatrix::Zero(n, n));
      for (size_t i = 0; i < S; ++i)
        for (int j = 0; j < m2; ++j) (*grad)[static_cast<size_t>(j)] += w[i] * grads[i][static_cast<size_t>(m1 + j)];
    }
    return -lme / n2;
  };
  out.nested = pressure_of(g, n, m2, samples, seed.derive(30), opts.pressure);
  // The fixed inner draws contribute an error shared by every outer point.
  out.nested.stderr = std::sqrt(out.nested.stderr * out.nested.stderr + (inner_rel_se / n2) * (inner_rel_se / n2));
  return out;
}

double truncation_l2(int n, double R, int samples, RngSeed seed) {
  Rng rng(seed);
  double s = 0.0;
  for (int i = 0; i < samples; ++i) {
    CMatrix z = sample_ginibre(n, rng);
    s += norm2_sq(truncate_parts(z, R) - z);
  }
  return std::sqrt(s / std::max(samples, 1));
}

std::string pressure_report_json(const Formula& phi, int k, double r, const PressureEstimate& est) {
  nlohmann::json j;
  j["formula"] = nlohmann::json::parse(to_json(phi));
  j["n"] = est.n;
  j["k"] = k;
  j["r"] = r;
  j["method"] = to_string(est.method);
  j["value"] = est.value;
  j["stderr"] = est.stderr;
  j["converged"] = est.converged;
  return j.dump(2);
}

}  // namespace freegeom
