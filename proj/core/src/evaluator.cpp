#include "freegeom/evaluator.hpp"

#include "freegeom/ensembles.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>

namespace freegeom {

namespace {

std::uint64_t child_path(std::uint64_t path, std::uint64_t i) {
  return splitmix64(path ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
}

CMatrix herm(const CMatrix& a) { return (a + a.adjoint()) * 0.5; }

}  // namespace

struct Evaluator::Grad {
  std::vector<CMatrix> g;

  explicit Grad(size_t slots) : g(slots) {}

  void add(int slot, double w, const CMatrix& m) {
    auto& t = g[static_cast<size_t>(slot)];
    if (t.size() == 0)
      t = w * m;
    else
      t += w * m;
  }

  void merge(const Grad& o, double w, int skip = -1) {
    for (size_t s = 0; s < g.size(); ++s)
      if (static_cast<int>(s) != skip && o.g[s].size() != 0) add(static_cast<int>(s), w, o.g[s]);
  }

  void clear() {
    for (auto& m : g) m.resize(0, 0);
  }
};

Evaluator::Evaluator(Formula phi, int n, EvalOptions options) : phi_(std::move(phi)), n_(n), opts_(options) {
  if (n < 1) throw DomainError("matrix dimension must be positive");
  if (opts_.heat_samples < 1) throw DomainError("heat_samples must be positive");
  if (opts_.quantifier.restarts < 1 || opts_.quantifier.max_steps < 0)
    throw DomainError("invalid quantifier budget");
}

void Evaluator::prepare_env(const std::vector<CMatrix>& x, std::vector<CMatrix>& env) const {
  if (static_cast<int>(x.size()) < phi_.arity())
    throw DomainError("assignment does not cover the formula's free variables");
  env.assign(static_cast<size_t>(std::max(phi_.slot_count(), 1)), CMatrix::Zero(n_, n_));
  for (int v : phi_.free_vars()) {
    const auto& m = x[static_cast<size_t>(v)];
    if (m.rows() != n_ || m.cols() != n_) throw ShapeError("assignment matrix has the wrong dimension");
    env[static_cast<size_t>(v)] = m;
  }
}

EvalResult Evaluator::eval(const std::vector<CMatrix>& x) {
  std::vector<CMatrix> env;
  prepare_env(x, env);
  NodeValue v = eval_node(phi_, env, 0, nullptr, 1.0);
  return {v.value, std::sqrt(std::max(v.variance, 0.0)), v.unconverged};
}

EvalResult Evaluator::eval_with_gradient(const std::vector<CMatrix>& x, SlotGradient& grad) {
  std::vector<CMatrix> env;
  prepare_env(x, env);
  Grad g(env.size());
  NodeValue v = eval_node(phi_, env, 0, &g, 1.0);
  grad.assign(x.size(), CMatrix());
  for (size_t j = 0; j < x.size(); ++j) {
    if (j < g.g.size() && g.g[j].size() != 0)
      grad[j] = g.g[j];
    else
      grad[j] = CMatrix::Zero(n_, n_);
  }
  return {v.value, std::sqrt(std::max(v.variance, 0.0)), v.unconverged};
}

Evaluator::NodeValue Evaluator::eval_node(const Formula& f, std::vector<CMatrix>& env, std::uint64_t path,
                                          Grad* grad, double weight) {
  return std::visit(
      [&](const auto& p) -> NodeValue {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ResolventTraceNode>) return eval_resolvent(p, env, grad, weight);
        if constexpr (std::is_same_v<T, PolynomialTraceNode>) return eval_polynomial(p, env, grad, weight);
        if constexpr (std::is_same_v<T, ConnectiveNode>) return eval_connective(p, env, path, grad, weight);
        if constexpr (std::is_same_v<T, BallNode>) return eval_ball(p, env, path, grad, weight);
        if constexpr (std::is_same_v<T, HeatSubNode>) return eval_heat(p, env, path, grad, weight);
        if constexpr (std::is_same_v<T, ShiftNode>) return eval_shift(p, env, path, grad, weight);
        return {};
      },
      f.node().payload);
}

Evaluator::NodeValue Evaluator::eval_resolvent(const ResolventTraceNode& p, const std::vector<CMatrix>& env,
                                               Grad* grad, double weight) {
  const CMatrix eye = CMatrix::Identity(n_, n_);
  std::map<std::pair<int, int>, CMatrix> res;
  std::map<std::pair<int, int>, CMatrix> kacc;
  auto resolvent = [&](const ResolventLetter& l) -> const CMatrix& {
    auto key = std::make_pair(l.var, static_cast<int>(l.part));
    auto it = res.find(key);
    if (it != res.end()) return it->second;
    const CMatrix& x = env[static_cast<size_t>(l.var)];
    CMatrix h = l.part == Part::Re ? real_part(x) : imag_part(x);
    CMatrix m = h + cplx(0.0, 1.0) * eye;
    CMatrix r = n_ == 1 ? CMatrix::Constant(1, 1, 1.0 / m(0, 0)) : CMatrix(m.partialPivLu().inverse());
    return res.emplace(key, std::move(r)).first->second;
  };

  double value = 0.0;
  for (const auto& mono : p.terms) {
    const size_t k = mono.letters.size();
    std::vector<CMatrix> letters;
    letters.reserve(k);
    for (const auto& l : mono.letters) {
      const CMatrix& r = resolvent(l);
      letters.push_back(l.adjoint ? CMatrix(r.adjoint()) : r);
    }
    std::vector<CMatrix> pre(k + 1), suf(k + 1);
    pre[0] = eye;
    for (size_t l = 0; l < k; ++l) pre[l + 1] = pre[l] * letters[l];
    value += (mono.coeff * tr_n(pre[k])).real();
    if (!grad) continue;
    suf[k] = eye;
    for (size_t l = k; l-- > 0;) suf[l] = letters[l] * suf[l + 1];
    for (size_t l = 0; l < k; ++l) {
      CMatrix c = suf[l + 1] * pre[l];
      CMatrix kl = -mono.coeff * (letters[l] * c * letters[l]);
      auto key = std::make_pair(mono.letters[l].var, static_cast<int>(mono.letters[l].part));
      auto it = kacc.find(key);
      if (it == kacc.end())
        kacc.emplace(key, std::move(kl));
      else
        it->second += kl;
    }
  }
  if (grad) {
    for (const auto& [key, k] : kacc) {
      CMatrix h = herm(k);
      if (key.second == static_cast<int>(Part::Re))
        grad->add(key.first, weight, h);
      else
        grad->add(key.first, weight, cplx(0.0, 1.0) * h);
    }
  }
  return {value, 0.0, false};
}

Evaluator::NodeValue Evaluator::eval_polynomial(const PolynomialTraceNode& p, const std::vector<CMatrix>& env,
                                                Grad* grad, double weight) {
  const CMatrix eye = CMatrix::Identity(n_, n_);
  double value = 0.0;
  for (const auto& mono : p.terms) {
    const size_t k = mono.letters.size();
    std::vector<CMatrix> letters;
    letters.reserve(k);
    for (const auto& l : mono.letters) {
      const CMatrix& x = env[static_cast<size_t>(l.var)];
      letters.push_back(l.adjoint ? CMatrix(x.adjoint()) : x);
    }
    std::vector<CMatrix> pre(k + 1), suf(k + 1);
    pre[0] = eye;
    for (size_t l = 0; l < k; ++l) pre[l + 1] = pre[l] * letters[l];
    value += (mono.coeff * tr_n(pre[k])).real();
    if (!grad) continue;
    suf[k] = eye;
    for (size_t l = k; l-- > 0;) suf[l] = letters[l] * suf[l + 1];
    for (size_t l = 0; l < k; ++l) {
      CMatrix m = mono.coeff * (suf[l + 1] * pre[l]);
      if (mono.letters[l].adjoint)
        grad->add(mono.letters[l].var, weight, m);
      else
        grad->add(mono.letters[l].var, weight, m.adjoint());
    }
  }
  return {value, 0.0, false};
}

Evaluator::NodeValue Evaluator::eval_connective(const ConnectiveNode& p, std::vector<CMatrix>& env,
                                                std::uint64_t path, Grad* grad, double weight) {
  switch (p.fn) {
    case ConnectiveFn::Constant:
      return {p.params[0], 0.0, false};
    case ConnectiveFn::Affine: {
      NodeValue out{p.params.back(), 0.0, false};
      for (size_t i = 0; i < p.args.size(); ++i) {
        double w = p.params[i];
        NodeValue v = eval_node(p.args[i], env, child_path(path, i), grad, weight * w);
        out.value += w * v.value;
        out.variance += w * w * v.variance;
        out.unconverged = out.unconverged || v.unconverged;
      }
      return out;
    }
    default:
      break;
  }

  std::vector<NodeValue> vals;
  std::vector<Grad> grads;
  for (size_t i = 0; i < p.args.size(); ++i) {
    Grad* g = nullptr;
    if (grad) {
      grads.emplace_back(env.size());
      g = &grads.back();
    }
    vals.push_back(eval_node(p.args[i], env, child_path(path, i), g, 1.0));
  }
  bool unconverged = false;
  for (const auto& v : vals) unconverged = unconverged || v.unconverged;

  size_t pick = 0;
  double scale = 1.0;
  double value = 0.0;
  switch (p.fn) {
    case ConnectiveFn::Max:
    case ConnectiveFn::Min: {
      for (size_t i = 1; i < vals.size(); ++i) {
        bool better = p.fn == ConnectiveFn::Max ? vals[i].value > vals[pick].value : vals[i].value < vals[pick].value;
        if (better) pick = i;
      }
      value = vals[pick].value;
      break;
    }
    case ConnectiveFn::Abs:
      value = std::abs(vals[0].value);
      scale = vals[0].value >= 0.0 ? 1.0 : -1.0;
      break;
    case ConnectiveFn::Clamp: {
      double v = vals[0].value;
      value = std::clamp(v, p.params[0], p.params[1]);
      scale = (v > p.params[0] && v < p.params[1]) ? 1.0 : 0.0;
      break;
    }
    default:
      break;
  }
  if (grad && scale != 0.0) grad->merge(grads[pick], weight * scale);
  return {value, vals[pick].variance, unconverged};
}

Evaluator::NodeValue Evaluator::eval_ball(const BallNode& p, std::vector<CMatrix>& env, std::uint64_t path,
                                          Grad* grad, double weight) {
  const double sign = p.sup ? 1.0 : -1.0;
  const double r = p.radius;
  const size_t var = static_cast<size_t>(p.var);
  const std::uint64_t body_path = child_path(path, 0);
  const auto& budget = opts_.quantifier;

  auto project = [&](const CMatrix& y) -> CMatrix {
    if (p.selfadjoint) return truncate_FR(HermitianMatrix::symmetrized(y), r).matrix();
    return project_op_ball(y, r);
  };

  struct Point {
    CMatrix y;
    double f = 0.0;  // signed objective
    NodeValue v;
    Grad g{0};
    CMatrix dir;     // ascent direction for the signed objective
  };

  auto evaluate = [&](const CMatrix& y) {
    Point pt;
    pt.y = y;
    pt.g = Grad(env.size());
    env[var] = y;
    pt.v = eval_node(p.body, env, body_path, &pt.g, 1.0);
    pt.f = sign * pt.v.value;
    CMatrix d;
    if (opts_.gradients == GradientMode::FiniteDifference) {
      d = CMatrix::Zero(n_, n_);
      const double h = 1e-5 * (1.0 + norm2(y));
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
          for (cplx unit : {cplx(1.0, 0.0), cplx(0.0, 1.0)}) {
            CMatrix yp = y, ym = y;
            yp(a, b) += h * unit;
            ym(a, b) -= h * unit;
            env[var] = yp;
            double fp = eval_node(p.body, env, body_path, nullptr, 1.0).value;
            env[var] = ym;
            double fm = eval_node(p.body, env, body_path, nullptr, 1.0).value;
            d(a, b) += unit * (static_cast<double>(n_) * (fp - fm) / (2.0 * h));
          }
      env[var] = y;
    } else {
      const CMatrix& gy = pt.g.g[var];
      d = gy.size() == 0 ? CMatrix(CMatrix::Zero(n_, n_)) : gy;
    }
    d *= sign;
    pt.dir = p.selfadjoint ? herm(d) : d;
    return pt;
  };

  auto stationarity = [&](const Point& pt) { return norm2(project(pt.y + pt.dir) - pt.y); };

  std::vector<CMatrix> starts;
  auto warm = warm_.find(path);
  starts.push_back(warm != warm_.end() ? warm->second : CMatrix(CMatrix::Zero(n_, n_)));
  for (int k = 1; k < budget.restarts; ++k) {
    Rng rng(opts_.seed.derive(path).derive(static_cast<std::uint64_t>(k)));
    CMatrix y = p.selfadjoint ? sample_gue(n_, rng).matrix() : sample_ginibre(n_, rng);
    starts.push_back(project(y * (r * rng.uniform() / 2.0)));
  }

  Point best;
  bool best_converged = false;
  bool have_best = false;
  for (const auto& s0 : starts) {
    Point cur = evaluate(project(s0));
    bool converged = false;
    double step = 1.0;
    {
      double gn = norm2(cur.dir);
      if (gn > 0.0) step = std::min(1.0, r / gn);
    }
    for (int it = 0; it < budget.max_steps; ++it) {
      if (stationarity(cur) <= budget.tolerance) {
        converged = true;
        break;
      }
      bool accepted = false;
      Point next;
      for (int bt = 0; bt < 40; ++bt) {
        CMatrix yn = project(cur.y + step * cur.dir);
        CMatrix d = yn - cur.y;
        double dd = norm2_sq(d);
        if (dd == 0.0) break;
        next = evaluate(yn);
        double decrease = normalized_inner(cur.dir, d).real();
        if (next.f >= cur.f + 1e-4 * decrease) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        converged = stationarity(cur) <= std::max(budget.tolerance, 1e-8 * (1.0 + std::abs(cur.f)));
        break;
      }
      CMatrix sv = next.y - cur.y;
      CMatrix yv = next.dir - cur.dir;
      double curv = -normalized_inner(sv, yv).real();
      double ss = norm2_sq(sv);
      step = curv > 1e-14 * ss ? ss / curv : step * 2.0;
      step = std::clamp(step, 1e-8, 1e8);
      cur = std::move(next);
    }
    if (!converged && stationarity(cur) <= budget.tolerance) converged = true;
    if (!have_best || cur.f > best.f) {
      best = std::move(cur);
      best_converged = converged;
      have_best = true;
    }
  }

  warm_[path] = best.y;
  env[var] = best.y;
  if (grad) grad->merge(best.g, weight, p.var);
  return {best.v.value, best.v.variance, best.v.unconverged || !best_converged};
}

const std::vector<std::vector<CMatrix>>& Evaluator::heat_samples(const HeatSubNode& p, std::uint64_t path) {
  auto it = heat_cache_.find(path);
  if (it != heat_cache_.end()) return it->second;
  std::vector<std::vector<CMatrix>> samples;
  if (p.time == 0.0 || p.vars.empty()) {
    samples.emplace_back(p.vars.size(), CMatrix::Zero(n_, n_));
  } else {
    Rng rng(opts_.seed.derive(path));
    const double sd = std::sqrt(p.time);
    const double cut = 3.0 * sd;
    const int base = opts_.antithetic ? (opts_.heat_samples + 1) / 2 : opts_.heat_samples;
    for (int s = 0; s < base; ++s) {
      std::vector<CMatrix> shift;
      for (size_t k = 0; k < p.vars.size(); ++k) shift.push_back(truncate_parts(sample_ginibre(n_, rng) * sd, cut));
      if (opts_.antithetic) {
        std::vector<CMatrix> neg;
        for (const auto& m : shift) neg.push_back(-m);
        samples.push_back(std::move(shift));
        samples.push_back(std::move(neg));
      } else {
        samples.push_back(std::move(shift));
      }
    }
  }
  return heat_cache_.emplace(path, std::move(samples)).first->second;
}

Evaluator::NodeValue Evaluator::eval_heat(const HeatSubNode& p, std::vector<CMatrix>& env, std::uint64_t path,
                                          Grad* grad, double weight) {
  const auto& samples = heat_samples(p, path);
  const std::uint64_t body_path = child_path(path, 0);
  std::vector<CMatrix> saved;
  for (int v : p.vars) saved.push_back(env[static_cast<size_t>(v)]);

  const size_t s_count = samples.size();
  const double w = weight / static_cast<double>(s_count);
  std::vector<double> values(s_count);
  double child_var = 0.0;
  bool unconverged = false;
  for (size_t s = 0; s < s_count; ++s) {
    for (size_t k = 0; k < p.vars.size(); ++k) env[static_cast<size_t>(p.vars[k])] = saved[k] + samples[s][k];
    NodeValue v = eval_node(p.body, env, body_path, grad, w);
    values[s] = v.value;
    child_var += v.variance;
    unconverged = unconverged || v.unconverged;
  }
  for (size_t k = 0; k < p.vars.size(); ++k) env[static_cast<size_t>(p.vars[k])] = saved[k];

  // Antithetic pairs are the independent units.
  std::vector<double> units;
  if (opts_.antithetic && s_count > 1) {
    for (size_t s = 0; s + 1 < s_count; s += 2) units.push_back(0.5 * (values[s] + values[s + 1]));
  } else {
    units = values;
  }
  double mean = 0.0;
  for (double u : units) mean += u;
  mean /= static_cast<double>(units.size());
  double var_mc = 0.0;
  if (units.size() > 1) {
    for (double u : units) var_mc += (u - mean) * (u - mean);
    var_mc /= static_cast<double>(units.size() - 1) * static_cast<double>(units.size());
  }
  double value = 0.0;
  for (double v : values) value += v;
  value /= static_cast<double>(s_count);
  double variance = var_mc + child_var / static_cast<double>(s_count) / static_cast<double>(units.size());
  return {value, variance, unconverged};
}

Evaluator::NodeValue Evaluator::eval_shift(const ShiftNode& p, std::vector<CMatrix>& env, std::uint64_t path,
                                           Grad* grad, double weight) {
  const size_t t = static_cast<size_t>(p.target);
  CMatrix saved = env[t];
  env[t] = saved + p.coeff * env[static_cast<size_t>(p.source)];
  NodeValue v;
  if (grad) {
    Grad g(env.size());
    v = eval_node(p.body, env, child_path(path, 0), &g, 1.0);
    grad->merge(g, weight);
    if (g.g[t].size() != 0) grad->add(p.source, weight * p.coeff, g.g[t]);
  } else {
    v = eval_node(p.body, env, child_path(path, 0), nullptr, 1.0);
  }
  env[t] = saved;
  return v;
}

EvalResult eval_lambda(const Formula& phi, const EvalContext& ctx) {
  if (ctx.assignment.size() < phi.arity()) throw DomainError("assignment does not cover the formula's arity");
  if (!ctx.assignment.empty() && ctx.assignment.dim() != ctx.n)
    throw ShapeError("assignment dimension differs from the context dimension");
  Evaluator ev(phi, ctx.n, ctx.options);
  return ev.eval(ctx.assignment.matrices());
}

SlotGradient finite_difference_gradient(Evaluator& ev, const std::vector<CMatrix>& x, double rel_step) {
  const int n = ev.dim();
  double scale = 0.0;
  for (const auto& m : x) scale += norm2_sq(m);
  const double h = rel_step * (1.0 + std::sqrt(scale));
  SlotGradient g(x.size());
  for (size_t j = 0; j < x.size(); ++j) {
    g[j] = CMatrix::Zero(n, n);
    const auto& fv = ev.formula().free_vars();
    if (!std::binary_search(fv.begin(), fv.end(), static_cast<int>(j))) continue;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (cplx unit : {cplx(1.0, 0.0), cplx(0.0, 1.0)}) {
          auto xp = x, xm = x;
          xp[j](a, b) += h * unit;
          xm[j](a, b) -= h * unit;
          double d = (ev.eval(xp).value - ev.eval(xm).value) / (2.0 * h);
          g[j](a, b) += unit * (static_cast<double>(n) * d);
        }
  }
  return g;
}

}  // namespace freegeom
