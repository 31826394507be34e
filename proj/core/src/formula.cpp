#include "freegeom/formula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace freegeom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> to_sorted(const std::set<int>& s) { return {s.begin(), s.end()}; }

bool contains(const std::vector<int>& v, int x) { return std::binary_search(v.begin(), v.end(), x); }

void check_var(int v) {
  if (v < 0) throw DomainError("variable indices must be nonnegative");
}

int max_slot(const FormulaNode& n) {
  int s = 0;
  for (int v : n.free_vars) s = std::max(s, v + 1);
  for (int v : n.bound_vars) s = std::max(s, v + 1);
  return s;
}

// Variables of polynomial letters that are free at this node (drives the `unbounded` flag).
std::set<int> poly_free_vars(const FormulaNode& n);

std::set<int> poly_free_vars(const Formula& f) { return poly_free_vars(f.node()); }

std::set<int> poly_free_vars(const FormulaNode& n) {
  std::set<int> out;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PolynomialTraceNode>) {
          for (const auto& m : p.terms)
            for (const auto& l : m.letters) out.insert(l.var);
        } else if constexpr (std::is_same_v<T, ConnectiveNode>) {
          for (const auto& a : p.args) {
            auto s = poly_free_vars(a);
            out.insert(s.begin(), s.end());
          }
        } else if constexpr (std::is_same_v<T, BallNode>) {
          out = poly_free_vars(p.body);
          out.erase(p.var);
        } else if constexpr (std::is_same_v<T, HeatSubNode>) {
          out = poly_free_vars(p.body);
        } else if constexpr (std::is_same_v<T, ShiftNode>) {
          out = poly_free_vars(p.body);
          if (out.count(p.target)) out.insert(p.source);
        }
      },
      n.payload);
  return out;
}

// A polynomial node under a quantifier must be affine in the variables that are not
// held in a bounded set by enclosing quantifiers.
void check_quantifier_body(const Formula& f, std::set<int> bounded) {
  const auto& n = f.node();
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PolynomialTraceNode>) {
          for (const auto& m : p.terms) {
            int open = 0;
            for (const auto& l : m.letters)
              if (!bounded.count(l.var)) ++open;
            if (open > 1)
              throw DomainError("unbounded polynomial node under a quantifier");
          }
        } else if constexpr (std::is_same_v<T, ConnectiveNode>) {
          for (const auto& a : p.args) check_quantifier_body(a, bounded);
        } else if constexpr (std::is_same_v<T, BallNode>) {
          bounded.insert(p.var);
          check_quantifier_body(p.body, bounded);
        } else if constexpr (std::is_same_v<T, HeatSubNode>) {
          check_quantifier_body(p.body, bounded);
        } else if constexpr (std::is_same_v<T, ShiftNode>) {
          if (bounded.count(p.target) && !bounded.count(p.source)) bounded.erase(p.target);
          check_quantifier_body(p.body, bounded);
        }
      },
      n.payload);
}

}  // namespace

std::string to_string(ConnectiveFn fn) {
  switch (fn) {
    case ConnectiveFn::Constant: return "constant";
    case ConnectiveFn::Affine: return "affine";
    case ConnectiveFn::Max: return "max";
    case ConnectiveFn::Min: return "min";
    case ConnectiveFn::Abs: return "abs";
    case ConnectiveFn::Clamp: return "clamp";
  }
  return "?";
}

ConnectiveFn connective_from_string(const std::string& s) {
  for (auto fn : {ConnectiveFn::Constant, ConnectiveFn::Affine, ConnectiveFn::Max, ConnectiveFn::Min,
                  ConnectiveFn::Abs, ConnectiveFn::Clamp})
    if (to_string(fn) == s) return fn;
  throw DomainError("unknown connective: " + s);
}

Formula::Formula() : Formula(formulas::constant(0.0)) {}

Formula Formula::make(FormulaNode n) {
  n.slot_count = max_slot(n);
  n.unbounded = !poly_free_vars(n).empty();
  return Formula(std::make_shared<const FormulaNode>(std::move(n)));
}

Formula Formula::resolvent_trace(std::vector<ResolventMonomial> terms) {
  std::set<int> vars;
  for (const auto& m : terms)
    for (const auto& l : m.letters) {
      check_var(l.var);
      vars.insert(l.var);
    }
  FormulaNode n;
  n.payload = ResolventTraceNode{std::move(terms)};
  n.free_vars = to_sorted(vars);
  return make(std::move(n));
}

Formula Formula::polynomial_trace(std::vector<PolyMonomial> terms) {
  std::set<int> vars;
  for (const auto& m : terms)
    for (const auto& l : m.letters) {
      check_var(l.var);
      vars.insert(l.var);
    }
  FormulaNode n;
  n.payload = PolynomialTraceNode{std::move(terms)};
  n.free_vars = to_sorted(vars);
  return make(std::move(n));
}

Formula Formula::connective(ConnectiveFn fn, std::vector<double> params, std::vector<Formula> args,
                            double lipschitz) {
  double natural = 1.0;
  switch (fn) {
    case ConnectiveFn::Constant:
      if (params.size() != 1 || !args.empty()) throw DomainError("constant takes one parameter and no arguments");
      natural = 0.0;
      break;
    case ConnectiveFn::Affine: {
      if (params.size() != args.size() + 1) throw DomainError("affine takes one weight per argument plus a bias");
      natural = 0.0;
      for (size_t i = 0; i + 1 < params.size(); ++i) natural += std::abs(params[i]);
      break;
    }
    case ConnectiveFn::Max:
    case ConnectiveFn::Min:
      if (args.empty() || !params.empty()) throw DomainError("max/min take at least one argument");
      break;
    case ConnectiveFn::Abs:
      if (args.size() != 1 || !params.empty()) throw DomainError("abs takes one argument");
      break;
    case ConnectiveFn::Clamp:
      if (args.size() != 1 || params.size() != 2 || !(params[0] <= params[1]))
        throw DomainError("clamp takes one argument and lo <= hi");
      break;
  }
  for (double p : params)
    if (!std::isfinite(p)) throw DomainError("connective parameters must be finite");
  if (lipschitz < 0.0) lipschitz = natural;
  if (!std::isfinite(lipschitz) || lipschitz < natural * (1.0 - 1e-12))
    throw DomainError("declared Lipschitz constant is below the connective's constant");

  std::set<int> fv, bv;
  for (const auto& a : args) {
    fv.insert(a.free_vars().begin(), a.free_vars().end());
    bv.insert(a.bound_vars().begin(), a.bound_vars().end());
  }
  for (int v : fv)
    if (bv.count(v)) throw DomainError("a variable is free in one argument and bound in another");

  FormulaNode n;
  n.payload = ConnectiveNode{fn, std::move(params), lipschitz, std::move(args)};
  n.free_vars = to_sorted(fv);
  n.bound_vars = to_sorted(bv);
  return make(std::move(n));
}

Formula Formula::make_ball(bool sup, double radius, int var, Formula body, bool selfadjoint) {
  check_var(var);
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("ball radius must be positive and finite");
  if (contains(body.bound_vars(), var)) throw DomainError("quantified variable is already bound in the body");
  check_quantifier_body(body, {var});
  std::set<int> fv(body.free_vars().begin(), body.free_vars().end());
  fv.erase(var);
  std::set<int> bv(body.bound_vars().begin(), body.bound_vars().end());
  bv.insert(var);
  FormulaNode n;
  n.payload = BallNode{sup, radius, var, selfadjoint, std::move(body)};
  n.free_vars = to_sorted(fv);
  n.bound_vars = to_sorted(bv);
  return make(std::move(n));
}

Formula Formula::sup_ball(double radius, int var, Formula body, bool selfadjoint) {
  return make_ball(true, radius, var, std::move(body), selfadjoint);
}

Formula Formula::inf_ball(double radius, int var, Formula body, bool selfadjoint) {
  return make_ball(false, radius, var, std::move(body), selfadjoint);
}

Formula Formula::heat(double time, std::vector<int> vars, Formula body) {
  if (!(time >= 0.0) || !std::isfinite(time)) throw DomainError("heat time must be nonnegative");
  std::set<int> vs;
  for (int v : vars) {
    check_var(v);
    if (contains(body.bound_vars(), v)) throw DomainError("heat substitution on a bound variable");
    vs.insert(v);
  }
  std::set<int> fv(body.free_vars().begin(), body.free_vars().end());
  fv.insert(vs.begin(), vs.end());
  FormulaNode n;
  n.free_vars = to_sorted(fv);
  n.bound_vars = body.bound_vars();
  n.payload = HeatSubNode{time, to_sorted(vs), std::move(body)};
  return make(std::move(n));
}

Formula Formula::shift(int target, int source, double coeff, Formula body) {
  check_var(target);
  check_var(source);
  if (target == source) throw DomainError("shift source and target must differ");
  if (!std::isfinite(coeff)) throw DomainError("shift coefficient must be finite");
  if (contains(body.bound_vars(), target) || contains(body.bound_vars(), source))
    throw DomainError("shift on a bound variable");
  std::set<int> fv(body.free_vars().begin(), body.free_vars().end());
  fv.insert(target);
  fv.insert(source);
  FormulaNode n;
  n.free_vars = to_sorted(fv);
  n.bound_vars = body.bound_vars();
  n.payload = ShiftNode{target, source, coeff, std::move(body)};
  return make(std::move(n));
}

std::string Formula::kind() const {
  return std::visit(
      [](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ResolventTraceNode>) return "BasicResolventTrace";
        if constexpr (std::is_same_v<T, PolynomialTraceNode>) return "BasicPolynomialTrace";
        if constexpr (std::is_same_v<T, ConnectiveNode>) return "Connective";
        if constexpr (std::is_same_v<T, BallNode>) return p.sup ? "SupBall" : "InfBall";
        if constexpr (std::is_same_v<T, HeatSubNode>) return "HeatSub";
        if constexpr (std::is_same_v<T, ShiftNode>) return "Shift";
        return "?";
      },
      node_->payload);
}

const std::vector<int>& Formula::free_vars() const { return node_->free_vars; }
const std::vector<int>& Formula::bound_vars() const { return node_->bound_vars; }
int Formula::arity() const { return node_->free_vars.empty() ? 0 : node_->free_vars.back() + 1; }
int Formula::slot_count() const { return node_->slot_count; }
bool Formula::unbounded() const { return node_->unbounded; }

bool Formula::structurally_equal(const Formula& o) const {
  if (node_ == o.node_) return true;
  const auto& a = node_->payload;
  const auto& b = o.node_->payload;
  if (a.index() != b.index()) return false;
  auto eq_args = [](const std::vector<Formula>& x, const std::vector<Formula>& y) {
    if (x.size() != y.size()) return false;
    for (size_t i = 0; i < x.size(); ++i)
      if (!x[i].structurally_equal(y[i])) return false;
    return true;
  };
  return std::visit(
      [&](const auto& p) -> bool {
        using T = std::decay_t<decltype(p)>;
        const auto& q = std::get<T>(b);
        if constexpr (std::is_same_v<T, ResolventTraceNode> || std::is_same_v<T, PolynomialTraceNode>) {
          return p.terms == q.terms;
        } else if constexpr (std::is_same_v<T, ConnectiveNode>) {
          return p.fn == q.fn && p.params == q.params && p.lipschitz == q.lipschitz && eq_args(p.args, q.args);
        } else if constexpr (std::is_same_v<T, BallNode>) {
          return p.sup == q.sup && p.radius == q.radius && p.var == q.var && p.selfadjoint == q.selfadjoint &&
                 p.body.structurally_equal(q.body);
        } else if constexpr (std::is_same_v<T, HeatSubNode>) {
          return p.time == q.time && p.vars == q.vars && p.body.structurally_equal(q.body);
        } else {
          return p.target == q.target && p.source == q.source && p.coeff == q.coeff &&
                 p.body.structurally_equal(q.body);
        }
      },
      a);
}

namespace formulas {

Formula zero() { return constant(0.0); }

Formula constant(double c) { return Formula::connective(ConnectiveFn::Constant, {c}, {}); }

Formula resolvent(int var, double c, Part part) {
  return Formula::resolvent_trace({ResolventMonomial{c, {ResolventLetter{var, part, false}}}});
}

Formula resolvent_well(int var, double c, Part part) {
  return Formula::resolvent_trace(
      {ResolventMonomial{c, {ResolventLetter{var, part, false}, ResolventLetter{var, part, true}}}});
}

Formula linear(int var, double c) { return Formula::polynomial_trace({PolyMonomial{c, {PolyLetter{var, false}}}}); }

Formula bilinear(int a, int b, double c) {
  return Formula::polynomial_trace({PolyMonomial{c, {PolyLetter{a, false}, PolyLetter{b, false}}}});
}

Formula half_norm_sq(const std::vector<int>& vars, double c) {
  std::vector<PolyMonomial> terms;
  for (int v : vars) terms.push_back(PolyMonomial{0.5 * c, {PolyLetter{v, true}, PolyLetter{v, false}}});
  return Formula::polynomial_trace(std::move(terms));
}

Formula sum(std::vector<Formula> args) {
  std::vector<double> w(args.size(), 1.0);
  w.push_back(0.0);
  return Formula::connective(ConnectiveFn::Affine, std::move(w), std::move(args));
}

Formula affine(std::vector<double> weights, double bias, std::vector<Formula> args) {
  weights.push_back(bias);
  return Formula::connective(ConnectiveFn::Affine, std::move(weights), std::move(args));
}

Formula max_of(std::vector<Formula> args) { return Formula::connective(ConnectiveFn::Max, {}, std::move(args)); }
Formula min_of(std::vector<Formula> args) { return Formula::connective(ConnectiveFn::Min, {}, std::move(args)); }
Formula abs_of(Formula arg) { return Formula::connective(ConnectiveFn::Abs, {}, {std::move(arg)}); }
Formula clamp(Formula arg, double lo, double hi) {
  return Formula::connective(ConnectiveFn::Clamp, {lo, hi}, {std::move(arg)});
}

}  // namespace formulas

namespace {

struct Bounds {
  std::map<int, double> L;
  double M = 0.0;
};

double radius_of(const std::map<int, double>& radii, int v) {
  auto it = radii.find(v);
  return it == radii.end() ? kInf : it->second;
}

// Product that treats 0 * inf as 0 (a vanishing coefficient kills an unbounded factor).
double safe_mul(double a, double b) { return (a == 0.0 || b == 0.0) ? 0.0 : a * b; }

Bounds bounds_rec(const Formula& f, std::map<int, double> radii) {
  Bounds out;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ResolventTraceNode>) {
          for (const auto& m : p.terms) {
            double c = std::abs(m.coeff);
            out.M += c;
            for (const auto& l : m.letters) out.L[l.var] += c;
          }
        } else if constexpr (std::is_same_v<T, PolynomialTraceNode>) {
          for (const auto& m : p.terms) {
            double c = std::abs(m.coeff);
            if (c == 0.0) continue;
            double all = c;
            for (const auto& l : m.letters) all = safe_mul(all, radius_of(radii, l.var));
            out.M += all;
            for (size_t i = 0; i < m.letters.size(); ++i) {
              double others = c;
              for (size_t k = 0; k < m.letters.size(); ++k)
                if (k != i) others = safe_mul(others, radius_of(radii, m.letters[k].var));
              out.L[m.letters[i].var] += others;
            }
          }
        } else if constexpr (std::is_same_v<T, ConnectiveNode>) {
          std::vector<Bounds> kids;
          for (const auto& a : p.args) kids.push_back(bounds_rec(a, radii));
          switch (p.fn) {
            case ConnectiveFn::Constant:
              out.M = std::abs(p.params[0]);
              break;
            case ConnectiveFn::Affine: {
              double natural = 0.0;
              for (size_t i = 0; i < kids.size(); ++i) natural += std::abs(p.params[i]);
              double scale = natural > 0.0 ? p.lipschitz / natural : 0.0;
              out.M = std::abs(p.params.back());
              for (size_t i = 0; i < kids.size(); ++i) {
                double w = std::abs(p.params[i]);
                out.M += safe_mul(w, kids[i].M);
                for (const auto& [v, l] : kids[i].L) out.L[v] += safe_mul(w * scale, l);
              }
              break;
            }
            default: {
              for (const auto& k : kids) {
                out.M = std::max(out.M, k.M);
                for (const auto& [v, l] : k.L) out.L[v] = std::max(out.L[v], safe_mul(p.lipschitz, l));
              }
              if (p.fn == ConnectiveFn::Clamp) out.M = std::min(out.M, std::max(std::abs(p.params[0]), std::abs(p.params[1])));
              break;
            }
          }
        } else if constexpr (std::is_same_v<T, BallNode>) {
          radii[p.var] = p.radius;
          out = bounds_rec(p.body, radii);
          out.L.erase(p.var);
        } else if constexpr (std::is_same_v<T, HeatSubNode>) {
          // Truncated increments have real and imaginary parts bounded by 3 sqrt(t).
          for (int v : p.vars)
            if (radii.count(v)) radii[v] += 6.0 * std::sqrt(p.time);
          out = bounds_rec(p.body, radii);
        } else if constexpr (std::is_same_v<T, ShiftNode>) {
          if (radii.count(p.target)) radii[p.target] += safe_mul(std::abs(p.coeff), radius_of(radii, p.source));
          out = bounds_rec(p.body, radii);
          auto it = out.L.find(p.target);
          if (it != out.L.end()) out.L[p.source] += safe_mul(std::abs(p.coeff), it->second);
        }
      },
      f.node().payload);
  return out;
}

}  // namespace

LipschitzBound lipschitz_bound(const Formula& phi) {
  Bounds b = bounds_rec(phi, {});
  LipschitzBound out;
  out.M = b.M;
  for (int v : phi.free_vars()) {
    double l = b.L.count(v) ? b.L[v] : 0.0;
    out.per_var[v] = l;
    out.L = std::max(out.L, l);
  }
  if (!std::isfinite(out.M) || !std::isfinite(out.L))
    throw DomainError("formula contains an unbounded polynomial node");
  return out;
}

double lipschitz_constant(const Formula& phi) {
  Bounds b = bounds_rec(phi, {});
  double L = 0.0;
  for (int v : phi.free_vars()) L = std::max(L, b.L.count(v) ? b.L[v] : 0.0);
  if (!std::isfinite(L)) throw DomainError("formula is not Lipschitz (polynomial of degree > 1)");
  return L;
}

Formula heat_substitute(const Formula& phi, double t, std::vector<int> vars) {
  if (vars.empty()) vars = phi.free_vars();
  return Formula::heat(t, std::move(vars), phi);
}

}  // namespace freegeom
