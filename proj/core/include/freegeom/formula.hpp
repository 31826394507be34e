#pragma once

#include "freegeom/linalg.hpp"

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace freegeom {

enum class Part { Re, Im };

/// (Re x_var + i)^{-1} or (Im x_var + i)^{-1}, optionally adjointed.
struct ResolventLetter {
  int var = 0;
  Part part = Part::Re;
  bool adjoint = false;
  bool operator==(const ResolventLetter&) const = default;
};

struct ResolventMonomial {
  cplx coeff{1.0, 0.0};
  std::vector<ResolventLetter> letters;
  bool operator==(const ResolventMonomial&) const = default;
};

struct PolyLetter {
  int var = 0;
  bool adjoint = false;
  bool operator==(const PolyLetter&) const = default;
};

struct PolyMonomial {
  cplx coeff{1.0, 0.0};
  std::vector<PolyLetter> letters;
  bool operator==(const PolyMonomial&) const = default;
};

/// Scalar connectives. Affine params are {w_1, ..., w_k, bias}; Clamp params are {lo, hi};
/// Constant params are {c}.
enum class ConnectiveFn { Constant, Affine, Max, Min, Abs, Clamp };

std::string to_string(ConnectiveFn fn);
ConnectiveFn connective_from_string(const std::string& s);

struct FormulaNode;

class Formula {
 public:
  Formula();  // the constant 0

  static Formula resolvent_trace(std::vector<ResolventMonomial> terms);
  static Formula polynomial_trace(std::vector<PolyMonomial> terms);
  /// `lipschitz` < 0 selects the natural constant of the connective; a smaller
  /// declared value is rejected.
  static Formula connective(ConnectiveFn fn, std::vector<double> params, std::vector<Formula> args,
                            double lipschitz = -1.0);
  static Formula sup_ball(double radius, int var, Formula body, bool selfadjoint = false);
  static Formula inf_ball(double radius, int var, Formula body, bool selfadjoint = false);
  static Formula heat(double time, std::vector<int> vars, Formula body);
  /// Substitutes x_target -> x_target + coeff * x_source inside body.
  static Formula shift(int target, int source, double coeff, Formula body);

  const FormulaNode& node() const { return *node_; }
  std::string kind() const;

  const std::vector<int>& free_vars() const;
  const std::vector<int>& bound_vars() const;
  /// 1 + largest free variable index (0 when closed).
  int arity() const;
  /// 1 + largest variable index used anywhere.
  int slot_count() const;
  /// Next index not used by any variable of this formula.
  int fresh_var() const { return slot_count(); }
  bool unbounded() const;

  bool structurally_equal(const Formula& o) const;

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> n) : node_(std::move(n)) {}
  static Formula make(FormulaNode n);
  static Formula make_ball(bool sup, double radius, int var, Formula body, bool selfadjoint);

  std::shared_ptr<const FormulaNode> node_;
};

struct ResolventTraceNode {
  std::vector<ResolventMonomial> terms;
};

struct PolynomialTraceNode {
  std::vector<PolyMonomial> terms;
};

struct ConnectiveNode {
  ConnectiveFn fn = ConnectiveFn::Constant;
  std::vector<double> params;
  double lipschitz = 0.0;
  std::vector<Formula> args;
};

struct BallNode {
  bool sup = true;
  double radius = 1.0;
  int var = 0;
  bool selfadjoint = false;
  Formula body;
};

struct HeatSubNode {
  double time = 0.0;
  std::vector<int> vars;
  Formula body;
};

struct ShiftNode {
  int target = 0;
  int source = 0;
  double coeff = 0.0;
  Formula body;
};

struct FormulaNode {
  std::variant<ResolventTraceNode, PolynomialTraceNode, ConnectiveNode, BallNode, HeatSubNode, ShiftNode>
      payload;
  std::vector<int> free_vars;
  std::vector<int> bound_vars;
  int slot_count = 0;
  bool unbounded = false;
};

// Builders for the formulas used throughout the library and tests.
namespace formulas {

Formula zero();
Formula constant(double c);
/// c * Re tr_n((Re x_var + i)^{-1}) or with the imaginary part.
Formula resolvent(int var, double c = 1.0, Part part = Part::Re);
/// c * Re tr_n((Re x_var + i)^{-1} ((Re x_var + i)^{-1})^*) = c * tr_n (1 + (Re x)^2)^{-1}.
Formula resolvent_well(int var, double c = 1.0, Part part = Part::Re);
/// c * Re tr_n(x_var).
Formula linear(int var, double c = 1.0);
/// c * Re tr_n(x_a x_b).
Formula bilinear(int a, int b, double c = 1.0);
/// (c/2) * sum over vars of tr_n(x_j^* x_j).
Formula half_norm_sq(const std::vector<int>& vars, double c = 1.0);
Formula sum(std::vector<Formula> args);
Formula affine(std::vector<double> weights, double bias, std::vector<Formula> args);
Formula max_of(std::vector<Formula> args);
Formula min_of(std::vector<Formula> args);
Formula abs_of(Formula arg);
Formula clamp(Formula arg, double lo, double hi);

}  // namespace formulas

struct LipschitzBound {
  double L = 0.0;  // with respect to the sum of normalized trace norms of the free coordinates
  double M = 0.0;  // sup bound
  std::map<int, double> per_var;
};

/// Certified constants; throws DomainError if the formula is unbounded.
LipschitzBound lipschitz_bound(const Formula& phi);

/// Lipschitz constant only; admits polynomial nodes that are affine in the free variables.
double lipschitz_constant(const Formula& phi);

/// Wraps phi in a heat substitution over `vars` (all free variables when empty).
Formula heat_substitute(const Formula& phi, double t, std::vector<int> vars = {});

std::string to_json(const Formula& phi, int indent = -1);
Formula formula_from_json(const std::string& text);

}  // namespace freegeom
