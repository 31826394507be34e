#pragma once

#include "freegeom/formula.hpp"
#include "freegeom/rng.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace freegeom {

struct QuantifierBudget {
  int restarts = 8;
  int max_steps = 500;
  double tolerance = 1e-6;
};

enum class GradientMode { Analytic, FiniteDifference };

struct EvalOptions {
  RngSeed seed{};
  int heat_samples = 256;
  bool antithetic = true;
  QuantifierBudget quantifier{};
  /// Gradient used by the quantifier optimizer.
  GradientMode gradients = GradientMode::Analytic;
};

struct EvalContext {
  int n = 1;
  MatrixTuple assignment;
  EvalOptions options{};
};

struct EvalResult {
  double value = 0.0;
  double stderr = 0.0;
  bool quantifier_unconverged = false;
};

/// Gradient with respect to each variable slot, in the convention
/// d f = Re tr_n(G^* dX). Empty matrices stand for zero.
using SlotGradient = std::vector<CMatrix>;

/// Evaluates Lambda_phi at dimension n. Monte Carlo draws for heat substitutions are fixed
/// per node and reused across evaluation points, so repeated calls share random numbers.
class Evaluator {
 public:
  Evaluator(Formula phi, int n, EvalOptions options = {});

  const Formula& formula() const { return phi_; }
  int dim() const { return n_; }
  const EvalOptions& options() const { return opts_; }

  /// `x[j]` is the value of free variable j; x.size() must cover the arity.
  EvalResult eval(const std::vector<CMatrix>& x);
  EvalResult eval(const MatrixTuple& x) { return eval(x.matrices()); }

  /// Also fills `grad[j]` for every free variable j < x.size().
  EvalResult eval_with_gradient(const std::vector<CMatrix>& x, SlotGradient& grad);

  /// Drops quantifier warm starts (heat samples are kept).
  void reset_warm_starts() { warm_.clear(); }

 private:
  struct Grad;
  struct NodeValue {
    double value = 0.0;
    double variance = 0.0;
    bool unconverged = false;
  };

  NodeValue eval_node(const Formula& f, std::vector<CMatrix>& env, std::uint64_t path, Grad* grad,
                      double weight);
  NodeValue eval_resolvent(const ResolventTraceNode& p, const std::vector<CMatrix>& env, Grad* grad,
                           double weight);
  NodeValue eval_polynomial(const PolynomialTraceNode& p, const std::vector<CMatrix>& env, Grad* grad,
                            double weight);
  NodeValue eval_connective(const ConnectiveNode& p, std::vector<CMatrix>& env, std::uint64_t path, Grad* grad,
                            double weight);
  NodeValue eval_ball(const BallNode& p, std::vector<CMatrix>& env, std::uint64_t path, Grad* grad,
                      double weight);
  NodeValue eval_heat(const HeatSubNode& p, std::vector<CMatrix>& env, std::uint64_t path, Grad* grad,
                      double weight);
  NodeValue eval_shift(const ShiftNode& p, std::vector<CMatrix>& env, std::uint64_t path, Grad* grad,
                       double weight);

  const std::vector<std::vector<CMatrix>>& heat_samples(const HeatSubNode& p, std::uint64_t path);
  void prepare_env(const std::vector<CMatrix>& x, std::vector<CMatrix>& env) const;

  Formula phi_;
  int n_;
  EvalOptions opts_;
  std::unordered_map<std::uint64_t, std::vector<std::vector<CMatrix>>> heat_cache_;
  std::unordered_map<std::uint64_t, CMatrix> warm_;
};

EvalResult eval_lambda(const Formula& phi, const EvalContext& ctx);

/// Central differences over real coordinates of every free variable; the test oracle for
/// the analytic gradient.
SlotGradient finite_difference_gradient(Evaluator& ev, const std::vector<CMatrix>& x, double rel_step = 1e-5);

}  // namespace freegeom
