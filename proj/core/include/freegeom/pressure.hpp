#pragma once

#include "freegeom/evaluator.hpp"
#include "freegeom/formula.hpp"
#include "freegeom/rng.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace freegeom {

struct UnderflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PressureMethod { Direct, Control };
std::string to_string(PressureMethod m);

struct PressureEstimate {
  double value = 0.0;
  double stderr = 0.0;
  int n = 1;
  int samples = 0;
  PressureMethod method = PressureMethod::Direct;
  bool converged = true;
  /// Effective sample size of the final importance-sampling batch (direct method).
  double ess = 0.0;
};

/// Objective over the integrated coordinates; fills `grad` (one matrix per coordinate, in the
/// convention d f = Re tr_n(G^* dZ)) when it is non-null and gradients are available.
using TupleObjective = std::function<double(const std::vector<CMatrix>& z, std::vector<CMatrix>* grad)>;

struct PressureOptions {
  int pilot_samples = 1000;
  int max_stages = 200;
  double ess_target = 0.5;
  /// Stages with neither tempering progress nor a better ESS at beta = 1 before falling back to the
  /// best proposal.
  int patience = 10;
  /// Adapt a Gaussian proposal towards the tilted measure; plain Monte Carlo over the
  /// Ginibre measure when false.
  bool adaptive = true;
  /// Whether the objective supplies gradients (used for control-variate mean updates).
  bool use_gradients = true;
  EvalOptions eval{};
};

/// Gaussian proposal: W = mean + scale * Z with Z Ginibre.
struct Proposal {
  std::vector<CMatrix> mean;
  double scale = 1.0;
};

struct TiltedSampler {
  Proposal proposal;
  bool reached_target = true;
  int stages = 0;
};

/// Adapts a proposal towards the measure proportional to exp(-n^2 f) times Ginibre.
TiltedSampler adapt_proposal(const TupleObjective& f, int n, int m, const PressureOptions& opts, RngSeed seed);

/// -(1/n^2) log E exp(-n^2 f(Z)) over Ginibre Z in M_n^m.
PressureEstimate pressure_of(const TupleObjective& f, int n, int m, int samples, RngSeed seed,
                             const PressureOptions& opts = {});

/// Pressure of phi(x, y): x occupies free slots 0..m-1 with m = arity - Y.size(), y the rest.
PressureEstimate pressure_direct(const Formula& phi, const MatrixTuple& Y, int n, int samples, RngSeed seed,
                                 const PressureOptions& opts = {});

enum class PolicyClass { Constant, AffineFeedback };

struct ControlPolicy {
  int stages = 1;
  int coords = 0;
  double radius = 1.0;
  PolicyClass policy = PolicyClass::Constant;
  /// a[i][j]: Hermitian constant part of stage i, coordinate j.
  std::vector<std::vector<CMatrix>> a;
  /// b[i][j]: feedback coefficient on the running state (zero for constant policies).
  std::vector<std::vector<double>> b;

  /// Control at stage i given the state before the stage, after the cutoff.
  std::vector<CMatrix> control(int i, const std::vector<CMatrix>& state) const;
};

struct ControlOptions {
  PolicyClass policy = PolicyClass::Constant;
  int batch = 256;
  double step = 0.5;
  int eval_samples = 4096;
  /// Averaged preconditioned gradient norm below which the solve counts as converged.
  double tolerance = 0.05;
  EvalOptions eval{};
};

struct ControlResult {
  PressureEstimate estimate;
  ControlPolicy policy;
  double gradient_norm = 0.0;
};

/// Minimizes E[Lambda(Z_1 + (1/k) sum beta_i, Y) + (1/2k) sum |beta_i|_2^2] over the policy class.
ControlResult boue_dupuis_solve(const Formula& phi, const MatrixTuple& Y, int n, int k, double r, int iters,
                                RngSeed seed, const ControlOptions& opts = {});

/// One dynamic-programming step: inf over self-adjoint beta in the r-ball of
/// [heat_t phi(x + t beta, y) + (t/2) |beta|_2^2], acting on the first `m` free variables
/// (all free variables when m < 0).
Formula control_step_T(const Formula& phi, double t, double r, int m = -1);

/// k-fold composition of control_step_T with t = 1/k.
Formula control_composition(const Formula& phi, int k, double r, int m = -1);

struct ScanRow {
  int k = 0;
  double control = 0.0;
  double control_stderr = 0.0;
  double gap = 0.0;
  double bound = 0.0;
  bool within_bound = true;
};

struct ScanResult {
  PressureEstimate direct;
  double lipschitz = 0.0;
  double truncation_term = 0.0;  // |F_3(Z) - Z| in L^2
  std::vector<ScanRow> rows;
  bool exponent_valid = false;
  double exponent = 0.0;  // gap ~ k^{-exponent}
  bool monotone = true;
};

struct ScanOptions {
  int direct_samples = 20000;
  int control_iters = 300;
  int truncation_samples = 200;
  ControlOptions control{};
  PressureOptions pressure{};
};

ScanResult discretization_error_scan(const Formula& phi, int n, double r, const std::vector<int>& k_list,
                                     RngSeed seed, const ScanOptions& opts = {});

struct ChainResult {
  PressureEstimate joint;
  PressureEstimate nested;
};

struct ChainOptions {
  int inner_samples = 512;
  PressureOptions pressure{};
};

/// phi over (x, y, w): x is slots 0..m1-1, y is m1..m1+m2-1, w the remaining W.size() slots.
ChainResult pressure_chain_check(const Formula& phi, int m1, int m2, const MatrixTuple& W, int n, int samples,
                                 RngSeed seed, const ChainOptions& opts = {});

/// Mean of |F_R(Z) - Z|_2^2 over single Ginibre coordinates, square-rooted.
double truncation_l2(int n, double R, int samples, RngSeed seed);

std::string pressure_report_json(const Formula& phi, int k, double r, const PressureEstimate& est);

}  // namespace freegeom
