#pragma once

#include "freegeom/ensembles.hpp"
#include "freegeom/evaluator.hpp"
#include "freegeom/formula.hpp"
#include "freegeom/report.hpp"
#include "freegeom/rng.hpp"

#include <functional>
#include <string>
#include <vector>

namespace freegeom {

struct TailReport {
  int n = 0;
  int m = 0;
  long trials = 0;
  double lipschitz = 0.0;  // with respect to |.|_2
  double mean = 0.0;
  std::vector<double> delta;
  std::vector<double> tail;
  std::vector<double> bound;
  std::vector<double> wilson_lo;
  std::vector<double> wilson_hi;
  std::vector<bool> pass;

  bool all_pass() const;
  std::vector<CheckRow> rows() const;
};

/// Empirical P(|f(Z) - mean| >= delta) for Ginibre m-tuples against 2 exp(-n^2 delta^2 / 2 L^2),
/// with L = sqrt(m) times the certified |.|_1 constant. A delta fails only when the 99% Wilson
/// interval lies entirely above the bound.
TailReport herbst_check(const Formula& f, int n, int m, const std::vector<double>& deltas, int trials,
                        RngSeed seed, const EvalOptions& eval = {});

struct PoincareReport {
  int n = 0;
  int m = 0;
  long trials = 0;
  double lipschitz = 0.0;
  double variance = 0.0;
  double variance_stderr = 0.0;
  double bound = 0.0;  // L^2 / n^2
  bool pass = true;

  CheckRow row() const;
};

/// Sample variance of f(Z) against L^2 / n^2, with 3 standard errors of slack.
PoincareReport poincare_check(const Formula& f, int n, int m, int trials, RngSeed seed,
                              const EvalOptions& eval = {});

/// Deterministic matrices for each dimension n.
using DeterministicFamily = std::function<std::vector<CMatrix>(int n)>;

struct FreenessRow {
  int n = 0;
  double mean = 0.0;
  double stderr = 0.0;
  double limit = 0.0;
  double gap = 0.0;
};

struct FreenessReport {
  std::vector<FreenessRow> rows;
  double fitted_c = 0.0;
  std::vector<CheckRow> checks;

  bool pass() const { return all_pass(checks); }
};

/// E tr_n of the word with independent GUE letters, against the free limit per n.
FreenessReport freeness_check(const FreeWord& word, const DeterministicFamily& d, const std::vector<int>& n_list,
                              int trials, RngSeed seed);

struct NormRow {
  int n = 0;
  double median_norm = 0.0;
  double identity_frequency = 0.0;  // P(F_R(S) = S)
  double truncation_l2 = 0.0;       // |S - F_2(S)| in L^2
  double truncation_l2_stderr = 0.0;
};

struct NormReport {
  double radius = 2.5;
  std::vector<NormRow> rows;
  std::vector<CheckRow> checks;

  bool pass() const { return all_pass(checks); }
};

NormReport norm_convergence_check(const std::vector<int>& n_list, int trials, RngSeed seed, double R = 2.5);

/// "n,statistic,value,bound,pass" rows.
std::string concentration_csv(const std::vector<std::pair<int, CheckRow>>& rows);

}  // namespace freegeom
