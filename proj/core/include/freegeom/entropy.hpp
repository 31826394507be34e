#pragma once

#include "freegeom/evaluator.hpp"
#include "freegeom/formula.hpp"
#include "freegeom/grid_function.hpp"
#include "freegeom/pressure.hpp"
#include "freegeom/report.hpp"
#include "freegeom/spectral.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace freegeom {

struct EntropyReport {
  std::string name;
  double value = 0.0;
  double stderr = 0.0;
  /// Discretization error estimate for deterministic computations.
  double error_estimate = 0.0;
  std::map<std::string, double> inputs;
  std::vector<CheckRow> checks;

  bool pass() const { return all_pass(checks); }
};

/// h^(n) = (1/n^2) h + 2 m log n of a c-scaled Ginibre m-tuple, which is m log(2 pi e c^2).
double gaussian_tuple_entropy(int n, int m, double c = 1.0);

/// m log(2 pi) + |x|_2^2 / 2 - tilde; +inf maps to -inf.
double chi_from_tilde(double tilde_value, int m, double norm_sq);

/// Thrown when no sample lands in the microstate set. `lower_bound` is a 99% one-sided
/// lower bound on the entropy value from the zero-hit count.
struct EmptyMicrostateEstimate : std::runtime_error {
  EmptyMicrostateEstimate(const std::string& what, double lower_bound, long samples)
      : std::runtime_error(what), lower_bound(lower_bound), samples(samples) {}
  double lower_bound;
  long samples;
};

/// -(1/n^2) log of the Ginibre measure of {X : max_j |Lambda_{phi_j}(X) - target_j| < eps}.
/// Limited to n in {1, 2}.
EntropyReport microstate_gaussian_entropy(const std::vector<Formula>& phis, const std::vector<double>& targets,
                                          double eps, int n, int samples, RngSeed seed,
                                          const EvalOptions& eval = {});

/// a * max_j |phi_j - target_j|.
Formula microstate_penalty(const std::vector<Formula>& phis, const std::vector<double>& targets, double a);

struct MicrostateSandwich {
  EntropyReport microstate;
  PressureEstimate pressure;
  CheckRow check;
};

/// Pressure of the penalty a*psi against min(microstate value, a eps) - log(2)/n^2.
MicrostateSandwich microstate_pressure_sandwich(const std::vector<Formula>& phis,
                                                const std::vector<double>& targets, double eps, double a, int n,
                                                int samples, RngSeed seed);

/// Differential entropy -int p log p; -inf if the measure has atoms.
double differential_entropy(const SpectralMeasure& mu);

/// Double integral of log|s - t|; -inf if the measure has atoms.
double log_energy(const SpectralMeasure& mu);

/// log_energy + 3/4 + log(2 pi)/2.
double log_energy_entropy(const SpectralMeasure& mu);

struct CutoffJacobian {
  double lhs = 0.0;    // (1/n^2) log det |DG(X)|
  double rhs = 0.0;    // -(2/R) delta_R^{1/2} (|X|_2^2 - |G(X)|_2^2)^{1/2}
  double delta = 0.0;  // delta_R(X)
  bool holds = true;   // 0 >= lhs >= rhs
};

CutoffJacobian cutoff_jacobian_bounds(const MatrixTuple& x, double R);

/// Entropy of (id + eps phi')_# mu0 for a grid measure mu0, against the exact formula
/// h + E log(1 + eps phi'') and the lower bound h + eps E phi'' - 4 (c eps)^2.
EntropyReport change_of_variables_check_1d(const GridFunction& phi, double c, const SpectralMeasure& mu0,
                                           double eps);

/// Pushforward of a grid measure under the map x -> x + eps phi'(x), linear on each bin.
SpectralMeasure pushforward_gradient_map(const GridFunction& phi, const SpectralMeasure& mu0, double eps);

/// Derivative of the grid function by central differences (one-sided at the ends),
/// linearly interpolated.
double grid_derivative(const GridFunction& phi, double x);

}  // namespace freegeom
