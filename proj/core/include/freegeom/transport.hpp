#pragma once

#include "freegeom/grid_function.hpp"
#include "freegeom/report.hpp"
#include "freegeom/spectral.hpp"

#include <stdexcept>
#include <vector>

namespace freegeom {

struct InternalConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

/// f*(y) = max over grid x of [x y - f(x)] on [min slope, max slope] with twice the nodes.
GridFunction legendre(const GridFunction& f);
/// Same maximum, evaluated on an explicit dual grid.
GridFunction legendre(const GridFunction& f, double left, double right, int points);

/// (c q [] f)(x) = min over grid v of [c (v - x)^2 / 2 + f(v)], on the grid of f.
GridFunction inf_convolution(double c, const GridFunction& f);

/// psi(x) = sup_{|w| <= r} inf_{|z| <= R} [f(z) + (w - z)^2 / 4t - (x - w)^2 / 2t] on the nodes of f
/// inside [-r, r]. The grid of f must cover [-R, R]. The result carries the certificates
/// semiconvex = semiconcave = 1/t.
GridFunction regularize_scsc(const GridFunction& f, double t, double r, double R);

/// Piece of the monotone coupling over u in [u0, u1]: source runs x0 -> x1, target y0 -> y1.
struct CoupledSegment {
  double u0 = 0.0;
  double u1 = 0.0;
  double x0 = 0.0;
  double x1 = 0.0;
  double y0 = 0.0;
  double y1 = 0.0;
};

/// Monotone rearrangement between two measures, sampled on merged quantile breakpoints.
struct Coupling1D {
  SpectralMeasure source;
  SpectralMeasure target;
  std::vector<CoupledSegment> segments;

  bool is_monotone() const;
  /// E (x - y)^2 under the coupling.
  double cost() const;
};

Coupling1D monotone_coupling(const SpectralMeasure& mu, const SpectralMeasure& nu);

struct WassersteinResult {
  double distance = 0.0;
  Coupling1D coupling;
};

WassersteinResult wasserstein_1d(const SpectralMeasure& mu, const SpectralMeasure& nu);

/// Law of (1 - t) x0 + t x1 under the coupling.
SpectralMeasure displacement_interpolate(const Coupling1D& coupling, double t);

/// Kantorovich dual pair for the cost -xy: phi0(x) + phi1(y) >= x y, with equality on the coupling.
class DualPair {
 public:
  DualPair(std::vector<double> xs, std::vector<double> ys);

  /// Exact piecewise-linear phi0 (interpolates the nodes, extended linearly with the end slopes).
  double phi0(double x) const;
  /// Exact phi1 = max of tangents x_k y - c_k.
  double phi1(double y) const;
  /// Slope of phi0 at x (right derivative).
  double phi0_slope(double x) const;

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }

  GridFunction phi0_grid(int points) const;
  GridFunction phi1_grid(int points) const;

 private:
  std::vector<double> xs_, ys_, c_, phi1_values_;
  // phi0 nodes: distinct x with values c
  std::vector<double> hull_x_, hull_c_;
};

struct MkDualResult {
  DualPair pair;
  GridFunction phi0;
  GridFunction phi1;
  double max_violation = 0.0;     // max of x y - phi0(x) - phi1(y) over the grid product
  double max_equality_gap = 0.0;  // max of phi0 + phi1 - x y along the coupling
};

MkDualResult mk_dual_pair_1d(const SpectralMeasure& mu0, const SpectralMeasure& mu1, int points = 401,
                             double tolerance = 1e-6);

enum class EntropyFunctional { LogEnergy, Differential };

struct GeodesicReport {
  std::vector<double> t;
  std::vector<double> entropy;
  double max_concavity_defect = 0.0;
  double max_bound_violation = 0.0;
  std::vector<CheckRow> checks;

  bool pass() const { return all_pass(checks); }
};

/// Entropy along displacement interpolation; midpoint concavity on all grid pairs and the
/// two-sided bound log((1-t)/(1-s)) <= S(t) - S(s) <= log(t/s).
GeodesicReport geodesic_concavity_check(const SpectralMeasure& mu0, const SpectralMeasure& mu1,
                                        EntropyFunctional entropy, const std::vector<double>& t_grid,
                                        double tolerance = 1e-3);

double entropy_of(const SpectralMeasure& mu, EntropyFunctional entropy);

/// Grid measure convolved with N(0, t); exact bin-to-bin transfer for uniform bins, kernel cut
/// at 6 sqrt(t) plus one bin. Mass leaving the grid is dropped and the rest renormalized.
SpectralMeasure heat_flow(const SpectralMeasure& mu, double t);

struct EviRow {
  double s = 0.0;
  double t = 0.0;
  double lhs = 0.0;        // (W(nu_t, sigma)^2 - W(nu_s, sigma)^2) / 2
  double rhs = 0.0;        // (t - s) (h(nu_t) - h(sigma))
  double rhs_sharp = 0.0;  // rhs / 2, the inequality for the heat flow with generator Laplacian / 2
  bool pass = true;
  bool sharp_pass = true;
};

struct EviReport {
  std::vector<double> times;
  std::vector<double> w2;       // W(nu_t, sigma)^2
  std::vector<double> entropy;  // h(nu_t)
  double reference_entropy = 0.0;
  double tolerance = 0.0;
  std::vector<EviRow> rows;
  double max_excess = 0.0;
  double max_sharp_excess = 0.0;

  bool pass() const;
  bool sharp_pass() const;
};

/// mu0 and sigma must be grid measures on the same grid. Tolerance is 2 * bin width + 1e-6.
EviReport evi_check_1d(const SpectralMeasure& mu0, const SpectralMeasure& sigma, const std::vector<double>& times);

}  // namespace freegeom
