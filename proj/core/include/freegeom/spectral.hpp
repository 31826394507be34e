#pragma once

#include "freegeom/linalg.hpp"

#include <functional>
#include <string>
#include <vector>

namespace freegeom {

/// Uniformly distributed mass on [a, b]; a == b is an atom.
struct Cell {
  double a = 0.0;
  double b = 0.0;
  double mass = 0.0;

  bool is_atom() const { return b <= a; }
};

/// Probability measure on the real line, stored as sorted, non-overlapping cells.
class SpectralMeasure {
 public:
  enum class Kind { Atoms, Grid, Pieces };

  SpectralMeasure() = default;

  /// Sorts and merges coincident locations. Weights must be nonnegative and sum to 1 within 1e-9.
  static SpectralMeasure atoms(std::vector<double> locations, std::vector<double> weights);
  /// Densities on `densities.size()` uniform bins over [left, right]; must integrate to 1 within 1e-9.
  static SpectralMeasure grid(double left, double right, std::vector<double> densities);
  /// Same grid layout from bin masses.
  static SpectralMeasure grid_masses(double left, double right, std::vector<double> masses);
  /// Cells must be sorted, disjoint up to shared endpoints, and of total mass 1.
  static SpectralMeasure pieces(std::vector<Cell> cells);

  /// Eigenvalue distribution of a Hermitian matrix.
  static SpectralMeasure empirical(const RVector& eigenvalues);
  /// Semicircle of the given radius (radius 2 is the standard one), exact bin masses.
  static SpectralMeasure semicircle(int bins, double center = 0.0, double radius = 2.0);
  /// Normal law restricted to [left, right] and renormalized, exact bin masses.
  static SpectralMeasure gaussian(double mean, double sd, double left, double right, int bins);
  /// Bin masses from the midpoint rule, renormalized.
  static SpectralMeasure from_density(const std::function<double(double)>& density, double left, double right,
                                     int bins);

  Kind kind() const { return kind_; }
  const std::vector<Cell>& cells() const { return cells_; }

  // Grid layout; throws DomainError for other kinds.
  double left() const;
  double right() const;
  int bins() const;
  double spacing() const;
  std::vector<double> masses() const;
  std::vector<double> densities() const;

  bool has_atoms() const;
  double support_min() const;
  double support_max() const;
  double mean() const;
  double variance() const;
  double cdf(double x) const;
  /// Left-continuous inverse of the distribution function, u in [0, 1].
  double quantile(double u) const;

  SpectralMeasure translated(double a) const;
  /// Pushforward under x -> c x; c must be nonzero.
  SpectralMeasure dilated(double c) const;

  /// "location,weight" rows for atoms, "bin_center,mass" for grids, "left,right,mass" otherwise.
  std::string to_csv() const;
  static SpectralMeasure from_csv(const std::string& text);

 private:
  Kind kind_ = Kind::Atoms;
  std::vector<Cell> cells_;
};

/// One linear piece of a quantile function: Q runs from x0 to x1 as u runs from u0 to u1.
struct QuantileSegment {
  double u0 = 0.0;
  double u1 = 0.0;
  double x0 = 0.0;
  double x1 = 0.0;
};

/// The quantile function of the measure as segments covering [0, 1]; zero-mass cells are skipped.
std::vector<QuantileSegment> quantile_segments(const SpectralMeasure& mu);

}  // namespace freegeom
