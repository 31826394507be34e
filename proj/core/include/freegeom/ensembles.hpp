#pragma once

#include "freegeom/linalg.hpp"
#include "freegeom/rng.hpp"

#include <functional>
#include <vector>

namespace freegeom {

/// GUE with density proportional to exp(-n^2 |X|_2^2 / 2).
HermitianMatrix sample_gue(int n, Rng& rng);
HermitianMatrix sample_gue(int n, RngSeed seed);

/// Ginibre matrix A + iB with A, B independent GUE.
CMatrix sample_ginibre(int n, Rng& rng);
MatrixTuple sample_ginibre_tuple(int n, int m, Rng& rng);
MatrixTuple sample_ginibre_tuple(int n, int m, RngSeed seed);

class BrownianGrid {
 public:
  BrownianGrid(int dim, int coords, std::vector<double> times, std::vector<MatrixTuple> increments);

  int dim() const { return dim_; }
  int coords() const { return coords_; }
  int stages() const { return static_cast<int>(increments_.size()); }
  const std::vector<double>& times() const { return times_; }
  const MatrixTuple& increment(int i) const { return increments_.at(static_cast<size_t>(i)); }

  /// Z at times[i]; position 0 is the zero tuple.
  MatrixTuple position(int i) const;
  MatrixTuple endpoint() const { return position(stages()); }

 private:
  int dim_;
  int coords_;
  std::vector<double> times_;
  std::vector<MatrixTuple> increments_;
};

/// `times` must start at 0 and be strictly increasing.
BrownianGrid sample_brownian(int n, int m, const std::vector<double>& times, RngSeed seed);

struct FreeLetter {
  enum class Kind { Semicircular, Deterministic };
  Kind kind = Kind::Semicircular;
  int index = 0;

  static FreeLetter s(int i) { return {Kind::Semicircular, i}; }
  static FreeLetter d(int i) { return {Kind::Deterministic, i}; }
};

using FreeWord = std::vector<FreeLetter>;

/// Limiting trace of a product of deterministic slots, read cyclically.
using DeterministicTrace = std::function<double(const std::vector<int>& slots)>;

/// Exact limiting E tr_n of the word for standard free semicirculars and deterministic
/// matrices whose joint traces are given by `traces`.
double free_mixed_moment(const FreeWord& word, const DeterministicTrace& traces);

/// Convenience: deterministic traces read from explicit matrices (Re tr_n of the product).
double free_mixed_moment(const FreeWord& word, const std::vector<CMatrix>& deterministic);

/// Re tr_n of the word with semicircular letters replaced by the given GUE samples.
double matrix_word_trace(const FreeWord& word, const std::vector<CMatrix>& semicirculars,
                         const std::vector<CMatrix>& deterministic);

}  // namespace freegeom
