#include "freegeom/ensembles.hpp"

#include <cmath>
#include <map>

namespace freegeom {

HermitianMatrix sample_gue(int n, Rng& rng) {
  if (n < 1) throw DomainError("sample_gue: n must be positive");
  const double diag_sd = 1.0 / std::sqrt(static_cast<double>(n));
  const double off_sd = 1.0 / std::sqrt(2.0 * n);
  CMatrix x(n, n);
  for (int i = 0; i < n; ++i) {
    x(i, i) = diag_sd * rng.normal();
    for (int j = i + 1; j < n; ++j) {
      double a = rng.normal();
      double b = rng.normal();
      x(i, j) = cplx(off_sd * a, off_sd * b);
      x(j, i) = std::conj(x(i, j));
    }
  }
  return HermitianMatrix(x);
}

HermitianMatrix sample_gue(int n, RngSeed seed) {
  Rng rng(seed);
  return sample_gue(n, rng);
}

CMatrix sample_ginibre(int n, Rng& rng) {
  if (n < 1) throw DomainError("sample_ginibre: n must be positive");
  // Entries of A + iB are i.i.d. with independent real and imaginary parts of variance 1/n.
  const double sd = 1.0 / std::sqrt(static_cast<double>(n));
  CMatrix z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double a = rng.normal();
      double b = rng.normal();
      z(i, j) = cplx(sd * a, sd * b);
    }
  return z;
}

MatrixTuple sample_ginibre_tuple(int n, int m, Rng& rng) {
  if (m < 0) throw DomainError("sample_ginibre_tuple: m must be nonnegative");
  std::vector<CMatrix> mats;
  mats.reserve(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) mats.push_back(sample_ginibre(n, rng));
  return MatrixTuple(n, std::move(mats));
}

MatrixTuple sample_ginibre_tuple(int n, int m, RngSeed seed) {
  Rng rng(seed);
  return sample_ginibre_tuple(n, m, rng);
}

BrownianGrid::BrownianGrid(int dim, int coords, std::vector<double> times,
                           std::vector<MatrixTuple> increments)
    : dim_(dim), coords_(coords), times_(std::move(times)), increments_(std::move(increments)) {
  if (times_.empty() || times_.front() != 0.0) throw DomainError("Brownian grid must start at time 0");
  for (size_t i = 1; i < times_.size(); ++i)
    if (!(times_[i] > times_[i - 1])) throw DomainError("Brownian grid times must increase strictly");
  if (increments_.size() + 1 != times_.size()) throw ShapeError("one increment per stage expected");
  for (const auto& inc : increments_)
    if (inc.dim() != dim_ || inc.size() != coords_) throw ShapeError("increment shape mismatch");
}

MatrixTuple BrownianGrid::position(int i) const {
  if (i < 0 || i > stages()) throw ShapeError("Brownian grid index out of range");
  MatrixTuple z = MatrixTuple::zeros(dim_, coords_);
  for (int l = 0; l < i; ++l) z = z + increments_[static_cast<size_t>(l)];
  return z;
}

BrownianGrid sample_brownian(int n, int m, const std::vector<double>& times, RngSeed seed) {
  if (times.empty() || times.front() != 0.0) throw DomainError("Brownian grid must start at time 0");
  for (size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw DomainError("Brownian grid times must increase strictly");
  Rng rng(seed);
  std::vector<MatrixTuple> inc;
  for (size_t i = 1; i < times.size(); ++i)
    inc.push_back(sample_ginibre_tuple(n, m, rng) * std::sqrt(times[i] - times[i - 1]));
  return BrownianGrid(n, m, times, std::move(inc));
}

namespace {

double moment_rec(const FreeWord& w, const DeterministicTrace& traces) {
  size_t first = w.size();
  std::map<int, int> counts;
  for (size_t i = 0; i < w.size(); ++i)
    if (w[i].kind == FreeLetter::Kind::Semicircular) {
      if (first == w.size()) first = i;
      ++counts[w[i].index];
    }
  if (first == w.size()) {
    std::vector<int> slots;
    for (const auto& l : w) slots.push_back(l.index);
    return traces(slots);
  }
  for (const auto& [idx, c] : counts)
    if (c % 2 != 0) return 0.0;

  double total = 0.0;
  for (size_t q = first + 1; q < w.size(); ++q) {
    if (w[q].kind != FreeLetter::Kind::Semicircular || w[q].index != w[first].index) continue;
    FreeWord inner(w.begin() + static_cast<long>(first) + 1, w.begin() + static_cast<long>(q));
    FreeWord outer(w.begin(), w.begin() + static_cast<long>(first));
    outer.insert(outer.end(), w.begin() + static_cast<long>(q) + 1, w.end());
    double a = moment_rec(inner, traces);
    if (a == 0.0) continue;
    total += a * moment_rec(outer, traces);
  }
  return total;
}

}  // namespace

double free_mixed_moment(const FreeWord& word, const DeterministicTrace& traces) {
  if (word.empty()) throw DomainError("free word must be nonempty");
  int s = 0;
  for (const auto& l : word) {
    if (l.kind == FreeLetter::Kind::Semicircular) ++s;
    if (l.index < 0) throw DomainError("negative letter index");
  }
  if (s > 12) throw DomainError("free word exceeds 12 semicircular letters");
  return moment_rec(word, traces);
}

double free_mixed_moment(const FreeWord& word, const std::vector<CMatrix>& deterministic) {
  DeterministicTrace tr = [&deterministic](const std::vector<int>& slots) {
    if (slots.empty()) return 1.0;
    CMatrix p = deterministic.at(static_cast<size_t>(slots[0]));
    for (size_t i = 1; i < slots.size(); ++i) p = p * deterministic.at(static_cast<size_t>(slots[i]));
    return tr_n(p).real();
  };
  for (const auto& l : word)
    if (l.kind == FreeLetter::Kind::Deterministic && l.index >= static_cast<int>(deterministic.size()))
      throw DomainError("word references a missing deterministic slot");
  return free_mixed_moment(word, tr);
}

double matrix_word_trace(const FreeWord& word, const std::vector<CMatrix>& semicirculars,
                         const std::vector<CMatrix>& deterministic) {
  if (word.empty()) throw DomainError("free word must be nonempty");
  auto pick = [&](const FreeLetter& l) -> const CMatrix& {
    const auto& src = l.kind == FreeLetter::Kind::Semicircular ? semicirculars : deterministic;
    return src.at(static_cast<size_t>(l.index));
  };
  if (word.size() == 1) return tr_n(pick(word[0])).real();
  // tr(AB) from the two half products saves the last multiplication.
  const size_t half = word.size() / 2;
  CMatrix a = pick(word[0]);
  for (size_t i = 1; i < half; ++i) a = a * pick(word[i]);
  CMatrix b = pick(word[half]);
  for (size_t i = half + 1; i < word.size(); ++i) b = b * pick(word[i]);
  return (a.cwiseProduct(b.transpose())).sum().real() / static_cast<double>(a.rows());
}

}  // namespace freegeom
