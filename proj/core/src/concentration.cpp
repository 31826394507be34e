#include "freegeom/concentration.hpp"

#include "freegeom/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace freegeom {

namespace {

constexpr double kWilsonLevel = 0.99;

std::vector<double> sample_values(const Formula& f, int n, int m, int trials, RngSeed seed,
                                  const EvalOptions& eval) {
  if (!f.bound_vars().empty()) throw DomainError("concentration checks need a quantifier-free formula");
  if (m < f.arity()) throw DomainError("m is smaller than the arity of the formula");
  if (trials < 2) throw DomainError("need at least 2 trials");
  Evaluator ev(f, n, eval);
  Rng rng(seed);
  std::vector<double> v(static_cast<size_t>(trials));
  for (int s = 0; s < trials; ++s) v[static_cast<size_t>(s)] = ev.eval(sample_ginibre_tuple(n, m, rng)).value;
  return v;
}

double l2_lipschitz(const Formula& f, int m) { return lipschitz_constant(f) * std::sqrt(static_cast<double>(m)); }

}  // namespace

bool TailReport::all_pass() const { return std::all_of(pass.begin(), pass.end(), [](bool b) { return b; }); }

std::vector<CheckRow> TailReport::rows() const {
  std::vector<CheckRow> out;
  for (size_t i = 0; i < delta.size(); ++i) {
    std::ostringstream name;
    name << "herbst_tail_delta_" << delta[i];
    double se = std::sqrt(tail[i] * (1.0 - tail[i]) / std::max<long>(trials, 1));
    out.push_back({name.str(), tail[i], se, bound[i], pass[i]});
  }
  return out;
}

TailReport herbst_check(const Formula& f, int n, int m, const std::vector<double>& deltas, int trials,
                        RngSeed seed, const EvalOptions& eval) {
  TailReport r;
  r.n = n;
  r.m = m;
  r.trials = trials;
  r.lipschitz = l2_lipschitz(f, m);
  const auto v = sample_values(f, n, m, trials, seed, eval);
  r.mean = stats::mean(v);
  const double nn = static_cast<double>(n) * n;
  for (double d : deltas) {
    if (!(d >= 0.0)) throw DomainError("herbst_check: deltas must be nonnegative");
    long k = 0;
    for (double x : v) k += std::abs(x - r.mean) >= d ? 1 : 0;
    double bound = r.lipschitz > 0.0 ? 2.0 * std::exp(-nn * d * d / (2.0 * r.lipschitz * r.lipschitz))
                                     : (d > 0.0 ? 0.0 : 2.0);
    auto w = stats::wilson_interval(k, trials, kWilsonLevel);
    r.delta.push_back(d);
    r.tail.push_back(static_cast<double>(k) / trials);
    r.bound.push_back(bound);
    r.wilson_lo.push_back(w.lo);
    r.wilson_hi.push_back(w.hi);
    r.pass.push_back(w.lo <= bound);
  }
  return r;
}

CheckRow PoincareReport::row() const { return {"poincare_variance", variance, variance_stderr, bound, pass}; }

PoincareReport poincare_check(const Formula& f, int n, int m, int trials, RngSeed seed, const EvalOptions& eval) {
  PoincareReport r;
  r.n = n;
  r.m = m;
  r.trials = trials;
  r.lipschitz = l2_lipschitz(f, m);
  const auto v = sample_values(f, n, m, trials, seed, eval);
  const double mu = stats::mean(v);
  std::vector<double> sq;
  sq.reserve(v.size());
  for (double x : v) sq.push_back((x - mu) * (x - mu));
  r.variance = stats::variance(v);
  r.variance_stderr = stats::stderr_of_mean(sq);
  r.bound = r.lipschitz * r.lipschitz / (static_cast<double>(n) * n);
  r.pass = r.variance <= r.bound + 3.0 * r.variance_stderr;
  return r;
}

FreenessReport freeness_check(const FreeWord& word, const DeterministicFamily& d, const std::vector<int>& n_list,
                              int trials, RngSeed seed) {
  if (n_list.empty()) throw DomainError("freeness_check: empty n list");
  if (trials < 2) throw DomainError("freeness_check: need at least 2 trials");
  int semis = 0;
  for (const auto& l : word)
    if (l.kind == FreeLetter::Kind::Semicircular) semis = std::max(semis, l.index + 1);

  FreenessReport rep;
  for (size_t k = 0; k < n_list.size(); ++k) {
    const int n = n_list[k];
    const std::vector<CMatrix> det = d ? d(n) : std::vector<CMatrix>{};
    Rng rng(seed.derive(static_cast<std::uint64_t>(n)));
    std::vector<double> v(static_cast<size_t>(trials));
    std::vector<CMatrix> s(static_cast<size_t>(semis));
    for (int t = 0; t < trials; ++t) {
      for (auto& m : s) m = sample_gue(n, rng).matrix();
      v[static_cast<size_t>(t)] = matrix_word_trace(word, s, det);
    }
    FreenessRow row;
    row.n = n;
    row.mean = stats::mean(v);
    row.stderr = stats::stderr_of_mean(v);
    row.limit = free_mixed_moment(word, det);
    row.gap = row.mean - row.limit;
    rep.rows.push_back(row);
  }

  const FreenessRow& first = rep.rows.front();
  const FreenessRow& last = rep.rows.back();
  const size_t fit_end = rep.rows.size() > 1 ? rep.rows.size() - 1 : 1;
  for (size_t k = 0; k < fit_end; ++k)
    rep.fitted_c = std::max(rep.fitted_c, (std::abs(rep.rows[k].gap) + 3.0 * rep.rows[k].stderr) * rep.rows[k].n);
  const double trend_slack = 3.0 * std::hypot(first.stderr, last.stderr);
  rep.checks.push_back({"gap_shrinks", std::abs(last.gap), last.stderr, std::abs(first.gap) + trend_slack,
                        std::abs(last.gap) <= std::abs(first.gap) + trend_slack});
  const double c_bound = rep.fitted_c / last.n + 3.0 * last.stderr;
  rep.checks.push_back({"gap_within_c_over_n", std::abs(last.gap), last.stderr, c_bound, std::abs(last.gap) <= c_bound});
  return rep;
}

NormReport norm_convergence_check(const std::vector<int>& n_list, int trials, RngSeed seed, double R) {
  if (n_list.empty()) throw DomainError("norm_convergence_check: empty n list");
  if (trials < 2) throw DomainError("norm_convergence_check: need at least 2 trials");
  NormReport rep;
  rep.radius = R;
  for (int n : n_list) {
    Rng rng(seed.derive(static_cast<std::uint64_t>(n)));
    std::vector<double> norms, sq;
    long inside = 0;
    for (int t = 0; t < trials; ++t) {
      RVector lam = sample_gue(n, rng).eigenvalues();
      double norm = std::max(std::abs(lam(0)), std::abs(lam(lam.size() - 1)));
      norms.push_back(norm);
      inside += norm <= R ? 1 : 0;
      double s = 0.0;
      for (int i = 0; i < lam.size(); ++i) {
        double e = lam(i) - clamp_scalar(lam(i), 2.0);
        s += e * e;
      }
      sq.push_back(s / n);
    }
    std::sort(norms.begin(), norms.end());
    const size_t mid = norms.size() / 2;
    NormRow row;
    row.n = n;
    row.median_norm = norms.size() % 2 ? norms[mid] : 0.5 * (norms[mid - 1] + norms[mid]);
    row.identity_frequency = static_cast<double>(inside) / trials;
    const double m2 = stats::mean(sq);
    row.truncation_l2 = std::sqrt(m2);
    row.truncation_l2_stderr = m2 > 0.0 ? stats::stderr_of_mean(sq) / (2.0 * row.truncation_l2) : 0.0;
    rep.rows.push_back(row);
  }
  const NormRow& first = rep.rows.front();
  const NormRow& last = rep.rows.back();
  rep.checks.push_back({"median_norm_distance_from_2", std::abs(last.median_norm - 2.0), 0.0, 0.2,
                        std::abs(last.median_norm - 2.0) <= 0.2});
  auto w = stats::wilson_interval(std::lround(last.identity_frequency * trials), trials, kWilsonLevel);
  rep.checks.push_back({"truncation_identity_frequency", last.identity_frequency, 0.0, 0.99, w.hi >= 0.99});
  const double slack = 3.0 * (first.truncation_l2_stderr + last.truncation_l2_stderr);
  rep.checks.push_back({"truncation_l2_decreases", last.truncation_l2, last.truncation_l2_stderr,
                        first.truncation_l2 + slack, last.truncation_l2 <= first.truncation_l2 + slack});
  return rep;
}

std::string concentration_csv(const std::vector<std::pair<int, CheckRow>>& rows) {
  std::ostringstream out;
  out << std::setprecision(12) << "n,statistic,value,bound,pass\n";
  for (const auto& [n, r] : rows) out << n << ',' << r.name << ',' << r.value << ',' << r.bound << ',' << (r.pass ? 1 : 0) << '\n';
  return out.str();
}

}  // namespace freegeom
