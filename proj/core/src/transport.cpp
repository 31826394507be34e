#include "freegeom/transport.hpp"

#include "freegeom/entropy.hpp"
#include "freegeom/linalg.hpp"
#include "freegeom/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace freegeom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lerp(double a, double b, double f) { return a + f * (b - a); }

double segment_value(const QuantileSegment& s, double u) {
  if (s.u1 <= s.u0) return s.x0;
  return lerp(s.x0, s.x1, std::clamp((u - s.u0) / (s.u1 - s.u0), 0.0, 1.0));
}

double coupled_at(const CoupledSegment& s, double u, bool target) {
  double f = s.u1 > s.u0 ? std::clamp((u - s.u0) / (s.u1 - s.u0), 0.0, 1.0) : 0.0;
  return target ? lerp(s.y0, s.y1, f) : lerp(s.x0, s.x1, f);
}

}  // namespace

GridFunction legendre(const GridFunction& f) {
  double lo = kInf, hi = -kInf;
  const double h = f.spacing();
  for (int i = 0; i + 1 < f.points(); ++i) {
    double s = (f.value(i + 1) - f.value(i)) / h;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(lo))) {
    lo -= 1.0;
    hi += 1.0;
  }
  return legendre(f, lo, hi, 2 * f.points());
}

GridFunction legendre(const GridFunction& f, double left, double right, int points) {
  if (points < 3 || !(right > left)) throw DomainError("legendre: dual grid needs left < right and 3 points");
  std::vector<double> out(static_cast<size_t>(points));
  const double dy = (right - left) / (points - 1);
  for (int j = 0; j < points; ++j) {
    const double y = (j + 1 == points) ? right : left + dy * j;
    double best = -kInf;
    for (int i = 0; i < f.points(); ++i) best = std::max(best, f.x(i) * y - f.value(i));
    out[static_cast<size_t>(j)] = best;
  }
  GridFunction g(left, right, std::move(out));
  g.semiconvex = 0.0;
  return g;
}

GridFunction inf_convolution(double c, const GridFunction& f) {
  if (!(c > 0.0)) throw DomainError("inf_convolution: c must be positive");
  std::vector<double> out(static_cast<size_t>(f.points()));
  for (int i = 0; i < f.points(); ++i) {
    const double x = f.x(i);
    double best = kInf;
    for (int j = 0; j < f.points(); ++j) {
      double d = f.x(j) - x;
      best = std::min(best, 0.5 * c * d * d + f.value(j));
    }
    out[static_cast<size_t>(i)] = best;
  }
  GridFunction g(f.left(), f.right(), std::move(out));
  g.semiconcave = c;
  return g;
}

GridFunction regularize_scsc(const GridFunction& f, double t, double r, double R) {
  if (!(t > 0.0)) throw DomainError("regularize_scsc: t must be positive");
  if (!(r > 0.0) || R < r) throw DomainError("regularize_scsc: need 0 < r <= R");
  const double slack = 1e-9 * std::max(1.0, R);
  if (f.left() > -R + slack || f.right() < R - slack) throw DomainError("regularize_scsc: grid must cover [-R, R]");

  std::vector<int> zs, ws;
  for (int i = 0; i < f.points(); ++i) {
    double x = f.x(i);
    if (std::abs(x) <= R + slack) zs.push_back(i);
    if (std::abs(x) <= r + slack) ws.push_back(i);
  }
  if (ws.size() < 3) throw DomainError("regularize_scsc: fewer than 3 grid nodes inside [-r, r]");

  std::vector<double> hw(ws.size());
  for (size_t a = 0; a < ws.size(); ++a) {
    const double w = f.x(ws[a]);
    double best = kInf;
    for (int j : zs) {
      double d = w - f.x(j);
      best = std::min(best, f.value(j) + d * d / (4.0 * t));
    }
    hw[a] = best;
  }
  std::vector<double> psi(ws.size());
  for (size_t b = 0; b < ws.size(); ++b) {
    const double x = f.x(ws[b]);
    double best = -kInf;
    for (size_t a = 0; a < ws.size(); ++a) {
      double d = x - f.x(ws[a]);
      best = std::max(best, hw[a] - d * d / (2.0 * t));
    }
    psi[b] = best;
  }
  GridFunction g(f.x(ws.front()), f.x(ws.back()), std::move(psi));
  g.semiconvex = 1.0 / t;
  g.semiconcave = 1.0 / t;
  return g;
}

bool Coupling1D::is_monotone() const {
  for (size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (s.x1 < s.x0 || s.y1 < s.y0) return false;
    if (i > 0 && (s.x0 < segments[i - 1].x1 || s.y0 < segments[i - 1].y1)) return false;
  }
  return true;
}

double Coupling1D::cost() const {
  double c = 0.0;
  for (const auto& s : segments) {
    double d0 = s.x0 - s.y0, d1 = s.x1 - s.y1;
    c += (s.u1 - s.u0) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
  }
  return c;
}

Coupling1D monotone_coupling(const SpectralMeasure& mu, const SpectralMeasure& nu) {
  Coupling1D c;
  c.source = mu;
  c.target = nu;
  const auto a = quantile_segments(mu);
  const auto b = quantile_segments(nu);
  size_t i = 0, j = 0;
  double u = 0.0;
  while (i < a.size() && j < b.size()) {
    const double end = std::min(a[i].u1, b[j].u1);
    if (end > u) {
      c.segments.push_back({u, end, segment_value(a[i], u), segment_value(a[i], end), segment_value(b[j], u),
                            segment_value(b[j], end)});
      u = end;
    }
    if (a[i].u1 <= end) ++i;
    if (j < b.size() && b[j].u1 <= end) ++j;
  }
  return c;
}

WassersteinResult wasserstein_1d(const SpectralMeasure& mu, const SpectralMeasure& nu) {
  WassersteinResult r;
  r.coupling = monotone_coupling(mu, nu);
  r.distance = std::sqrt(std::max(0.0, r.coupling.cost()));
  return r;
}

SpectralMeasure displacement_interpolate(const Coupling1D& coupling, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("displacement_interpolate: t must lie in [0, 1]");
  if (t == 0.0) return coupling.source;
  if (t == 1.0) return coupling.target;
  std::vector<Cell> cells;
  bool all_atoms = true;
  for (const auto& s : coupling.segments) {
    const double mass = s.u1 - s.u0;
    if (mass <= 0.0) continue;
    double a = (1.0 - t) * s.x0 + t * s.y0;
    double b = (1.0 - t) * s.x1 + t * s.y1;
    if (!cells.empty()) a = std::max(a, cells.back().b);
    b = std::max(a, b);
    if (!cells.empty() && cells.back().is_atom() && b <= a && a == cells.back().a) {
      cells.back().mass += mass;
      continue;
    }
    all_atoms = all_atoms && b <= a;
    cells.push_back({a, b, mass});
  }
  if (all_atoms) {
    std::vector<double> loc, w;
    for (const Cell& c : cells) {
      loc.push_back(c.a);
      w.push_back(c.mass);
    }
    return SpectralMeasure::atoms(loc, w);
  }
  return SpectralMeasure::pieces(std::move(cells));
}

DualPair::DualPair(std::vector<double> xs, std::vector<double> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.empty() || xs_.size() != ys_.size()) throw ShapeError("dual pair needs matching nonempty node lists");
  const size_t K = xs_.size();
  phi1_values_.assign(K, 0.0);
  for (size_t k = 1; k < K; ++k) {
    if (xs_[k] < xs_[k - 1] || ys_[k] < ys_[k - 1]) throw DomainError("dual pair nodes must be nondecreasing");
    phi1_values_[k] = phi1_values_[k - 1] + 0.5 * (xs_[k] + xs_[k - 1]) * (ys_[k] - ys_[k - 1]);
  }
  // Anchor phi1 so that phi1(y) is close to y^2 / 2 near the first node.
  const double shift = 0.5 * ys_.front() * ys_.front();
  for (double& v : phi1_values_) v += shift;
  c_.resize(K);
  for (size_t k = 0; k < K; ++k) c_[k] = xs_[k] * ys_[k] - phi1_values_[k];
  for (size_t k = 0; k < K; ++k) {
    if (!hull_x_.empty() && xs_[k] == hull_x_.back()) continue;
    hull_x_.push_back(xs_[k]);
    hull_c_.push_back(c_[k]);
  }
}

double DualPair::phi1(double y) const {
  double best = -kInf;
  for (size_t k = 0; k < xs_.size(); ++k) best = std::max(best, xs_[k] * y - c_[k]);
  return best;
}

double DualPair::phi0_slope(double x) const {
  const size_t H = hull_x_.size();
  if (H == 1 || x < hull_x_.front()) return x < hull_x_.front() ? ys_.front() : ys_.back();
  if (x >= hull_x_.back()) return ys_.back();
  size_t k = static_cast<size_t>(std::upper_bound(hull_x_.begin(), hull_x_.end(), x) - hull_x_.begin()) - 1;
  return (hull_c_[k + 1] - hull_c_[k]) / (hull_x_[k + 1] - hull_x_[k]);
}

double DualPair::phi0(double x) const {
  const size_t H = hull_x_.size();
  if (x <= hull_x_.front()) return hull_c_.front() + ys_.front() * (x - hull_x_.front());
  if (x >= hull_x_.back()) return hull_c_.back() + ys_.back() * (x - hull_x_.back());
  size_t k = static_cast<size_t>(std::upper_bound(hull_x_.begin(), hull_x_.end(), x) - hull_x_.begin()) - 1;
  k = std::min(k, H - 2);
  double f = (x - hull_x_[k]) / (hull_x_[k + 1] - hull_x_[k]);
  return lerp(hull_c_[k], hull_c_[k + 1], f);
}

namespace {
std::pair<double, double> padded_range(double lo, double hi) {
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(lo))) return {lo - 1.0, hi + 1.0};
  return {lo, hi};
}
}  // namespace

GridFunction DualPair::phi0_grid(int points) const {
  auto [lo, hi] = padded_range(xs_.front(), xs_.back());
  return GridFunction::sample([this](double x) { return phi0(x); }, lo, hi, points);
}

GridFunction DualPair::phi1_grid(int points) const {
  auto [lo, hi] = padded_range(ys_.front(), ys_.back());
  return GridFunction::sample([this](double y) { return phi1(y); }, lo, hi, points);
}

MkDualResult mk_dual_pair_1d(const SpectralMeasure& mu0, const SpectralMeasure& mu1, int points, double tolerance) {
  Coupling1D coupling = monotone_coupling(mu0, mu1);
  std::vector<double> xs, ys;
  auto push = [&](double x, double y) {
    if (!xs.empty() && xs.back() == x && ys.back() == y) return;
    xs.push_back(x);
    ys.push_back(y);
  };
  for (const auto& s : coupling.segments) {
    push(s.x0, s.y0);
    push(0.5 * (s.x0 + s.x1), 0.5 * (s.y0 + s.y1));
    push(s.x1, s.y1);
  }
  DualPair pair(std::move(xs), std::move(ys));
  MkDualResult out{pair, pair.phi0_grid(points), pair.phi1_grid(points), 0.0, 0.0};

  for (int i = 0; i < out.phi0.points(); ++i)
    for (int j = 0; j < out.phi1.points(); ++j)
      out.max_violation = std::max(out.max_violation, out.phi0.x(i) * out.phi1.x(j) - out.phi0.value(i) -
                                                          out.phi1.value(j));

  const int checks = 2000;
  size_t seg = 0;
  for (int q = 0; q < checks; ++q) {
    const double u = (q + 0.5) / checks;
    while (seg + 1 < coupling.segments.size() && coupling.segments[seg].u1 < u) ++seg;
    const auto& s = coupling.segments[seg];
    const double x = coupled_at(s, u, false), y = coupled_at(s, u, true);
    const double gap = pair.phi0(x) + pair.phi1(y) - x * y;
    out.max_violation = std::max(out.max_violation, -gap);
    out.max_equality_gap = std::max(out.max_equality_gap, gap);
  }
  if (out.max_violation > tolerance)
    throw InternalConsistencyError("dual pair violates admissibility by " + std::to_string(out.max_violation));
  return out;
}

double entropy_of(const SpectralMeasure& mu, EntropyFunctional entropy) {
  return entropy == EntropyFunctional::LogEnergy ? log_energy_entropy(mu) : differential_entropy(mu);
}

GeodesicReport geodesic_concavity_check(const SpectralMeasure& mu0, const SpectralMeasure& mu1,
                                        EntropyFunctional entropy, const std::vector<double>& t_grid,
                                        double tolerance) {
  for (double t : t_grid)
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("geodesic check: times must lie in [0, 1]");
  if (!std::isfinite(entropy_of(mu0, entropy)) || !std::isfinite(entropy_of(mu1, entropy)))
    throw DomainError("geodesic check: entropy must be finite at both endpoints");

  const Coupling1D coupling = monotone_coupling(mu0, mu1);
  std::map<double, double> memo;
  auto S = [&](double t) {
    auto it = memo.find(t);
    if (it != memo.end()) return it->second;
    double v = entropy_of(displacement_interpolate(coupling, t), entropy);
    memo.emplace(t, v);
    return v;
  };

  GeodesicReport rep;
  std::vector<double> ts = t_grid;
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  rep.t = ts;
  for (double t : ts) rep.entropy.push_back(S(t));

  double defect = -kInf, violation = -kInf;
  for (size_t i = 0; i < ts.size(); ++i) {
    for (size_t j = i + 1; j < ts.size(); ++j) {
      const double s = ts[i], t = ts[j];
      defect = std::max(defect, 0.5 * (rep.entropy[i] + rep.entropy[j]) - S(0.5 * (s + t)));
      const double d = rep.entropy[j] - rep.entropy[i];
      if (t < 1.0) violation = std::max(violation, std::log((1.0 - t) / (1.0 - s)) - d);
      if (s > 0.0) violation = std::max(violation, d - std::log(t / s));
    }
  }
  rep.max_concavity_defect = std::isfinite(defect) ? defect : 0.0;
  rep.max_bound_violation = std::isfinite(violation) ? violation : 0.0;
  rep.checks.push_back({"midpoint_concavity_defect", rep.max_concavity_defect, 0.0, tolerance,
                        rep.max_concavity_defect <= tolerance});
  rep.checks.push_back({"two_sided_bound_violation", rep.max_bound_violation, 0.0, tolerance,
                        rep.max_bound_violation <= tolerance});
  return rep;
}

SpectralMeasure heat_flow(const SpectralMeasure& mu, double t) {
  if (mu.kind() != SpectralMeasure::Kind::Grid) throw DomainError("heat_flow needs a grid measure");
  if (!(t >= 0.0)) throw DomainError("heat_flow: t must be nonnegative");
  if (t == 0.0) return mu;
  const double h = mu.spacing();
  const double sd = std::sqrt(t);
  // Psi'' is the N(0, t) density.
  auto Psi = [sd](double u) {
    const double z = u / sd;
    return u * stats::normal_cdf(z) + sd * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  };
  const int reach = static_cast<int>(std::ceil(6.0 * sd / h)) + 1;
  std::vector<double> kernel(static_cast<size_t>(2 * reach + 1));
  double ksum = 0.0;
  for (int k = -reach; k <= reach; ++k) {
    double v = (Psi((k + 1) * h) - 2.0 * Psi(k * h) + Psi((k - 1) * h)) / h;
    v = std::max(0.0, v);
    kernel[static_cast<size_t>(k + reach)] = v;
    ksum += v;
  }
  for (double& v : kernel) v /= ksum;

  const std::vector<double> m = mu.masses();
  const int B = static_cast<int>(m.size());
  std::vector<double> out(m.size(), 0.0);
  for (int i = 0; i < B; ++i) {
    if (m[static_cast<size_t>(i)] == 0.0) continue;
    const int lo = std::max(0, i - reach), hi = std::min(B - 1, i + reach);
    for (int j = lo; j <= hi; ++j) out[static_cast<size_t>(j)] += m[static_cast<size_t>(i)] * kernel[static_cast<size_t>(j - i + reach)];
  }
  double total = 0.0;
  for (double v : out) total += v;
  for (double& v : out) v /= total;
  return SpectralMeasure::grid_masses(mu.left(), mu.right(), std::move(out));
}

bool EviReport::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const EviRow& r) { return r.pass; });
}

bool EviReport::sharp_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const EviRow& r) { return r.sharp_pass; });
}

EviReport evi_check_1d(const SpectralMeasure& mu0, const SpectralMeasure& sigma, const std::vector<double>& times) {
  if (mu0.kind() != SpectralMeasure::Kind::Grid || sigma.kind() != SpectralMeasure::Kind::Grid)
    throw DomainError("evi_check_1d needs grid measures");
  if (mu0.bins() != sigma.bins() || mu0.left() != sigma.left() || mu0.right() != sigma.right())
    throw DomainError("evi_check_1d: measures must share a grid");
  EviReport rep;
  rep.times = times;
  std::sort(rep.times.begin(), rep.times.end());
  rep.times.erase(std::unique(rep.times.begin(), rep.times.end()), rep.times.end());
  for (double t : rep.times)
    if (!(t >= 0.0)) throw DomainError("evi_check_1d: times must be nonnegative");
  rep.tolerance = 2.0 * mu0.spacing() + 1e-6;
  rep.reference_entropy = differential_entropy(sigma);
  for (double t : rep.times) {
    SpectralMeasure nu = heat_flow(mu0, t);
    double w = wasserstein_1d(nu, sigma).distance;
    rep.w2.push_back(w * w);
    rep.entropy.push_back(differential_entropy(nu));
  }
  rep.max_excess = -kInf;
  rep.max_sharp_excess = -kInf;
  for (size_t i = 0; i < rep.times.size(); ++i) {
    for (size_t j = i + 1; j < rep.times.size(); ++j) {
      EviRow row;
      row.s = rep.times[i];
      row.t = rep.times[j];
      row.lhs = 0.5 * (rep.w2[j] - rep.w2[i]);
      row.rhs = (row.t - row.s) * (rep.entropy[j] - rep.reference_entropy);
      row.rhs_sharp = 0.5 * row.rhs;
      row.pass = row.lhs <= row.rhs + rep.tolerance;
      row.sharp_pass = row.lhs <= row.rhs_sharp + rep.tolerance;
      rep.max_excess = std::max(rep.max_excess, row.lhs - row.rhs);
      rep.max_sharp_excess = std::max(rep.max_sharp_excess, row.lhs - row.rhs_sharp);
      rep.rows.push_back(row);
    }
  }
  if (rep.rows.empty()) rep.max_excess = rep.max_sharp_excess = 0.0;
  return rep;
}

}  // namespace freegeom
