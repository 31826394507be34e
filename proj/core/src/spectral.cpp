#include "freegeom/spectral.hpp"

#include "freegeom/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace freegeom {

namespace {

constexpr double kMassTol = 1e-9;

void check_total(double total) {
  if (!(std::abs(total - 1.0) <= kMassTol))
    throw DomainError("spectral measure must have total mass 1 (got " + std::to_string(total) + ")");
}

void check_grid(double left, double right, size_t bins) {
  if (!(right > left) || !std::isfinite(left) || !std::isfinite(right))
    throw DomainError("grid needs finite left < right");
  if (bins == 0) throw DomainError("grid needs at least one bin");
}

double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * M_PI) + std::asin(x / 2.0) / M_PI;
}

std::vector<double> normalized(std::vector<double> masses) {
  double total = std::accumulate(masses.begin(), masses.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("measure has no mass on the grid");
  for (double& m : masses) m /= total;
  return masses;
}

}  // namespace

SpectralMeasure SpectralMeasure::atoms(std::vector<double> locations, std::vector<double> weights) {
  if (locations.size() != weights.size()) throw ShapeError("atoms: locations and weights differ in length");
  if (locations.empty()) throw DomainError("atoms: empty measure");
  std::vector<size_t> order(locations.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return locations[i] < locations[j]; });
  SpectralMeasure mu;
  mu.kind_ = Kind::Atoms;
  double total = 0.0;
  for (size_t i : order) {
    double x = locations[i], w = weights[i];
    if (!std::isfinite(x)) throw DomainError("atoms: non-finite location");
    if (!(w >= 0.0)) throw DomainError("atoms: negative weight");
    total += w;
    if (!mu.cells_.empty() && mu.cells_.back().a == x)
      mu.cells_.back().mass += w;
    else
      mu.cells_.push_back({x, x, w});
  }
  check_total(total);
  return mu;
}

SpectralMeasure SpectralMeasure::grid(double left, double right, std::vector<double> densities) {
  check_grid(left, right, densities.size());
  const double h = (right - left) / static_cast<double>(densities.size());
  for (double& d : densities) d *= h;
  return grid_masses(left, right, std::move(densities));
}

SpectralMeasure SpectralMeasure::grid_masses(double left, double right, std::vector<double> masses) {
  check_grid(left, right, masses.size());
  SpectralMeasure mu;
  mu.kind_ = Kind::Grid;
  const size_t bins = masses.size();
  const double h = (right - left) / static_cast<double>(bins);
  double total = 0.0;
  mu.cells_.reserve(bins);
  for (size_t i = 0; i < bins; ++i) {
    if (!(masses[i] >= 0.0)) throw DomainError("grid: negative density");
    total += masses[i];
    double a = left + h * static_cast<double>(i);
    double b = (i + 1 == bins) ? right : left + h * static_cast<double>(i + 1);
    mu.cells_.push_back({a, b, masses[i]});
  }
  check_total(total);
  return mu;
}

SpectralMeasure SpectralMeasure::pieces(std::vector<Cell> cells) {
  if (cells.empty()) throw DomainError("pieces: empty measure");
  double total = 0.0;
  for (size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    if (!std::isfinite(c.a) || !std::isfinite(c.b) || c.b < c.a) throw DomainError("pieces: malformed cell");
    if (!(c.mass >= 0.0)) throw DomainError("pieces: negative mass");
    if (i > 0 && c.a < cells[i - 1].b) throw DomainError("pieces: cells overlap or are unsorted");
    total += c.mass;
  }
  check_total(total);
  SpectralMeasure mu;
  mu.kind_ = Kind::Pieces;
  mu.cells_ = std::move(cells);
  return mu;
}

SpectralMeasure SpectralMeasure::empirical(const RVector& eigenvalues) {
  const auto n = static_cast<size_t>(eigenvalues.size());
  if (n == 0) throw DomainError("empirical: no eigenvalues");
  std::vector<double> loc(eigenvalues.data(), eigenvalues.data() + n);
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  // Rounding of 1/n can leave the total a few ulps away from 1.
  w.back() = 1.0 - (static_cast<double>(n) - 1.0) / static_cast<double>(n);
  return atoms(std::move(loc), std::move(w));
}

SpectralMeasure SpectralMeasure::semicircle(int bins, double center, double radius) {
  if (bins < 1 || !(radius > 0.0)) throw DomainError("semicircle: need bins >= 1 and radius > 0");
  std::vector<double> masses(static_cast<size_t>(bins));
  double prev = 0.0;
  for (int i = 0; i < bins; ++i) {
    double u = -2.0 + 4.0 * static_cast<double>(i + 1) / static_cast<double>(bins);
    double next = (i + 1 == bins) ? 1.0 : semicircle_cdf(u);
    masses[static_cast<size_t>(i)] = next - prev;
    prev = next;
  }
  return grid_masses(center - radius, center + radius, normalized(std::move(masses)));
}

SpectralMeasure SpectralMeasure::gaussian(double mean, double sd, double left, double right, int bins) {
  if (!(sd > 0.0) || bins < 1) throw DomainError("gaussian: need sd > 0 and bins >= 1");
  check_grid(left, right, static_cast<size_t>(bins));
  std::vector<double> masses(static_cast<size_t>(bins));
  const double h = (right - left) / bins;
  double prev = stats::normal_cdf((left - mean) / sd);
  for (int i = 0; i < bins; ++i) {
    double next = stats::normal_cdf((left + h * (i + 1) - mean) / sd);
    masses[static_cast<size_t>(i)] = std::max(0.0, next - prev);
    prev = next;
  }
  return grid_masses(left, right, normalized(std::move(masses)));
}

SpectralMeasure SpectralMeasure::from_density(const std::function<double(double)>& density, double left,
                                              double right, int bins) {
  if (bins < 1) throw DomainError("from_density: bins >= 1");
  check_grid(left, right, static_cast<size_t>(bins));
  std::vector<double> masses(static_cast<size_t>(bins));
  const double h = (right - left) / bins;
  for (int i = 0; i < bins; ++i) {
    double v = density(left + h * (i + 0.5));
    if (!(v >= 0.0)) throw DomainError("from_density: density must be nonnegative");
    masses[static_cast<size_t>(i)] = v * h;
  }
  return grid_masses(left, right, normalized(std::move(masses)));
}

double SpectralMeasure::left() const {
  if (kind_ != Kind::Grid) throw DomainError("not a grid measure");
  return cells_.front().a;
}

double SpectralMeasure::right() const {
  if (kind_ != Kind::Grid) throw DomainError("not a grid measure");
  return cells_.back().b;
}

int SpectralMeasure::bins() const {
  if (kind_ != Kind::Grid) throw DomainError("not a grid measure");
  return static_cast<int>(cells_.size());
}

double SpectralMeasure::spacing() const { return (right() - left()) / bins(); }

std::vector<double> SpectralMeasure::masses() const {
  std::vector<double> m;
  m.reserve(cells_.size());
  for (const Cell& c : cells_) m.push_back(c.mass);
  return m;
}

std::vector<double> SpectralMeasure::densities() const {
  const double h = spacing();
  std::vector<double> d = masses();
  for (double& v : d) v /= h;
  return d;
}

bool SpectralMeasure::has_atoms() const {
  return std::any_of(cells_.begin(), cells_.end(), [](const Cell& c) { return c.is_atom() && c.mass > 0.0; });
}

double SpectralMeasure::support_min() const {
  for (const Cell& c : cells_)
    if (c.mass > 0.0) return c.a;
  return cells_.front().a;
}

double SpectralMeasure::support_max() const {
  for (auto it = cells_.rbegin(); it != cells_.rend(); ++it)
    if (it->mass > 0.0) return it->b;
  return cells_.back().b;
}

double SpectralMeasure::mean() const {
  double s = 0.0;
  for (const Cell& c : cells_) s += c.mass * 0.5 * (c.a + c.b);
  return s;
}

double SpectralMeasure::variance() const {
  const double m = mean();
  double s = 0.0;
  for (const Cell& c : cells_) {
    // second moment of the uniform law on [a, b] about m
    double a = c.a - m, b = c.b - m;
    s += c.mass * (a * a + a * b + b * b) / 3.0;
  }
  return s;
}

double SpectralMeasure::cdf(double x) const {
  double s = 0.0;
  for (const Cell& c : cells_) {
    if (x >= c.b) {
      s += c.mass;
    } else if (x > c.a) {
      s += c.mass * (x - c.a) / (c.b - c.a);
      break;
    } else {
      break;
    }
  }
  return std::min(1.0, s);
}

double SpectralMeasure::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("quantile: u must lie in [0, 1]");
  for (const QuantileSegment& s : quantile_segments(*this)) {
    if (u <= s.u1) {
      if (s.u1 <= s.u0) return s.x0;
      double f = std::clamp((u - s.u0) / (s.u1 - s.u0), 0.0, 1.0);
      return s.x0 + f * (s.x1 - s.x0);
    }
  }
  return support_max();
}

SpectralMeasure SpectralMeasure::translated(double a) const {
  SpectralMeasure mu = *this;
  for (Cell& c : mu.cells_) {
    c.a += a;
    c.b += a;
  }
  return mu;
}

SpectralMeasure SpectralMeasure::dilated(double c) const {
  if (c == 0.0 || !std::isfinite(c)) throw DomainError("dilation factor must be finite and nonzero");
  SpectralMeasure mu = *this;
  for (Cell& cell : mu.cells_) {
    double a = c * cell.a, b = c * cell.b;
    cell.a = std::min(a, b);
    cell.b = std::max(a, b);
  }
  if (c < 0.0) std::reverse(mu.cells_.begin(), mu.cells_.end());
  return mu;
}

std::string SpectralMeasure::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(17);
  switch (kind_) {
    case Kind::Atoms:
      out << "location,weight\n";
      for (const Cell& c : cells_) out << c.a << ',' << c.mass << '\n';
      break;
    case Kind::Grid:
      out << "bin_center,mass\n";
      for (const Cell& c : cells_) out << 0.5 * (c.a + c.b) << ',' << c.mass << '\n';
      break;
    case Kind::Pieces:
      out << "left,right,mass\n";
      for (const Cell& c : cells_) out << c.a << ',' << c.b << ',' << c.mass << '\n';
      break;
  }
  return out.str();
}

SpectralMeasure SpectralMeasure::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  while (std::getline(in, header) && (header.empty() || header[0] == '#')) {
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw DomainError("spectral CSV: bad number '" + field + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  auto need = [&](size_t cols) {
    for (const auto& r : rows)
      if (r.size() != cols) throw DomainError("spectral CSV: expected " + std::to_string(cols) + " columns");
  };
  if (header == "location,weight") {
    need(2);
    std::vector<double> loc, w;
    for (const auto& r : rows) {
      loc.push_back(r[0]);
      w.push_back(r[1]);
    }
    return atoms(loc, w);
  }
  if (header == "bin_center,mass") {
    need(2);
    if (rows.size() < 2) throw DomainError("spectral CSV: a grid needs at least two bins");
    const double h = (rows.back()[0] - rows.front()[0]) / static_cast<double>(rows.size() - 1);
    std::vector<double> m;
    for (const auto& r : rows) m.push_back(r[1]);
    return grid_masses(rows.front()[0] - 0.5 * h, rows.back()[0] + 0.5 * h, m);
  }
  if (header == "left,right,mass") {
    need(3);
    std::vector<Cell> cells;
    for (const auto& r : rows) cells.push_back({r[0], r[1], r[2]});
    return pieces(cells);
  }
  throw DomainError("spectral CSV: unknown header '" + header + "'");
}

std::vector<QuantileSegment> quantile_segments(const SpectralMeasure& mu) {
  std::vector<QuantileSegment> out;
  out.reserve(mu.cells().size());
  double u = 0.0;
  for (const Cell& c : mu.cells()) {
    if (c.mass <= 0.0) continue;
    out.push_back({u, u + c.mass, c.a, c.b});
    u += c.mass;
  }
  if (!out.empty()) out.back().u1 = 1.0;
  return out;
}

}  // namespace freegeom
