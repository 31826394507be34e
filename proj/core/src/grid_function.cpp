#include "freegeom/grid_function.hpp"

#include "freegeom/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace freegeom {

GridFunction::GridFunction(double left, double right, std::vector<double> values)
    : left_(left), right_(right), values_(std::move(values)) {
  if (!(right_ > left_) || !std::isfinite(left_) || !std::isfinite(right_))
    throw DomainError("grid function needs finite left < right");
  if (values_.size() < 3) throw DomainError("grid function needs at least 3 points");
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("grid function values must be finite");
}

GridFunction GridFunction::sample(const std::function<double(double)>& f, double left, double right, int points) {
  if (points < 3) throw DomainError("grid function needs at least 3 points");
  std::vector<double> v(static_cast<size_t>(points));
  const double h = (right - left) / (points - 1);
  for (int i = 0; i < points; ++i) v[static_cast<size_t>(i)] = f(i + 1 == points ? right : left + h * i);
  return GridFunction(left, right, std::move(v));
}

double GridFunction::x(int i) const {
  if (i == points() - 1) return right_;
  return left_ + spacing() * i;
}

double GridFunction::operator()(double x) const {
  const double h = spacing();
  const double slack = 1e-12 * std::max(1.0, std::abs(left_) + std::abs(right_));
  if (x < left_ - slack || x > right_ + slack) throw DomainError("grid function evaluated outside its grid");
  double s = std::clamp((x - left_) / h, 0.0, static_cast<double>(points() - 1));
  int i = std::min(static_cast<int>(s), points() - 2);
  double f = s - i;
  return (1.0 - f) * values_[static_cast<size_t>(i)] + f * values_[static_cast<size_t>(i + 1)];
}

std::vector<double> GridFunction::second_differences() const {
  const double h2 = spacing() * spacing();
  std::vector<double> d;
  d.reserve(values_.size() - 2);
  for (size_t i = 1; i + 1 < values_.size(); ++i) d.push_back((values_[i + 1] - 2.0 * values_[i] + values_[i - 1]) / h2);
  return d;
}

double GridFunction::min_second_difference() const {
  auto d = second_differences();
  return *std::min_element(d.begin(), d.end());
}

double GridFunction::max_second_difference() const {
  auto d = second_differences();
  return *std::max_element(d.begin(), d.end());
}

std::string GridFunction::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(17) << "x,value\n";
  for (int i = 0; i < points(); ++i) out << x(i) << ',' << value(i) << '\n';
  return out.str();
}

GridFunction GridFunction::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> xs, vs;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line == "x,value") continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("grid CSV: expected 'x,value' rows");
    try {
      xs.push_back(std::stod(line.substr(0, comma)));
      vs.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw DomainError("grid CSV: bad number in '" + line + "'");
    }
  }
  if (xs.size() < 3) throw DomainError("grid CSV: need at least 3 rows");
  const double h = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
  for (size_t i = 0; i < xs.size(); ++i)
    if (std::abs(xs[i] - (xs.front() + h * static_cast<double>(i))) > 1e-9 * std::max(1.0, std::abs(h) * xs.size()))
      throw DomainError("grid CSV: nodes are not uniformly spaced");
  return GridFunction(xs.front(), xs.back(), std::move(vs));
}

}  // namespace freegeom
