#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace freegeom {

/// Real function sampled on a uniform grid, with optional second-difference certificates.
class GridFunction {
 public:
  GridFunction() = default;
  /// Needs at least 3 finite values and left < right.
  GridFunction(double left, double right, std::vector<double> values);

  static GridFunction sample(const std::function<double(double)>& f, double left, double right, int points);

  int points() const { return static_cast<int>(values_.size()); }
  double left() const { return left_; }
  double right() const { return right_; }
  double spacing() const { return (right_ - left_) / (points() - 1); }
  double x(int i) const;
  double value(int i) const { return values_.at(static_cast<size_t>(i)); }
  const std::vector<double>& values() const { return values_; }

  /// Linear interpolation; throws DomainError outside [left, right].
  double operator()(double x) const;

  /// (f(x+h) - 2 f(x) + f(x-h)) / h^2 at interior nodes.
  std::vector<double> second_differences() const;
  double min_second_difference() const;
  double max_second_difference() const;

  /// Certified c with second differences >= -c (semiconvex) or <= c (semiconcave).
  std::optional<double> semiconvex;
  std::optional<double> semiconcave;

  /// "x,value" rows.
  std::string to_csv() const;
  static GridFunction from_csv(const std::string& text);

 private:
  double left_ = 0.0;
  double right_ = 1.0;
  std::vector<double> values_;
};

}  // namespace freegeom
