#pragma once

#include <string>
#include <vector>

namespace freegeom {

/// One asserted comparison: `value` against `bound`, with the statistical error of `value`.
struct CheckRow {
  std::string name;
  double value = 0.0;
  double stderr = 0.0;
  double bound = 0.0;
  bool pass = true;
};

inline bool all_pass(const std::vector<CheckRow>& rows) {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

}  // namespace freegeom
