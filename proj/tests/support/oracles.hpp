#pragma once

// Reference computations used by the tests. None of these call into the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Composite Simpson rule with `panels` (rounded up to even) subintervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// k-th moment of the semicircle density on [-2, 2], via t = 2 cos(theta) and the
/// trapezoid rule in theta (exact for trigonometric polynomials of low degree).
inline double semicircle_moment(int k, int nodes = 4096) {
  double s = 0.0;
  for (int i = 0; i < nodes; ++i) {
    double th = M_PI * (i + 0.5) / nodes;
    double t = 2.0 * std::cos(th);
    double dens = std::sqrt(std::max(4.0 - t * t, 0.0)) / (2.0 * M_PI);
    s += std::pow(t, k) * dens * 2.0 * std::sin(th);
  }
  return s * M_PI / nodes;
}

/// Minimum of sum pi_ij (x_i - y_j)^2 over couplings of two discrete measures, by enumerating
/// every basic feasible solution of the transport polytope. A basis is a spanning tree of the
/// bipartite graph on rows and columns; the optimum of a bounded LP is attained at a vertex.
/// Intended for at most 5 x 5.
inline double transport_lp_cost(const std::vector<double>& x, const std::vector<double>& p,
                                const std::vector<double>& y, const std::vector<double>& q) {
  const int R = static_cast<int>(x.size()), C = static_cast<int>(y.size());
  const int cells = R * C, need = R + C - 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<size_t>(need));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == need) {
      // Spanning tree test with union-find on R + C nodes.
      std::vector<int> parent(static_cast<size_t>(R + C));
      std::iota(parent.begin(), parent.end(), 0);
      std::function<int(int)> find = [&](int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
      for (int c : pick) {
        int a = find(c / C), b = find(R + c % C);
        if (a == b) return;
        parent[a] = b;
      }
      // Solve by peeling leaves.
      std::vector<double> rs(p), cs(q), flow(static_cast<size_t>(cells), 0.0);
      std::vector<bool> used(static_cast<size_t>(need), false);
      for (int round = 0; round < need; ++round) {
        bool progress = false;
        for (int i = 0; i < need && !progress; ++i) {
          if (used[i]) continue;
          int r = pick[i] / C, c = pick[i] % C;
          int rdeg = 0, cdeg = 0;
          for (int j = 0; j < need; ++j) {
            if (used[j]) continue;
            rdeg += pick[j] / C == r;
            cdeg += pick[j] % C == c;
          }
          if (rdeg == 1 || cdeg == 1) {
            double f = rdeg == 1 ? rs[r] : cs[c];
            flow[pick[i]] = f;
            rs[r] -= f;
            cs[c] -= f;
            used[i] = true;
            progress = true;
          }
        }
        if (!progress) return;
      }
      double cost = 0.0;
      for (int c = 0; c < cells; ++c) {
        if (flow[c] < -1e-12) return;
        double d = x[c / C] - y[c % C];
        cost += flow[c] * d * d;
      }
      best = std::min(best, cost);
      return;
    }
    for (int c = start; c <= cells - (need - depth); ++c) {
      pick[depth] = c;
      rec(c + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

/// Differential entropy of the pushforward of a grid density under T, computed by splitting each
/// source cell into `sub` equal pieces, mapping the piece midpoints and re-binning the mass into
/// `bins` equal bins over [lo, hi].
inline double pushforward_histogram_entropy(const std::vector<double>& cell_left, double width,
                                            const std::vector<double>& cell_mass,
                                            const std::function<double(double)>& T, double lo, double hi,
                                            int bins, int sub) {
  std::vector<double> hist(static_cast<size_t>(bins), 0.0);
  const double bw = (hi - lo) / bins;
  for (size_t i = 0; i < cell_left.size(); ++i) {
    for (int k = 0; k < sub; ++k) {
      double x = cell_left[i] + (k + 0.5) * width / sub;
      int b = static_cast<int>(std::floor((T(x) - lo) / bw));
      b = std::clamp(b, 0, bins - 1);
      hist[static_cast<size_t>(b)] += cell_mass[i] / sub;
    }
  }
  double h = 0.0;
  for (double m : hist)
    if (m > 0.0) h += m * std::log(bw / m);
  return h;
}

/// Central differences of a real function along a direction.
inline double directional_derivative(const std::function<double(double)>& g, double step = 1e-5) {
  return (g(step) - g(-step)) / (2.0 * step);
}

}  // namespace oracle
