#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace detfield::internal {

struct GaussRule {
  std::vector<double> nodes;    // on (-1, 1), ascending
  std::vector<double> weights;  // sum to 2
};

// Newton iteration on Legendre polynomials from the Chebyshev initial guess.
inline GaussRule compute_gauss_rule(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) {
        // one more polish pass, then stop
        p0 = 1.0;
        p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        pp = n * (x * p1 - p0) / (x * x - 1.0);
        x -= p1 / pp;
        break;
      }
    }
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.nodes[i] = -x;  // cos ordering gives descending |x|; mirror to ascending
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {  // center node of odd rules is exactly 0
    r.nodes[n / 2] = 0.0;
  }
  return r;
}

inline const GaussRule& gauss_rule(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_rule(n)).first;
  return it->second;
}

}  // namespace detfield::internal
