#pragma once

#include <cmath>
#include <utility>

namespace hfc::detail {

struct LogMax {
  double value = 0.0;
  double r = 1.0;
};

/// Maximises f over r in [lo, hi] sampled logarithmically with
/// `per_decade` points per decade, then zooms into the bracket around the
/// running argmax `rounds` times with 9-point resampling.
template <class F>
LogMax maximize_log(F&& f, double lo, double hi, int per_decade, int rounds) {
  const double u_lo = std::log10(lo);
  const double u_hi = std::log10(hi);
  const int steps = std::max(1, static_cast<int>(std::ceil((u_hi - u_lo) * per_decade)));
  const double du = (u_hi - u_lo) / steps;
  LogMax best{-1.0, lo};
  double best_u = u_lo;
  for (int i = 0; i <= steps; ++i) {
    const double u = u_lo + i * du;
    const double v = f(std::pow(10.0, u));
    if (v > best.value) {
      best = {v, std::pow(10.0, u)};
      best_u = u;
    }
  }
  double half = du;
  for (int round = 0; round < rounds; ++round) {
    const double a = std::max(u_lo, best_u - half);
    const double b = std::min(u_hi, best_u + half);
    const double centre = best_u;
    for (int i = 0; i <= 8; ++i) {
      const double u = a + (b - a) * i / 8.0;
      if (u == centre) continue;
      const double v = f(std::pow(10.0, u));
      if (v > best.value) {
        best = {v, std::pow(10.0, u)};
        best_u = u;
      }
    }
    half = (b - a) / 8.0;
  }
  return best;
}

}  // namespace hfc::detail
