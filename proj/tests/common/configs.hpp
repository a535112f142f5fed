#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "mixedmop/mop.hpp"
#include "mixedmop/weights.hpp"

namespace testcfg {

struct Config {
  mixedmop::WeightFamily w1, w2;
  mixedmop::MultiIndex n, m;
  double t = 0.5;
};

inline std::vector<double> distinct_points(std::mt19937_64& rng, int count, double lo, double hi,
                                           double min_gap) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (;;) {
    std::vector<double> pts(count);
    for (auto& x : pts) x = u(rng);
    std::sort(pts.begin(), pts.end());
    bool ok = true;
    for (int i = 1; i < count; ++i) ok = ok && pts[i] - pts[i - 1] >= min_gap;
    if (ok) return pts;
  }
}

inline std::vector<int> composition(std::mt19937_64& rng, int parts, int total) {
  std::vector<int> out(parts, 1);
  for (int r = parts; r < total; ++r) ++out[std::uniform_int_distribution<int>(0, parts - 1)(rng)];
  return out;
}

// Brownian-type random configuration: transition-density weights from distinct
// start/end points in [-2, 2] at least 0.8 apart, t in [0.3, 0.7], random
// multiplicities with |n| = |m| = size.
inline Config random_config(std::mt19937_64& rng, int p, int q, int size) {
  Config c;
  c.t = std::uniform_real_distribution<double>(0.3, 0.7)(rng);
  const auto a = distinct_points(rng, p, -2.0, 2.0, 0.8);
  const auto b = distinct_points(rng, q, -2.0, 2.0, 0.8);
  std::vector<mixedmop::Weight> w1, w2;
  for (double x : a) w1.push_back(mixedmop::transition_weight(c.t, x));
  for (double x : b) w2.push_back(mixedmop::transition_weight(1.0 - c.t, x));
  c.w1 = mixedmop::WeightFamily(w1);
  c.w2 = mixedmop::WeightFamily(w2);
  c.n = mixedmop::MultiIndex(composition(rng, p, size));
  c.m = mixedmop::MultiIndex(composition(rng, q, size));
  return c;
}

}  // namespace testcfg
