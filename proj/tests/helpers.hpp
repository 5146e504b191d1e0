#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "lienard/timescale.hpp"

namespace testing {

using std::numbers::pi;

// [0, 1] u {2}, 3-periodic, and x(t) = t on it.
inline lienard::TimeScale example_scale() {
  return lienard::TimeScale(3.0, {{0.0, 1.0}, {2.0, 2.0}});
}

inline lienard::GridFunction example_function(const lienard::MeshPtr& mesh) {
  return lienard::GridFunction::sample(mesh, [](double t) { return t; });
}

inline lienard::TimeScale discrete_scale(int k, double period) {
  std::vector<double> pts;
  for (int i = 0; i < k; ++i) pts.push_back(period * i / k);
  return lienard::TimeScale::discrete(pts, period);
}

inline lienard::GridFunction random_function(const lienard::MeshPtr& mesh, std::mt19937_64& rng,
                                             double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(mesh->size());
  for (double& e : v) e = d(rng);
  return lienard::GridFunction(mesh, std::move(v));
}

}  // namespace testing
