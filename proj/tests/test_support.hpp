#pragma once

// Shared fixtures for the test suites: the two-state fluid scenario and
// seeded random model generators.

#include <random>
#include <vector>

#include "whmc/chain.hpp"
#include "whmc/types.hpp"

namespace whmc::testing {

// Two-state fluid scenario: c = 0.5, v = (2, -3), breakpoints (2, 8).
inline chain::RegimeSchedule fluid_schedule() {
  chain::RegimeSchedule s;
  s.breakpoints = {2.0, 8.0};
  Matrix g1(2, 2), g2(2, 2), g3(2, 2);
  g1 << -2, 2, 1, -1;
  g2 << -3, 3, 2, -2;
  g3 << -5, 5, 3, -3;
  s.generators = {g1, g2, g3};
  return s;
}

inline chain::DriftModel fluid_drift() {
  return chain::DriftModel({"e+", "e-"}, (Vector(2) << 2.0, -3.0).finished());
}

inline constexpr double kFluidDiscount = 0.5;

// Conservative generator with off-diagonal rates in (0, scale].
inline Matrix random_generator(std::mt19937_64& rng, int dim, double scale = 2.0) {
  std::uniform_real_distribution<double> u(0.05, scale);
  Matrix g = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    double row = 0;
    for (int j = 0; j < dim; ++j) {
      if (i == j) continue;
      g(i, j) = u(rng);
      row += g(i, j);
    }
    g(i, i) = -row;
  }
  return g;
}

// Nonzero drift with n_plus up states first (shuffled labels keep the state
// order nontrivial).
inline chain::DriftModel random_drift(std::mt19937_64& rng, int dim, int n_plus) {
  std::uniform_real_distribution<double> u(0.4, 3.0);
  std::vector<int> order(dim);
  for (int i = 0; i < dim; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  Vector v(dim);
  for (int i = 0; i < dim; ++i)
    v(order[i]) = i < n_plus ? u(rng) : -u(rng);
  std::vector<std::string> labels;
  for (int i = 0; i < dim; ++i) labels.push_back("s" + std::to_string(i));
  return chain::DriftModel(std::move(labels), std::move(v));
}

inline chain::RegimeSchedule random_schedule(std::mt19937_64& rng, int dim,
                                             int breakpoints, double scale = 2.0) {
  std::uniform_real_distribution<double> gap(0.5, 4.0);
  chain::RegimeSchedule s;
  double t = 0;
  for (int k = 0; k < breakpoints; ++k) {
    t += gap(rng);
    s.breakpoints.push_back(t);
  }
  for (int k = 0; k <= breakpoints; ++k)
    s.generators.push_back(random_generator(rng, dim, scale));
  return s;
}

}  // namespace whmc::testing
