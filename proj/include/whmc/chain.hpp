#pragma once

// Model types for a finite-state Markov chain whose generator is piecewise
// constant in time, the drift partition it induces, and the randomized
// level-augmented chain used by the factorization solver.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "whmc/types.hpp"

namespace whmc::chain {

inline constexpr double kGeneratorTol = 1e-10;
inline constexpr double kTransitionTol = 1e-9;

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// A conservative generator has nonnegative off-diagonals and zero row sums.
// Report-style: never throws, names every offending row/column.
ValidationReport validate_generator(const Matrix& m, double tol = kGeneratorTol);

// State labels plus a nonzero per-state rate v.  States with v > 0 form the
// up-drift class, v < 0 the down-drift class; both must be nonempty.
class DriftModel {
public:
  DriftModel(std::vector<std::string> states, Vector v);

  int size() const { return static_cast<int>(v_.size()); }
  const std::vector<std::string>& states() const { return states_; }
  const Vector& v() const { return v_; }
  double v(int state) const { return v_(state); }

  const std::vector<int>& plus_states() const { return plus_; }
  const std::vector<int>& minus_states() const { return minus_; }
  int n_plus() const { return static_cast<int>(plus_.size()); }
  int n_minus() const { return static_cast<int>(minus_.size()); }
  bool is_plus(int state) const { return v_(state) > 0; }

  // Position of a state inside its sign class; -1 if it is in the other one.
  int plus_pos(int state) const;
  int minus_pos(int state) const;

  int index_of(const std::string& label) const;  // -1 if unknown

  DriftModel reflected() const;  // v -> -v, classes swap

private:
  std::vector<std::string> states_;
  Vector v_;
  std::vector<int> plus_, minus_;
};

// Piecewise-constant generator: generators[k] rules [s_{k-1}, s_k) with
// s_0 = 0, and generators[n] rules [s_n, inf).  n = 0 (no breakpoints)
// means a single homogeneous regime.
struct RegimeSchedule {
  std::vector<double> breakpoints;
  std::vector<Matrix> generators;

  int breakpoint_count() const { return static_cast<int>(breakpoints.size()); }
  int regime_count() const { return static_cast<int>(generators.size()); }
  int dim() const {
    return generators.empty() ? 0 : static_cast<int>(generators.front().rows());
  }
  // Index of the regime active at time t >= 0 (left-closed intervals).
  int regime_at(double t) const;
  void validate(double tol = kGeneratorTol) const;  // throws Error(config)
};

// Randomized time-homogeneous chain on levels x states.  Level-major state
// ordering: all of level 0 first, then level 1, ...  The generator is block
// upper-bidiagonal: level k holds G_{k+1} - q_{k+1} I on the diagonal and
// q_{k+1} I on the superdiagonal; the last level holds G_{n+1} unchanged.
struct AugmentedModel {
  RegimeSchedule base;
  DriftModel drift;
  std::vector<double> rates;  // q_1..q_n, all > 0
  Matrix gen;                 // (n+1)|E| x (n+1)|E|
  Vector drift_lift;          // v lifted levelwise

  int levels() const { return static_cast<int>(rates.size()) + 1; }
};

AugmentedModel build_augmented_generator(const RegimeSchedule& schedule,
                                         const DriftModel& drift,
                                         std::span<const double> q);

// Generator of the level counter alone: -q_{k+1} on the diagonal,
// q_{k+1} on the superdiagonal, absorbing last level.
Matrix marginal_counter_generator(std::span<const double> q);

// e^{tM} via scaling-and-squaring (see expm.hpp).
Matrix matrix_exp(const Matrix& m, double t);

struct TransitionMatrix {
  Matrix entries;
};

// Product of per-regime matrix exponentials across every breakpoint in (s, t].
TransitionMatrix transition_matrix(const RegimeSchedule& schedule, double s, double t);

// Same schedule with v' = -v: down-passage functionals of the original
// problem are the up-passage functionals of the reflected one.
std::pair<RegimeSchedule, DriftModel> reflect_problem(const RegimeSchedule& schedule,
                                                      const DriftModel& drift);

// perm[level_major_index] = position in the sign-major ordering
// ((0,E+)..(n,E+),(0,E-)..(n,E-)).
std::vector<int> sign_major_permutation(const DriftModel& drift, int levels);

}  // namespace whmc::chain
