#include "whmc/chain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "whmc/expm.hpp"

namespace whmc::chain {

ValidationReport validate_generator(const Matrix& m, double tol) {
  ValidationReport report;
  if (m.rows() != m.cols()) {
    report.violations.push_back("matrix is not square");
    return report;
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j && m(i, j) < -tol) {
        std::ostringstream os;
        os << "entry (" << i << "," << j << ") is negative: " << m(i, j);
        report.violations.push_back(os.str());
      }
    }
    const double row_sum = m.row(i).sum();
    if (std::abs(row_sum) > tol) {
      std::ostringstream os;
      os << "row " << i << " sums to " << row_sum;
      report.violations.push_back(os.str());
    }
  }
  return report;
}

DriftModel::DriftModel(std::vector<std::string> states, Vector v)
    : states_(std::move(states)), v_(std::move(v)) {
  if (static_cast<Eigen::Index>(states_.size()) != v_.size())
    throw_config("drift: state count does not match rate count");
  for (std::size_t i = 0; i < states_.size(); ++i) {
    for (std::size_t j = i + 1; j < states_.size(); ++j)
      if (states_[i] == states_[j])
        throw_config("drift: duplicate state label '" + states_[i] + "'");
  }
  for (Eigen::Index i = 0; i < v_.size(); ++i) {
    if (v_(i) == 0.0)
      throw_config("drift: rate for state '" + states_[i] + "' must be nonzero");
    (v_(i) > 0 ? plus_ : minus_).push_back(static_cast<int>(i));
  }
  if (plus_.empty() || minus_.empty())
    throw_config("drift: both sign classes must be nonempty");
}

int DriftModel::plus_pos(int state) const {
  auto it = std::find(plus_.begin(), plus_.end(), state);
  return it == plus_.end() ? -1 : static_cast<int>(it - plus_.begin());
}

int DriftModel::minus_pos(int state) const {
  auto it = std::find(minus_.begin(), minus_.end(), state);
  return it == minus_.end() ? -1 : static_cast<int>(it - minus_.begin());
}

int DriftModel::index_of(const std::string& label) const {
  auto it = std::find(states_.begin(), states_.end(), label);
  return it == states_.end() ? -1 : static_cast<int>(it - states_.begin());
}

DriftModel DriftModel::reflected() const { return DriftModel(states_, -v_); }

int RegimeSchedule::regime_at(double t) const {
  int k = 0;
  while (k < breakpoint_count() && t >= breakpoints[k]) ++k;
  return k;
}

void RegimeSchedule::validate(double tol) const {
  if (generators.empty()) throw_config("schedule: at least one generator required");
  if (regime_count() != breakpoint_count() + 1) {
    std::ostringstream os;
    os << "schedule: expected " << breakpoint_count() + 1 << " generators, found "
       << regime_count();
    throw_config(os.str());
  }
  double prev = 0.0;
  for (std::size_t k = 0; k < breakpoints.size(); ++k) {
    if (breakpoints[k] <= prev) {
      std::ostringstream os;
      os << "schedule: breakpoints must be strictly increasing and positive "
            "(breakpoint "
         << k << " = " << breakpoints[k] << ")";
      throw_config(os.str());
    }
    prev = breakpoints[k];
  }
  const int d = dim();
  for (int k = 0; k < regime_count(); ++k) {
    if (generators[k].rows() != d || generators[k].cols() != d)
      throw_config("schedule: generator dimensions do not match");
    auto report = validate_generator(generators[k], tol);
    if (!report.ok())
      throw_config("schedule: generator " + std::to_string(k) + ": " +
                   report.violations.front());
  }
}

AugmentedModel build_augmented_generator(const RegimeSchedule& schedule,
                                         const DriftModel& drift,
                                         std::span<const double> q) {
  schedule.validate();
  const int d = schedule.dim();
  const int n = schedule.breakpoint_count();
  if (drift.size() != d) throw_config("augmented: drift dimension does not match");
  if (static_cast<int>(q.size()) != n)
    throw_config("augmented: expected " + std::to_string(n) + " rates, found " +
                 std::to_string(q.size()));
  for (double qk : q)
    if (!(qk > 0)) throw_config("augmented: randomization rates must be positive");

  Matrix gen = Matrix::Zero((n + 1) * d, (n + 1) * d);
  for (int k = 0; k <= n; ++k) {
    gen.block(k * d, k * d, d, d) = schedule.generators[k];
    if (k < n) {
      gen.block(k * d, k * d, d, d).diagonal().array() -= q[k];
      gen.block(k * d, (k + 1) * d, d, d) = q[k] * Matrix::Identity(d, d);
    }
  }

  Vector lift((n + 1) * d);
  for (int k = 0; k <= n; ++k) lift.segment(k * d, d) = drift.v();

  return AugmentedModel{schedule, drift, {q.begin(), q.end()}, std::move(gen),
                        std::move(lift)};
}

Matrix marginal_counter_generator(std::span<const double> q) {
  const int n = static_cast<int>(q.size());
  Matrix g = Matrix::Zero(n + 1, n + 1);
  for (int k = 0; k < n; ++k) {
    if (!(q[k] > 0)) throw_config("counter generator: rates must be positive");
    g(k, k) = -q[k];
    g(k, k + 1) = q[k];
  }
  return g;
}

Matrix matrix_exp(const Matrix& m, double t) {
  if (m.rows() != m.cols()) throw_usage("matrix_exp: matrix must be square");
  if (t < 0) throw_usage("matrix_exp: t must be nonnegative");
  if (t == 0) return Matrix::Identity(m.rows(), m.cols());
  return detail::expm<double>(t * m);
}

TransitionMatrix transition_matrix(const RegimeSchedule& schedule, double s, double t) {
  if (s < 0 || t < s) throw_usage("transition_matrix: need 0 <= s <= t");
  const int d = schedule.dim();
  Matrix p = Matrix::Identity(d, d);
  double u = s;
  while (u < t) {
    const int k = schedule.regime_at(u);
    const double end =
        k < schedule.breakpoint_count() ? std::min(schedule.breakpoints[k], t) : t;
    p = p * matrix_exp(schedule.generators[k], end - u);
    u = end;
  }
  return TransitionMatrix{std::move(p)};
}

std::pair<RegimeSchedule, DriftModel> reflect_problem(const RegimeSchedule& schedule,
                                                      const DriftModel& drift) {
  return {schedule, drift.reflected()};
}

std::vector<int> sign_major_permutation(const DriftModel& drift, int levels) {
  const int d = drift.size();
  const int n_plus = drift.n_plus();
  std::vector<int> perm(levels * d, -1);
  for (int k = 0; k < levels; ++k) {
    for (int p = 0; p < n_plus; ++p)
      perm[k * d + drift.plus_states()[p]] = k * n_plus + p;
    for (int m = 0; m < drift.n_minus(); ++m)
      perm[k * d + drift.minus_states()[m]] = levels * n_plus + k * drift.n_minus() + m;
  }
  return perm;
}

}  // namespace whmc::chain
