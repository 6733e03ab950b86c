#include "whmc/wh.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "whmc/expm.hpp"

namespace whmc::wh {

namespace {

lapack_logical select_negative(const double* re, const double*) {
  return *re < 0.0 ? 1 : 0;
}

lapack_logical select_positive(const double* re, const double*) {
  return *re > 0.0 ? 1 : 0;
}

struct SchurPart {
  Matrix basis;  // first `selected` Schur vectors
  Matrix head;   // top-left quasi-triangular block
  Eigen::VectorXcd eigenvalues;
  int selected = 0;
};

SchurPart ordered_schur(const Matrix& q, bool negative_first) {
  const auto d = static_cast<lapack_int>(q.rows());
  Matrix a = q;
  Matrix z(d, d);
  Vector wr(d), wi(d);
  lapack_int sdim = 0;
  const lapack_int info = LAPACKE_dgees(
      LAPACK_COL_MAJOR, 'V', 'S', negative_first ? select_negative : select_positive,
      d, a.data(), d, &sdim, wr.data(), wi.data(), z.data(), d);
  if (info != 0) {
    std::ostringstream os;
    os << "spectral split: ordered Schur factorization failed (dgees info=" << info
       << ")";
    throw_numerical(os.str());
  }
  SchurPart part;
  part.selected = static_cast<int>(sdim);
  part.basis = z.leftCols(sdim);
  part.head = a.topLeftCorner(sdim, sdim);
  part.eigenvalues.resize(d);
  for (lapack_int i = 0; i < d; ++i) part.eigenvalues(i) = {wr(i), wi(i)};
  return part;
}

// Sign-major permuted copy of g (plus states first) and the matching drift
// diagonal.
struct SignMajor {
  Matrix g;
  Vector v;
};

SignMajor sign_major(const Matrix& g, const chain::DriftModel& drift) {
  const int d = drift.size();
  std::vector<int> order;
  order.reserve(d);
  order.insert(order.end(), drift.plus_states().begin(), drift.plus_states().end());
  order.insert(order.end(), drift.minus_states().begin(), drift.minus_states().end());
  SignMajor out;
  out.g.resize(d, d);
  out.v.resize(d);
  for (int r = 0; r < d; ++r) {
    out.v(r) = drift.v(order[r]);
    for (int c = 0; c < d; ++c) out.g(r, c) = g(order[r], order[c]);
  }
  return out;
}

Matrix drift_scaled_killed(const SignMajor& sm, double c) {
  Matrix q = sm.g;
  q.diagonal().array() -= c;
  for (Eigen::Index r = 0; r < q.rows(); ++r) q.row(r) /= sm.v(r);
  return q;
}

// Solve M X - W X H = R for X (n_m x n_p) by column-major vectorization.
Matrix solve_sylvester_like(const Matrix& m, const Matrix& w, const Matrix& h,
                            const Matrix& r, int level, int offset) {
  const int n_m = static_cast<int>(m.rows());
  const int n_p = static_cast<int>(h.rows());
  Matrix k = Matrix::Zero(n_m * n_p, n_m * n_p);
  for (int col = 0; col < n_p; ++col)
    k.block(col * n_m, col * n_m, n_m, n_m) = m;
  for (int col = 0; col < n_p; ++col)
    for (int row = 0; row < n_p; ++row)
      k.block(row * n_m, col * n_m, n_m, n_m) -= h(col, row) * w;
  Eigen::FullPivLU<Matrix> lu(k);
  if (!lu.isInvertible()) {
    std::ostringstream os;
    os << "singular linear system at block (" << level << "," << level + offset << ")";
    throw_numerical(os.str());
  }
  Vector rhs(n_m * n_p);
  for (int col = 0; col < n_p; ++col) rhs.segment(col * n_m, n_m) = r.col(col);
  const Vector x = lu.solve(rhs);
  Matrix out(n_m, n_p);
  for (int col = 0; col < n_p; ++col) out.col(col) = x.segment(col * n_m, n_m);
  return out;
}

// Solve X A = B, i.e. X = B A^{-1}, failing loudly on singular A.
Matrix solve_right(const Matrix& b, const Matrix& a, const char* what) {
  Eigen::FullPivLU<Matrix> lu(a.transpose());
  if (!lu.isInvertible()) throw_numerical(what);
  return lu.solve(b.transpose()).transpose();
}

struct RegimeBlocks {
  Matrix a, b, c, d;  // E+>E+, E+>E-, E->E+, E->E-
};

RegimeBlocks split_blocks(const Matrix& g, const chain::DriftModel& drift) {
  const auto& plus = drift.plus_states();
  const auto& minus = drift.minus_states();
  RegimeBlocks out;
  out.a.resize(plus.size(), plus.size());
  out.b.resize(plus.size(), minus.size());
  out.c.resize(minus.size(), plus.size());
  out.d.resize(minus.size(), minus.size());
  for (std::size_t r = 0; r < plus.size(); ++r) {
    for (std::size_t c = 0; c < plus.size(); ++c) out.a(r, c) = g(plus[r], plus[c]);
    for (std::size_t c = 0; c < minus.size(); ++c) out.b(r, c) = g(plus[r], minus[c]);
  }
  for (std::size_t r = 0; r < minus.size(); ++r) {
    for (std::size_t c = 0; c < plus.size(); ++c) out.c(r, c) = g(minus[r], plus[c]);
    for (std::size_t c = 0; c < minus.size(); ++c) out.d(r, c) = g(minus[r], minus[c]);
  }
  return out;
}

void check_killing(double c) {
  if (!(c > 0)) throw_usage("factorize: killing rate must be positive");
}

}  // namespace

SpectralSplit spectral_split(const Matrix& q_matrix, int n_plus, int n_minus,
                             double axis_margin) {
  if (q_matrix.rows() != n_plus + n_minus)
    throw_usage("spectral split: partition sizes do not match the matrix");
  SpectralSplit split;
  const SchurPart neg = ordered_schur(q_matrix, true);
  split.eigenvalues = neg.eigenvalues;
  for (Eigen::Index i = 0; i < split.eigenvalues.size(); ++i) {
    if (std::abs(split.eigenvalues(i).real()) < axis_margin) {
      std::ostringstream os;
      os << "spectral split: eigenvalue " << split.eigenvalues(i)
         << " within " << axis_margin << " of the imaginary axis";
      throw_numerical(os.str());
    }
  }
  if (neg.selected != n_plus) {
    std::ostringstream os;
    os << "spectral split: expected " << n_plus
       << " eigenvalues with negative real part, found " << neg.selected;
    throw_numerical(os.str());
  }
  const SchurPart pos = ordered_schur(q_matrix, false);
  if (pos.selected != n_minus) {
    std::ostringstream os;
    os << "spectral split: expected " << n_minus
       << " eigenvalues with positive real part, found " << pos.selected;
    throw_numerical(os.str());
  }
  split.basis_plus = neg.basis;
  split.head_plus = neg.head;
  split.basis_minus = pos.basis;
  split.head_minus = pos.head;
  return split;
}

WHQuadruple classical_factorize(const Matrix& g, const chain::DriftModel& drift,
                                double c) {
  check_killing(c);
  if (g.rows() != drift.size() || g.cols() != drift.size())
    throw_usage("factorize: generator dimension does not match drift");
  const int n_p = drift.n_plus();
  const int n_m = drift.n_minus();
  const SignMajor sm = sign_major(g, drift);
  const Matrix q = drift_scaled_killed(sm, c);
  const SpectralSplit split = spectral_split(q, n_p, n_m);

  WHQuadruple quad;
  quad.killing = c;
  {
    const Matrix up = split.basis_plus.topRows(n_p);
    const Matrix um = split.basis_plus.bottomRows(n_m);
    quad.lambda_plus =
        solve_right(um, up, "spectral split: defective plus invariant subspace");
    quad.g_plus = solve_right(up * split.head_plus, up,
                              "spectral split: defective plus invariant subspace");
  }
  {
    const Matrix up = split.basis_minus.topRows(n_p);
    const Matrix um = split.basis_minus.bottomRows(n_m);
    quad.lambda_minus =
        solve_right(up, um, "spectral split: defective minus invariant subspace");
    quad.g_minus = -solve_right(um * split.head_minus, um,
                                "spectral split: defective minus invariant subspace");
  }
  return quad;
}

namespace {

// Root in [0,1] of  (vm b_) x^2 + (vm (a_-c) - vp (d_-c)) x - vp c_ = 0,
// the scalar reduction of the factorization identity written for the
// plus crossing of the 2x2 sign-major generator [a_ b_; c_ d_].
double scalar_plus_root(double a_, double b_, double c_, double d_, double vp,
                        double vm, double c) {
  const double qa = vm * b_;
  const double qb = vm * (a_ - c) - vp * (d_ - c);
  const double qc = -vp * c_;
  const double slack = 1e-12;
  auto in_unit = [slack](double x) { return x >= -slack && x <= 1 + slack; };
  if (qa == 0.0) {
    if (qb == 0.0) throw_numerical("scalar factorization: degenerate quadratic");
    const double x = -qc / qb;
    if (!in_unit(x)) throw_numerical("scalar factorization: no root in [0,1]");
    return std::clamp(x, 0.0, 1.0);
  }
  const double disc = qb * qb - 4 * qa * qc;
  if (disc < 0) throw_numerical("scalar factorization: complex roots, no root in [0,1]");
  const double sq = std::sqrt(disc);
  const double r1 = (-qb + sq) / (2 * qa);
  const double r2 = (-qb - sq) / (2 * qa);
  const bool ok1 = in_unit(r1);
  const bool ok2 = in_unit(r2);
  if (ok1 && ok2 && std::abs(r1 - r2) > 1e-12)
    throw_numerical("scalar factorization: ambiguous roots, both in [0,1]");
  if (!ok1 && !ok2) throw_numerical("scalar factorization: no root in [0,1]");
  return std::clamp(ok1 ? r1 : r2, 0.0, 1.0);
}

}  // namespace

WHQuadruple scalar_factorize(const Matrix& g, const chain::DriftModel& drift,
                             double c) {
  check_killing(c);
  if (drift.n_plus() != 1 || drift.n_minus() != 1)
    throw_usage("scalar factorization: needs exactly one state of each sign");
  const int p = drift.plus_states()[0];
  const int m = drift.minus_states()[0];
  const double a_ = g(p, p), b_ = g(p, m), c_ = g(m, p), d_ = g(m, m);
  const double vp = drift.v(p), vm = drift.v(m);

  WHQuadruple quad;
  quad.killing = c;
  const double lp = scalar_plus_root(a_, b_, c_, d_, vp, vm, c);
  quad.lambda_plus = Matrix::Constant(1, 1, lp);
  quad.g_plus = Matrix::Constant(1, 1, (a_ - c + b_ * lp) / vp);
  // minus side is the plus side of the reflected problem
  const double lm = scalar_plus_root(d_, c_, b_, a_, -vm, -vp, c);
  quad.lambda_minus = Matrix::Constant(1, 1, lm);
  quad.g_minus = Matrix::Constant(1, 1, (d_ - c + c_ * lm) / -vm);
  return quad;
}

double factorization_residual(const Matrix& g, const chain::DriftModel& drift,
                              double c, const WHQuadruple& quad) {
  const int n_p = drift.n_plus();
  const int n_m = drift.n_minus();
  const int d = n_p + n_m;
  const SignMajor sm = sign_major(g, drift);
  const Matrix q = drift_scaled_killed(sm, c);
  Matrix wing(d, d);
  wing.topLeftCorner(n_p, n_p) = Matrix::Identity(n_p, n_p);
  wing.topRightCorner(n_p, n_m) = quad.lambda_minus;
  wing.bottomLeftCorner(n_m, n_p) = quad.lambda_plus;
  wing.bottomRightCorner(n_m, n_m) = Matrix::Identity(n_m, n_m);
  Matrix diag = Matrix::Zero(d, d);
  diag.topLeftCorner(n_p, n_p) = quad.g_plus;
  diag.bottomRightCorner(n_m, n_m) = -quad.g_minus;
  return (q * wing - wing * diag).cwiseAbs().maxCoeff();
}

BlockFactorization::BlockFactorization(chain::DriftModel drift, double c,
                                       std::vector<double> rates)
    : drift_(std::move(drift)), c_(c), rates_(std::move(rates)) {
  const int n = levels();
  lambda_.resize(n * (n + 1) / 2);
  g_.resize(n * (n + 1) / 2);
}

int BlockFactorization::index(int k, int l) const {
  const int n = levels();
  if (k < 0 || l < k || l >= n) throw_usage("block index out of range");
  return k * n - k * (k - 1) / 2 + (l - k);
}

double BlockFactorization::shifted_killing(int k) const {
  return k + 1 < levels() ? rates_[k] + c_ : c_;
}

Matrix BlockFactorization::assembled_lambda() const {
  const int n = levels();
  const int n_p = drift_.n_plus();
  const int n_m = drift_.n_minus();
  Matrix out = Matrix::Zero(n * n_m, n * n_p);
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l)
      out.block(k * n_m, l * n_p, n_m, n_p) = lambda(k, l);
  return out;
}

Matrix BlockFactorization::assembled_g() const {
  const int n = levels();
  const int n_p = drift_.n_plus();
  Matrix out = Matrix::Zero(n * n_p, n * n_p);
  for (int k = 0; k < n; ++k)
    for (int l = k; l < n; ++l)
      out.block(k * n_p, l * n_p, n_p, n_p) = g(k, l);
  return out;
}

BlockFactorization block_factorize(const chain::RegimeSchedule& schedule,
                                   const chain::DriftModel& drift, double c,
                                   std::span<const double> q) {
  check_killing(c);
  schedule.validate();
  const int n = schedule.breakpoint_count();
  if (static_cast<int>(q.size()) != n)
    throw_usage("block factorize: rate count must match breakpoint count");
  for (double qk : q)
    if (!(qk > 0)) throw_usage("block factorize: rates must be positive");

  BlockFactorization block(drift, c, {q.begin(), q.end()});
  const int n_p = drift.n_plus();
  const int n_m = drift.n_minus();
  const Vector vp = [&] {
    Vector v(n_p);
    for (int i = 0; i < n_p; ++i) v(i) = drift.v(drift.plus_states()[i]);
    return v;
  }();
  const Vector vm = [&] {
    Vector v(n_m);
    for (int i = 0; i < n_m; ++i) v(i) = drift.v(drift.minus_states()[i]);
    return v;
  }();

  std::vector<RegimeBlocks> regs;
  regs.reserve(n + 1);
  for (int k = 0; k <= n; ++k) regs.push_back(split_blocks(schedule.generators[k], drift));

  // diagonal: single-generator factorizations at the shifted killing rates
  for (int k = 0; k <= n; ++k) {
    const WHQuadruple quad =
        classical_factorize(schedule.generators[k], drift, block.shifted_killing(k));
    block.lambda(k, k) = quad.lambda_plus;
    block.g(k, k) = quad.g_plus;
  }

  // superdiagonals, nearest first; each solve eliminates the G block via the
  // plus-row equation and vectorizes the remaining one in Lambda
  for (int r = 1; r <= n; ++r) {
    for (int k = 0; k + r <= n; ++k) {
      const RegimeBlocks& rb = regs[k];
      const double qk = block.rates()[k];
      const double ck = block.shifted_killing(k);
      const Matrix& h = block.g(k + r, k + r);

      // V-^{-1}-free form: M X - V- X H = R with
      // M = (D - ck I) - V- Lambda_kk V+^{-1} B
      Matrix vl = vm.asDiagonal() * block.lambda(k, k);
      Matrix vlvb = vl * vp.cwiseInverse().asDiagonal() * rb.b;
      Matrix m = rb.d;
      m.diagonal().array() -= ck;
      m -= vlvb;

      Matrix rhs = Matrix::Zero(n_m, n_p);
      for (int j = 1; j < r; ++j)
        rhs += vm.asDiagonal() * block.lambda(k, k + j) * block.g(k + j, k + r);
      if (r == 1) rhs += qk * (vl * vp.cwiseInverse().asDiagonal());
      rhs -= qk * block.lambda(k + 1, k + r);

      const Matrix x =
          solve_sylvester_like(m, Matrix(vm.asDiagonal()), h, rhs, k, r);
      Matrix y = rb.b * x;
      if (r == 1) y.diagonal().array() += qk;
      y = vp.cwiseInverse().asDiagonal() * y;

      block.lambda(k, k + r) = x;
      block.g(k, k + r) = y;
    }
  }
  return block;
}

BlockFactorization direct_augmented_factorize(const chain::RegimeSchedule& schedule,
                                              const chain::DriftModel& drift, double c,
                                              std::span<const double> q) {
  check_killing(c);
  const chain::AugmentedModel aug = chain::build_augmented_generator(schedule, drift, q);
  const int levels = aug.levels();
  const int d = drift.size();

  std::vector<std::string> lifted_labels;
  lifted_labels.reserve(levels * d);
  for (int k = 0; k < levels; ++k)
    for (int i = 0; i < d; ++i)
      lifted_labels.push_back(std::to_string(k) + ":" + drift.states()[i]);
  const chain::DriftModel lifted(std::move(lifted_labels), aug.drift_lift);

  const WHQuadruple quad = classical_factorize(aug.gen, lifted, c);

  // lifted plus states run level-major, so the big blocks line up with levels
  BlockFactorization block(drift, c, {q.begin(), q.end()});
  const int n_p = drift.n_plus();
  const int n_m = drift.n_minus();
  for (int k = 0; k < levels; ++k)
    for (int l = k; l < levels; ++l) {
      block.lambda(k, l) = quad.lambda_plus.block(k * n_m, l * n_p, n_m, n_p);
      block.g(k, l) = quad.g_plus.block(k * n_p, l * n_p, n_p, n_p);
    }
  return block;
}

double augmented_residual_plus(const chain::RegimeSchedule& schedule,
                               const chain::DriftModel& drift, double c,
                               std::span<const double> q,
                               const BlockFactorization& block) {
  const chain::AugmentedModel aug = chain::build_augmented_generator(schedule, drift, q);
  const int levels = aug.levels();
  const int d = drift.size();
  const auto perm = chain::sign_major_permutation(drift, levels);

  Matrix g_sm(levels * d, levels * d);
  Vector v_sm(levels * d);
  for (int r = 0; r < levels * d; ++r) {
    v_sm(perm[r]) = aug.drift_lift(r);
    for (int col = 0; col < levels * d; ++col)
      g_sm(perm[r], perm[col]) = aug.gen(r, col);
  }
  Matrix qm = g_sm;
  qm.diagonal().array() -= c;
  for (int r = 0; r < levels * d; ++r) qm.row(r) /= v_sm(r);

  const int np_all = levels * drift.n_plus();
  const int nm_all = levels * drift.n_minus();
  Matrix wing(levels * d, np_all);
  wing.topRows(np_all) = Matrix::Identity(np_all, np_all);
  wing.bottomRows(nm_all) = block.assembled_lambda();
  return (qm * wing - wing * block.assembled_g()).cwiseAbs().maxCoeff();
}

double hat_pi_plus(const BlockFactorization& block, int i, int j) {
  const auto& drift = block.drift();
  const int mp = drift.minus_pos(i);
  const int pp = drift.plus_pos(j);
  if (mp < 0) throw_usage("hat_pi_plus: start state must have negative drift");
  if (pp < 0) throw_usage("hat_pi_plus: target state must have positive drift");
  double sum = 0;
  for (int l = 0; l < block.levels(); ++l) sum += block.lambda(0, l)(mp, pp);
  double scale = 1;
  for (double qk : block.rates()) scale *= qk;
  return sum / scale;
}

double hat_psi_plus(const BlockFactorization& block, double t, int i, int j) {
  const auto& drift = block.drift();
  const int pi = drift.plus_pos(i);
  const int pj = drift.plus_pos(j);
  if (pi < 0 || pj < 0) throw_usage("hat_psi_plus: states must have positive drift");
  if (t < 0) throw_usage("hat_psi_plus: t must be nonnegative");
  const Matrix e = chain::matrix_exp(block.assembled_g(), t);
  const int n_p = drift.n_plus();
  double sum = 0;
  for (int l = 0; l < block.levels(); ++l) sum += e(pi, l * n_p + pj);
  double scale = 1;
  for (double qk : block.rates()) scale *= qk;
  return sum / scale;
}

}  // namespace whmc::wh
