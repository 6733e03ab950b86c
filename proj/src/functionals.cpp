#include <cmath>
#include <complex>
#include <map>
#include <sstream>
#include <vector>

#include "whmc/expm.hpp"
#include "whmc/wh.hpp"

namespace whmc::wh {

ScalarTransform::ScalarTransform(const chain::RegimeSchedule& schedule,
                                 const chain::DriftModel& drift, double c)
    : c_(c) {
  schedule.validate();
  if (!(c > 0)) throw_usage("scalar transform: killing rate must be positive");
  if (drift.n_plus() != 1 || drift.n_minus() != 1)
    throw_config("scalar transform: needs exactly one state of each drift sign");
  const int p = drift.plus_states()[0];
  const int m = drift.minus_states()[0];
  vp_ = drift.v(p);
  vm_ = drift.v(m);
  regimes_.reserve(schedule.regime_count());
  for (const Matrix& g : schedule.generators)
    regimes_.push_back(Regime{g(p, p), g(p, m), g(m, p), g(m, m)});
}

std::complex<double> ScalarTransform::lambda_plus(int regime,
                                                  std::complex<double> ck) const {
  using C = std::complex<double>;
  const Regime& rg = regimes_[regime];
  const double qa = vm_ * rg.b;
  const double qc = -vp_ * rg.c;
  const auto roots = [&](C z) -> std::pair<C, C> {
    const C qb = vm_ * (rg.a - z) - vp_ * (rg.d - z);
    if (qa == 0.0) {
      if (qb == 0.0) throw_numerical("scalar transform: degenerate quadratic");
      const C r = -qc / qb;
      return {r, r};
    }
    const C sq = std::sqrt(qb * qb - 4.0 * qa * qc);
    return {(-qb + sq) / (2.0 * qa), (-qb - sq) / (2.0 * qa)};
  };

  if (ck.imag() == 0.0 && ck.real() > 0.0) {
    const auto [r1, r2] = roots(ck);
    const auto in_unit = [](C r) {
      return std::abs(r.imag()) < 1e-14 && r.real() >= -1e-12 && r.real() <= 1 + 1e-12;
    };
    if (in_unit(r1) && !in_unit(r2)) return r1;
    if (in_unit(r2) && !in_unit(r1)) return r2;
    return std::abs(r1) <= std::abs(r2) ? r1 : r2;
  }

  // Walk from a large real anchor, where the physical root is the small one,
  // to the requested argument, keeping the branch continuous.
  const double anchor = std::abs(ck) + c_ + 2.0;
  auto [a1, a2] = roots(anchor);
  C lam = std::abs(a1) <= std::abs(a2) ? a1 : a2;
  const int steps = 128;
  for (int s = 1; s <= steps; ++s) {
    const C z = C(anchor) + (ck - anchor) * (static_cast<double>(s) / steps);
    const auto [r1, r2] = roots(z);
    lam = std::abs(r1 - lam) <= std::abs(r2 - lam) ? r1 : r2;
  }
  return lam;
}

struct ScalarTransform::Recursion {
  // upper-triangular tables, [k][l - k]
  std::vector<std::vector<std::complex<double>>> lam, g;
};

ScalarTransform::Recursion ScalarTransform::run(
    std::span<const std::complex<double>> q) const {
  using C = std::complex<double>;
  const int n = static_cast<int>(q.size());
  if (n + 1 != static_cast<int>(regimes_.size()))
    throw_usage("scalar transform: rate tuple arity mismatch");

  Recursion rec;
  rec.lam.assign(n + 1, {});
  rec.g.assign(n + 1, {});
  for (int k = 0; k <= n; ++k) {
    const C ck = k < n ? q[k] + c_ : C(c_);
    const C lam = lambda_plus(k, ck);
    rec.lam[k].assign(n + 1 - k, C(0));
    rec.g[k].assign(n + 1 - k, C(0));
    rec.lam[k][0] = lam;
    rec.g[k][0] = (regimes_[k].a - ck + regimes_[k].b * lam) / vp_;
  }
  for (int r = 1; r <= n; ++r) {
    for (int k = 0; k + r <= n; ++k) {
      const Regime& rg = regimes_[k];
      const C ck = q[k] + c_;
      const C qk = q[k];
      const C h = rec.g[k + r][0];
      const C m = (rg.d - ck) - vm_ * rec.lam[k][0] * rg.b / vp_ - vm_ * h;
      if (m == C(0)) throw_numerical("scalar transform: singular block equation");
      C rhs(0);
      for (int j = 1; j < r; ++j)
        rhs += vm_ * rec.lam[k][j] * rec.g[k + j][r - j];
      if (r == 1) rhs += vm_ * rec.lam[k][0] * qk / vp_;
      rhs -= qk * rec.lam[k + 1][r - 1];
      const C x = rhs / m;
      rec.lam[k][r] = x;
      rec.g[k][r] = ((r == 1 ? qk : C(0)) + rg.b * x) / vp_;
    }
  }
  return rec;
}

std::complex<double> ScalarTransform::hat_pi(
    std::span<const std::complex<double>> q) const {
  const Recursion rec = run(q);
  std::complex<double> sum = 0;
  for (const auto& v : rec.lam[0]) sum += v;
  std::complex<double> scale = 1;
  for (const auto& qk : q) scale *= qk;
  return sum / scale;
}

std::complex<double> ScalarTransform::hat_psi(
    double t, std::span<const std::complex<double>> q) const {
  const Recursion rec = run(q);
  const int n = static_cast<int>(q.size());
  ComplexMatrix gt = ComplexMatrix::Zero(n + 1, n + 1);
  for (int k = 0; k <= n; ++k)
    for (int l = k; l <= n; ++l) gt(k, l) = rec.g[k][l - k];
  const ComplexMatrix e = detail::expm<std::complex<double>>(t * gt);
  std::complex<double> sum = 0;
  for (int l = 0; l <= n; ++l) sum += e(0, l);
  std::complex<double> scale = 1;
  for (const auto& qk : q) scale *= qk;
  return sum / scale;
}

namespace {

std::string node_string(std::span<const double> q) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < q.size(); ++k) os << (k ? "," : "") << q[k];
  os << ")";
  return os.str();
}

// Shared driver.  `kind` is only reporting metadata: callers hand in a
// schedule/drift pair that is already oriented so the requested functional
// is the plus one.
FunctionalValue run_plus(FunctionalKind kind, const chain::RegimeSchedule& schedule,
                         const chain::DriftModel& drift, double c, double level_time,
                         int i, int j, laplace::InversionConfig cfg) {
  schedule.validate();
  if (!(c > 0)) throw_usage("passage functional: discount rate must be positive");
  if (i < 0 || i >= drift.size() || j < 0 || j >= drift.size())
    throw_usage("passage functional: state index out of range");

  const bool is_psi =
      kind == FunctionalKind::psi_plus || kind == FunctionalKind::psi_minus;
  if (is_psi) {
    if (!(level_time > 0)) throw_usage("passage functional: level must be positive");
    if (drift.plus_pos(i) < 0 || drift.plus_pos(j) < 0)
      throw_usage("passage functional: Psi needs up-drift start and target states");
  } else {
    if (drift.minus_pos(i) < 0)
      throw_usage("passage functional: Pi needs a down-drift start state");
    if (drift.plus_pos(j) < 0)
      throw_usage("passage functional: Pi needs an up-drift target state");
  }

  FunctionalValue out;
  out.kind = kind;
  out.from_state = drift.states()[i];
  out.to_state = drift.states()[j];
  out.level_time = is_psi ? level_time : 0.0;
  out.method = cfg.method;
  out.tolerance =
      cfg.tolerance > 0 ? cfg.tolerance : laplace::default_tolerance(cfg.method);

  const int n = schedule.breakpoint_count();
  if (n == 0) {
    const WHQuadruple quad = classical_factorize(schedule.generators[0], drift, c);
    if (is_psi) {
      const Matrix e = chain::matrix_exp(quad.g_plus, level_time);
      out.value = e(drift.plus_pos(i), drift.plus_pos(j));
    } else {
      out.value = quad.lambda_plus(drift.minus_pos(i), drift.plus_pos(j));
    }
    out.terms = 0;
    out.residual =
        factorization_residual(schedule.generators[0], drift, c, quad);
  } else {
    std::vector<double> increments(n);
    increments[0] = schedule.breakpoints[0];
    for (int k = 1; k < n; ++k)
      increments[k] = schedule.breakpoints[k] - schedule.breakpoints[k - 1];

    if (cfg.method == laplace::Method::gaver_stehfest) {
      // every factorization at a rate node is cached and its identity defect
      // folded into the diagnostics
      std::map<std::vector<double>, BlockFactorization> cache;
      double worst_residual = 0;
      auto factorize_at = [&](std::span<const double> q) -> const BlockFactorization& {
        std::vector<double> key(q.begin(), q.end());
        auto it = cache.find(key);
        if (it == cache.end()) {
          try {
            BlockFactorization bf = block_factorize(schedule, drift, c, q);
            worst_residual = std::max(
                worst_residual, augmented_residual_plus(schedule, drift, c, q, bf));
            it = cache.emplace(std::move(key), std::move(bf)).first;
          } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + " at transform node q=" +
                                      node_string(q));
          }
        }
        return it->second;
      };

      laplace::RealTransform f;
      f.arity = n;
      f.eval = [&](std::span<const double> q) {
        const BlockFactorization& bf = factorize_at(q);
        return is_psi ? hat_psi_plus(bf, level_time, i, j) : hat_pi_plus(bf, i, j);
      };
      out.terms = cfg.terms > 0
                      ? cfg.terms
                      : laplace::default_terms(cfg.method, n, false);
      cfg.terms = out.terms;
      out.value = laplace::gs_invert_nd(f, increments, cfg);
      out.residual = worst_residual;
    } else {
      if (n > 2)
        throw_config("talbot inversion supports at most two breakpoints");
      const ScalarTransform st(schedule, drift, c);
      laplace::ComplexTransform f;
      f.arity = n;
      f.eval = [&](std::span<const std::complex<double>> q) {
        return is_psi ? st.hat_psi(level_time, q) : st.hat_pi(q);
      };
      out.terms = cfg.terms > 0 ? cfg.terms
                                : laplace::default_terms(cfg.method, n, false);
      out.value = n == 1
                      ? laplace::talbot_invert_1d(f, increments[0], out.terms)
                      : laplace::talbot_invert_2d(f, increments[0], increments[1],
                                                  out.terms);
      // defect of a representative real-rate factorization
      std::vector<double> q0(n);
      for (int k = 0; k < n; ++k) q0[k] = 1.0 / increments[k];
      const BlockFactorization bf = block_factorize(schedule, drift, c, q0);
      out.residual = augmented_residual_plus(schedule, drift, c, q0, bf);
    }
  }

  out.flagged = out.value < -out.tolerance || out.value > 1.0 + out.tolerance;
  return out;
}

}  // namespace

FunctionalValue pi_plus(const chain::RegimeSchedule& schedule,
                        const chain::DriftModel& drift, double c, int i, int j,
                        const laplace::InversionConfig& inv) {
  return run_plus(FunctionalKind::pi_plus, schedule, drift, c, 0.0, i, j, inv);
}

FunctionalValue psi_plus(const chain::RegimeSchedule& schedule,
                         const chain::DriftModel& drift, double c, double t, int i,
                         int j, const laplace::InversionConfig& inv) {
  return run_plus(FunctionalKind::psi_plus, schedule, drift, c, t, i, j, inv);
}

FunctionalValue pi_minus(const chain::RegimeSchedule& schedule,
                         const chain::DriftModel& drift, double c, int i, int j,
                         const laplace::InversionConfig& inv) {
  const auto [rs, rd] = chain::reflect_problem(schedule, drift);
  return run_plus(FunctionalKind::pi_minus, rs, rd, c, 0.0, i, j, inv);
}

FunctionalValue psi_minus(const chain::RegimeSchedule& schedule,
                          const chain::DriftModel& drift, double c, double t, int i,
                          int j, const laplace::InversionConfig& inv) {
  const auto [rs, rd] = chain::reflect_problem(schedule, drift);
  return run_plus(FunctionalKind::psi_minus, rs, rd, c, t, i, j, inv);
}

}  // namespace whmc::wh
