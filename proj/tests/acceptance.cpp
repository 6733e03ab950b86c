// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <vector>

#include "test_support.hpp"
#include "whmc/chain.hpp"
#include "whmc/laplace.hpp"
#include "whmc/mc.hpp"
#include "whmc/wh.hpp"

using namespace whmc;
using whmc::testing::fluid_drift;
using whmc::testing::fluid_schedule;
using whmc::testing::kFluidDiscount;

namespace {

int g_failures = 0;

void report(const char* name, bool pass, const std::string& detail) {
  std::printf("%s  %-28s %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

double g_fluid_wh = 0;  // shared between criteria 1 and 2

void fluid_reproduction() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto fv = wh::pi_minus(fluid_schedule(), fluid_drift(), kFluidDiscount, 0, 1,
                               laplace::InversionConfig{});
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  g_fluid_wh = fv.value;
  const double err = std::abs(fv.value - 0.6501);
  report("fluid-reproduction", err <= 2e-3,
         fmt("value %.6f vs 0.6501, |diff| %.2e <= 2e-3 (wall %lld ms, reported "
             "not asserted)",
             fv.value, err, static_cast<long long>(ms)));
}

void mc_cross_check() {
  mc::SimConfig big;
  big.paths = 100000;
  big.seed = 20260810;
  big.workers = 4;
  const auto est = mc::estimate_functional(fluid_schedule(), fluid_drift(),
                                           kFluidDiscount, FunctionalKind::pi_minus, 0,
                                           1, 0.0, big);
  const double diff = std::abs(est.mean - g_fluid_wh);
  const bool pass_big = diff <= 0.01 && diff <= 3.0 * est.std_error;

  mc::SimConfig paper;
  paper.paths = 10000;
  paper.seed = 20260810;
  const auto est_paper =
      mc::estimate_functional(fluid_schedule(), fluid_drift(), kFluidDiscount,
                              FunctionalKind::pi_minus, 0, 1, 0.0, paper);
  const double table_diff = std::abs(0.6462 - g_fluid_wh);
  const bool pass_table = table_diff <= 3.0 * est_paper.std_error;

  report("mc-cross-check", pass_big && pass_table,
         fmt("1e5 paths: %.5f +- %.5f, |diff to wh| %.2e (<= .01 and <= 3se); "
             "table value 0.6462 off by %.2e <= 3se@1e4 %.2e",
             est.mean, est.std_error, diff, table_diff, 3.0 * est_paper.std_error));
}

void residual_suite() {
  std::mt19937_64 rng(1001);
  int count = 0;
  double worst_residual = 0, worst_class = 0;
  for (int trial = 0; trial < 34; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 5);
    const int n_plus = 1 + static_cast<int>(rng() % (d - 1));
    const auto drift = testing::random_drift(rng, d, n_plus);
    const Matrix g = testing::random_generator(rng, d);
    for (double c : {0.1, 1.0, 10.0}) {
      const auto quad = wh::classical_factorize(g, drift, c);
      worst_residual =
          std::max(worst_residual, wh::factorization_residual(g, drift, c, quad));
      double viol = 0.0;
      viol = std::max(viol, -quad.lambda_plus.minCoeff());
      viol = std::max(viol, -quad.lambda_minus.minCoeff());
      viol = std::max(viol, quad.lambda_plus.rowwise().sum().maxCoeff() - 1.0);
      viol = std::max(viol, quad.lambda_minus.rowwise().sum().maxCoeff() - 1.0);
      viol = std::max(viol, quad.g_plus.rowwise().sum().maxCoeff());
      viol = std::max(viol, quad.g_minus.rowwise().sum().maxCoeff());
      for (Eigen::Index r = 0; r < quad.g_plus.rows(); ++r)
        for (Eigen::Index s = 0; s < quad.g_plus.cols(); ++s)
          if (r != s) viol = std::max(viol, -quad.g_plus(r, s));
      for (Eigen::Index r = 0; r < quad.g_minus.rows(); ++r)
        for (Eigen::Index s = 0; s < quad.g_minus.cols(); ++s)
          if (r != s) viol = std::max(viol, -quad.g_minus(r, s));
      worst_class = std::max(worst_class, viol);
      ++count;
    }
  }
  report("residual-suite", worst_residual <= 1e-8 && worst_class <= 1e-10,
         fmt("%d factorizations: worst residual %.2e <= 1e-8, worst class "
             "violation %.2e <= 1e-10",
             count, worst_residual, worst_class));
}

void block_direct_equivalence() {
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> uq(0.1, 5.0);
  int count = 0;
  double worst = 0;
  for (int trial = 0; trial < 26; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 3);
    const int n = 1 + static_cast<int>(rng() % 3);
    const int n_plus = 1 + static_cast<int>(rng() % (d - 1));
    const auto schedule = testing::random_schedule(rng, d, n);
    const auto drift = testing::random_drift(rng, d, n_plus);
    std::vector<double> q(n);
    for (double& x : q) x = uq(rng);
    const double c = 0.5 + (trial % 3);
    const auto block = wh::block_factorize(schedule, drift, c, q);
    const auto direct = wh::direct_augmented_factorize(schedule, drift, c, q);
    for (int k = 0; k <= n; ++k)
      for (int l = k; l <= n; ++l) {
        worst = std::max(
            worst, (block.lambda(k, l) - direct.lambda(k, l)).cwiseAbs().maxCoeff());
        worst =
            std::max(worst, (block.g(k, l) - direct.g(k, l)).cwiseAbs().maxCoeff());
      }
    ++count;
  }
  report("block-direct-equivalence", worst <= 1e-8,
         fmt("%d random piecewise models: worst block deviation %.2e <= 1e-8", count,
             worst));
}

void homogeneous_collapse() {
  std::mt19937_64 rng(3003);
  const int d = 3;
  const auto drift = testing::random_drift(rng, d, 2);
  const Matrix g = testing::random_generator(rng, d);
  const double c = 1.0;
  const auto quad = wh::classical_factorize(g, drift, c);

  laplace::InversionConfig cfg;
  cfg.terms = 7;
  double worst = 0;
  for (double s1 : {0.7, 3.0, 11.0}) {
    chain::RegimeSchedule schedule;
    schedule.breakpoints = {s1};
    schedule.generators = {g, g};
    const auto pi = wh::pi_plus(schedule, drift, c, drift.minus_states()[0],
                                drift.plus_states()[0], cfg);
    worst = std::max(worst, std::abs(pi.value - quad.lambda_plus(0, 0)));
    const double t = 1.1;
    const auto psi = wh::psi_plus(schedule, drift, c, t, drift.plus_states()[0],
                                  drift.plus_states()[1], cfg);
    const Matrix e = chain::matrix_exp(quad.g_plus, t);
    worst = std::max(worst, std::abs(psi.value - e(0, 1)));
  }

  // two-breakpoint collapse at the n-dimensional default term count
  chain::RegimeSchedule two;
  two.breakpoints = {1.3, 6.4};
  two.generators = {g, g, g};
  const auto pi2 = wh::pi_plus(two, drift, c, drift.minus_states()[0],
                               drift.plus_states()[0], laplace::InversionConfig{});
  worst = std::max(worst, std::abs(pi2.value - quad.lambda_plus(0, 0)));

  report("homogeneous-collapse", worst <= 2e-3,
         fmt("pi/psi vs classical entries, worst |diff| %.2e <= 2e-3 "
             "(M=7 one breakpoint, M=6 two)",
             worst));
}

void marginalization() {
  std::mt19937_64 rng(4004);
  std::uniform_real_distribution<double> uq(0.2, 4.0);
  double worst = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 3);
    const int n = 1 + static_cast<int>(rng() % 3);
    const auto schedule = testing::random_schedule(rng, d, n);
    const auto drift = testing::random_drift(rng, d, 1);
    std::vector<double> q(n);
    for (double& x : q) x = uq(rng);
    const auto aug = chain::build_augmented_generator(schedule, drift, q);
    const Matrix counter = chain::marginal_counter_generator(q);
    Matrix power = Matrix::Identity((n + 1) * d, (n + 1) * d);
    Matrix cpower = Matrix::Identity(n + 1, n + 1);
    for (int k = 1; k <= 5; ++k) {
      power = power * aug.gen;
      cpower = cpower * counter;
      for (int n1 = 0; n1 <= n; ++n1)
        for (int j1 = 0; j1 < d; ++j1)
          for (int n2 = 0; n2 <= n; ++n2) {
            double sum = 0;
            for (int j2 = 0; j2 < d; ++j2) sum += power(n1 * d + j1, n2 * d + j2);
            worst = std::max(worst, std::abs(sum - cpower(n1, n2)));
          }
    }
  }
  report("marginalization", worst <= 1e-8,
         fmt("level sums of generator powers k<=5: worst |diff| %.2e <= 1e-8", worst));
}

void laplace_suite() {
  using namespace laplace;
  double worst_const = 0, worst = 0;
  std::string detail;

  InversionConfig cfg;
  RealTransform one;
  one.arity = 1;
  one.eval = [](std::span<const double> q) { return 1.0 / q[0]; };
  one.eval_hp = [](std::span<const BigFloat> q) { return 1 / q[0]; };
  for (int terms : {4, 7, 12}) {
    cfg.terms = terms;
    worst_const = std::max(worst_const, std::abs(gs_invert_1d(one, 1.7, cfg) - 1.0));
  }
  RealTransform one2;
  one2.arity = 2;
  one2.eval = [](std::span<const double> q) { return 1.0 / (q[0] * q[1]); };
  one2.eval_hp = [](std::span<const BigFloat> q) { return 1 / (q[0] * q[1]); };
  cfg.terms = 12;
  const std::vector<double> t2{2.0, 6.0};
  worst_const = std::max(worst_const, std::abs(gs_invert_nd(one2, t2, cfg) - 1.0));

  ComplexTransform cone;
  cone.arity = 1;
  cone.eval = [](std::span<const std::complex<double>> q) { return 1.0 / q[0]; };
  worst_const = std::max(worst_const, std::abs(talbot_invert_1d(cone, 1.7, 32) - 1.0));
  ComplexTransform cone2;
  cone2.arity = 2;
  cone2.eval = [](std::span<const std::complex<double>> q) {
    return 1.0 / (q[0] * q[1]);
  };
  worst_const =
      std::max(worst_const, std::abs(talbot_invert_2d(cone2, 2.0, 6.0, 32) - 1.0));

  RealTransform decay;
  decay.arity = 1;
  decay.eval = [](std::span<const double> q) { return 1.0 / (q[0] + 1.0); };
  decay.eval_hp = [](std::span<const BigFloat> q) { return 1 / (q[0] + 1); };
  cfg.terms = 12;
  const double e_gs = std::abs(gs_invert_1d(decay, 1.0, cfg) - std::exp(-1.0));

  ComplexTransform cdecay;
  cdecay.arity = 1;
  cdecay.eval = [](std::span<const std::complex<double>> q) {
    return 1.0 / (q[0] + 1.0);
  };
  const double e_tb = std::abs(talbot_invert_1d(cdecay, 1.0, 32) - std::exp(-1.0));

  RealTransform sep;
  sep.arity = 2;
  sep.eval = [](std::span<const double> q) {
    return 1.0 / ((q[0] + 1.0) * (q[1] + 2.0));
  };
  sep.eval_hp = [](std::span<const BigFloat> q) {
    return 1 / ((q[0] + 1) * (q[1] + 2));
  };
  const std::vector<double> t11{1.0, 1.0};
  const double e_sep_gs = std::abs(gs_invert_nd(sep, t11, cfg) - std::exp(-3.0));

  ComplexTransform csep;
  csep.arity = 2;
  csep.eval = [](std::span<const std::complex<double>> q) {
    return 1.0 / ((q[0] + 1.0) * (q[1] + 2.0));
  };
  const double e_sep_tb = std::abs(talbot_invert_2d(csep, 1.0, 1.0, 32) - std::exp(-3.0));

  const bool pass = worst_const <= 1e-10 && e_gs <= 1e-6 && e_tb <= 1e-10 &&
                    e_sep_gs <= 1e-5 && e_sep_tb <= 1e-8;
  report("laplace-suite", pass,
         fmt("constants %.1e<=1e-10; e^-t gs %.1e<=1e-6, talbot %.1e<=1e-10; "
             "2-d pair gs %.1e<=1e-5, talbot %.1e<=1e-8",
             worst_const, e_gs, e_tb, e_sep_gs, e_sep_tb));
  (void)worst;
}

void scalar_talbot_gs_agreement() {
  laplace::InversionConfig talbot;
  talbot.method = laplace::Method::talbot;
  const auto gs = wh::pi_minus(fluid_schedule(), fluid_drift(), kFluidDiscount, 0, 1,
                               laplace::InversionConfig{});
  const auto tb =
      wh::pi_minus(fluid_schedule(), fluid_drift(), kFluidDiscount, 0, 1, talbot);
  const double diff = std::abs(gs.value - tb.value);
  report("scalar-talbot-gs-agreement", diff <= 1e-4,
         fmt("gs %.6f vs talbot %.6f, |diff| %.2e <= 1e-4", gs.value, tb.value, diff));
}

void mc_micro_oracles() {
  chain::RegimeSchedule zero;
  zero.breakpoints = {1.0};
  zero.generators = {Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
  const auto drift = fluid_drift();

  mc::SimConfig cfg;
  cfg.paths = 2000;
  cfg.seed = 7;
  const auto never = mc::estimate_functional(zero, drift, 0.5, FunctionalKind::pi_plus,
                                             1, 0, 0.0, cfg);
  const bool zero_exact = never.mean == 0.0 && never.std_error == 0.0;

  const double t = 3.0;
  const auto ramp = mc::estimate_functional(zero, drift, 0.5, FunctionalKind::psi_plus,
                                            0, 0, t, cfg);
  const bool ramp_exact =
      ramp.std_error == 0.0 && std::abs(ramp.mean - std::exp(-0.5 * t / 2.0)) < 1e-15;

  // occupation law on the fluid schedule
  mc::SimConfig occ;
  occ.paths = 40000;
  occ.seed = 909;
  occ.horizon = 11.0;
  occ.workers = 4;
  double worst_occ = 0;
  {
    const auto schedule = fluid_schedule();
    const double times[3] = {1.0, 5.0, 10.0};
    double counts[3][2] = {{0, 0}, {0, 0}, {0, 0}};
    for (std::int64_t p = 0; p < occ.paths; ++p) {
      const auto path = mc::simulate_path(schedule, 0, occ, p);
      for (int w = 0; w < 3; ++w) counts[w][path.state_at(times[w])] += 1.0;
    }
    for (int w = 0; w < 3; ++w) {
      const Matrix pm = chain::transition_matrix(schedule, 0.0, times[w]).entries;
      for (int s = 0; s < 2; ++s)
        worst_occ = std::max(
            worst_occ, std::abs(counts[w][s] / static_cast<double>(occ.paths) - pm(0, s)));
    }
  }
  const double band = 4.0 / std::sqrt(40000.0);
  report("mc-micro-oracles", zero_exact && ramp_exact && worst_occ < band,
         fmt("zero-generator cases exact (se 0); occupation law worst |diff| %.2e < "
             "4/sqrt(paths) = %.2e",
             worst_occ, band));
}

}  // namespace

int main() {
  fluid_reproduction();
  mc_cross_check();
  residual_suite();
  block_direct_equivalence();
  homogeneous_collapse();
  marginalization();
  laplace_suite();
  scalar_talbot_gs_agreement();
  mc_micro_oracles();
  if (g_failures == 0) std::printf("all acceptance criteria passed\n");
  return g_failures;
}
