#include "whmc.h"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "whmc/chain.hpp"
#include "whmc/config.hpp"
#include "whmc/mc.hpp"
#include "whmc/wh.hpp"

struct whmc_problem {
  whmc::cfg::ProblemConfig config;
};

namespace {

thread_local std::string g_last_error;

whmc_status set_error(const std::string& msg, whmc_status status) {
  g_last_error = msg;
  return status;
}

whmc_status to_status(const whmc::Error& e) {
  switch (e.code()) {
    case whmc::ErrorCode::config: return WHMC_ERR_CONFIG;
    case whmc::ErrorCode::numerical: return WHMC_ERR_NUMERICAL;
    case whmc::ErrorCode::usage: return WHMC_ERR_USAGE;
  }
  return WHMC_ERR_USAGE;
}

template <typename Fn>
whmc_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const whmc::Error& e) {
    return set_error(e.what(), to_status(e));
  } catch (const std::exception& e) {
    return set_error(e.what(), WHMC_ERR_USAGE);
  }
}

constexpr const char* kFluidDemoConfig = R"({
  "states": ["e+", "e-"],
  "drift": {"e+": 2.0, "e-": -3.0},
  "breakpoints": [2.0, 8.0],
  "generators": [
    [[-2.0, 2.0], [1.0, -1.0]],
    [[-3.0, 3.0], [2.0, -2.0]],
    [[-5.0, 5.0], [3.0, -3.0]]
  ],
  "discount": 0.5,
  "functional": {"kind": "Pi-", "from": "e+", "to": "e-"},
  "inversion": {"method": "gaver-stehfest", "terms": 6, "precision": 40},
  "mc": {"paths": 10000, "seed": 20260810}
}
)";

}  // namespace

const char* whmc_version(void) { return "0.1.0"; }

const char* whmc_last_error(void) { return g_last_error.c_str(); }

const char* whmc_fluid_demo_config(void) { return kFluidDemoConfig; }

whmc_status whmc_problem_parse(const char* config_text, whmc_problem** out) {
  if (config_text == nullptr || out == nullptr)
    return set_error("null argument", WHMC_ERR_USAGE);
  *out = nullptr;
  return guarded([&] {
    auto parsed = whmc::cfg::parse_config(config_text);
    *out = new whmc_problem{std::move(parsed)};
    return WHMC_OK;
  });
}

void whmc_problem_free(whmc_problem* problem) { delete problem; }

whmc_status whmc_check(const whmc_problem* problem, char* buf, size_t buflen) {
  if (problem == nullptr) return set_error("null problem", WHMC_ERR_USAGE);
  return guarded([&] {
    std::string report = "ok: " + std::to_string(problem->config.drift.size()) +
                         " states, " +
                         std::to_string(problem->config.schedule.breakpoint_count()) +
                         " breakpoints, " +
                         std::to_string(problem->config.schedule.regime_count()) +
                         " regimes";
    for (int k = 0; k < problem->config.schedule.regime_count(); ++k) {
      const auto rep =
          whmc::chain::validate_generator(problem->config.schedule.generators[k]);
      for (const auto& violation : rep.violations)
        report += "\ngenerator " + std::to_string(k) + ": " + violation;
    }
    if (buf != nullptr && buflen > 0) {
      std::snprintf(buf, buflen, "%s", report.c_str());
    }
    return WHMC_OK;
  });
}

whmc_status whmc_factorize(const whmc_problem* problem, const double* rates,
                           int32_t n_rates, whmc_factorize_report* report) {
  if (problem == nullptr || report == nullptr)
    return set_error("null argument", WHMC_ERR_USAGE);
  return guarded([&] {
    const auto& pc = problem->config;
    const int n = pc.schedule.breakpoint_count();
    std::vector<double> q;
    if (rates != nullptr) {
      if (n_rates != n)
        return set_error("factorize: expected " + std::to_string(n) + " rates",
                         WHMC_ERR_USAGE);
      q.assign(rates, rates + n_rates);
    } else {
      double prev = 0;
      for (int k = 0; k < n; ++k) {
        q.push_back(1.0 / (pc.schedule.breakpoints[k] - prev));
        prev = pc.schedule.breakpoints[k];
      }
    }
    const auto block = whmc::wh::block_factorize(pc.schedule, pc.drift, pc.discount, q);
    report->levels = block.levels();
    report->killing = pc.discount;
    report->residual =
        whmc::wh::augmented_residual_plus(pc.schedule, pc.drift, pc.discount, q, block);
    const whmc::Matrix lam = block.assembled_lambda();
    report->lambda_row_sum_max = lam.rowwise().sum().maxCoeff();
    report->lambda_entry_min = lam.minCoeff();
    double g_row_sum_max = -1e300;
    for (int k = 0; k < block.levels(); ++k)
      g_row_sum_max = std::max(g_row_sum_max, block.g(k, k).rowwise().sum().maxCoeff());
    report->g_row_sum_max = g_row_sum_max;
    return WHMC_OK;
  });
}

whmc_status whmc_passage(const whmc_problem* problem, whmc_passage_result* result) {
  if (problem == nullptr || result == nullptr)
    return set_error("null argument", WHMC_ERR_USAGE);
  return guarded([&] {
    const auto& pc = problem->config;
    const int i = pc.from_index();
    const int j = pc.to_index();
    whmc::wh::FunctionalValue fv;
    switch (pc.functional.kind) {
      case whmc::FunctionalKind::pi_plus:
        fv = whmc::wh::pi_plus(pc.schedule, pc.drift, pc.discount, i, j, pc.inversion);
        break;
      case whmc::FunctionalKind::psi_plus:
        fv = whmc::wh::psi_plus(pc.schedule, pc.drift, pc.discount,
                                pc.functional.level, i, j, pc.inversion);
        break;
      case whmc::FunctionalKind::pi_minus:
        fv = whmc::wh::pi_minus(pc.schedule, pc.drift, pc.discount, i, j, pc.inversion);
        break;
      case whmc::FunctionalKind::psi_minus:
        fv = whmc::wh::psi_minus(pc.schedule, pc.drift, pc.discount,
                                 pc.functional.level, i, j, pc.inversion);
        break;
    }
    result->value = fv.value;
    result->tolerance = fv.tolerance;
    result->residual = fv.residual;
    result->flagged = fv.flagged ? 1 : 0;
    result->terms = fv.terms;
    std::snprintf(result->method, sizeof(result->method), "%s",
                  whmc::laplace::to_string(fv.method));
    return WHMC_OK;
  });
}

whmc_status whmc_mc(const whmc_problem* problem, int32_t workers,
                    whmc_mc_result* result) {
  if (problem == nullptr || result == nullptr)
    return set_error("null argument", WHMC_ERR_USAGE);
  if (workers < 1) return set_error("workers must be >= 1", WHMC_ERR_USAGE);
  return guarded([&] {
    const auto& pc = problem->config;
    whmc::mc::SimConfig sim;
    sim.paths = pc.mc.paths;
    sim.seed = pc.mc.seed;
    sim.horizon = pc.mc.horizon;
    sim.workers = workers;
    const auto est = whmc::mc::estimate_functional(
        pc.schedule, pc.drift, pc.discount, pc.functional.kind, pc.from_index(),
        pc.to_index(), pc.functional.level, sim);
    result->mean = est.mean;
    result->std_error = est.std_error;
    result->bias_bound = est.truncation_bias_bound;
    result->horizon = est.horizon;
    result->paths = est.paths;
    result->seed = est.seed;
    return WHMC_OK;
  });
}
