// whmc command-line tool.  Thin orchestrator over the C API: parse a config,
// run one of the subcommands, print a human table or a machine-readable
// record with a fixed field order.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "whmc.h"

namespace {

using Clock = std::chrono::steady_clock;

int64_t ms_since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0)
      .count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read config file '" << path << "'\n";
    std::exit(WHMC_ERR_CONFIG);
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string fnv1a_digest(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Record {
  std::string command;
  std::string digest;
  double value = 0;
  double std_error = 0;
  double residual = 0;
  std::string method = "-";
  int terms = 0;
  std::uint64_t seed = 0;
  std::int64_t wall_ms = 0;
};

void print_record(const Record& r) {
  nlohmann::ordered_json j;
  j["command"] = r.command;
  j["inputs-digest"] = r.digest;
  j["value"] = r.value;
  j["std_error"] = r.std_error;
  j["residual"] = r.residual;
  j["method"] = r.method;
  j["M"] = r.terms;
  j["seed"] = r.seed;
  j["wall_ms"] = r.wall_ms;
  std::cout << j.dump() << "\n";
}

int fail_with(whmc_status status, const char* what) {
  std::cerr << "error: " << what << "\n";
  return static_cast<int>(status);
}

struct Problem {
  whmc_problem* handle = nullptr;
  std::string digest;
  ~Problem() { whmc_problem_free(handle); }
};

int parse_problem(const std::string& text, Problem& p) {
  p.digest = fnv1a_digest(text);
  const whmc_status st = whmc_problem_parse(text.c_str(), &p.handle);
  if (st != WHMC_OK) return fail_with(st, whmc_last_error());
  return 0;
}

int run_check(const std::string& text, bool json_out) {
  const auto t0 = Clock::now();
  Problem p;
  if (int rc = parse_problem(text, p)) return rc;
  char buf[4096];
  const whmc_status st = whmc_check(p.handle, buf, sizeof(buf));
  if (st != WHMC_OK) return fail_with(st, whmc_last_error());
  if (json_out) {
    Record r;
    r.command = "check";
    r.digest = p.digest;
    r.value = 1.0;
    r.wall_ms = ms_since(t0);
    print_record(r);
  } else {
    std::cout << buf << "\n";
  }
  return 0;
}

int run_factorize(const std::string& text, const std::vector<double>& rates,
                  bool json_out) {
  const auto t0 = Clock::now();
  Problem p;
  if (int rc = parse_problem(text, p)) return rc;
  whmc_factorize_report rep{};
  const whmc_status st =
      whmc_factorize(p.handle, rates.empty() ? nullptr : rates.data(),
                     static_cast<int32_t>(rates.size()), &rep);
  if (st != WHMC_OK) return fail_with(st, whmc_last_error());
  if (json_out) {
    Record r;
    r.command = "factorize";
    r.digest = p.digest;
    r.value = rep.residual;
    r.residual = rep.residual;
    r.wall_ms = ms_since(t0);
    print_record(r);
  } else {
    std::printf("factorization: %d levels, killing %.6g\n", rep.levels, rep.killing);
    std::printf("  identity residual     %.3e  (gate 1e-8)\n", rep.residual);
    std::printf("  crossing row-sum max  %.12g  (sub-probability: <= 1)\n",
                rep.lambda_row_sum_max);
    std::printf("  crossing entry min    %.3e  (nonnegative up to 1e-10)\n",
                rep.lambda_entry_min);
    std::printf("  ladder row-sum max    %.3e  (sub-generator: <= 0 up to 1e-10)\n",
                rep.g_row_sum_max);
    std::printf("  wall time             %lld ms\n",
                static_cast<long long>(ms_since(t0)));
  }
  return 0;
}

int run_passage(const std::string& text, bool json_out) {
  const auto t0 = Clock::now();
  Problem p;
  if (int rc = parse_problem(text, p)) return rc;
  whmc_passage_result res{};
  const whmc_status st = whmc_passage(p.handle, &res);
  if (st != WHMC_OK) return fail_with(st, whmc_last_error());
  const auto wall = ms_since(t0);
  if (json_out) {
    Record r;
    r.command = "passage";
    r.digest = p.digest;
    r.value = res.value;
    r.residual = res.residual;
    r.method = res.method;
    r.terms = res.terms;
    r.wall_ms = wall;
    print_record(r);
  } else {
    std::printf("value     %.6f  (inversion tolerance %.1e%s)\n", res.value,
                res.tolerance, res.flagged ? ", FLAGGED outside [0,1]" : "");
    std::printf("method    %s, M=%d per dimension\n", res.method, res.terms);
    std::printf("residual  %.3e  (factorization identity, gate 1e-8)\n", res.residual);
    std::printf("wall time %lld ms\n", static_cast<long long>(wall));
  }
  return 0;
}

int run_mc(const std::string& text, int workers, bool json_out) {
  const auto t0 = Clock::now();
  Problem p;
  if (int rc = parse_problem(text, p)) return rc;
  whmc_mc_result res{};
  const whmc_status st = whmc_mc(p.handle, workers, &res);
  if (st != WHMC_OK) return fail_with(st, whmc_last_error());
  const auto wall = ms_since(t0);
  if (json_out) {
    Record r;
    r.command = "mc";
    r.digest = p.digest;
    r.value = res.mean;
    r.std_error = res.std_error;
    r.method = "monte-carlo";
    r.seed = res.seed;
    r.wall_ms = wall;
    print_record(r);
  } else {
    std::printf("estimate  %.6f +- %.6f  (1 std error, %lld paths)\n", res.mean,
                res.std_error, static_cast<long long>(res.paths));
    std::printf("horizon   %.6g  (truncation bias <= %.3e)\n", res.horizon,
                res.bias_bound);
    std::printf("seed      %llu\n", static_cast<unsigned long long>(res.seed));
    std::printf("wall time %lld ms\n", static_cast<long long>(wall));
  }
  return 0;
}

int run_compare(const std::string& text, int workers, bool json_out) {
  const auto t0 = Clock::now();
  Problem p;
  if (int rc = parse_problem(text, p)) return rc;

  const auto t_wh = Clock::now();
  whmc_passage_result wh{};
  whmc_status st = whmc_passage(p.handle, &wh);
  if (st != WHMC_OK) return fail_with(st, whmc_last_error());
  const auto wh_ms = ms_since(t_wh);

  const auto t_mc = Clock::now();
  whmc_mc_result mc{};
  st = whmc_mc(p.handle, workers, &mc);
  if (st != WHMC_OK) return fail_with(st, whmc_last_error());
  const auto mc_ms = ms_since(t_mc);

  const double diff = std::abs(wh.value - mc.mean);
  const double gate = 3.0 * mc.std_error;
  const bool agree = diff <= gate;

  if (json_out) {
    Record r;
    r.command = "compare";
    r.digest = p.digest;
    r.value = wh.value;
    r.std_error = mc.std_error;
    r.residual = wh.residual;
    r.method = wh.method;
    r.terms = wh.terms;
    r.seed = mc.seed;
    r.wall_ms = ms_since(t0);
    print_record(r);
  } else {
    std::printf("method        value      context\n");
    std::printf("wiener-hopf   %.6f   %s M=%d, residual %.2e, tolerance %.1e\n",
                wh.value, wh.method, wh.terms, wh.residual, wh.tolerance);
    std::printf("monte-carlo   %.6f   se %.6f, paths %lld, seed %llu, bias <= %.1e\n",
                mc.mean, mc.std_error, static_cast<long long>(mc.paths),
                static_cast<unsigned long long>(mc.seed), mc.bias_bound);
    std::printf("verdict       %s      |diff| %.6f vs 3*se %.6f\n",
                agree ? "AGREE" : "DISAGREE", diff, gate);
    std::printf("timing        wiener-hopf %lld ms, monte-carlo %lld ms\n",
                static_cast<long long>(wh_ms), static_cast<long long>(mc_ms));
  }
  return agree ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discounted first-passage functionals of piecewise-constant "
               "Markov chains"};
  app.require_subcommand(1);
  bool json_out = false;
  int workers = 1;
  app.add_flag("--json", json_out, "machine-readable output (fixed field order)");

  std::string config_path;
  std::vector<double> rates;

  auto* check = app.add_subcommand("check", "validate a config file");
  check->add_option("config", config_path)->required();

  auto* factorize =
      app.add_subcommand("factorize", "factorization diagnostics at fixed rates");
  factorize->add_option("config", config_path)->required();
  factorize->add_option("--rates", rates,
                        "randomization rates, one per breakpoint "
                        "(default 1/(s_k - s_{k-1}))");

  auto* passage = app.add_subcommand("passage", "evaluate the configured functional");
  passage->add_option("config", config_path)->required();

  auto* mc = app.add_subcommand("mc", "Monte Carlo estimate of the functional");
  mc->add_option("config", config_path)->required();
  mc->add_option("--workers", workers, "simulation worker threads");

  auto* compare =
      app.add_subcommand("compare", "run both methods and check 3-sigma agreement");
  compare->add_option("config", config_path)->required();
  compare->add_option("--workers", workers, "simulation worker threads");

  auto* fluid = app.add_subcommand("example-fluid", "run the built-in fluid scenario");
  fluid->add_option("--workers", workers, "simulation worker threads");

  CLI11_PARSE(app, argc, argv);

  if (check->parsed()) return run_check(read_file(config_path), json_out);
  if (factorize->parsed()) return run_factorize(read_file(config_path), rates, json_out);
  if (passage->parsed()) return run_passage(read_file(config_path), json_out);
  if (mc->parsed()) return run_mc(read_file(config_path), workers, json_out);
  if (compare->parsed()) return run_compare(read_file(config_path), workers, json_out);
  if (fluid->parsed()) return run_compare(whmc_fluid_demo_config(), workers, json_out);
  return WHMC_ERR_USAGE;
}
