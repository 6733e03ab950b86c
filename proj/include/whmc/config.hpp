#pragma once

// Problem ingestion from a JSON config file.  Recognized top-level keys:
// states, drift, breakpoints, generators, discount, functional, inversion,
// mc.  Matrices are row-major nested arrays; the order of `states` fixes
// every matrix ordering.

#include <cstdint>
#include <string>

#include "whmc/chain.hpp"
#include "whmc/laplace.hpp"
#include "whmc/types.hpp"

namespace whmc::cfg {

struct FunctionalSpec {
  FunctionalKind kind = FunctionalKind::pi_minus;
  std::string from, to;
  double level = 0;  // Psi kinds only
};

struct McSpec {
  std::int64_t paths = 10000;
  std::uint64_t seed = 1;
  double horizon = 0;  // 0: defaulted to 40 / discount
};

struct ProblemConfig {
  chain::RegimeSchedule schedule;
  chain::DriftModel drift;
  double discount = 0;
  FunctionalSpec functional;
  laplace::InversionConfig inversion;
  McSpec mc;

  int from_index() const { return drift.index_of(functional.from); }
  int to_index() const { return drift.index_of(functional.to); }
};

// Throws Error(config) naming the offending key on any problem.
ProblemConfig parse_config(const std::string& text);

}  // namespace whmc::cfg
