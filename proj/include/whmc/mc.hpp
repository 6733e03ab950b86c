#pragma once

// Path simulation of the piecewise-constant chain and Monte Carlo estimation
// of the discounted passage functionals.  Every path draws from its own
// counter-based stream keyed by (seed, path index), so estimates are
// bitwise-reproducible no matter how paths are scheduled across workers.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "whmc/chain.hpp"
#include "whmc/types.hpp"

namespace whmc::mc {

// Philox 4x32-10 block cipher driven as a counter-based RNG.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  // uniform in (0,1), never exactly 0 or 1
  double uniform();
  double exponential(double rate);
  // index into cumulative weights; weights need not be normalized
  int discrete(std::span<const double> weights);

private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> block_{};
  int next_ = 4;
};

struct SimConfig {
  std::int64_t paths = 10000;
  double horizon = 0;  // 0: defaulted to 40 / discount by the estimator
  std::uint64_t seed = 1;
  int workers = 1;
};

// Trajectory up to the horizon.  Entry k > 0 of `states` starts at
// jump_times[k-1]; entries may repeat a state when the holding draw was cut
// at a regime boundary and redrawn (such markers carry no state change).
struct PathSample {
  std::vector<double> jump_times;
  std::vector<int> states;
  double horizon = 0;

  int state_at(double t) const;
};

PathSample simulate_path(const chain::RegimeSchedule& schedule, int start,
                         const SimConfig& cfg, std::int64_t path_index);

enum class Sign { plus, minus };

struct PassageValue {
  bool censored = true;
  double tau = 0;
  int state = -1;    // state occupied at the crossing
  double value = 0;  // e^{-c tau}, 0 when censored
};

// First time the running drift integral exceeds +level (or falls below
// -level).  The crossing instant is solved exactly inside the crossing
// sojourn; paths that never cross before the horizon come back censored.
PassageValue passage_functional(const PathSample& path, const chain::DriftModel& drift,
                                double level, Sign sign, double c);

struct EstimatorResult {
  double mean = 0;
  double std_error = 0;
  std::int64_t paths = 0;
  double truncation_bias_bound = 0;  // <= e^{-c T}
  std::uint64_t seed = 0;
  double horizon = 0;
};

EstimatorResult estimate_functional(const chain::RegimeSchedule& schedule,
                                    const chain::DriftModel& drift, double c,
                                    FunctionalKind kind, int from, int to,
                                    double level, const SimConfig& cfg);

}  // namespace whmc::mc
