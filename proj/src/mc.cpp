#include "whmc/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace whmc::mc {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& x,
                         const std::array<std::uint32_t, 2>& k) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * x[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * x[2];
  x = {static_cast<std::uint32_t>(p1 >> 32) ^ x[1] ^ k[0],
       static_cast<std::uint32_t>(p1),
       static_cast<std::uint32_t>(p0 >> 32) ^ x[3] ^ k[1],
       static_cast<std::uint32_t>(p0)};
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) {
  key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  counter_ = {0, 0, static_cast<std::uint32_t>(stream),
              static_cast<std::uint32_t>(stream >> 32)};
}

void CounterRng::refill() {
  std::array<std::uint32_t, 4> x = counter_;
  std::array<std::uint32_t, 2> k = key_;
  for (int round = 0; round < 10; ++round) {
    philox_round(x, k);
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  block_ = x;
  next_ = 0;
  if (++counter_[0] == 0) ++counter_[1];
}

double CounterRng::uniform() {
  if (next_ >= 3) refill();
  const std::uint64_t bits =
      (static_cast<std::uint64_t>(block_[next_]) << 32) | block_[next_ + 1];
  next_ += 2;
  // 52 random bits centered in (0,1)
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1p-52;
}

double CounterRng::exponential(double rate) { return -std::log(uniform()) / rate; }

int CounterRng::discrete(std::span<const double> weights) {
  double total = 0;
  for (double w : weights) total += w;
  const double u = uniform() * total;
  double acc = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(weights.size()) - 1;
}

int PathSample::state_at(double t) const {
  int k = 0;
  while (k < static_cast<int>(jump_times.size()) && jump_times[k] <= t) ++k;
  return states[k];
}

PathSample simulate_path(const chain::RegimeSchedule& schedule, int start,
                         const SimConfig& cfg, std::int64_t path_index) {
  const int d = schedule.dim();
  if (start < 0 || start >= d) throw_usage("simulate: start state out of range");
  if (!(cfg.horizon > 0)) throw_usage("simulate: horizon must be positive");

  CounterRng rng(cfg.seed, static_cast<std::uint64_t>(path_index));
  PathSample path;
  path.horizon = cfg.horizon;
  path.states.push_back(start);

  std::vector<double> row(d);
  double t = 0;
  int state = start;
  while (t < cfg.horizon) {
    const int regime = schedule.regime_at(t);
    const double boundary = regime < schedule.breakpoint_count()
                                ? schedule.breakpoints[regime]
                                : std::numeric_limits<double>::infinity();
    const Matrix& g = schedule.generators[regime];
    const double rate = -g(state, state);
    const double hold = rate > 0 ? rng.exponential(rate)
                                 : std::numeric_limits<double>::infinity();
    if (t + hold >= cfg.horizon && boundary >= cfg.horizon) break;
    if (t + hold < boundary) {
      t += hold;
      for (int j = 0; j < d; ++j) row[j] = j == state ? 0.0 : g(state, j);
      state = rng.discrete(row);
      path.jump_times.push_back(t);
      path.states.push_back(state);
    } else {
      // memoryless cut at the regime boundary; same state, fresh draw
      t = boundary;
      path.jump_times.push_back(t);
      path.states.push_back(state);
    }
  }
  return path;
}

PassageValue passage_functional(const PathSample& path, const chain::DriftModel& drift,
                                double level, Sign sign, double c) {
  if (level < 0) throw_usage("passage: level must be nonnegative");
  PassageValue out;
  const double target = sign == Sign::plus ? level : -level;
  double phi = 0;
  double t = 0;
  const int segments = static_cast<int>(path.states.size());
  for (int k = 0; k < segments; ++k) {
    const double end =
        k < segments - 1 ? path.jump_times[k] : path.horizon;
    const int state = path.states[k];
    const double v = drift.v(state);
    const double duration = end - t;
    const bool crosses = sign == Sign::plus
                             ? (v > 0 && phi + v * duration > target)
                             : (v < 0 && phi + v * duration < target);
    if (crosses) {
      out.censored = false;
      out.tau = t + (target - phi) / v;
      out.state = state;
      out.value = std::exp(-c * out.tau);
      return out;
    }
    phi += v * duration;
    t = end;
  }
  return out;  // censored
}

namespace {

struct KindSpec {
  Sign sign;
  bool needs_level;
};

KindSpec kind_spec(FunctionalKind kind) {
  switch (kind) {
    case FunctionalKind::pi_plus: return {Sign::plus, false};
    case FunctionalKind::psi_plus: return {Sign::plus, true};
    case FunctionalKind::pi_minus: return {Sign::minus, false};
    case FunctionalKind::psi_minus: return {Sign::minus, true};
  }
  throw_usage("estimate: unknown functional kind");
}

void check_kind_states(const chain::DriftModel& drift, FunctionalKind kind, int from,
                       int to) {
  const bool from_plus = drift.is_plus(from);
  const bool to_plus = drift.is_plus(to);
  bool ok = false;
  switch (kind) {
    case FunctionalKind::pi_plus: ok = !from_plus && to_plus; break;
    case FunctionalKind::psi_plus: ok = from_plus && to_plus; break;
    case FunctionalKind::pi_minus: ok = from_plus && !to_plus; break;
    case FunctionalKind::psi_minus: ok = !from_plus && !to_plus; break;
  }
  if (!ok)
    throw_usage(std::string("estimate: state pair does not match functional kind ") +
                to_string(kind));
}

}  // namespace

EstimatorResult estimate_functional(const chain::RegimeSchedule& schedule,
                                    const chain::DriftModel& drift, double c,
                                    FunctionalKind kind, int from, int to,
                                    double level, const SimConfig& cfg) {
  schedule.validate();
  if (!(c > 0)) throw_usage("estimate: discount rate must be positive");
  if (cfg.paths < 1) throw_usage("estimate: need at least one path");
  if (from < 0 || from >= drift.size() || to < 0 || to >= drift.size())
    throw_usage("estimate: state index out of range");
  check_kind_states(drift, kind, from, to);

  const KindSpec spec = kind_spec(kind);
  if (spec.needs_level && !(level > 0))
    throw_usage("estimate: Psi needs a positive level");
  const double lvl = spec.needs_level ? level : 0.0;

  SimConfig run = cfg;
  if (run.horizon <= 0) run.horizon = 40.0 / c;

  // fixed-size chunks accumulated in chunk order: identical output for any
  // worker count
  constexpr std::int64_t kChunk = 4096;
  const std::int64_t chunks = (run.paths + kChunk - 1) / kChunk;
  std::vector<double> chunk_sum(chunks, 0.0), chunk_sq(chunks, 0.0);

  auto run_chunk = [&](std::int64_t chunk) {
    const std::int64_t begin = chunk * kChunk;
    const std::int64_t end = std::min(run.paths, begin + kChunk);
    double sum = 0, sq = 0;
    for (std::int64_t p = begin; p < end; ++p) {
      const PathSample path = simulate_path(schedule, from, run, p);
      const PassageValue pv = passage_functional(path, drift, lvl, spec.sign, c);
      const double x = (!pv.censored && pv.state == to) ? pv.value : 0.0;
      sum += x;
      sq += x * x;
    }
    chunk_sum[chunk] = sum;
    chunk_sq[chunk] = sq;
  };

  const int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(chunks)));
  if (workers == 1) {
    for (std::int64_t ch = 0; ch < chunks; ++ch) run_chunk(ch);
  } else {
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::int64_t ch = next.fetch_add(1); ch < chunks; ch = next.fetch_add(1))
          run_chunk(ch);
      });
    for (auto& th : pool) th.join();
  }

  double sum = 0, sq = 0;
  for (std::int64_t ch = 0; ch < chunks; ++ch) {
    sum += chunk_sum[ch];
    sq += chunk_sq[ch];
  }

  EstimatorResult res;
  res.paths = run.paths;
  res.seed = run.seed;
  res.horizon = run.horizon;
  res.mean = sum / static_cast<double>(run.paths);
  if (run.paths > 1) {
    const double var =
        std::max(0.0, (sq - static_cast<double>(run.paths) * res.mean * res.mean) /
                          static_cast<double>(run.paths - 1));
    res.std_error = std::sqrt(var / static_cast<double>(run.paths));
  }
  res.truncation_bias_bound = std::exp(-c * run.horizon);
  return res;
}

}  // namespace whmc::mc
