#include "aoisched/simkernel.hpp"

#include <cmath>
#include <vector>

#include "aoisched/errors.hpp"
#include "aoisched/philox.hpp"

namespace aoisched::sim {

namespace {

constexpr int kBatches = 100;

}  // namespace

void SimConfig::validate() const {
  if (rounds < 1) raise(ErrorCode::InvalidArgument, "rounds must be >= 1");
  if (warmup < 0 || warmup >= rounds) raise(ErrorCode::InvalidArgument, "warmup must lie in [0, rounds)");
  if (time_resolution < 1) raise(ErrorCode::InvalidArgument, "time_resolution must be >= 1");
}

DeviceSimResult simulate_periodic(std::span<const SimAttempt> attempts, std::int64_t period,
                                  std::uint64_t stream, const SimConfig& cfg) {
  cfg.validate();
  if (attempts.empty()) raise(ErrorCode::InvalidArgument, "device has no attempts");
  if (period <= 0) raise(ErrorCode::InvalidDuration, "period must be positive");

  // Receptions in transmission order, made increasing by whole periods.
  std::vector<std::int64_t> ends;
  for (const auto& a : attempts) {
    if (a.age <= 0 || a.end < 0) raise(ErrorCode::InvalidArgument, "attempt needs end >= 0 and age > 0");
    std::int64_t e = a.end;
    if (!ends.empty()) {
      while (e <= ends.back()) e += period;
    }
    ends.push_back(e);
  }
  const std::int64_t per_round = static_cast<std::int64_t>(attempts.size());

  using Wide = __int128;
  std::int64_t gen = ends[0] - attempts[0].age - period;  // one round stale at the start
  std::int64_t last = -1;
  bool open = false;
  std::int64_t successes = 0, counted = 0;

  Wide total_area2 = 0;
  std::int64_t total_span = 0;
  std::vector<Wide> batch_area2(kBatches, 0);
  std::vector<std::int64_t> batch_span(kBatches, 0);
  const std::int64_t window_rounds = cfg.rounds - cfg.warmup;

  for (std::int64_t k = 0; k < cfg.rounds; ++k) {
    for (std::int64_t j = 0; j < per_round; ++j) {
      const auto& a = attempts[static_cast<std::size_t>(j)];
      const std::uint64_t index = static_cast<std::uint64_t>(k * per_round + j);
      const bool ok = rng::uniform01(cfg.seed, stream, index) < 1.0 - a.eps;
      const bool in_window = k >= cfg.warmup;
      if (in_window) ++counted;
      if (!ok) continue;
      if (in_window) ++successes;
      const std::int64_t t = k * period + ends[static_cast<std::size_t>(j)];
      if (in_window) {
        if (open) {
          const Wide area2 = static_cast<Wide>(t - last) * static_cast<Wide>(last + t - 2 * gen);
          const auto batch = static_cast<std::size_t>(((k - cfg.warmup) * kBatches) / window_rounds);
          total_area2 += area2;
          total_span += t - last;
          batch_area2[batch] += area2;
          batch_span[batch] += t - last;
        }
        open = true;
      }
      last = t;
      gen = std::max(gen, t - a.age);
    }
  }

  DeviceSimResult out;
  out.attempts = counted;
  out.success_rate = counted > 0 ? static_cast<double>(successes) / static_cast<double>(counted) : 0.0;
  if (total_span == 0) raise(ErrorCode::DivergentAoI, "fewer than two successful receptions in the window");
  const double res = static_cast<double>(cfg.time_resolution);
  out.time_avg_aoi = static_cast<double>(total_area2) / (2.0 * static_cast<double>(total_span)) / res;

  double sum = 0.0, sum2 = 0.0;
  int used = 0;
  for (int b = 0; b < kBatches; ++b) {
    if (batch_span[b] == 0) continue;
    const double mean = static_cast<double>(batch_area2[b]) / (2.0 * static_cast<double>(batch_span[b])) / res;
    sum += mean;
    sum2 += mean * mean;
    ++used;
  }
  if (used > 1) {
    const double mean = sum / used;
    const double var = std::max(0.0, (sum2 - used * mean * mean) / (used - 1));
    out.std_error = std::sqrt(var / used);
  }
  return out;
}

SimResult simulate(const TimeSchedule& schedule, std::span<const Device> devices, const SystemParams& params,
                   const SimConfig& cfg) {
  const auto check = cluster::validate_schedule(schedule, params, devices);
  if (!check.ok) {
    raise(ErrorCode::InvalidSchedule, "schedule fails validation: " + check.violations.front().detail);
  }
  const auto outcomes = cluster::slot_outcomes(schedule, params, devices);
  std::vector<std::vector<SimAttempt>> per_device(devices.size());
  for (const auto& o : outcomes) {
    const auto& t = schedule.slots[o.slot];
    per_device[t.device].push_back(
        {t.start + t.length, static_cast<std::int64_t>(o.charge) + t.length, o.eps});
  }
  SimResult out;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    out.per_device.push_back(simulate_periodic(per_device[i], schedule.round_length,
                                               static_cast<std::uint64_t>(devices[i].id), cfg));
  }
  return out;
}

}  // namespace aoisched::sim
