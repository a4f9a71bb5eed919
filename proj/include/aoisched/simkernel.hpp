#pragma once

// Monte Carlo AoI simulation and the two reference schedulers (integer grid
// search, infinite-blocklength design).

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "aoisched/cluster.hpp"

namespace aoisched::sim {

using cluster::TimeSchedule;
using link::Device;
using link::SystemParams;
using opt::SolveReport;

struct SimConfig {
  std::int64_t rounds = 1'000'000;
  std::uint64_t seed = 42;
  std::int64_t time_resolution = 1;  // symbols per reported time unit
  std::int64_t warmup = 10;          // rounds discarded before averaging

  void validate() const;
};

struct DeviceSimResult {
  double time_avg_aoi = 0.0;  // in time_resolution units
  double success_rate = 0.0;
  double std_error = 0.0;     // batch-means standard error of time_avg_aoi
  std::int64_t attempts = 0;
};

struct SimResult {
  std::vector<DeviceSimResult> per_device;
};

/// One periodic transmission of a device, in integer symbols.
struct SimAttempt {
  std::int64_t end = 0;  // reception instant relative to the round start, may exceed the period
  std::int64_t age = 0;  // sample age at reception
  double eps = 0.0;
};

/// Replay `cfg.rounds` periods of one device. Failures are drawn from the
/// counter-based stream (seed, stream) indexed by the device's own attempt
/// number, so shifting the schedule in time replays the same failures. The
/// AoI sawtooth is integrated exactly between receptions; the average runs
/// from the first reception after the warm-up to the last reception.
DeviceSimResult simulate_periodic(std::span<const SimAttempt> attempts, std::int64_t period,
                                  std::uint64_t stream, const SimConfig& cfg);

/// Simulate every device of a validated schedule; a device's stream is its
/// id. Throws InvalidSchedule if validate_schedule fails.
SimResult simulate(const TimeSchedule& schedule, std::span<const Device> devices, const SystemParams& params,
                   const SimConfig& cfg);

struct GridSpec {
  double m_c_min = 0.0, m_c_max = 100.0, m_c_step = 1.0;
  double m_r_min = 1.0, m_r_max = 100.0, m_r_step = 1.0;
  std::uint64_t max_points = 10'000'000;
  int threads = 1;

  std::uint64_t axis_points(double lo, double hi, double step) const;
  std::uint64_t total_points(std::size_t devices) const;
};

/// Enumerate (m_c, m_r,1..I) on the grid and return the feasible point with
/// the smallest max-AoI (lexicographically smallest on ties). I <= 3. Throws
/// GridTooLarge or Infeasible.
SolveReport exhaustive_search(const SystemParams& params, std::span<const Device> devices, const GridSpec& grid);

/// Largest |max-AoI change| when one coordinate of `policy` moves by one
/// grid step (infeasible neighbours skipped).
double cell_variation(const SystemParams& params, std::span<const Device> devices,
                      const opt::AllocationPolicy& policy, const GridSpec& grid);

struct MultiUpdateResult {
  double best_single = 0.0;  // best max-AoI with one update per device
  double best_multi = 0.0;   // best max-AoI when a device may update twice
  TimeSchedule single_schedule;
  TimeSchedule multi_schedule;
  std::uint64_t schedules = 0;
};

/// Two-device integer schedule search over a round of `round_max` symbols
/// at most, in steps of `step`. Every schedule is a cyclic sequence of
/// slots; device 0 may also send a second update per round.
MultiUpdateResult exhaustive_multi_update_search(const SystemParams& params, std::span<const Device> devices,
                                                 std::int64_t round_max, std::int64_t step);

/// Shortest round in which every device can send at capacity
/// (log2(1 + gamma) = d / m_r) with gamma >= gamma_th, then evaluated with
/// the finite-blocklength error model (eps = 0.5 by construction). Throws
/// NoFixedPoint when the coupled round length does not converge.
SolveReport ibl_baseline(const SystemParams& params, std::span<const Device> devices);

}  // namespace aoisched::sim
