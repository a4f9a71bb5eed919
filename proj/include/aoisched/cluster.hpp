#pragma once

// Cluster capacity, the low-complexity scheduler, integer rounding and
// time-indexed schedules.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aoisched/optimizer.hpp"

namespace aoisched::cluster {

using link::Device;
using link::SystemParams;
using opt::AllocationPolicy;
using opt::SolveReport;
using opt::SolverOptions;

struct CapacityReport {
  std::size_t i_min = 0;     // worst-gain device (lowest index on ties)
  double m_c_single = 0.0;   // single-device optimum of the worst device
  double m_r_single = 0.0;
  double m_single = 0.0;     // m_c_single + m_r_single
  int c_cap = 0;             // floor(m_single / m_r_single)
  bool saturated = false;    // more devices than c_cap
};

/// Index of the device with the smallest z; ties go to the lowest index.
std::size_t worst_device(std::span<const Device> devices);

/// Sort by gain, solve the single-device problem for the worst device and
/// derive the capacity. Propagates Infeasible.
CapacityReport cluster_capacity(const SystemParams& params, std::span<const Device> devices,
                                const SolverOptions& options = {});

/// Low-complexity scheduler. Unsaturated clusters keep the worst device's
/// single optimum round; saturated ones use I * m_r of the worst device.
/// Every other device splits that round optimally on its own and never
/// updates for less than the worst device does. Throws InfeasibleSaturated
/// when the saturated round cannot serve every device.
SolveReport algorithm1(const SystemParams& params, std::span<const Device> devices,
                       const SolverOptions& options = {});

/// Integer policy: every m_r goes to the floor/ceil neighbour with the
/// smaller error probability, the round becomes the smallest integer at or
/// above ceil(M) that fits all slots, m_c takes the rest. Throws
/// RoundingOverflow or ConstraintBrokenByRounding.
AllocationPolicy round_policy(const SystemParams& params, std::span<const Device> devices,
                              const AllocationPolicy& policy);

struct Transmission {
  std::size_t device = 0;
  std::int64_t start = 0;   // offset inside the round, [0, M)
  std::int64_t length = 0;  // update duration, > 0
};

/// One round of a periodic schedule, repeated forever. A transmission may
/// wrap past the round end into the next round.
struct TimeSchedule {
  std::int64_t round_length = 0;
  std::vector<Transmission> slots;

  /// Start offset of each device's first slot; -1 when it has none.
  std::vector<std::int64_t> starts(std::size_t device_count) const;
  /// Copy with every start moved by `shift` symbols (mod M).
  TimeSchedule shifted(std::int64_t shift) const;
};

/// Charge phase first, then devices in index order. Non-integer entries are
/// rounded to the nearest integer (update slots at least one symbol) and
/// the round is padded up to ceil(M); throws RoundingOverflow if the slots
/// no longer fit. Use round_policy first for threshold-aware rounding.
TimeSchedule reconstruct_schedule(const AllocationPolicy& policy);

enum class ViolationKind {
  UnknownDevice,
  BadSlot,          // non-positive length, start outside [0, M) or longer than M
  Collision,
  MissingUpdate,
  DuplicateUpdate,  // more than one update per round
  ErrorThreshold,
  SnrThreshold,
};

struct Violation {
  ViolationKind kind;
  std::vector<std::size_t> devices;
  std::string detail;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
};

/// Report-style check of collisions, one update per device and round, and
/// the eps/gamma thresholds implied by each slot (a device charges from the
/// end of its previous slot to the start of the next one).
ValidationReport validate_schedule(const TimeSchedule& schedule, const SystemParams& params,
                                   std::span<const Device> devices);

struct SlotOutcome {
  std::size_t slot = 0;  // index into schedule.slots
  double charge = 0.0;
  double gamma = 0.0;
  double eps = 0.0;
};

/// Per-slot charge, SNR and error probability implied by the schedule.
/// Throws InvalidSchedule when a device has no slot or a slot is malformed.
std::vector<SlotOutcome> slot_outcomes(const TimeSchedule& schedule, const SystemParams& params,
                                       std::span<const Device> devices);

/// Expected time-average AoI of each device under a periodic schedule. The
/// sample sent in a slot is generated when the device starts charging for
/// it. Works for schedules with several slots per device.
std::vector<double> schedule_aoi(const TimeSchedule& schedule, const SystemParams& params,
                                 std::span<const Device> devices);

}  // namespace aoisched::cluster
