#include <algorithm>
#include <cmath>
#include <numeric>

#include "aoisched/aoimodel.hpp"
#include "aoisched/cluster.hpp"
#include "aoisched/errors.hpp"
#include "aoisched/fblmath.hpp"

namespace aoisched::cluster {

namespace {

std::int64_t mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

bool slot_ok(const Transmission& t, std::int64_t m) {
  return t.length > 0 && t.length <= m && t.start >= 0 && t.start < m;
}

// Slot indices of every device, ordered by start.
std::vector<std::vector<std::size_t>> slots_by_device(const TimeSchedule& s, std::size_t n) {
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t k = 0; k < s.slots.size(); ++k) {
    if (s.slots[k].device < n) out[s.slots[k].device].push_back(k);
  }
  for (auto& v : out) {
    std::sort(v.begin(), v.end(), [&](std::size_t a, std::size_t b) {
      return s.slots[a].start < s.slots[b].start || (s.slots[a].start == s.slots[b].start && a < b);
    });
  }
  return out;
}

}  // namespace

std::vector<std::int64_t> TimeSchedule::starts(std::size_t device_count) const {
  std::vector<std::int64_t> out(device_count, -1);
  for (const auto& t : slots) {
    if (t.device < device_count && out[t.device] < 0) out[t.device] = t.start;
  }
  return out;
}

TimeSchedule TimeSchedule::shifted(std::int64_t shift) const {
  TimeSchedule out = *this;
  for (auto& t : out.slots) t.start = mod(t.start + shift, round_length);
  return out;
}

TimeSchedule reconstruct_schedule(const AllocationPolicy& policy) {
  policy.validate();
  TimeSchedule s;
  std::int64_t used = 0;
  std::vector<std::int64_t> lengths;
  for (double r : policy.m_r) {
    lengths.push_back(std::max<std::int64_t>(1, std::llround(r)));
    used += lengths.back();
  }
  const double m = policy.round_length();
  s.round_length = static_cast<std::int64_t>(std::ceil(m - 1e-9 * std::max(1.0, m)));
  const std::int64_t charge = std::max<std::int64_t>(0, std::llround(policy.m_c));
  s.round_length = std::max(s.round_length, charge + used);
  if (charge + used > s.round_length || used > s.round_length) {
    raise(ErrorCode::RoundingOverflow, "rounded slots exceed the round length");
  }
  std::int64_t t = s.round_length - used;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    s.slots.push_back({i, t, lengths[i]});
    t += lengths[i];
  }
  return s;
}

std::vector<SlotOutcome> slot_outcomes(const TimeSchedule& schedule, const SystemParams& params,
                                       std::span<const Device> devices) {
  const std::int64_t m = schedule.round_length;
  if (m <= 0) raise(ErrorCode::InvalidSchedule, "round length must be positive");
  for (const auto& t : schedule.slots) {
    if (t.device >= devices.size()) raise(ErrorCode::InvalidSchedule, "slot refers to an unknown device");
    if (!slot_ok(t, m)) raise(ErrorCode::InvalidSchedule, "slot outside the round or of non-positive length");
  }
  const auto by_device = slots_by_device(schedule, devices.size());
  std::vector<SlotOutcome> out(schedule.slots.size());
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const auto& mine = by_device[i];
    if (mine.empty()) raise(ErrorCode::InvalidSchedule, "device " + std::to_string(i) + " has no slot");
    for (std::size_t j = 0; j < mine.size(); ++j) {
      const auto& cur = schedule.slots[mine[j]];
      const auto& prev = schedule.slots[mine[(j + mine.size() - 1) % mine.size()]];
      std::int64_t charge = mod(cur.start - (prev.start + prev.length), m);
      if (mine.size() == 1) charge = m - cur.length;
      SlotOutcome o;
      o.slot = mine[j];
      o.charge = static_cast<double>(charge);
      o.gamma = devices[i].z * o.charge / static_cast<double>(cur.length);
      o.eps = o.gamma > 0.0 ? fbl::eps_of(devices[i].z, o.charge, static_cast<double>(cur.length), params.d_bits)
                            : 1.0;
      out[mine[j]] = o;
    }
  }
  return out;
}

ValidationReport validate_schedule(const TimeSchedule& schedule, const SystemParams& params,
                                   std::span<const Device> devices) {
  ValidationReport rep;
  auto add = [&](ViolationKind kind, std::vector<std::size_t> who, std::string detail) {
    rep.violations.push_back({kind, std::move(who), std::move(detail)});
  };
  const std::int64_t m = schedule.round_length;
  const std::size_t n = devices.size();
  if (m <= 0) {
    add(ViolationKind::BadSlot, {}, "round length must be positive");
    rep.ok = false;
    return rep;
  }

  std::vector<bool> usable(schedule.slots.size(), true);
  for (std::size_t k = 0; k < schedule.slots.size(); ++k) {
    const auto& t = schedule.slots[k];
    if (t.device >= n) {
      add(ViolationKind::UnknownDevice, {t.device}, "slot " + std::to_string(k) + " names an unknown device");
      usable[k] = false;
    } else if (!slot_ok(t, m)) {
      add(ViolationKind::BadSlot, {t.device}, "slot " + std::to_string(k) + " is malformed");
      usable[k] = false;
    }
  }

  for (std::size_t a = 0; a < schedule.slots.size(); ++a) {
    for (std::size_t b = a + 1; b < schedule.slots.size(); ++b) {
      if (!usable[a] || !usable[b]) continue;
      const auto& ta = schedule.slots[a];
      const auto& tb = schedule.slots[b];
      const bool overlap = mod(tb.start - ta.start, m) < ta.length || mod(ta.start - tb.start, m) < tb.length;
      if (overlap) {
        add(ViolationKind::Collision, {ta.device, tb.device},
            "slots " + std::to_string(a) + " and " + std::to_string(b) + " overlap");
      }
    }
  }

  std::vector<int> count(n, 0);
  for (std::size_t k = 0; k < schedule.slots.size(); ++k) {
    if (usable[k]) ++count[schedule.slots[k].device];
  }
  bool structural = !rep.violations.empty();
  for (std::size_t i = 0; i < n; ++i) {
    if (count[i] == 0) {
      add(ViolationKind::MissingUpdate, {i}, "device " + std::to_string(i) + " never updates");
      structural = true;
    } else if (count[i] > 1) {
      add(ViolationKind::DuplicateUpdate, {i},
          "device " + std::to_string(i) + " updates " + std::to_string(count[i]) + " times per round");
    }
  }

  if (!structural) {
    for (const auto& o : slot_outcomes(schedule, params, devices)) {
      const std::size_t dev = schedule.slots[o.slot].device;
      if (o.eps > params.eps_max) {
        add(ViolationKind::ErrorThreshold, {dev},
            "device " + std::to_string(dev) + " eps " + std::to_string(o.eps) + " above eps_max");
      }
      if (o.gamma < params.gamma_th) {
        add(ViolationKind::SnrThreshold, {dev},
            "device " + std::to_string(dev) + " gamma " + std::to_string(o.gamma) + " below gamma_th");
      }
    }
  }
  rep.ok = rep.violations.empty();
  return rep;
}

std::vector<double> schedule_aoi(const TimeSchedule& schedule, const SystemParams& params,
                                 std::span<const Device> devices) {
  const auto outcomes = slot_outcomes(schedule, params, devices);
  const double m = static_cast<double>(schedule.round_length);
  std::vector<std::vector<aoi::Attempt>> attempts(devices.size());
  for (const auto& o : outcomes) {
    const auto& t = schedule.slots[o.slot];
    aoi::Attempt a;
    a.reception = static_cast<double>(mod(t.start + t.length, schedule.round_length));
    a.age_at_reception = o.charge + static_cast<double>(t.length);
    a.eps = o.eps;
    attempts[t.device].push_back(a);
  }
  std::vector<double> out;
  for (const auto& a : attempts) out.push_back(aoi::periodic_aoi(a, m));
  return out;
}

}  // namespace aoisched::cluster
