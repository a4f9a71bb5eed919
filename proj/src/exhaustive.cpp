#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <thread>

#include "aoisched/aoimodel.hpp"
#include "aoisched/errors.hpp"
#include "aoisched/fblmath.hpp"
#include "aoisched/simkernel.hpp"

namespace aoisched::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Max-AoI of an allocation, +inf if a device misses a threshold.
double max_aoi_or_inf(const SystemParams& params, std::span<const Device> devices, double m_c,
                      std::span<const double> m_r) {
  if (m_c < 0.0) return kInf;
  double m = m_c;
  for (double r : m_r) {
    if (!(r > 0.0)) return kInf;
    m += r;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const double a = m - m_r[i];
    if (devices[i].z * a < params.gamma_th * m_r[i]) return kInf;
    const double eps = fbl::eps_of(devices[i].z, a, m_r[i], params.d_bits);
    if (eps > params.eps_max) return kInf;
    worst = std::max(worst, aoi::avg_aoi(m, fbl::clamp_eps(eps)));
  }
  return worst;
}

struct Candidate {
  double value = kInf;
  std::array<std::uint64_t, 4> index{};  // m_c, m_r,1..3
};

}  // namespace

std::uint64_t GridSpec::axis_points(double lo, double hi, double step) const {
  if (!(step > 0.0) || hi < lo) raise(ErrorCode::InvalidArgument, "grid axis needs step > 0 and max >= min");
  return static_cast<std::uint64_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

std::uint64_t GridSpec::total_points(std::size_t devices) const {
  const double mc = static_cast<double>(axis_points(m_c_min, m_c_max, m_c_step));
  const double mr = static_cast<double>(axis_points(m_r_min, m_r_max, m_r_step));
  const double total = mc * std::pow(mr, static_cast<double>(devices));
  return total > 1.8e19 ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(total);
}

SolveReport exhaustive_search(const SystemParams& params, std::span<const Device> devices, const GridSpec& grid) {
  const std::size_t n = devices.size();
  if (n == 0) raise(ErrorCode::InvalidArgument, "device list is empty");
  if (n > 3) raise(ErrorCode::GridTooLarge, "exhaustive search supports at most 3 devices");
  if (grid.m_c_min < 0.0 || grid.m_r_min <= 0.0) {
    raise(ErrorCode::InvalidArgument, "grid needs m_c >= 0 and m_r > 0");
  }
  const std::uint64_t total = grid.total_points(n);
  if (total > grid.max_points) {
    raise(ErrorCode::GridTooLarge, "grid has " + std::to_string(total) + " points, limit " +
                                       std::to_string(grid.max_points));
  }
  const std::uint64_t n_c = grid.axis_points(grid.m_c_min, grid.m_c_max, grid.m_c_step);
  const std::uint64_t n_r = grid.axis_points(grid.m_r_min, grid.m_r_max, grid.m_r_step);
  const std::uint64_t inner = total / n_c;

  // Each worker scans a contiguous block of m_c values in lexicographic
  // order and keeps the first strict minimum.
  auto scan = [&](std::uint64_t c_begin, std::uint64_t c_end, Candidate& best) {
    std::array<double, 3> r{};
    for (std::uint64_t c = c_begin; c < c_end; ++c) {
      const double m_c = grid.m_c_min + static_cast<double>(c) * grid.m_c_step;
      for (std::uint64_t k = 0; k < inner; ++k) {
        std::array<std::uint64_t, 4> idx{c, 0, 0, 0};
        std::uint64_t rest = k;
        for (std::size_t i = n; i-- > 0;) {
          idx[1 + i] = rest % n_r;
          rest /= n_r;
          r[i] = grid.m_r_min + static_cast<double>(idx[1 + i]) * grid.m_r_step;
        }
        const double v = max_aoi_or_inf(params, devices, m_c, std::span<const double>(r.data(), n));
        if (v < best.value) best = {v, idx};
      }
    }
  };

  const int threads = std::clamp<int>(grid.threads, 1, static_cast<int>(std::min<std::uint64_t>(n_c, 64)));
  std::vector<Candidate> partial(static_cast<std::size_t>(threads));
  if (threads == 1) {
    scan(0, n_c, partial[0]);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      const std::uint64_t b = n_c * static_cast<std::uint64_t>(t) / static_cast<std::uint64_t>(threads);
      const std::uint64_t e = n_c * static_cast<std::uint64_t>(t + 1) / static_cast<std::uint64_t>(threads);
      pool.emplace_back(scan, b, e, std::ref(partial[static_cast<std::size_t>(t)]));
    }
    for (auto& th : pool) th.join();
  }
  Candidate best;
  for (const auto& p : partial) {
    if (p.value < best.value) best = p;
  }
  if (!std::isfinite(best.value)) raise(ErrorCode::Infeasible, "no grid point meets eps_max and gamma_th");

  opt::AllocationPolicy policy;
  policy.m_c = grid.m_c_min + static_cast<double>(best.index[0]) * grid.m_c_step;
  for (std::size_t i = 0; i < n; ++i) {
    policy.m_r.push_back(grid.m_r_min + static_cast<double>(best.index[1 + i]) * grid.m_r_step);
  }
  SolveReport report = opt::evaluate_policy(params, devices, policy);
  report.iterations = static_cast<int>(std::min<std::uint64_t>(total, std::numeric_limits<int>::max()));
  return report;
}

double cell_variation(const SystemParams& params, std::span<const Device> devices,
                      const opt::AllocationPolicy& policy, const GridSpec& grid) {
  const double base = max_aoi_or_inf(params, devices, policy.m_c, policy.m_r);
  double worst = 0.0;
  for (std::size_t k = 0; k <= policy.m_r.size(); ++k) {
    for (double dir : {-1.0, 1.0}) {
      opt::AllocationPolicy p = policy;
      if (k == 0) {
        p.m_c += dir * grid.m_c_step;
      } else {
        p.m_r[k - 1] += dir * grid.m_r_step;
      }
      const double v = max_aoi_or_inf(params, devices, p.m_c, p.m_r);
      if (std::isfinite(v)) worst = std::max(worst, std::abs(v - base));
    }
  }
  return worst;
}

namespace {

// Cyclic slot order patterns for two devices with at most two updates each,
// one representative per rotation class.
const std::vector<std::vector<std::size_t>>& two_device_patterns() {
  static const std::vector<std::vector<std::size_t>> p{
      {0, 1}, {0, 0, 1}, {1, 1, 0}, {0, 0, 1, 1}, {0, 1, 0, 1}};
  return p;
}

struct PatternSearch {
  const SystemParams& params;
  std::span<const Device> devices;
  std::int64_t units;  // round_max / step
  std::int64_t step;
  std::vector<std::size_t> pattern;
  std::vector<std::int64_t> parts;  // len_1, gap_1, len_2, gap_2, ...
  double best = kInf;
  std::vector<std::int64_t> best_parts;
  std::uint64_t visited = 0;

  void evaluate() {
    ++visited;
    const std::size_t s = pattern.size();
    std::vector<std::int64_t> start(s), len(s);
    std::int64_t t = 0;
    for (std::size_t j = 0; j < s; ++j) {
      start[j] = t * step;
      len[j] = parts[2 * j] * step;
      t += parts[2 * j] + parts[2 * j + 1];
    }
    const std::int64_t m = t * step;
    std::array<std::vector<aoi::Attempt>, 2> attempts;
    for (std::size_t j = 0; j < s; ++j) {
      // previous slot of the same device, cyclically
      std::size_t p = j;
      for (std::size_t back = 1; back <= s; ++back) {
        const std::size_t c = (j + s - back) % s;
        if (pattern[c] == pattern[j]) {
          p = c;
          break;
        }
      }
      std::int64_t charge = start[j] - (start[p] + len[p]);
      if (p == j) charge = m - len[j];
      if (charge < 0) charge += m;
      const auto& dev = devices[pattern[j]];
      const double a = static_cast<double>(charge);
      const double b = static_cast<double>(len[j]);
      if (dev.z * a < params.gamma_th * b || a <= 0.0) return;
      const double eps = fbl::eps_of(dev.z, a, b, params.d_bits);
      if (eps > params.eps_max) return;
      attempts[pattern[j]].push_back(
          {static_cast<double>((start[j] + len[j]) % m), a + b, eps});
    }
    const double v = std::max(aoi::periodic_aoi(attempts[0], static_cast<double>(m)),
                              aoi::periodic_aoi(attempts[1], static_cast<double>(m)));
    if (v < best) {
      best = v;
      best_parts = parts;
    }
  }

  void recurse(std::size_t k, std::int64_t used) {
    if (k == parts.size()) {
      evaluate();
      return;
    }
    const std::int64_t lo = k % 2 == 0 ? 1 : 0;  // slots at least one unit, gaps may vanish
    std::int64_t reserve = 0;
    for (std::size_t r = k + 1; r < parts.size(); ++r) reserve += r % 2 == 0 ? 1 : 0;
    for (std::int64_t v = lo; used + v + reserve <= units; ++v) {
      parts[k] = v;
      recurse(k + 1, used + v);
    }
  }

  TimeSchedule schedule() const {
    TimeSchedule out;
    std::int64_t t = 0;
    for (std::size_t j = 0; j < pattern.size(); ++j) {
      out.slots.push_back({pattern[j], t * step, best_parts[2 * j] * step});
      t += best_parts[2 * j] + best_parts[2 * j + 1];
    }
    out.round_length = t * step;
    return out;
  }
};

}  // namespace

MultiUpdateResult exhaustive_multi_update_search(const SystemParams& params, std::span<const Device> devices,
                                                 std::int64_t round_max, std::int64_t step) {
  if (devices.size() != 2) raise(ErrorCode::InvalidArgument, "multi-update search needs exactly two devices");
  if (step <= 0 || round_max < 2 * step) raise(ErrorCode::InvalidArgument, "need step > 0 and round_max >= 2 step");
  MultiUpdateResult out;
  out.best_single = kInf;
  out.best_multi = kInf;
  for (const auto& pattern : two_device_patterns()) {
    PatternSearch ps{params, devices, round_max / step, step, pattern, std::vector<std::int64_t>(2 * pattern.size())};
    ps.recurse(0, 0);
    out.schedules += ps.visited;
    if (!std::isfinite(ps.best)) continue;
    if (pattern.size() == 2) {
      out.best_single = ps.best;
      out.single_schedule = ps.schedule();
    } else if (ps.best < out.best_multi) {
      out.best_multi = ps.best;
      out.multi_schedule = ps.schedule();
    }
  }
  if (!std::isfinite(out.best_single)) raise(ErrorCode::Infeasible, "no single-update schedule meets the thresholds");
  return out;
}

}  // namespace aoisched::sim
