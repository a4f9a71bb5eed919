#include "aoisched/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aoisched/errors.hpp"
#include "aoisched/fblmath.hpp"

namespace aoisched::cluster {

std::size_t worst_device(std::span<const Device> devices) {
  if (devices.empty()) raise(ErrorCode::InvalidArgument, "device list is empty");
  std::vector<std::size_t> order(devices.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return devices[a].z < devices[b].z; });
  return order.front();
}

CapacityReport cluster_capacity(const SystemParams& params, std::span<const Device> devices,
                                const SolverOptions& options) {
  CapacityReport cap;
  cap.i_min = worst_device(devices);
  const auto single = opt::solve_single(params, devices[cap.i_min], options);
  cap.m_c_single = single.m_c;
  cap.m_r_single = single.m_r;
  cap.m_single = single.round_length();
  cap.c_cap = std::max(1, static_cast<int>(std::floor(cap.m_single / cap.m_r_single)));
  cap.saturated = devices.size() > static_cast<std::size_t>(cap.c_cap);
  return cap;
}

SolveReport algorithm1(const SystemParams& params, std::span<const Device> devices,
                       const SolverOptions& options) {
  const CapacityReport cap = cluster_capacity(params, devices, options);
  const std::size_t n = devices.size();
  const double round = cap.saturated ? static_cast<double>(n) * cap.m_r_single : cap.m_single;

  AllocationPolicy policy;
  policy.m_r.assign(n, cap.m_r_single);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == cap.i_min) continue;
    try {
      const auto split = opt::solve_fixed_round(params, devices[j], round);
      policy.m_r[j] = std::max(split.m_r, cap.m_r_single);
    } catch (const Error& e) {
      if (cap.saturated && e.code() == ErrorCode::Infeasible) {
        raise(ErrorCode::InfeasibleSaturated, "device " + std::to_string(devices[j].id) +
                                                  " cannot meet the thresholds within the saturated round");
      }
      throw;
    }
  }
  const double used = std::accumulate(policy.m_r.begin(), policy.m_r.end(), 0.0);
  policy.m_c = std::max(0.0, round - used);

  SolveReport report = opt::evaluate_policy(params, devices, policy);
  if (cap.saturated && report.status == opt::SolveStatus::Infeasible) {
    raise(ErrorCode::InfeasibleSaturated, "saturated round violates eps_max or gamma_th");
  }
  report.iterations = static_cast<int>(n);
  return report;
}

AllocationPolicy round_policy(const SystemParams& params, std::span<const Device> devices,
                              const AllocationPolicy& policy) {
  policy.validate();
  const std::size_t n = devices.size();
  if (policy.m_r.size() != n) raise(ErrorCode::InvalidArgument, "policy and device list differ in size");

  const double m = policy.round_length();
  const double first = std::ceil(m - 1e-9 * std::max(1.0, m));
  bool thresholds_failed = false;

  for (double m_int = first; m_int <= first + static_cast<double>(n) + 1.0; m_int += 1.0) {
    AllocationPolicy out;
    out.m_r.resize(n);
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      const double lo = std::max(1.0, std::floor(policy.m_r[i]));
      const double hi = std::max(1.0, std::ceil(policy.m_r[i]));
      double best = -1.0;
      double best_eps = 2.0;
      for (double r : {lo, hi}) {
        const double a = m_int - r;
        if (!(a > 0.0)) continue;
        const double gamma = devices[i].z * a / r;
        if (gamma < params.gamma_th) continue;
        const double eps = fbl::eps_of(devices[i].z, a, r, params.d_bits);
        if (eps > params.eps_max) continue;
        if (eps < best_eps) {
          best_eps = eps;
          best = r;
        }
      }
      if (best < 0.0) {
        ok = false;
        thresholds_failed = true;
      } else {
        out.m_r[i] = best;
      }
    }
    if (!ok) continue;
    const double used = std::accumulate(out.m_r.begin(), out.m_r.end(), 0.0);
    if (used > m_int) continue;
    out.m_c = m_int - used;
    return out;
  }
  if (thresholds_failed) {
    raise(ErrorCode::ConstraintBrokenByRounding, "no integer neighbour keeps every device within eps_max and gamma_th");
  }
  raise(ErrorCode::RoundingOverflow, "rounded update slots do not fit into the rounded round length");
}

}  // namespace aoisched::cluster
