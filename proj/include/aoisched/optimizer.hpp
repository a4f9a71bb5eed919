#pragma once

// Solvers for the fairness (min-max AoI) allocation problem and its two
// single-device sub-problems.
//
// An allocation is order independent: one common charge phase m_c followed
// by one update slot per device. While device i transmits every other device
// keeps harvesting, so device i charges for M - m_r,i symbols per round.

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "aoisched/linkmodel.hpp"

namespace aoisched::opt {

using link::Device;
using link::SystemParams;

struct AllocationPolicy {
  double m_c = 0.0;
  std::vector<double> m_r;

  double round_length() const noexcept;
  /// Charge duration of device i: m_c plus every other device's slot.
  double charge_of(std::size_t i) const;
  /// Throws InvalidDuration on negative, non-finite or empty entries.
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, ConditionViolated };
std::string_view to_string(SolveStatus status) noexcept;

struct DeviceOutcome {
  double gamma = 0.0;
  double eps = 0.0;
  double avg_aoi = 0.0;
};

struct SolveReport {
  AllocationPolicy policy;
  double delta_max = 0.0;
  std::vector<DeviceOutcome> per_device;
  bool saturated = false;  // m_c below one symbol
  SolveStatus status = SolveStatus::Optimal;
  int iterations = 0;      // bisection steps / grid points, solver specific
};

struct SolverOptions {
  double bisection_rel_tol = 1e-6;
  double barrier_gap_tol = 1e-8;
  double max_round_length = 1e7;  // inflation cap for the initial point
  int max_newton_steps = 200;
};

/// Evaluate gamma, eps and AoI of every device under `policy`, flag
/// saturation and thresholds. Status is Optimal when every device meets
/// eps_max / gamma_th and sits in the convexity region, ConditionViolated
/// when only the convexity region is left, Infeasible otherwise.
SolveReport evaluate_policy(const SystemParams& params, std::span<const Device> devices,
                            const AllocationPolicy& policy);

/// Global minimiser of max_i AoI_i subject to eps_i <= eps_max and
/// gamma_i >= gamma_th. Outer bisection on the AoI level; each level is a
/// convex feasibility problem solved by a log-barrier Newton method. Among
/// optimal allocations the one with the smallest total update time is
/// returned. Throws Infeasible if no allocation meets the thresholds.
SolveReport solve_minmax(const SystemParams& params, std::span<const Device> devices,
                         const SolverOptions& options = {});

struct SingleSolution {
  double m_c = 0.0;
  double m_r = 0.0;
  double aoi = 0.0;

  double round_length() const noexcept { return m_c + m_r; }
};

/// Best split of a fixed round M between charging and updating: maximises
/// omega (hence minimises eps and the AoI) by golden-section search on m_r.
/// Throws Infeasible when even the best split misses eps_max or gamma_th.
SingleSolution solve_fixed_round(const SystemParams& params, const Device& device, double round_length);

/// Single-device optimum over (m_c, m_r). Nested search: the outer
/// golden-section runs over the round length, the inner one is
/// solve_fixed_round. Throws Infeasible.
SingleSolution solve_single(const SystemParams& params, const Device& device,
                            const SolverOptions& options = {});

/// Analytic (d eps/d m_c, d eps/d m_r) for this device.
std::array<double, 2> gradient_of_eps(const SystemParams& params, const Device& device, double m_c,
                                      double m_r);

}  // namespace aoisched::opt
