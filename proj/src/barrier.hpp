#pragma once

// Log-barrier machinery for the min-max allocation problem at a fixed AoI
// level. Internal to the optimizer.
//
// Variables are scaled: x = (m_c, m_r,1 .. m_r,I) / scale. For a level L the
// AoI constraint of device i is written as M / L - q(eps_i) <= 0 with
// q(eps) = 2 (1 - eps) / (3 - eps), which is convex wherever eps is.

#include <span>

#include <Eigen/Dense>

#include "aoisched/optimizer.hpp"

namespace aoisched::opt::detail {

struct LevelContext {
  const SystemParams& params;
  std::span<const Device> devices;
  double scale = 1.0;
};

struct FeasibilityResult {
  bool feasible = false;
  Eigen::VectorXd x;  // scaled, strictly feasible when `feasible`
  int newton_steps = 0;
};

/// Phase-I barrier: minimise s subject to M/L - q(eps_i) <= s plus the hard
/// constraints. Stops as soon as s < 0 (feasible) or the duality bound
/// proves s* > 0. `x0` must satisfy the hard constraints strictly.
FeasibilityResult find_feasible(const LevelContext& ctx, double level, const Eigen::VectorXd& x0,
                                const SolverOptions& options);

/// Minimise the total update time sum_i m_r,i over allocations meeting the
/// level L; `x0` must be strictly feasible.
Eigen::VectorXd minimise_update_time(const LevelContext& ctx, double level, const Eigen::VectorXd& x0,
                                     const SolverOptions& options);

/// Largest AoI across devices at scaled point x.
double max_aoi(const LevelContext& ctx, const Eigen::VectorXd& x);

/// True iff every hard constraint (positivity, gamma_th, eps_max) holds
/// strictly at scaled point x.
bool strictly_inside(const LevelContext& ctx, const Eigen::VectorXd& x);

}  // namespace aoisched::opt::detail
