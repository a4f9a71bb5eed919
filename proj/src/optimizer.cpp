#include "aoisched/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>

#include "aoisched/aoimodel.hpp"
#include "aoisched/errors.hpp"
#include "aoisched/fblmath.hpp"
#include "barrier.hpp"
#include "search.hpp"

namespace aoisched::opt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kThresholdRelTol = 1e-9;

double q_inverse(double p) { return std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p); }

double finite_aoi(double m, double eps) {
  if (!(eps < 1.0 - fbl::kEpsFloor)) return kInf;
  return aoi::avg_aoi(m, fbl::clamp_eps(eps));
}

struct BestSplit {
  double m_r = 0.0;
  double omega = -kInf;
};

// Largest omega over splits of round length m that respect gamma >= gamma_th.
BestSplit best_split(const SystemParams& params, double z, double m) {
  const double b_max = z * m / (z + params.gamma_th);
  if (!(b_max > 0.0)) return {};
  auto neg_omega = [&](double b) { return -fbl::omega_of(z, m - b, b, params.d_bits); };
  auto [b, f] = aoisched::detail::golden_section_min(neg_omega, b_max * 1e-9, b_max, 1e-8);
  BestSplit out{b, -f};
  const double edge = fbl::omega_of(z, m - b_max, b_max, params.d_bits);
  if (edge >= out.omega) out = {b_max, edge};
  return out;
}

void require_devices(std::span<const Device> devices) {
  if (devices.empty()) raise(ErrorCode::InvalidArgument, "device list is empty");
  for (const auto& d : devices) {
    if (!(d.z > 0.0) || !std::isfinite(d.z)) {
      raise(ErrorCode::DegenerateSnr, "device " + std::to_string(d.id) + " has non-positive gain z");
    }
  }
}

}  // namespace

double AllocationPolicy::round_length() const noexcept {
  double m = m_c;
  for (double r : m_r) m += r;
  return m;
}

double AllocationPolicy::charge_of(std::size_t i) const {
  if (i >= m_r.size()) raise(ErrorCode::InvalidArgument, "device index out of range");
  return round_length() - m_r[i];
}

void AllocationPolicy::validate() const {
  if (m_r.empty()) raise(ErrorCode::InvalidDuration, "policy has no update slots");
  if (!std::isfinite(m_c) || m_c < 0.0) raise(ErrorCode::InvalidDuration, "m_c must be finite and >= 0");
  for (std::size_t i = 0; i < m_r.size(); ++i) {
    if (!std::isfinite(m_r[i]) || m_r[i] <= 0.0) {
      raise(ErrorCode::InvalidDuration, "m_r[" + std::to_string(i) + "] must be finite and > 0");
    }
  }
}

std::string_view to_string(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::ConditionViolated: return "condition_violated";
  }
  return "unknown";
}

SolveReport evaluate_policy(const SystemParams& params, std::span<const Device> devices,
                            const AllocationPolicy& policy) {
  policy.validate();
  if (policy.m_r.size() != devices.size()) {
    raise(ErrorCode::InvalidArgument, "policy and device list differ in size");
  }
  SolveReport report;
  report.policy = policy;
  const double m = policy.round_length();
  bool thresholds = true;
  bool convex = true;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    DeviceOutcome out;
    const double a = policy.charge_of(i);
    const double b = policy.m_r[i];
    out.gamma = devices[i].z * a / b;
    out.eps = out.gamma > 0.0 ? fbl::eps_of(devices[i].z, a, b, params.d_bits) : 1.0;
    out.avg_aoi = finite_aoi(m, out.eps);
    if (out.eps > params.eps_max * (1.0 + kThresholdRelTol) ||
        out.gamma < params.gamma_th * (1.0 - kThresholdRelTol)) {
      thresholds = false;
    } else if (!fbl::convexity_condition(fbl::FblPoint{out.gamma, b, params.d_bits})) {
      convex = false;
    }
    report.delta_max = std::max(report.delta_max, out.avg_aoi);
    report.per_device.push_back(out);
  }
  report.saturated = policy.m_c < 1.0;
  report.status = !thresholds ? SolveStatus::Infeasible
                  : convex    ? SolveStatus::Optimal
                              : SolveStatus::ConditionViolated;
  return report;
}

SingleSolution solve_fixed_round(const SystemParams& params, const Device& device, double round_length) {
  if (!(round_length > 0.0) || !std::isfinite(round_length)) {
    raise(ErrorCode::InvalidDuration, "round length must be positive");
  }
  require_devices(std::span<const Device>(&device, 1));
  const BestSplit best = best_split(params, device.z, round_length);
  if (!(best.m_r > 0.0)) raise(ErrorCode::Infeasible, "no split of the round meets gamma_th");
  const double eps = fbl::q_func(best.omega);
  if (eps > params.eps_max) {
    raise(ErrorCode::Infeasible, "best split of a " + std::to_string(round_length) +
                                     "-symbol round misses eps_max (eps = " + std::to_string(eps) + ")");
  }
  return {round_length - best.m_r, best.m_r, finite_aoi(round_length, eps)};
}

SingleSolution solve_single(const SystemParams& params, const Device& device, const SolverOptions& options) {
  require_devices(std::span<const Device>(&device, 1));
  const double omega_th = q_inverse(params.eps_max);
  auto gap = [&](double m) { return best_split(params, device.z, m).omega - omega_th; };

  // Bracket the smallest feasible round length.
  double hi = 1.0;
  while (gap(hi) < 0.0) {
    hi *= 2.0;
    if (hi > options.max_round_length) {
      raise(ErrorCode::Infeasible, "no round length up to the cap meets eps_max and gamma_th");
    }
  }
  double lo = hi / 2.0;
  while (gap(lo) >= 0.0) {
    hi = lo;
    lo /= 2.0;
    if (lo < 1e-12) raise(ErrorCode::Infeasible, "degenerate feasible set");
  }
  std::uintmax_t max_iter = 200;
  auto [r_lo, r_hi] = boost::math::tools::toms748_solve(gap, lo, hi, boost::math::tools::eps_tolerance<double>(48),
                                                        max_iter);
  (void)r_lo;
  double m_min = r_hi;
  while (gap(m_min) < 0.0) m_min *= 1.0 + 1e-12;

  auto aoi_of = [&](double m) {
    const BestSplit s = best_split(params, device.z, m);
    return finite_aoi(m, fbl::q_func(s.omega));
  };
  const double m_top = std::max(m_min * (1.0 + 1e-9), aoi_of(m_min) / 1.5);
  auto [m_opt, aoi_opt] = aoisched::detail::golden_section_min(aoi_of, m_min, m_top, 1e-11);
  const double at_min = aoi_of(m_min);
  if (at_min < aoi_opt) {
    m_opt = m_min;
    aoi_opt = at_min;
  }
  const BestSplit s = best_split(params, device.z, m_opt);
  return {m_opt - s.m_r, s.m_r, aoi_opt};
}

std::array<double, 2> gradient_of_eps(const SystemParams& params, const Device& device, double m_c,
                                      double m_r) {
  return fbl::eps_gradient(device.z, m_c, m_r, params.d_bits);
}

SolveReport solve_minmax(const SystemParams& params, std::span<const Device> devices,
                         const SolverOptions& options) {
  require_devices(devices);
  params.validate();
  const int n = static_cast<int>(devices.size());

  // Initial point: equal update slots, worst device at twice the SNR
  // threshold, then inflated until every device meets eps_max.
  double z_min = kInf;
  for (const auto& d : devices) z_min = std::min(z_min, d.z);
  const double b0 = params.d_bits / std::log2(1.0 + 2.0 * params.gamma_th);
  double mc0 = b0 * (2.0 * params.gamma_th / z_min - (n - 1));
  if (mc0 <= 0.0) mc0 = 0.1 * b0;

  Eigen::VectorXd x(n + 1);
  x[0] = mc0;
  x.tail(n).setConstant(b0);
  const double scale = x.sum();
  x /= scale;

  detail::LevelContext ctx{params, devices, scale};
  double inflate = 1.0;
  while (!detail::strictly_inside(ctx, x * inflate)) {
    inflate *= 1.25;
    if (scale * inflate > options.max_round_length) {
      raise(ErrorCode::Infeasible, "no allocation up to the round-length cap meets eps_max and gamma_th");
    }
  }
  x *= inflate;

  double hi = detail::max_aoi(ctx, x);
  Eigen::VectorXd best = x;
  int iterations = 0;

  double lo = hi / 2.0;
  while (true) {
    ++iterations;
    auto r = detail::find_feasible(ctx, lo, best, options);
    if (!r.feasible) break;
    best = r.x;
    hi = detail::max_aoi(ctx, best);
    lo = hi / 2.0;
  }
  while (hi / lo - 1.0 > options.bisection_rel_tol) {
    ++iterations;
    const double mid = std::sqrt(lo * hi);
    auto r = detail::find_feasible(ctx, mid, best, options);
    if (r.feasible) {
      best = r.x;
      hi = std::min(mid, detail::max_aoi(ctx, best));
    } else {
      lo = mid;
    }
  }

  // Among (near-)optimal allocations keep the one with the least update time.
  best = detail::minimise_update_time(ctx, hi * (1.0 + 0.5 * options.bisection_rel_tol), best, options);

  AllocationPolicy policy;
  policy.m_c = best[0] * scale;
  for (int i = 0; i < n; ++i) policy.m_r.push_back(best[1 + i] * scale);
  SolveReport report = evaluate_policy(params, devices, policy);
  report.iterations = iterations;
  return report;
}

}  // namespace aoisched::opt
