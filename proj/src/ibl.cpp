#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/tools/roots.hpp>

#include "aoisched/errors.hpp"
#include "aoisched/simkernel.hpp"
#include "search.hpp"

namespace aoisched::sim {

namespace {

constexpr int kMaxIterations = 1000;

// Bits that fit into b symbols at capacity minus the packet size.
double capacity_surplus(double z, double m, double b, int d_bits) {
  return b * std::log2(1.0 + z * (m - b) / b) - d_bits;
}

// Smallest update slot that carries the packet at capacity within a round of
// m symbols while keeping gamma >= gamma_th; NaN if none exists.
double capacity_slot(const SystemParams& params, double z, double m) {
  const double b_max = z * m / (z + params.gamma_th);
  auto neg = [&](double b) { return -capacity_surplus(z, m, b, params.d_bits); };
  auto [b_peak, f_peak] = aoisched::detail::golden_section_min(neg, m * 1e-12, b_max, 1e-12);
  (void)f_peak;
  const double top = std::min(b_peak, b_max);
  const double top_value = capacity_surplus(z, m, top, params.d_bits);
  if (top_value < 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (top_value == 0.0) return top;
  auto f = [&](double b) { return capacity_surplus(z, m, b, params.d_bits); };
  double lo = top * 1e-3;
  while (f(lo) >= 0.0) lo *= 1e-3;
  std::uintmax_t it = 200;
  const auto [r_lo, r_hi] = boost::math::tools::toms748_solve(f, lo, top, boost::math::tools::eps_tolerance<double>(52), it);
  // the upper end carries the packet
  (void)r_lo;
  return r_hi;
}

}  // namespace

SolveReport ibl_baseline(const SystemParams& params, std::span<const Device> devices) {
  if (devices.empty()) raise(ErrorCode::InvalidArgument, "device list is empty");
  std::vector<double> slots(devices.size());
  // A round length fits when every device has a capacity slot and the slots
  // sum to no more than the round.
  auto fits = [&](double m) {
    for (std::size_t i = 0; i < devices.size(); ++i) {
      slots[i] = capacity_slot(params, devices[i].z, m);
      if (std::isnan(slots[i])) return false;
    }
    return std::accumulate(slots.begin(), slots.end(), 0.0) <= m;
  };

  int iterations = 0;
  double hi = 1.0;
  while (!fits(hi)) {
    hi *= 2.0;
    if (++iterations > kMaxIterations || hi > 1e15) {
      raise(ErrorCode::NoFixedPoint, "no round length carries every packet at capacity");
    }
  }
  double lo = hi / 2.0;
  while (fits(lo)) {
    hi = lo;
    lo /= 2.0;
    if (++iterations > kMaxIterations || lo < 1e-12) raise(ErrorCode::NoFixedPoint, "round length collapses");
  }
  while (hi - lo > 1e-13 * hi) {
    const double mid = 0.5 * (lo + hi);
    (fits(mid) ? hi : lo) = mid;
    if (++iterations > kMaxIterations) raise(ErrorCode::NoFixedPoint, "round length did not converge");
  }
  fits(hi);

  opt::AllocationPolicy policy;
  policy.m_r = slots;
  policy.m_c = std::max(0.0, hi - std::accumulate(slots.begin(), slots.end(), 0.0));
  SolveReport report = opt::evaluate_policy(params, devices, policy);
  report.iterations = iterations;
  return report;
}

}  // namespace aoisched::sim
