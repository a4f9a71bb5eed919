#include "aoisched/aoimodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "aoisched/errors.hpp"
#include "aoisched/fblmath.hpp"

namespace aoisched::aoi {

double event_probability(double eps, int k) {
  if (!(eps >= 0.0 && eps < 1.0)) raise(ErrorCode::InvalidArgument, "eps must lie in [0, 1)");
  if (k < 1) raise(ErrorCode::InvalidArgument, "event index starts at 1");
  return std::pow(eps, k - 1) * (1.0 - eps);
}

double event_area(double round_length, int k) {
  if (!(round_length > 0.0)) raise(ErrorCode::InvalidDuration, "round length must be positive");
  if (k < 0) raise(ErrorCode::InvalidArgument, "event index must be non-negative");
  return (k + 0.5) * round_length * round_length;
}

double avg_aoi(double round_length, double eps) {
  if (!(round_length > 0.0)) raise(ErrorCode::InvalidDuration, "round length must be positive");
  if (!(eps >= 0.0)) raise(ErrorCode::InvalidArgument, "eps must be non-negative");
  if (eps >= 1.0 - fbl::kEpsFloor) {
    raise(ErrorCode::DivergentAoI, "error probability " + std::to_string(eps) + " makes the AoI diverge");
  }
  return round_length * (0.5 + 1.0 / (1.0 - eps));
}

double avg_aoi(const UpdateRound& round) {
  if (!(round.m_r > 0.0)) raise(ErrorCode::InvalidDuration, "update duration must be positive");
  if (round.m_c < 0.0) raise(ErrorCode::InvalidDuration, "charge duration must be non-negative");
  return avg_aoi(round.total(), round.eps);
}

double periodic_aoi(std::span<const Attempt> attempts, double period) {
  if (attempts.empty()) raise(ErrorCode::InvalidArgument, "at least one attempt is required");
  if (!(period > 0.0)) raise(ErrorCode::InvalidDuration, "period must be positive");

  std::vector<Attempt> sorted(attempts.begin(), attempts.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Attempt& a, const Attempt& b) { return a.reception < b.reception; });
  const std::size_t n = sorted.size();

  double all_fail = 1.0;
  for (const auto& a : sorted) {
    if (!(a.eps >= 0.0 && a.eps <= 1.0)) raise(ErrorCode::InvalidArgument, "eps must lie in [0, 1]");
    if (a.reception < 0.0 || a.reception >= period) {
      raise(ErrorCode::InvalidArgument, "reception instants must lie in [0, period)");
    }
    all_fail *= a.eps;
  }
  if (all_fail >= 1.0 - fbl::kEpsFloor) raise(ErrorCode::DivergentAoI, "every attempt always fails");

  // Between consecutive receptions the expected AoI is t - E[U] with U the
  // generation time of the freshest delivered sample; E[U] sums a geometric
  // series over whole periods.
  double area = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double weighted_gen = 0.0;
    double survive = 1.0;
    for (std::size_t back = 0; back < n; ++back) {
      const std::size_t idx = (j + n - back) % n;
      const double shift = idx > j ? period : 0.0;
      const double gen = sorted[idx].reception - sorted[idx].age_at_reception - shift;
      weighted_gen += survive * (1.0 - sorted[idx].eps) * gen;
      survive *= sorted[idx].eps;
    }
    const double expected_gen = weighted_gen / (1.0 - all_fail) - period * all_fail / (1.0 - all_fail);
    const double start = sorted[j].reception;
    const double end = j + 1 < n ? sorted[j + 1].reception : sorted[0].reception + period;
    area += (end - start) * (0.5 * (start + end) - expected_gen);
  }
  return area / period;
}

}  // namespace aoisched::aoi
