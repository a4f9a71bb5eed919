#pragma once

// Analytic age of information for periodic, feedback-free updates with
// i.i.d. decoding failures.

#include <span>

namespace aoisched::aoi {

struct UpdateRound {
  double m_c = 0.0;  // charge duration [symbols]
  double m_r = 0.0;  // update duration [symbols]
  double eps = 0.0;  // per-round error probability

  double total() const noexcept { return m_c + m_r; }
};

/// Probability that the last success happened k rounds ago with the k - 1
/// rounds in between all failing: eps^(k-1) (1 - eps), k >= 1.
double event_probability(double eps, int k);

/// Accumulated age over one round of length M given that the last success
/// was k rounds back: (k + 1/2) M^2.
double event_area(double round_length, int k);

/// Expected time-average AoI M (1/2 + 1/(1 - eps)) [symbols].
/// Throws DivergentAoI when eps >= 1 - kEpsFloor.
double avg_aoi(const UpdateRound& round);
double avg_aoi(double round_length, double eps);

/// One transmission attempt inside a periodic schedule.
struct Attempt {
  double reception = 0.0;        // end of the transmission, in [0, period)
  double age_at_reception = 0.0; // time since the sample was generated
  double eps = 0.0;
};

/// Expected time-average AoI of a device that repeats the given attempts
/// every `period` symbols. With a single attempt whose age at reception is
/// the period this reduces to avg_aoi(period, eps).
double periodic_aoi(std::span<const Attempt> attempts, double period);

}  // namespace aoisched::aoi
