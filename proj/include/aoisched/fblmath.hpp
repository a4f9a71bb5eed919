#pragma once

// Finite-blocklength coding math for a single short-packet transmission over
// an AWGN channel: Gaussian tail, capacity, dispersion and the normal
// approximation of the packet error probability.
//
// Blocklengths are real-valued ("relaxed" symbol counts) everywhere in here;
// integer rounding happens in the cluster module.

#include <array>

namespace aoisched::fbl {

/// Lower clamp applied wherever an error probability feeds 1/(1 - eps).
inline constexpr double kEpsFloor = 1e-15;

struct FblPoint {
  double gamma = 0.0;  // linear SNR
  double m_r = 0.0;    // update blocklength [symbols]
  int d_bits = 0;      // packet size [bits]

  double rate() const noexcept { return static_cast<double>(d_bits) / m_r; }
};

/// Q(x) = P(N(0,1) > x), through erfc. Absolute error well below 1e-12.
double q_func(double x) noexcept;

/// Standard normal density; -dQ/dx.
double normal_pdf(double x) noexcept;

/// log2(1 + gamma) [bits/symbol].
double shannon_capacity(double gamma) noexcept;

/// AWGN channel dispersion 1 - (1 + gamma)^-2.
double dispersion(double gamma) noexcept;

/// Argument of the Q-function in the error-probability approximation:
/// sqrt(m_r / V) * (C - d / m_r) * ln 2. Throws DegenerateSnr for gamma <= 0.
double omega(const FblPoint& p);

/// Packet error probability Q(omega(p)). Not clamped: the identity
/// error_probability(p) == q_func(omega(p)) is exact. Use clamp_eps() before
/// dividing by 1 - eps.
double error_probability(const FblPoint& p);

/// Clamp to [kEpsFloor, 1 - kEpsFloor].
double clamp_eps(double eps) noexcept;

/// Rate threshold (16 - 18 ln(1+gamma)) / (87 - 12 ln 2) of the convexity
/// region; evaluates to ~0.0449 at gamma = 1.
double convexity_rate_bound(double gamma) noexcept;

/// True iff C*m_r + 3d >= 4/ln2 and d/m_r >= convexity_rate_bound(gamma),
/// i.e. eps is jointly convex in (charge, update) durations around p
/// (provided eps <= 0.5, which every feasible allocation satisfies).
bool convexity_condition(const FblPoint& p);

/// Partial derivatives of eps with respect to (m_c, m_r) when the SNR is
/// gamma = z * m_c / m_r. Closed form through omega.
std::array<double, 2> eps_gradient(double z, double m_c, double m_r, int d_bits);

/// 2x2 Hessian of eps w.r.t. (m_c, m_r), by central differences of the
/// analytic gradient with relative steps. Row-major {h_cc, h_cr, h_rc, h_rr}.
std::array<double, 4> eps_hessian(double z, double m_c, double m_r, int d_bits);

/// eps as a function of (z, m_c, m_r, d) directly.
double eps_of(double z, double m_c, double m_r, int d_bits);

/// omega as a function of (z, m_c, m_r, d) directly.
double omega_of(double z, double m_c, double m_r, int d_bits);

}  // namespace aoisched::fbl
