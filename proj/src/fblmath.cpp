#include "aoisched/fblmath.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "aoisched/errors.hpp"

namespace aoisched::fbl {

namespace {

constexpr double kLn2 = std::numbers::ln2;

void check_point(double gamma, double m_r, int d_bits) {
  if (!(m_r > 0.0) || !std::isfinite(m_r)) {
    raise(ErrorCode::InvalidDuration, "update blocklength must be positive, got " + std::to_string(m_r));
  }
  if (d_bits < 1) raise(ErrorCode::InvalidArgument, "packet size must be >= 1 bit");
  if (!(gamma > 0.0)) {
    raise(ErrorCode::DegenerateSnr, "SNR must be positive (dispersion vanishes), got " + std::to_string(gamma));
  }
}

double dispersion_derivative(double gamma) noexcept {
  const double inv = 1.0 / (1.0 + gamma);
  return 2.0 * inv * inv * inv;
}

}  // namespace

double q_func(double x) noexcept { return 0.5 * std::erfc(x * std::numbers::sqrt2 * 0.5); }

double normal_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::sqrt2 * std::numbers::inv_sqrtpi);
}

double shannon_capacity(double gamma) noexcept { return std::log1p(gamma) / kLn2; }

double dispersion(double gamma) noexcept {
  // gamma (2 + gamma) / (1 + gamma)^2 avoids cancellation for small gamma;
  // the other form avoids overflow for huge gamma.
  if (gamma <= 1.0) {
    const double g1 = 1.0 + gamma;
    return gamma * (2.0 + gamma) / (g1 * g1);
  }
  const double inv = 1.0 / (1.0 + gamma);
  return 1.0 - inv * inv;
}

double omega(const FblPoint& p) {
  check_point(p.gamma, p.m_r, p.d_bits);
  const double numer = p.m_r * std::log1p(p.gamma) - p.d_bits * kLn2;
  return numer / std::sqrt(p.m_r * dispersion(p.gamma));
}

double error_probability(const FblPoint& p) { return q_func(omega(p)); }

double clamp_eps(double eps) noexcept { return std::clamp(eps, kEpsFloor, 1.0 - kEpsFloor); }

double convexity_rate_bound(double gamma) noexcept {
  return (16.0 - 18.0 * std::log1p(gamma)) / (87.0 - 12.0 * kLn2);
}

bool convexity_condition(const FblPoint& p) {
  check_point(p.gamma, p.m_r, p.d_bits);
  const bool blocklength_ok = shannon_capacity(p.gamma) * p.m_r + 3.0 * p.d_bits >= 4.0 / kLn2;
  const bool rate_ok = p.rate() >= convexity_rate_bound(p.gamma);
  return blocklength_ok && rate_ok;
}

double omega_of(double z, double m_c, double m_r, int d_bits) {
  if (!(m_r > 0.0)) raise(ErrorCode::InvalidDuration, "update blocklength must be positive");
  return omega(FblPoint{z * m_c / m_r, m_r, d_bits});
}

double eps_of(double z, double m_c, double m_r, int d_bits) {
  return q_func(omega_of(z, m_c, m_r, d_bits));
}

std::array<double, 2> eps_gradient(double z, double m_c, double m_r, int d_bits) {
  if (!(m_r > 0.0)) raise(ErrorCode::InvalidDuration, "update blocklength must be positive");
  const double gamma = z * m_c / m_r;
  check_point(gamma, m_r, d_bits);

  const double b = m_r;
  const double g_a = z / b;
  const double g_b = -gamma / b;
  const double log_term = std::log1p(gamma);
  const double v = dispersion(gamma);
  const double v_g = dispersion_derivative(gamma);

  const double numer = b * log_term - d_bits * kLn2;
  const double s = std::sqrt(b * v);
  const double n_a = b * g_a / (1.0 + gamma);
  const double n_b = log_term + b * g_b / (1.0 + gamma);
  const double s_a = b * v_g * g_a / (2.0 * s);
  const double s_b = (v + b * v_g * g_b) / (2.0 * s);

  const double w = numer / s;
  const double w_a = (n_a - w * s_a) / s;
  const double w_b = (n_b - w * s_b) / s;
  const double dens = normal_pdf(w);
  return {-dens * w_a, -dens * w_b};
}

std::array<double, 4> eps_hessian(double z, double m_c, double m_r, int d_bits) {
  const double h_c = 1e-5 * m_c;
  const double h_r = 1e-5 * m_r;
  const auto gcp = eps_gradient(z, m_c + h_c, m_r, d_bits);
  const auto gcm = eps_gradient(z, m_c - h_c, m_r, d_bits);
  const auto grp = eps_gradient(z, m_c, m_r + h_r, d_bits);
  const auto grm = eps_gradient(z, m_c, m_r - h_r, d_bits);
  const double h_cc = (gcp[0] - gcm[0]) / (2.0 * h_c);
  const double h_rr = (grp[1] - grm[1]) / (2.0 * h_r);
  const double h_cr = 0.5 * ((gcp[1] - gcm[1]) / (2.0 * h_c) + (grp[0] - grm[0]) / (2.0 * h_r));
  return {h_cc, h_cr, h_cr, h_rr};
}

}  // namespace aoisched::fbl
