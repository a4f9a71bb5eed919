#include "aoisched/linkmodel.hpp"

#include <cmath>
#include <string>

#include "aoisched/errors.hpp"

namespace aoisched::link {

double dbm_to_watts(double dbm) noexcept { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) noexcept { return 10.0 * std::log10(watts) + 30.0; }
double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) noexcept { return 10.0 * std::log10(linear); }

double SystemParams::p_c_watts() const noexcept { return dbm_to_watts(p_c_dbm); }
double SystemParams::h_i_linear() const noexcept { return db_to_linear(h_i_db); }

double SystemParams::noise_watts() const noexcept {
  const double base = dbm_to_watts(sigma2_dbm);
  return noise_mode == NoiseMode::PerHz ? base * bandwidth_hz : base;
}

void SystemParams::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    raise(ErrorCode::InvalidArgument, field + ": " + why);
  };
  if (!std::isfinite(p_c_dbm)) fail("p_c", "must be finite");
  if (!(mu > 0.0 && mu <= 1.0)) fail("mu", "must lie in (0, 1]");
  if (!std::isfinite(h_i_db)) fail("h_I", "must be finite");
  if (!std::isfinite(sigma2_dbm)) fail("sigma2", "must be finite");
  if (!(eta > 0.0) || !std::isfinite(eta)) fail("eta", "must be positive");
  if (!(bandwidth_hz > 0.0)) fail("bandwidth", "must be positive");
  if (!(carrier_hz > 0.0)) fail("carrier", "must be positive");
  if (d_bits < 1) fail("d_bits", "must be >= 1");
  if (!(eps_max > 0.0 && eps_max <= 0.5)) fail("eps_max", "must lie in (0, 0.5]");
  if (!(gamma_th >= 1.0) || !std::isfinite(gamma_th)) fail("gamma_th", "must be >= 1");
}

double Device::channel_gain(double eta) const noexcept {
  return fading * fading * std::pow(distance, -eta);
}

double time_wrapped_gain(const SystemParams& params, double channel_gain) {
  const double p_c = params.p_c_watts();
  return params.mu * p_c * channel_gain / (params.h_i_linear() * p_c + params.noise_watts());
}

Device make_device(const SystemParams& params, double distance, double fading, int id) {
  if (!(distance > 0.0) || !std::isfinite(distance)) {
    raise(ErrorCode::InvalidGeometry, "distance must be positive, got " + std::to_string(distance));
  }
  if (!(fading > 0.0) || !std::isfinite(fading)) {
    raise(ErrorCode::InvalidGeometry, "fading amplitude must be positive, got " + std::to_string(fading));
  }
  Device d;
  d.id = id;
  d.distance = distance;
  d.fading = fading;
  d.z = time_wrapped_gain(params, d.channel_gain(params.eta));
  return d;
}

double snr(const Device& device, double m_c, double m_r) {
  if (!(m_r > 0.0)) raise(ErrorCode::InvalidDuration, "update duration must be positive");
  if (m_c < 0.0) raise(ErrorCode::InvalidDuration, "charge duration must be non-negative");
  return device.z * m_c / m_r;
}

double harvested_energy(const Device& device, double m_c, const SystemParams& params,
                        const EnergyModel& model) {
  if (m_c < 0.0) raise(ErrorCode::InvalidDuration, "charge duration must be non-negative");
  const double incident = device.channel_gain(params.eta) * params.p_c_watts() * m_c * params.symbol_time();
  return model.harvest(incident);
}

double harvested_energy(const Device& device, double m_c, const SystemParams& params) {
  return harvested_energy(device, m_c, params, LinearEnergyModel(params.mu));
}

double draw_rayleigh_amplitude(std::mt19937_64& rng) {
  std::exponential_distribution<double> power(1.0);
  return std::sqrt(power(rng));
}

}  // namespace aoisched::link
