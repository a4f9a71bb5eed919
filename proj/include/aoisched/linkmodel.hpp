#pragma once

// Radio and energy bookkeeping for WPT-fed devices: unit conversions, path
// loss, the time-wrapped channel gain z and the SNR of an update.

#include <memory>
#include <random>

namespace aoisched::link {

double dbm_to_watts(double dbm) noexcept;
double watts_to_dbm(double watts) noexcept;
double db_to_linear(double db) noexcept;
double linear_to_db(double linear) noexcept;

enum class NoiseMode {
  Total,  // sigma2 is the total noise power
  PerHz,  // sigma2 is a density, integrated over the bandwidth
};

/// Radio and energy constants. Powers are stored in the units they are
/// usually quoted in (dBm / dB); the accessors return linear SI values.
struct SystemParams {
  double p_c_dbm = 30.0;        // server transmit power
  double mu = 0.5;              // EH efficiency, (0, 1]
  double h_i_db = -104.0;       // residual loop-interference power gain
  double sigma2_dbm = -174.0;   // noise power (or density, see noise_mode)
  NoiseMode noise_mode = NoiseMode::Total;
  double eta = 2.7;             // path-loss exponent
  double carrier_hz = 2.4e9;    // informational; the gain model is frequency-flat
  double bandwidth_hz = 10e6;
  int d_bits = 128;             // packet size
  double eps_max = 0.1;         // error threshold, (0, 0.5]
  double gamma_th = 1.0;        // SNR threshold, >= 1

  double p_c_watts() const noexcept;
  double h_i_linear() const noexcept;
  double noise_watts() const noexcept;
  double symbol_time() const noexcept { return 1.0 / bandwidth_hz; }

  /// Throws InvalidArgument naming the first offending field.
  void validate() const;
};

struct Device {
  int id = 0;
  double distance = 0.0;  // [m]
  double fading = 1.0;    // small-scale amplitude gain
  double z = 0.0;         // time-wrapped channel gain

  /// Large-scale plus small-scale power gain fading^2 * distance^-eta.
  double channel_gain(double eta) const noexcept;
};

/// Throws InvalidGeometry for distance <= 0 or fading <= 0.
Device make_device(const SystemParams& params, double distance, double fading = 1.0, int id = 0);

/// z = mu p_c g / (h_I p_c + sigma2) for power gain g.
double time_wrapped_gain(const SystemParams& params, double channel_gain);

/// gamma = z m_c / m_r.
double snr(const Device& device, double m_c, double m_r);

/// Harvesting curve. Only the linear model ships; anything continuous and
/// increasing in the incident energy can be plugged in.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;
  virtual double harvest(double incident_joules) const = 0;
};

class LinearEnergyModel final : public EnergyModel {
 public:
  explicit LinearEnergyModel(double efficiency) : efficiency_(efficiency) {}
  double harvest(double incident_joules) const override { return efficiency_ * incident_joules; }

 private:
  double efficiency_;
};

/// Energy collected over m_c symbols [J], linear model with efficiency mu.
double harvested_energy(const Device& device, double m_c, const SystemParams& params);
double harvested_energy(const Device& device, double m_c, const SystemParams& params,
                        const EnergyModel& model);

/// Rayleigh amplitude with unit mean-square (|h|^2 ~ Exp(1)).
double draw_rayleigh_amplitude(std::mt19937_64& rng);

}  // namespace aoisched::link
