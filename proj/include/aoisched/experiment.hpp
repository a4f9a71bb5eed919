#pragma once

// Batch experiments: spec parsing, scenario presets, sweep execution and
// CSV / JSON output.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aoisched/simkernel.hpp"

namespace aoisched::exp {

enum class Scenario {
  SingleDeviceSurface,  // AoI over a (m_c, m_r) grid for one device
  MuSweep,
  PacketSweep,
  DeviceCountSweep,     // homogeneous cluster, growing device count
  AddedDeviceSweep,     // fixed cluster plus one device at a swept distance
  Custom,
};

enum class Method { Convex, Algorithm1, Exhaustive, Ibl, Simulate };

std::string_view to_string(Scenario s) noexcept;
std::string_view to_string(Method m) noexcept;
Scenario scenario_from_string(std::string_view name);
Method method_from_string(std::string_view name);

enum class Fading { None, Rayleigh };

struct DeviceSpec {
  std::vector<double> distances;  // explicit placement; wins over the generator
  int count = 30;
  double distance_min = 0.8;
  double distance_max = 1.6;
  std::optional<std::uint64_t> seed;  // defaults to the experiment seed
  Fading fading = Fading::None;
};

struct SweepSpec {
  std::string variable;  // a params key, or devices / distance / added_distance
                         // (added_distance appends one device to the cluster)
  std::vector<double> values;
};

struct SurfaceSpec {
  // Empty ranges are derived from the single-device optimum.
  std::vector<double> m_c;  // {min, max, step}
  std::vector<double> m_r;
};

enum class OutputFormat { Csv, Json };

struct ExperimentSpec {
  Scenario scenario = Scenario::Custom;
  std::uint64_t seed = 42;
  link::SystemParams params;
  std::optional<SweepSpec> sweep;
  DeviceSpec devices;
  std::vector<Method> methods{Method::Convex};
  sim::GridSpec grid;
  sim::SimConfig simulation;
  SurfaceSpec surface;
  std::string output_path;  // empty: stdout
  OutputFormat format = OutputFormat::Csv;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Preset for a scenario, before any overrides from a spec file.
ExperimentSpec preset(Scenario scenario);

/// Parse a JSON experiment spec (comments allowed). Missing keys keep the
/// preset of the chosen scenario; unknown keys are rejected. Errors are
/// ConfigError with `origin:line:column` or the JSON pointer of the field.
ExperimentSpec parse_spec_text(std::string_view text, std::string_view origin = "<spec>");
ExperimentSpec parse_spec_file(const std::string& path);

/// Parse "20 dBm", "1.6 m", "10 MHz", "-104 dB" or a bare number into the
/// unit used by SystemParams for `kind` (dBm, dB, Hz, m, bits or none).
double parse_quantity(std::string_view text, std::string_view kind);

struct Row {
  std::size_t point = 0;
  std::string sweep_variable;
  double sweep_value = 0.0;
  std::string method;
  std::string status;  // "ok" or the error code
  std::size_t devices = 0;
  double delta_max = 0.0;
  double round_length = 0.0;
  double m_c = 0.0;
  std::vector<double> m_r;
  std::vector<double> eps;
  std::vector<double> gamma;
  std::vector<double> aoi;
  double std_error = 0.0;  // simulated rows only
  int c_cap = 0;
  bool saturated = false;
  double wall_ms = 0.0;
  std::string detail;
};

struct RunOptions {
  int threads = 0;      // 0: AOI_SCHED_THREADS or hardware concurrency
  bool timing = false;  // include wall-clock column (breaks byte identity)
  bool audit = false;
};

struct RunResult {
  std::vector<Row> rows;
  std::vector<std::string> audit_failures;
  bool partial_failure = false;

  int exit_code() const noexcept { return partial_failure || !audit_failures.empty() ? 2 : 0; }
};

RunResult run(const ExperimentSpec& spec, const RunOptions& options = {});

/// Recompute eps / gamma / AoI of every ok row from its policy columns and
/// list mismatches.
std::vector<std::string> audit_rows(const ExperimentSpec& spec, const std::vector<Row>& rows);

std::string to_csv(const std::vector<Row>& rows, bool timing);
std::string to_json(const std::vector<Row>& rows, bool timing);

/// Reads what to_csv writes.
std::vector<Row> rows_from_csv(std::string_view csv);

}  // namespace aoisched::exp
