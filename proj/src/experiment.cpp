#include "aoisched/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "aoisched/errors.hpp"
#include "aoisched/fblmath.hpp"

namespace aoisched::exp {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  raise(ErrorCode::ConfigError, where + ": " + what);
}

const std::map<std::string_view, Scenario>& scenario_names() {
  static const std::map<std::string_view, Scenario> m{
      {"single_device_surface", Scenario::SingleDeviceSurface},
      {"mu_sweep", Scenario::MuSweep},
      {"packet_sweep", Scenario::PacketSweep},
      {"device_count_sweep", Scenario::DeviceCountSweep},
      {"added_device_sweep", Scenario::AddedDeviceSweep},
      {"custom", Scenario::Custom},
  };
  return m;
}

const std::map<std::string_view, Method>& method_names() {
  static const std::map<std::string_view, Method> m{
      {"convex", Method::Convex}, {"algorithm1", Method::Algorithm1}, {"exhaustive", Method::Exhaustive},
      {"ibl", Method::Ibl},       {"simulate", Method::Simulate},
  };
  return m;
}

// Sweepable SystemParams fields and the quantity kind of each.
const std::map<std::string_view, std::string_view>& param_kinds() {
  static const std::map<std::string_view, std::string_view> m{
      {"p_c", "dBm"},     {"mu", "none"},      {"h_i", "dB"},     {"sigma2", "dBm"},
      {"eta", "none"},    {"carrier", "Hz"},   {"bandwidth", "Hz"}, {"d_bits", "bits"},
      {"eps_max", "none"}, {"gamma_th", "linear"},
  };
  return m;
}

bool is_scenario_variable(std::string_view v) {
  return v == "devices" || v == "distance" || v == "added_distance";
}

void set_param(link::SystemParams& p, std::string_view key, double v) {
  if (key == "p_c") p.p_c_dbm = v;
  else if (key == "mu") p.mu = v;
  else if (key == "h_i") p.h_i_db = v;
  else if (key == "sigma2") p.sigma2_dbm = v;
  else if (key == "eta") p.eta = v;
  else if (key == "carrier") p.carrier_hz = v;
  else if (key == "bandwidth") p.bandwidth_hz = v;
  else if (key == "d_bits") {
    if (v != std::floor(v)) raise(ErrorCode::InvalidArgument, "d_bits must be an integer");
    p.d_bits = static_cast<int>(v);
  } else if (key == "eps_max") p.eps_max = v;
  else if (key == "gamma_th") p.gamma_th = v;
  else raise(ErrorCode::InvalidArgument, "unknown parameter " + std::string(key));
}

std::vector<double> range(double lo, double hi, double step) {
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
  return out;
}

// --- spec parsing ---------------------------------------------------------

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) config_error(where.empty() ? "/" : where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error(where + "/" + key, "unknown key");
    }
  }
}

double quantity(const json& v, const std::string& where, std::string_view kind) {
  try {
    if (v.is_number()) return v.get<double>();  // bare numbers are in the default unit
    if (v.is_string()) return parse_quantity(v.get<std::string>(), kind);
  } catch (const Error& e) {
    config_error(where, e.what());
  }
  config_error(where, "expected a number or a quantity string");
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) config_error(where, "expected a number");
  return v.get<double>();
}

std::int64_t integer(const json& v, const std::string& where) {
  if (!v.is_number_integer() && !(v.is_number() && v.get<double>() == std::floor(v.get<double>()))) {
    config_error(where, "expected an integer");
  }
  return v.is_number_integer() ? v.get<std::int64_t>() : static_cast<std::int64_t>(v.get<double>());
}

std::vector<double> number_list(const json& v, const std::string& where, std::string_view kind) {
  if (!v.is_array()) config_error(where, "expected a list");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(quantity(v[i], where + "/" + std::to_string(i), kind));
  return out;
}

void parse_params(const json& j, link::SystemParams& p) {
  reject_unknown(j, "/params",
                 {"p_c", "mu", "h_i", "sigma2", "noise_mode", "eta", "carrier", "bandwidth", "d_bits", "eps_max",
                  "gamma_th"});
  for (const auto& [key, value] : j.items()) {
    const std::string where = "/params/" + key;
    if (key == "noise_mode") {
      if (!value.is_string()) config_error(where, "expected \"total\" or \"per_hz\"");
      const auto s = value.get<std::string>();
      if (s == "total") p.noise_mode = link::NoiseMode::Total;
      else if (s == "per_hz") p.noise_mode = link::NoiseMode::PerHz;
      else config_error(where, "expected \"total\" or \"per_hz\"");
      continue;
    }
    const double v = quantity(value, where, param_kinds().at(key));
    try {
      set_param(p, key, v);
    } catch (const Error& e) {
      config_error(where, e.what());
    }
  }
}

void parse_devices(const json& j, DeviceSpec& d) {
  reject_unknown(j, "/devices", {"distances", "count", "distance_min", "distance_max", "seed", "fading"});
  if (j.contains("distances")) d.distances = number_list(j["distances"], "/devices/distances", "m");
  if (j.contains("count")) d.count = static_cast<int>(integer(j["count"], "/devices/count"));
  if (j.contains("distance_min")) d.distance_min = quantity(j["distance_min"], "/devices/distance_min", "m");
  if (j.contains("distance_max")) d.distance_max = quantity(j["distance_max"], "/devices/distance_max", "m");
  if (j.contains("seed")) d.seed = static_cast<std::uint64_t>(integer(j["seed"], "/devices/seed"));
  if (j.contains("fading")) {
    const auto& f = j["fading"];
    if (f == "none") d.fading = Fading::None;
    else if (f == "rayleigh") d.fading = Fading::Rayleigh;
    else config_error("/devices/fading", "expected \"none\" or \"rayleigh\"");
  }
}

std::vector<double> triple(const json& v, const std::string& where) {
  auto out = number_list(v, where, "none");
  if (out.size() != 3) config_error(where, "expected [min, max, step]");
  return out;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// --- running ----------------------------------------------------------------

struct Point {
  double value = 0.0;
  link::SystemParams params;
  std::vector<link::Device> devices;
};

std::vector<double> base_distances(const ExperimentSpec& spec, int count_override) {
  const DeviceSpec& d = spec.devices;
  if (!d.distances.empty()) {
    if (count_override <= 0) return d.distances;
    if (d.distances.size() == 1) return std::vector<double>(static_cast<std::size_t>(count_override), d.distances[0]);
    if (static_cast<std::size_t>(count_override) > d.distances.size()) {
      raise(ErrorCode::InvalidArgument, "sweep asks for more devices than listed");
    }
    return {d.distances.begin(), d.distances.begin() + count_override};
  }
  const int count = count_override > 0 ? count_override : d.count;
  std::mt19937_64 rng(d.seed.value_or(spec.seed));
  std::uniform_real_distribution<double> u(d.distance_min, d.distance_max);
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(d.distance_max > d.distance_min ? u(rng) : d.distance_min);
  return out;
}

std::vector<link::Device> realise(const ExperimentSpec& spec, const link::SystemParams& params,
                                  const std::vector<double>& distances) {
  std::mt19937_64 rng(spec.devices.seed.value_or(spec.seed) ^ 0x9E3779B97F4A7C15ull);
  std::vector<link::Device> out;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    const double fading = spec.devices.fading == Fading::Rayleigh ? link::draw_rayleigh_amplitude(rng) : 1.0;
    out.push_back(link::make_device(params, distances[i], fading, static_cast<int>(i)));
  }
  return out;
}

Point make_point(const ExperimentSpec& spec, std::optional<double> value) {
  Point pt;
  pt.params = spec.params;
  int count = 0;
  std::optional<double> same_distance, added;
  if (value) {
    pt.value = *value;
    const std::string& var = spec.sweep->variable;
    if (var == "devices") {
      if (*value < 1.0 || *value != std::floor(*value)) raise(ErrorCode::InvalidArgument, "device count must be a positive integer");
      count = static_cast<int>(*value);
    } else if (var == "distance") {
      same_distance = *value;
    } else if (var == "added_distance") {
      added = *value;
    } else {
      set_param(pt.params, var, *value);
    }
  }
  pt.params.validate();
  auto distances = base_distances(spec, count);
  if (same_distance) std::fill(distances.begin(), distances.end(), *same_distance);
  if (added) distances.push_back(*added);
  pt.devices = realise(spec, pt.params, distances);
  return pt;
}

void fill_from_report(Row& row, const opt::SolveReport& r) {
  row.delta_max = r.delta_max;
  row.round_length = r.policy.round_length();
  row.m_c = r.policy.m_c;
  row.m_r = r.policy.m_r;
  row.eps.clear();
  row.gamma.clear();
  row.aoi.clear();
  for (const auto& d : r.per_device) {
    row.eps.push_back(d.eps);
    row.gamma.push_back(d.gamma);
    row.aoi.push_back(d.avg_aoi);
  }
  row.saturated = r.saturated;
  row.detail = std::string(opt::to_string(r.status));
}

void run_method(const ExperimentSpec& spec, const Point& pt, Method method, Row& row) {
  switch (method) {
    case Method::Convex:
      fill_from_report(row, opt::solve_minmax(pt.params, pt.devices));
      break;
    case Method::Algorithm1: {
      const auto cap = cluster::cluster_capacity(pt.params, pt.devices);
      row.c_cap = cap.c_cap;
      fill_from_report(row, cluster::algorithm1(pt.params, pt.devices));
      row.saturated = cap.saturated;
      break;
    }
    case Method::Exhaustive:
      fill_from_report(row, sim::exhaustive_search(pt.params, pt.devices, spec.grid));
      break;
    case Method::Ibl:
      fill_from_report(row, sim::ibl_baseline(pt.params, pt.devices));
      break;
    case Method::Simulate: {
      const auto relaxed = opt::solve_minmax(pt.params, pt.devices);
      const auto rounded = cluster::round_policy(pt.params, pt.devices, relaxed.policy);
      const auto report = opt::evaluate_policy(pt.params, pt.devices, rounded);
      fill_from_report(row, report);
      const auto schedule = cluster::reconstruct_schedule(rounded);
      const auto result = sim::simulate(schedule, pt.devices, pt.params, spec.simulation);
      row.delta_max = 0.0;
      row.std_error = 0.0;
      for (std::size_t i = 0; i < result.per_device.size(); ++i) {
        const auto& d = result.per_device[i];
        row.aoi[i] = d.time_avg_aoi * static_cast<double>(spec.simulation.time_resolution);
        if (row.aoi[i] >= row.delta_max) {
          row.delta_max = row.aoi[i];
          row.std_error = d.std_error * static_cast<double>(spec.simulation.time_resolution);
        }
      }
      break;
    }
  }
}

std::vector<Row> surface_rows(const ExperimentSpec& spec, const Point& pt, std::size_t index) {
  const auto& dev = pt.devices.front();
  std::vector<double> mc = spec.surface.m_c, mr = spec.surface.m_r;
  if (mc.empty() || mr.empty()) {
    const auto best = opt::solve_single(pt.params, dev);
    if (mc.empty()) mc = {0.25 * best.m_c, 2.5 * best.m_c, 2.25 * best.m_c / 11.0};
    if (mr.empty()) mr = {0.6 * best.m_r, 1.8 * best.m_r, 1.2 * best.m_r / 11.0};
  }
  std::vector<Row> rows;
  for (double c : range(mc[0], mc[1], mc[2])) {
    for (double r : range(mr[0], mr[1], mr[2])) {
      Row row;
      row.point = index;
      row.sweep_value = pt.value;
      row.sweep_variable = spec.sweep ? spec.sweep->variable : "";
      row.method = "surface";
      row.devices = 1;
      row.status = "ok";
      try {
        opt::AllocationPolicy p{c, {r}};
        fill_from_report(row, opt::evaluate_policy(pt.params, std::span(&dev, 1), p));
      } catch (const Error& e) {
        row.status = std::string(to_string(e.code()));
        row.detail = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<Row> run_point(const ExperimentSpec& spec, std::size_t index, std::optional<double> value, bool timing) {
  std::vector<Row> rows;
  Point pt;
  std::string point_error, point_code;
  try {
    pt = make_point(spec, value);
  } catch (const Error& e) {
    point_code = std::string(to_string(e.code()));
    point_error = e.what();
  }
  if (point_error.empty() && spec.scenario == Scenario::SingleDeviceSurface) {
    auto surface = surface_rows(spec, pt, index);
    rows.insert(rows.end(), surface.begin(), surface.end());
  }
  for (Method m : spec.methods) {
    Row row;
    row.point = index;
    row.sweep_variable = spec.sweep ? spec.sweep->variable : "";
    row.sweep_value = value.value_or(0.0);
    row.method = std::string(to_string(m));
    row.devices = pt.devices.size();
    if (!point_error.empty()) {
      row.status = point_code;
      row.detail = point_error;
      rows.push_back(std::move(row));
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run_method(spec, pt, m, row);
      row.status = "ok";
    } catch (const Error& e) {
      row.status = std::string(to_string(e.code()));
      row.detail = e.what();
    } catch (const std::exception& e) {
      row.status = "error";
      row.detail = e.what();
    }
    if (timing) {
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

int worker_count(int requested, std::size_t jobs) {
  int n = requested;
  if (n <= 0) {
    n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("AOI_SCHED_THREADS")) {
      int cap = 0;
      const std::string_view s(env);
      if (std::from_chars(s.data(), s.data() + s.size(), cap).ec == std::errc{} && cap > 0) n = std::min(n, cap);
    }
  }
  return std::max(1, std::min<int>(n, static_cast<int>(std::max<std::size_t>(1, jobs))));
}

}  // namespace

std::string_view to_string(Scenario s) noexcept {
  for (const auto& [name, value] : scenario_names()) {
    if (value == s) return name;
  }
  return "custom";
}

std::string_view to_string(Method m) noexcept {
  for (const auto& [name, value] : method_names()) {
    if (value == m) return name;
  }
  return "convex";
}

Scenario scenario_from_string(std::string_view name) {
  const auto it = scenario_names().find(name);
  if (it == scenario_names().end()) raise(ErrorCode::ConfigError, "unknown scenario '" + std::string(name) + "'");
  return it->second;
}

Method method_from_string(std::string_view name) {
  const auto it = method_names().find(name);
  if (it == method_names().end()) raise(ErrorCode::ConfigError, "unknown method '" + std::string(name) + "'");
  return it->second;
}

double parse_quantity(std::string_view text, std::string_view kind) {
  std::string s(text);
  std::istringstream in(s);
  in.imbue(std::locale::classic());
  double value = 0.0;
  std::string unit, extra;
  if (!(in >> value)) raise(ErrorCode::ConfigError, "'" + s + "' does not start with a number");
  in >> unit;
  if (in >> extra) raise(ErrorCode::ConfigError, "trailing text in '" + s + "'");
  if (!std::isfinite(value)) raise(ErrorCode::ConfigError, "'" + s + "' is not finite");

  auto bad_unit = [&]() -> double {
    raise(ErrorCode::ConfigError, "unit '" + unit + "' is not valid for a " + std::string(kind) + " quantity");
  };
  if (kind == "dBm") {
    if (unit.empty() || unit == "dBm") return value;
    if (unit == "W") return link::watts_to_dbm(value);
    if (unit == "mW") return link::watts_to_dbm(value * 1e-3);
    if (unit == "uW") return link::watts_to_dbm(value * 1e-6);
    return bad_unit();
  }
  if (kind == "dB") {
    if (unit.empty() || unit == "dB") return value;
    return bad_unit();
  }
  if (kind == "linear") {
    if (unit.empty()) return value;
    if (unit == "dB") return link::db_to_linear(value);
    return bad_unit();
  }
  if (kind == "Hz") {
    if (unit.empty() || unit == "Hz") return value;
    if (unit == "kHz") return value * 1e3;
    if (unit == "MHz") return value * 1e6;
    if (unit == "GHz") return value * 1e9;
    return bad_unit();
  }
  if (kind == "m") {
    if (unit.empty() || unit == "m") return value;
    if (unit == "cm") return value * 1e-2;
    if (unit == "mm") return value * 1e-3;
    return bad_unit();
  }
  if (kind == "bits") {
    if (unit.empty() || unit == "bits" || unit == "bit") return value;
    if (unit == "bytes" || unit == "B") return value * 8.0;
    return bad_unit();
  }
  if (unit.empty()) return value;
  return bad_unit();
}

ExperimentSpec preset(Scenario scenario) {
  ExperimentSpec s;
  s.scenario = scenario;
  switch (scenario) {
    case Scenario::SingleDeviceSurface:
      s.devices.distances = {1.6};
      s.methods = {Method::Convex};
      break;
    case Scenario::MuSweep:
      s.sweep = SweepSpec{"mu", range(0.1, 0.9, 0.1)};
      s.methods = {Method::Convex, Method::Algorithm1, Method::Ibl};
      break;
    case Scenario::PacketSweep:
      s.sweep = SweepSpec{"d_bits", {32, 64, 96, 128, 160, 192, 224, 256}};
      s.methods = {Method::Convex, Method::Algorithm1, Method::Ibl};
      break;
    case Scenario::DeviceCountSweep:
      s.params.h_i_db = 0.0;
      s.devices.distances = {1.6};
      s.sweep = SweepSpec{"devices", range(1, 12, 1)};
      s.methods = {Method::Convex, Method::Algorithm1};
      break;
    case Scenario::AddedDeviceSweep:
      s.params.h_i_db = 0.0;
      s.devices.distances = std::vector<double>(16, 1.6);
      s.sweep = SweepSpec{"added_distance", range(0.8, 2.0, 0.1)};
      s.methods = {Method::Convex, Method::Algorithm1};
      break;
    case Scenario::Custom:
      break;
  }
  return s;
}

void ExperimentSpec::validate() const {
  try {
    params.validate();
  } catch (const Error& e) {
    config_error("/params", e.what());
  }
  if (methods.empty()) config_error("/methods", "at least one method is required");
  if (sweep) {
    if (!param_kinds().count(sweep->variable) && !is_scenario_variable(sweep->variable)) {
      config_error("/sweep/variable", "'" + sweep->variable + "' is not a sweepable field");
    }
    if (sweep->values.empty()) config_error("/sweep/values", "sweep needs at least one value");
  }
  for (std::size_t i = 0; i < devices.distances.size(); ++i) {
    if (!(devices.distances[i] > 0.0)) {
      config_error("/devices/distances/" + std::to_string(i), "distance must be positive");
    }
  }
  if (devices.distances.empty()) {
    if (devices.count < 1) config_error("/devices/count", "need at least one device");
    if (!(devices.distance_min > 0.0)) config_error("/devices/distance_min", "distance must be positive");
    if (devices.distance_max < devices.distance_min) {
      config_error("/devices/distance_max", "must not be below distance_min");
    }
  }
  try {
    simulation.validate();
  } catch (const Error& e) {
    config_error("/simulation", e.what());
  }
  if (!(grid.m_c_step > 0.0) || !(grid.m_r_step > 0.0) || grid.m_c_max < grid.m_c_min || grid.m_r_max < grid.m_r_min ||
      grid.m_c_min < 0.0 || !(grid.m_r_min > 0.0)) {
    config_error("/grid", "ranges need min <= max, step > 0, m_c >= 0 and m_r > 0");
  }
  for (const auto* r : {&surface.m_c, &surface.m_r}) {
    if (!r->empty() && (r->size() != 3 || !((*r)[2] > 0.0) || (*r)[1] < (*r)[0])) {
      config_error("/surface", "ranges are [min, max, step] with step > 0");
    }
  }
}

ExperimentSpec parse_spec_text(std::string_view text, std::string_view origin) {
  const bool blank = std::all_of(text.begin(), text.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
  json j = json::object();
  if (!blank) {
    try {
      j = json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const json::parse_error& e) {
      const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
      raise(ErrorCode::ConfigError, std::string(origin) + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                        ": " + e.what());
    }
  }
  reject_unknown(j, "", {"scenario", "seed", "params", "sweep", "devices", "methods", "grid", "simulation", "surface",
                         "output"});

  Scenario scenario = Scenario::Custom;
  if (j.contains("scenario")) {
    if (!j["scenario"].is_string()) config_error("/scenario", "expected a string");
    try {
      scenario = scenario_from_string(j["scenario"].get<std::string>());
    } catch (const Error& e) {
      config_error("/scenario", e.what());
    }
  }
  ExperimentSpec s = preset(scenario);
  if (j.contains("seed")) s.seed = static_cast<std::uint64_t>(integer(j["seed"], "/seed"));
  s.simulation.seed = s.seed;
  if (j.contains("params")) parse_params(j["params"], s.params);
  if (j.contains("sweep")) {
    const auto& sw = j["sweep"];
    reject_unknown(sw, "/sweep", {"variable", "values", "range"});
    if (!sw.contains("variable") || !sw["variable"].is_string()) config_error("/sweep/variable", "expected a string");
    SweepSpec spec{sw["variable"].get<std::string>(), {}};
    const auto kind_it = param_kinds().find(spec.variable);
    const std::string_view kind = kind_it != param_kinds().end() ? kind_it->second
                                  : spec.variable == "devices"   ? "none"
                                                                 : "m";
    if (sw.contains("values") == sw.contains("range")) config_error("/sweep", "give exactly one of values or range");
    if (sw.contains("values")) {
      spec.values = number_list(sw["values"], "/sweep/values", kind);
    } else {
      const auto r = triple(sw["range"], "/sweep/range");
      if (!(r[2] > 0.0) || r[1] < r[0]) config_error("/sweep/range", "expected [min, max, step] with step > 0");
      spec.values = range(r[0], r[1], r[2]);
    }
    s.sweep = spec;
  }
  if (j.contains("devices")) parse_devices(j["devices"], s.devices);
  if (j.contains("methods")) {
    const auto& m = j["methods"];
    if (!m.is_array()) config_error("/methods", "expected a list of method names");
    s.methods.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string where = "/methods/" + std::to_string(i);
      if (!m[i].is_string()) config_error(where, "expected a method name");
      try {
        s.methods.push_back(method_from_string(m[i].get<std::string>()));
      } catch (const Error& e) {
        config_error(where, e.what());
      }
    }
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    reject_unknown(g, "/grid", {"m_c", "m_r", "max_points", "threads"});
    if (g.contains("m_c")) {
      const auto r = triple(g["m_c"], "/grid/m_c");
      s.grid.m_c_min = r[0], s.grid.m_c_max = r[1], s.grid.m_c_step = r[2];
    }
    if (g.contains("m_r")) {
      const auto r = triple(g["m_r"], "/grid/m_r");
      s.grid.m_r_min = r[0], s.grid.m_r_max = r[1], s.grid.m_r_step = r[2];
    }
    if (g.contains("max_points")) s.grid.max_points = static_cast<std::uint64_t>(integer(g["max_points"], "/grid/max_points"));
    if (g.contains("threads")) s.grid.threads = static_cast<int>(integer(g["threads"], "/grid/threads"));
  }
  if (j.contains("simulation")) {
    const auto& c = j["simulation"];
    reject_unknown(c, "/simulation", {"rounds", "seed", "time_resolution", "warmup"});
    if (c.contains("rounds")) s.simulation.rounds = integer(c["rounds"], "/simulation/rounds");
    if (c.contains("seed")) s.simulation.seed = static_cast<std::uint64_t>(integer(c["seed"], "/simulation/seed"));
    if (c.contains("time_resolution")) s.simulation.time_resolution = integer(c["time_resolution"], "/simulation/time_resolution");
    if (c.contains("warmup")) s.simulation.warmup = integer(c["warmup"], "/simulation/warmup");
  }
  if (j.contains("surface")) {
    const auto& sf = j["surface"];
    reject_unknown(sf, "/surface", {"m_c", "m_r"});
    if (sf.contains("m_c")) s.surface.m_c = triple(sf["m_c"], "/surface/m_c");
    if (sf.contains("m_r")) s.surface.m_r = triple(sf["m_r"], "/surface/m_r");
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    reject_unknown(o, "/output", {"path", "format"});
    if (o.contains("path")) {
      if (!o["path"].is_string()) config_error("/output/path", "expected a string");
      s.output_path = o["path"].get<std::string>();
    }
    if (o.contains("format")) {
      if (o["format"] == "csv") s.format = OutputFormat::Csv;
      else if (o["format"] == "json") s.format = OutputFormat::Json;
      else config_error("/output/format", "expected \"csv\" or \"json\"");
    }
  }
  s.validate();
  return s;
}

ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::ConfigError, path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_text(buf.str(), path);
}

RunResult run(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  std::vector<std::optional<double>> values;
  if (spec.sweep) {
    values.assign(spec.sweep->values.begin(), spec.sweep->values.end());
  } else {
    values.push_back(std::nullopt);
  }

  std::vector<std::vector<Row>> per_point(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t k = next++; k < values.size(); k = next++) {
      per_point[k] = run_point(spec, k, values[k], options.timing);
    }
  };
  const int threads = worker_count(options.threads, values.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  RunResult result;
  for (auto& rows : per_point) {
    for (auto& row : rows) {
      if (row.status != "ok") result.partial_failure = true;
      result.rows.push_back(std::move(row));
    }
  }
  if (options.audit) result.audit_failures = audit_rows(spec, result.rows);
  return result;
}

std::vector<std::string> audit_rows(const ExperimentSpec& spec, const std::vector<Row>& rows) {
  std::vector<std::string> failures;
  auto close = [](double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
  };
  for (const auto& row : rows) {
    if (row.status != "ok") continue;
    const std::optional<double> value =
        spec.sweep ? std::optional<double>(row.sweep_value) : std::nullopt;
    Point pt = make_point(spec, value);
    std::vector<link::Device> devices = pt.devices;
    if (row.method == "surface") devices.resize(1);
    opt::AllocationPolicy policy{row.m_c, row.m_r};
    const auto report = opt::evaluate_policy(pt.params, devices, policy);
    const std::string tag = "row point=" + std::to_string(row.point) + " method=" + row.method;
    if (!close(report.policy.round_length(), row.round_length)) failures.push_back(tag + ": round length mismatch");
    for (std::size_t i = 0; i < report.per_device.size() && i < row.eps.size(); ++i) {
      if (!close(report.per_device[i].eps, row.eps[i])) failures.push_back(tag + ": eps mismatch for device " + std::to_string(i));
      if (!close(report.per_device[i].gamma, row.gamma[i])) {
        failures.push_back(tag + ": gamma mismatch for device " + std::to_string(i));
      }
      if (row.method != "simulate" && !close(report.per_device[i].avg_aoi, row.aoi[i])) {
        failures.push_back(tag + ": AoI mismatch for device " + std::to_string(i));
      }
    }
  }
  return failures;
}

}  // namespace aoisched::exp
