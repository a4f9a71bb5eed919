#include <doctest.h>

#include <cmath>

#include "aoisched/errors.hpp"
#include "aoisched/experiment.hpp"

using namespace aoisched;
using namespace aoisched::exp;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_spec_text(text, "spec.json");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("empty spec gives the defaults") {
  const auto s = parse_spec_text("");
  const link::SystemParams d;
  CHECK(s.scenario == Scenario::Custom);
  CHECK(s.params.p_c_dbm == d.p_c_dbm);
  CHECK(s.params.mu == 0.5);
  CHECK(s.params.eta == 2.7);
  CHECK(s.params.d_bits == 128);
  CHECK(s.params.bandwidth_hz == 10e6);
  CHECK(s.params.carrier_hz == 2.4e9);
  CHECK(s.devices.count == 30);
  CHECK(s.devices.distance_min == 0.8);
  CHECK(s.devices.distance_max == 1.6);
  CHECK(s.methods == std::vector<Method>{Method::Convex});
}

TEST_CASE("quantities with units") {
  const auto s = parse_spec_text(R"({ "params": { "p_c": "20 dBm", "bandwidth": "5 MHz", "h_i": "-90 dB" } })");
  CHECK(s.params.p_c_watts() == doctest::Approx(0.1));
  CHECK(s.params.bandwidth_hz == 5e6);
  CHECK(s.params.h_i_db == -90.0);
  CHECK(parse_quantity("2 W", "dBm") == doctest::Approx(10.0 * std::log10(2000.0)));
  CHECK(parse_quantity("16 bytes", "bits") == 128.0);
  CHECK(parse_quantity("3 dB", "linear") == doctest::Approx(std::pow(10.0, 0.3)));
  CHECK_THROWS_AS(parse_quantity("3 furlongs", "m"), Error);
}

TEST_CASE("config errors carry field or position") {
  CHECK(error_of(R"({ "devices": { "distances": [1.0, -2.0] } })").find("/devices/distances/1") != std::string::npos);
  CHECK(error_of(R"({ "params": { "pc": 3 } })").find("/params/pc") != std::string::npos);
  CHECK(error_of("{\n  \"seed\": 1,\n  \"methods\": [\"convex\",]\n}").find("spec.json:3:") != std::string::npos);
  CHECK(error_of(R"({ "methods": [] })").find("/methods") != std::string::npos);
  CHECK(error_of(R"({ "methods": ["magic"] })").find("/methods/0") != std::string::npos);
  CHECK(error_of(R"({ "sweep": { "variable": "colour", "values": [1] } })").find("/sweep/variable") !=
        std::string::npos);
  CHECK(error_of(R"({ "params": { "mu": 2 } })").find("mu") != std::string::npos);
}

TEST_CASE("comments are allowed") {
  const auto s = parse_spec_text("// header\n{ /* inline */ \"seed\": 5 }");
  CHECK(s.seed == 5);
}

TEST_CASE("mu sweep: convex AoI does not grow with efficiency") {
  auto s = parse_spec_text(R"({ "scenario": "mu_sweep", "devices": { "count": 5 }, "methods": ["convex", "ibl"] })");
  const auto r = run(s, {1, false, true});
  CHECK(r.exit_code() == 0);
  CHECK(r.audit_failures.empty());
  double previous = INFINITY;
  for (const auto& row : r.rows) {
    if (row.method == "ibl") continue;
    CHECK(row.delta_max <= previous * (1 + 1e-6));
    previous = row.delta_max;
  }
}

TEST_CASE("packet sweep: AoI grows with packet size") {
  auto s = parse_spec_text(
      R"({ "scenario": "packet_sweep", "sweep": {"variable": "d_bits", "values": [64, 96, 128]},
           "devices": { "count": 4 }, "methods": ["convex"] })");
  const auto r = run(s, {1, false, false});
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].delta_max < r.rows[1].delta_max);
  CHECK(r.rows[1].delta_max < r.rows[2].delta_max);
}

TEST_CASE("device count sweep: flat, then growing after the capacity") {
  auto s = parse_spec_text(R"({ "scenario": "device_count_sweep", "sweep": {"variable": "devices", "range": [1, 10, 1]},
                                "methods": ["convex", "algorithm1"] })");
  const auto r = run(s, {2, false, true});
  CHECK(r.exit_code() == 0);
  std::vector<double> convex;
  int cap = 0;
  for (const auto& row : r.rows) {
    if (row.method == "convex") convex.push_back(row.delta_max);
    if (row.method == "algorithm1") cap = row.c_cap;
  }
  REQUIRE(cap >= 2);
  REQUIRE(convex.size() == 10);
  for (int i = 1; i < cap; ++i) CHECK(convex[i] == doctest::Approx(convex[0]).epsilon(5e-3));
  for (std::size_t i = cap; i < convex.size(); ++i) CHECK(convex[i] > convex[i - 1]);
}

TEST_CASE("CSV round trip and reproducible output") {
  auto s = parse_spec_text(R"({ "params": {"h_i": "-30 dB"}, "devices": { "distances": [1.0, 1.3] },
                                "methods": ["convex", "ibl", "simulate", "exhaustive"],
                                "grid": {"m_c": [0, 20, 1], "m_r": [12, 30, 1]},
                                "simulation": {"rounds": 20000} })");
  const auto a = run(s, {1, false, false});
  const auto b = run(s, {3, false, false});
  CHECK(a.exit_code() == 0);
  const std::string csv = to_csv(a.rows, false);
  CHECK(csv == to_csv(b.rows, false));
  CHECK(to_json(a.rows, false) == to_json(b.rows, false));

  const auto back = rows_from_csv(csv);
  REQUIRE(back.size() == a.rows.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].method == a.rows[i].method);
    CHECK(back[i].delta_max == a.rows[i].delta_max);
    CHECK(back[i].m_c == a.rows[i].m_c);
    CHECK(back[i].m_r == a.rows[i].m_r);
    CHECK(back[i].eps == a.rows[i].eps);
    CHECK(back[i].gamma == a.rows[i].gamma);
  }
  CHECK(audit_rows(s, back).empty());
  auto tampered = back;
  tampered[0].eps[0] *= 1.01;
  CHECK_FALSE(audit_rows(s, tampered).empty());
}

TEST_CASE("failed points become rows, not aborts") {
  auto s = parse_spec_text(R"({ "sweep": {"variable": "distance", "values": [1.0, 5000.0]},
                                "params": {"h_i": "0 dB"}, "devices": {"distances": [1.0]} })");
  const auto r = run(s, {1, false, false});
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].status == "ok");
  CHECK(r.rows[1].status == "Infeasible");
  CHECK(r.exit_code() == 2);
}

TEST_CASE("surface scenario") {
  auto s = parse_spec_text(R"({ "scenario": "single_device_surface" })");
  const auto r = run(s, {1, false, true});
  CHECK(r.audit_failures.empty());
  double best_surface = INFINITY, optimum = 0.0;
  for (const auto& row : r.rows) {
    if (row.method == "surface" && row.detail == "optimal") best_surface = std::min(best_surface, row.delta_max);
    if (row.method == "convex") optimum = row.delta_max;
  }
  CHECK(optimum > 0.0);
  CHECK(optimum <= best_surface * (1 + 1e-6));
}
