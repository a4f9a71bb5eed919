#include <doctest.h>

#include <cmath>

#include "aoisched/errors.hpp"
#include "aoisched/linkmodel.hpp"

using namespace aoisched;
using namespace aoisched::link;

TEST_CASE("unit conversions") {
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
  CHECK(dbm_to_watts(20.0) == doctest::Approx(0.1));
  CHECK(watts_to_dbm(1e-3) == doctest::Approx(0.0));
  CHECK(db_to_linear(-104.0) == doctest::Approx(std::pow(10.0, -10.4)));
  CHECK(linear_to_db(100.0) == doctest::Approx(20.0));
}

TEST_CASE("time-wrapped gain by hand") {
  SystemParams p;
  const Device d = make_device(p, 1.6);
  const double g = std::pow(1.6, -2.7);
  const double expect = 0.5 * 1.0 * g / (std::pow(10.0, -10.4) * 1.0 + std::pow(10.0, -20.4));
  CHECK(d.z == doctest::Approx(expect).epsilon(1e-12));
  CHECK(d.channel_gain(p.eta) == doctest::Approx(g));

  p.h_i_db = 0.0;
  CHECK(make_device(p, 1.0).z == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(make_device(p, 1.0, 2.0).z == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("noise density integrates over the bandwidth") {
  SystemParams p;
  p.noise_mode = NoiseMode::PerHz;
  CHECK(p.noise_watts() == doctest::Approx(dbm_to_watts(-174.0) * 10e6));
  CHECK(p.symbol_time() == doctest::Approx(1e-7));
}

TEST_CASE("invalid inputs") {
  SystemParams p;
  CHECK_THROWS_AS(make_device(p, -1.0), Error);
  try {
    make_device(p, 0.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidGeometry);
  }
  p.mu = 1.5;
  try {
    p.validate();
    FAIL("mu above one accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("mu") != std::string::npos);
  }
  p = SystemParams{};
  p.gamma_th = 0.5;
  CHECK_THROWS_AS(p.validate(), Error);
  const Device d = make_device(SystemParams{}, 1.0);
  CHECK_THROWS_AS(snr(d, 10.0, 0.0), Error);
}

TEST_CASE("snr and harvested energy") {
  SystemParams p;
  p.h_i_db = 0.0;
  const Device d = make_device(p, 1.0);
  CHECK(snr(d, 300.0, 100.0) == doctest::Approx(1.5).epsilon(1e-9));
  const double e = harvested_energy(d, 1000.0, p);
  CHECK(e == doctest::Approx(0.5 * 1.0 * 1000.0 * 1e-7));
  CHECK(harvested_energy(d, 1000.0, p, LinearEnergyModel(0.25)) == doctest::Approx(e / 2.0));
}

TEST_CASE("rayleigh amplitude has unit mean square") {
  std::mt19937_64 rng(1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double h = draw_rayleigh_amplitude(rng);
    sum += h * h;
  }
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.01));
}
