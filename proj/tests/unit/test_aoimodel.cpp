#include <doctest.h>

#include <cmath>
#include <vector>

#include "aoisched/aoimodel.hpp"
#include "aoisched/errors.hpp"

using namespace aoisched;
using namespace aoisched::aoi;

TEST_CASE("closed form matches the event series") {
  for (double eps : {0.0, 0.01, 0.3, 0.8}) {
    const double m = 37.0;
    double series = 0.0;
    for (int k = 1; k < 4000; ++k) series += event_probability(eps, k) * event_area(m, k) / m;
    CHECK(avg_aoi(m, eps) == doctest::Approx(series).epsilon(1e-12));
  }
  CHECK(avg_aoi(10.0, 0.0) == doctest::Approx(15.0));
  CHECK(avg_aoi(UpdateRound{6.0, 4.0, 0.5}) == doctest::Approx(25.0));
  CHECK(avg_aoi(10.0, 0.2) == doctest::Approx(10.0 * 2.8 / 1.6));
}

TEST_CASE("event bookkeeping") {
  CHECK(event_probability(0.2, 1) == doctest::Approx(0.8));
  CHECK(event_probability(0.2, 3) == doctest::Approx(0.04 * 0.8));
  CHECK(event_area(4.0, 0) == doctest::Approx(8.0));
  CHECK(event_area(4.0, 2) == doctest::Approx(40.0));
  CHECK_THROWS_AS(event_probability(0.2, 0), Error);
}

TEST_CASE("divergence") {
  try {
    avg_aoi(10.0, 1.0);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DivergentAoI);
  }
  CHECK_THROWS_AS(avg_aoi(-1.0, 0.1), Error);
}

TEST_CASE("periodic AoI reduces to the closed form") {
  for (double eps : {0.0, 0.1, 0.6}) {
    const std::vector<Attempt> one{{7.0, 20.0, eps}};
    CHECK(periodic_aoi(one, 20.0) == doctest::Approx(avg_aoi(20.0, eps)).epsilon(1e-12));
  }
}

TEST_CASE("periodic AoI of a deterministic two-update schedule by hand") {
  // receptions at 3 and 8 in a period of 10; samples generated at 0 and 3
  const std::vector<Attempt> two{{3.0, 3.0, 0.0}, {8.0, 5.0, 0.0}};
  // (integral of t over [3,8] + integral of t-3 over [8,13]) / 10
  CHECK(periodic_aoi(two, 10.0) == doctest::Approx((27.5 + 37.5) / 10.0));
}
