#include <doctest.h>

#include <cmath>
#include <vector>

#include "aoisched/cluster.hpp"
#include "aoisched/errors.hpp"
#include "aoisched/fblmath.hpp"

using namespace aoisched;
using namespace aoisched::cluster;

namespace {

SystemParams interference_limited() {
  SystemParams p;
  p.h_i_db = 0.0;
  return p;
}

std::vector<Device> homogeneous(const SystemParams& p, int n, double d) {
  std::vector<Device> out;
  for (int i = 0; i < n; ++i) out.push_back(link::make_device(p, d, 1.0, i));
  return out;
}

bool has(const ValidationReport& r, ViolationKind k) {
  for (const auto& v : r.violations) {
    if (v.kind == k) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("worst device picks the lowest index on ties") {
  const SystemParams p = interference_limited();
  const std::vector<Device> devs{link::make_device(p, 1.0, 1, 0), link::make_device(p, 1.5, 1, 1),
                                 link::make_device(p, 1.5, 1, 2)};
  CHECK(worst_device(devs) == 1);
}

TEST_CASE("capacity of a single device") {
  const SystemParams p = interference_limited();
  const auto cap = cluster_capacity(p, homogeneous(p, 1, 1.2));
  CHECK(cap.c_cap >= 1);
  CHECK_FALSE(cap.saturated);
  CHECK(cap.c_cap == static_cast<int>(std::floor(cap.m_single / cap.m_r_single)));
}

TEST_CASE("capacity grows with distance") {
  const SystemParams p = interference_limited();
  int previous = 0;
  for (double d : {1.0, 1.2, 1.4, 1.5, 1.6}) {
    const int c = cluster_capacity(p, homogeneous(p, 1, d)).c_cap;
    CHECK(c >= previous);
    previous = c;
  }
  CHECK(cluster_capacity(p, homogeneous(p, 1, 1.6)).c_cap > cluster_capacity(p, homogeneous(p, 1, 1.4)).c_cap);
}

TEST_CASE("algorithm 1 with one device is the single optimum") {
  const SystemParams p = interference_limited();
  const auto devs = homogeneous(p, 1, 1.3);
  const auto r = algorithm1(p, devs);
  CHECK(r.delta_max == doctest::Approx(opt::solve_single(p, devs[0]).aoi).epsilon(1e-12));
}

TEST_CASE("algorithm 1 against the convex solver") {
  const SystemParams p = interference_limited();
  SUBCASE("unsaturated homogeneous cluster is optimal") {
    const auto devs = homogeneous(p, 4, 1.5);
    REQUIRE_FALSE(cluster_capacity(p, devs).saturated);
    const auto a = algorithm1(p, devs);
    const auto c = opt::solve_minmax(p, devs);
    CHECK(a.delta_max == doctest::Approx(c.delta_max).epsilon(1e-4));
  }
  SUBCASE("saturated cluster is no better than the optimum") {
    const auto devs = homogeneous(p, 9, 1.5);
    REQUIRE(cluster_capacity(p, devs).saturated);
    const auto a = algorithm1(p, devs);
    const auto c = opt::solve_minmax(p, devs);
    CHECK(a.delta_max >= c.delta_max * (1 - 1e-6));
  }
}

TEST_CASE("saturation shows up as a vanishing common charge") {
  const SystemParams p = interference_limited();
  const int cap = cluster_capacity(p, homogeneous(p, 1, 1.5)).c_cap;
  CHECK_FALSE(opt::solve_minmax(p, homogeneous(p, cap, 1.5)).saturated);
  CHECK(opt::solve_minmax(p, homogeneous(p, cap + 1, 1.5)).saturated);
}

TEST_CASE("adding a stronger device to an unsaturated cluster keeps the maximum AoI") {
  const SystemParams p = interference_limited();
  auto devs = homogeneous(p, 3, 1.5);
  const double before = opt::solve_minmax(p, devs).delta_max;
  devs.push_back(link::make_device(p, 1.1, 1.0, 3));
  const double after = opt::solve_minmax(p, devs).delta_max;
  CHECK(after == doctest::Approx(before).epsilon(2e-6));
}

TEST_CASE("reconstruct: charge first, then devices in index order") {
  const auto s = reconstruct_schedule(AllocationPolicy{10.0, {5.0, 7.0}});
  CHECK(s.round_length == 22);
  CHECK(s.starts(2) == std::vector<std::int64_t>{10, 15});
  CHECK(s.slots[1].length == 7);
}

TEST_CASE("validation") {
  SystemParams p = interference_limited();
  const std::vector<Device> devs{link::make_device(p, 1.0, 1, 0), link::make_device(p, 1.0, 1, 1)};
  const auto policy = round_policy(p, devs, opt::solve_minmax(p, devs).policy);
  const auto good = reconstruct_schedule(policy);
  CHECK(validate_schedule(good, p, devs).ok);
  CHECK(validate_schedule(good.shifted(good.round_length - 3), p, devs).ok);

  TimeSchedule overlap = good;
  overlap.slots[1].start = overlap.slots[0].start + 1;
  const auto r1 = validate_schedule(overlap, p, devs);
  CHECK_FALSE(r1.ok);
  CHECK(has(r1, ViolationKind::Collision));

  TimeSchedule twice = good;
  twice.slots.push_back({0, 0, 5});
  const auto r2 = validate_schedule(twice, p, devs);
  CHECK(has(r2, ViolationKind::DuplicateUpdate));

  TimeSchedule missing = good;
  missing.slots.pop_back();
  CHECK(has(validate_schedule(missing, p, devs), ViolationKind::MissingUpdate));

  TimeSchedule starving{40, {{0, 0, 20}, {1, 20, 20}}};
  const auto r3 = validate_schedule(starving, p, devs);
  CHECK(has(r3, ViolationKind::ErrorThreshold));
}

TEST_CASE("rounding") {
  const SystemParams p = interference_limited();
  const std::vector<Device> devs{link::make_device(p, 1.0, 1, 0), link::make_device(p, 1.2, 1, 1)};

  SUBCASE("integer policy is unchanged") {
    const AllocationPolicy in{500.0, {130.0, 150.0}};
    const auto out = round_policy(p, devs, in);
    CHECK(out.m_c == in.m_c);
    CHECK(out.m_r == in.m_r);
  }
  SUBCASE("half-integer slot goes to the better neighbour") {
    const std::vector<Device> one{devs[0]};
    const AllocationPolicy in{400.0, {100.5}};
    const auto out = round_policy(p, one, in);
    const double e100 = fbl::eps_of(devs[0].z, 501.0 - 100.0, 100.0, p.d_bits);
    const double e101 = fbl::eps_of(devs[0].z, 501.0 - 101.0, 101.0, p.d_bits);
    CHECK(out.m_r[0] == (e100 <= e101 ? 100.0 : 101.0));
    CHECK(out.round_length() == 501.0);
  }
  SUBCASE("relaxed optimum loses little") {
    const auto relaxed = opt::solve_minmax(p, devs);
    REQUIRE(relaxed.policy.round_length() >= 300.0);
    const auto rounded = opt::evaluate_policy(p, devs, round_policy(p, devs, relaxed.policy));
    CHECK(rounded.status == opt::SolveStatus::Optimal);
    CHECK(rounded.delta_max <= relaxed.delta_max * 1.001);
  }
  SUBCASE("thresholds that cannot survive rounding") {
    const std::vector<Device> one{devs[0]};
    try {
      round_policy(p, one, AllocationPolicy{1.0, {1.2}});
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConstraintBrokenByRounding);
    }
  }
}

TEST_CASE("schedule AoI agrees with the allocation formula") {
  const SystemParams p = interference_limited();
  const std::vector<Device> devs{link::make_device(p, 1.0, 1, 0), link::make_device(p, 1.2, 1, 1)};
  const auto policy = round_policy(p, devs, opt::solve_minmax(p, devs).policy);
  const auto expect = opt::evaluate_policy(p, devs, policy);
  const auto s = reconstruct_schedule(policy);
  for (std::int64_t shift : {0, 17, 333}) {
    const auto got = schedule_aoi(s.shifted(shift), p, devs);
    for (std::size_t i = 0; i < devs.size(); ++i) {
      CHECK(got[i] == doctest::Approx(expect.per_device[i].avg_aoi).epsilon(1e-12));
    }
  }
}
