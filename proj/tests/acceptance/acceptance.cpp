// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "aoisched/aoimodel.hpp"
#include "aoisched/cluster.hpp"
#include "aoisched/errors.hpp"
#include "aoisched/experiment.hpp"
#include "aoisched/fblmath.hpp"
#include "aoisched/simkernel.hpp"

using namespace aoisched;
using link::Device;
using link::SystemParams;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Q via the complementary error function; independent of the library's Q.
double q_oracle(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

SystemParams interference_limited() {
  SystemParams p;
  p.h_i_db = 0.0;
  return p;
}

std::vector<Device> cluster_at(const SystemParams& p, const std::vector<double>& dist) {
  std::vector<Device> out;
  for (std::size_t i = 0; i < dist.size(); ++i) out.push_back(link::make_device(p, dist[i], 1.0, static_cast<int>(i)));
  return out;
}

Outcome fbl_boundary() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lm(0.0, 4.0);
  double worst = 0.0;
  for (int d : {16, 32, 64, 128, 256, 1024}) {
    for (int k = 0; k < 500; ++k) {
      const double m_r = std::pow(10.0, lm(rng));
      const double gamma = std::expm1(d / m_r * std::log(2.0));
      if (!std::isfinite(gamma)) continue;
      worst = std::max(worst, std::abs(fbl::error_probability({gamma, m_r, d}) - 0.5));
    }
  }
  return {worst <= 1e-12, fmt("max |eps - 0.5| = %.3g over 3000 boundary points", worst)};
}

Outcome closed_form_aoi() {
  sim::SimConfig cfg;
  cfg.rounds = 1'000'000;
  int ok = 0, total = 0;
  double worst_rel = 0.0, worst_se = 0.0;
  const std::int64_t lengths[] = {7, 40, 135, 600, 2048};
  const double eps[] = {0.0, 0.1, 0.3, 0.6, 0.9};
  std::uint64_t stream = 0;
  for (auto m : lengths) {
    for (double e : eps) {
      const sim::SimAttempt a{m, m, e};
      const auto r = sim::simulate_periodic(std::span(&a, 1), m, stream++, cfg);
      const double expect = static_cast<double>(m) * (0.5 + 1.0 / (1.0 - e));
      const double dev = std::abs(r.time_avg_aoi - expect);
      const double nse = r.std_error > 0 ? dev / r.std_error : (dev == 0 ? 0.0 : INFINITY);
      worst_rel = std::max(worst_rel, dev / expect);
      worst_se = std::max(worst_se, nse);
      ok += dev <= 0.01 * expect && nse <= 3.0;
      ++total;
    }
  }
  return {ok == total && total >= 20,
          fmt("%d/%d pairs ok, worst rel dev %.3g, worst %.2f SE", ok, total, worst_rel, worst_se)};
}

Outcome hessian_suite() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0, bad = 0;
  double worst_det = INFINITY;
  while (checked < 1000) {
    const double z = std::pow(10.0, -2.0 + 12.0 * u(rng));
    const double m_r = std::pow(10.0, 3.5 * u(rng));
    const int d = 16 << static_cast<int>(5 * u(rng));
    const double gamma = std::pow(10.0, 3.0 * u(rng));
    const double m_c = gamma * m_r / z;
    const double eps = fbl::eps_of(z, m_c, m_r, d);
    if (!(eps > 1e-12 && eps <= 0.5)) continue;
    if (!fbl::convexity_condition({gamma, m_r, d})) continue;
    const double ha = 1e-4 * m_c, hb = 1e-4 * m_r;
    auto f = [&](double da, double db) { return fbl::eps_of(z, m_c + da * ha, m_r + db * hb, d); };
    const double f0 = f(0, 0);
    const double haa = (f(1, 0) - 2 * f0 + f(-1, 0)) / (ha * ha);
    const double hbb = (f(0, 1) - 2 * f0 + f(0, -1)) / (hb * hb);
    const double hab = (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) / (4 * ha * hb);
    const double scale = std::abs(haa * hbb) + hab * hab;
    const double det = haa * hbb - hab * hab;
    if (haa < 0 || hbb < 0 || det < -1e-6 * scale) ++bad;
    if (scale > 0) worst_det = std::min(worst_det, det / scale);
    ++checked;
  }
  return {bad == 0, fmt("%d points, %d violations, min det/scale %.3g", checked, bad, worst_det)};
}

Outcome global_optimality() {
  SystemParams p;
  p.h_i_db = -30.0;
  const std::vector<double> dist{1.0, 1.3, 1.6};
  sim::GridSpec grid;
  grid.m_c_min = 0, grid.m_c_max = 40, grid.m_c_step = 1;
  grid.m_r_min = 12, grid.m_r_max = 40, grid.m_r_step = 1;
  grid.threads = 4;
  bool pass = true;
  std::string detail;
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto devs = cluster_at(p, std::vector<double>(dist.begin(), dist.begin() + n));
    const auto relaxed = opt::solve_minmax(p, devs);
    const auto grid_best = sim::exhaustive_search(p, devs, grid);
    const double cell = sim::cell_variation(p, devs, grid_best.policy, grid);
    const double diff = grid_best.delta_max - relaxed.delta_max;
    pass = pass && relaxed.status == opt::SolveStatus::Optimal && diff >= -1e-6 * relaxed.delta_max && diff <= cell;
    detail += fmt("I=%zu: convex %.6f grid %.6f cell %.4f; ", n, relaxed.delta_max, grid_best.delta_max, cell);
  }
  return {pass, detail};
}

Outcome algorithm1_check() {
  const SystemParams p = interference_limited();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ud(0.8, 1.15);
  const double worst_d = 1.15;
  const int cap = cluster::cluster_capacity(p, cluster_at(p, {worst_d})).c_cap;
  int scenarios = 0, ok = 0;
  double max_gap = 0.0;
  for (int rep = 0; rep < 6; ++rep) {
    for (int n = 2; n <= cap; ++n) {
      std::vector<double> dist{worst_d};
      for (int k = 1; k < n; ++k) dist.push_back(ud(rng));
      std::shuffle(dist.begin(), dist.end(), rng);
      const auto devs = cluster_at(p, dist);
      const double a = cluster::algorithm1(p, devs).delta_max;
      const double b = opt::solve_minmax(p, devs).delta_max;
      max_gap = std::max(max_gap, rel(a, b));
      ok += rel(a, b) <= 1e-4;
      ++scenarios;
    }
  }
  int sat = 0, sat_ok = 0;
  double sat_gap = 0.0;
  for (int extra = 1; extra <= 3; ++extra) {
    for (double d : {1.0, 1.15}) {
      std::vector<double> dist{d};
      for (int k = 1; k < cap + extra; ++k) dist.push_back(0.8 + (d - 0.8) * k / (cap + extra));
      const auto devs = cluster_at(p, dist);
      const auto b = opt::solve_minmax(p, devs);
      try {
        const auto a = cluster::algorithm1(p, devs);
        sat_ok += a.delta_max >= b.delta_max * (1 - 1e-6);
        sat_gap = std::max(sat_gap, (a.delta_max - b.delta_max) / b.delta_max);
      } catch (const Error& e) {
        sat_ok += e.code() == ErrorCode::InfeasibleSaturated;
      }
      ++sat;
    }
  }
  return {scenarios >= 10 && ok == scenarios && sat_ok == sat,
          fmt("unsaturated %d/%d within 1e-4 (max gap %.2g); saturated %d/%d with algorithm1 >= convex, max gap %.3g",
              ok, scenarios, max_gap, sat_ok, sat, sat_gap)};
}

// Not a criterion: how far the scheduler falls behind when the SNR threshold
// binds for the better devices.
void algorithm1_binding_note() {
  const SystemParams p = interference_limited();
  double gap = 0.0;
  for (double d : {1.4, 1.5, 1.6}) {
    const int cap = cluster::cluster_capacity(p, cluster_at(p, {d})).c_cap;
    std::vector<double> dist{d};
    for (int k = 1; k < cap; ++k) dist.push_back(1.0 + (d - 1.0) * k / cap);
    const auto devs = cluster_at(p, dist);
    gap = std::max(gap, rel(cluster::algorithm1(p, devs).delta_max, opt::solve_minmax(p, devs).delta_max));
  }
  std::printf("INFO algorithm1 gap with a binding SNR threshold (worst device 1.4-1.6 m, I = c_cap): %.3g\n", gap);
}

Outcome ibl_inferiority() {
  const SystemParams p;
  const std::vector<std::vector<double>> fixtures{{0.8}, {1.0}, {1.2}, {1.4}, {1.6}, {0.8, 1.6}, {1.0, 1.2, 1.4},
                                                  {0.8, 1.0, 1.2, 1.4, 1.6}};
  int ok = 0;
  double worst_ratio = INFINITY, worst_id = 0.0;
  for (const auto& f : fixtures) {
    const auto devs = cluster_at(p, f);
    const auto ibl = sim::ibl_baseline(p, devs);
    const auto convex = opt::solve_minmax(p, devs);
    bool good = convex.delta_max < ibl.delta_max;
    for (const auto& d : ibl.per_device) good = good && std::abs(d.eps - 0.5) <= 1e-9;
    const double m = ibl.policy.round_length();
    good = good && rel(ibl.delta_max, 2.5 * m) <= 1e-9;
    worst_id = std::max(worst_id, rel(ibl.delta_max, 2.5 * m));
    worst_ratio = std::min(worst_ratio, ibl.delta_max / convex.delta_max);
    ok += good;
  }
  return {ok == static_cast<int>(fixtures.size()),
          fmt("%d/%zu fixtures, min IBL/convex ratio %.3f, max |D - 2.5M|/D %.2g", ok, fixtures.size(), worst_ratio,
              worst_id)};
}

Outcome capacity_breakpoint() {
  const SystemParams p = interference_limited();
  bool pass = true;
  int previous_cap = 0;
  std::string detail;
  for (double d : {1.4, 1.5, 1.6}) {
    const int cap = cluster::cluster_capacity(p, cluster_at(p, {d})).c_cap;
    pass = pass && cap >= previous_cap;
    previous_cap = cap;
    std::vector<double> delta;
    for (int n = 1; n <= cap + 4; ++n) delta.push_back(opt::solve_minmax(p, cluster_at(p, std::vector<double>(n, d))).delta_max);
    double flat = 0.0;
    for (int n = 1; n <= cap; ++n) flat = std::max(flat, rel(delta[n - 1], delta[0]));
    bool rising = true;
    for (int n = cap + 1; n <= cap + 4; ++n) rising = rising && delta[n - 1] > delta[n - 2];
    pass = pass && flat <= 5e-3 && rising;
    detail += fmt("d=%.1f c_cap=%d flat %.2g %s; ", d, cap, flat, rising ? "rising" : "NOT rising");
  }
  return {pass, detail};
}

Outcome shift_invariance() {
  SystemParams p;
  p.h_i_db = -30.0;
  const auto devs = cluster_at(p, {1.0, 1.3, 1.6});
  const auto policy = cluster::round_policy(p, devs, opt::solve_minmax(p, devs).policy);
  const auto s = cluster::reconstruct_schedule(policy);
  sim::SimConfig cfg;
  cfg.rounds = 200'000;
  const auto base = sim::simulate(s, devs, p, cfg);
  int shifts = 0, same = 0;
  for (std::int64_t k = 1; k < s.round_length; k += 3) {
    const auto r = sim::simulate(s.shifted(k), devs, p, cfg);
    bool eq = true;
    for (std::size_t i = 0; i < devs.size(); ++i) eq = eq && r.per_device[i].time_avg_aoi == base.per_device[i].time_avg_aoi;
    same += eq;
    ++shifts;
  }
  return {same == shifts && shifts > 10, fmt("%d/%d shifts bit-identical (round %lld)", same, shifts, static_cast<long long>(s.round_length))};
}

Outcome multi_update() {
  bool pass = true;
  std::string detail;
  SystemParams literal;
  SystemParams weak;
  weak.h_i_db = -30.0;
  struct Case {
    SystemParams p;
    std::vector<double> dist;
    std::int64_t round_max, step;
  };
  const Case cases[] = {{literal, {1.0, 1.5}, 24, 1}, {literal, {0.8, 1.6}, 24, 1}, {weak, {1.0, 1.3}, 120, 8}};
  for (const auto& c : cases) {
    const auto devs = cluster_at(c.p, c.dist);
    const auto r = sim::exhaustive_multi_update_search(c.p, devs, c.round_max, c.step);
    pass = pass && std::isfinite(r.best_single) && r.best_multi >= r.best_single * (1 - 1e-12);
    detail += fmt("single %.6f multi %.6f (%llu schedules); ", r.best_single, r.best_multi,
                  static_cast<unsigned long long>(r.schedules));
  }
  return {pass, detail};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  int specs = 0, same = 0;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(AOISCHED_EXPERIMENT_DIR)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto spec = exp::parse_spec_file(f.string());
    const auto a = exp::run(spec, {1, false, false});
    const auto b = exp::run(spec, {4, false, false});
    same += exp::to_csv(a.rows, false) == exp::to_csv(b.rows, false) &&
            exp::to_json(a.rows, false) == exp::to_json(b.rows, false);
    ++specs;
  }
  return {specs > 0 && same == specs, fmt("%d/%d specs byte-identical across runs and thread counts", same, specs)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"fbl-boundary", fbl_boundary},
      {"closed-form-aoi", closed_form_aoi},
      {"hessian-suite", hessian_suite},
      {"global-optimality", global_optimality},
      {"algorithm1-optimality", algorithm1_check},
      {"ibl-inferiority", ibl_inferiority},
      {"capacity-breakpoint", capacity_breakpoint},
      {"shift-invariance", shift_invariance},
      {"multi-update", multi_update},
      {"determinism", determinism},
  };
  int failed = 0, index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), sec);
    std::fflush(stdout);
    failed += !o.pass;
    if (index == 5) algorithm1_binding_note();
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed ? 1 : 0;
}
