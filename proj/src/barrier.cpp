#include "barrier.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <optional>

#include "aoisched/aoimodel.hpp"
#include "aoisched/fblmath.hpp"

namespace aoisched::opt::detail {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Mode { PhaseOne, MinUpdateTime };

double q_of(double eps) { return 2.0 * (1.0 - eps) / (3.0 - eps); }
double dq_of(double eps) { return -4.0 / ((3.0 - eps) * (3.0 - eps)); }
double d2q_of(double eps) { return -8.0 / ((3.0 - eps) * (3.0 - eps) * (3.0 - eps)); }

struct Evaluation {
  bool in_domain = false;
  double value = kInf;
  VectorXd grad;
  MatrixXd hess;
};

class LevelBarrier {
 public:
  LevelBarrier(const LevelContext& ctx, double level, Mode mode)
      : ctx_(ctx), level_(level), mode_(mode), devices_(static_cast<int>(ctx.devices.size())) {}

  int dim() const { return devices_ + 1 + (mode_ == Mode::PhaseOne ? 1 : 0); }
  int constraint_count() const { return 4 * devices_ + 1; }

  double objective(const VectorXd& y) const {
    if (mode_ == Mode::PhaseOne) return y[devices_ + 1];
    return y.segment(1, devices_).sum();
  }

  /// Largest M/L - q(eps_i); used to seed the phase-I slack.
  double worst_level_gap(const VectorXd& x) const {
    const double m = x.head(devices_ + 1).sum() * ctx_.scale;
    double worst = -kInf;
    for (int i = 0; i < devices_; ++i) {
      const double b = x[1 + i] * ctx_.scale;
      const double eps = fbl::eps_of(ctx_.devices[i].z, m - b, b, ctx_.params.d_bits);
      worst = std::max(worst, m / level_ - q_of(eps));
    }
    return worst;
  }

  Evaluation evaluate(const VectorXd& y, double t, bool derivatives) const {
    Evaluation out;
    const int nx = devices_ + 1;
    const int n = dim();
    const double scale = ctx_.scale;
    const double eps_max = ctx_.params.eps_max;
    const double gamma_th = ctx_.params.gamma_th;

    for (int k = 0; k < nx; ++k) {
      if (!(y[k] > 0.0)) return out;
    }
    const double m_scaled = y.head(nx).sum();
    const double m = m_scaled * scale;

    double value = t * objective(y);
    if (derivatives) {
      out.grad = VectorXd::Zero(n);
      out.hess = MatrixXd::Zero(n, n);
      if (mode_ == Mode::PhaseOne) {
        out.grad[nx] = t;
      } else {
        out.grad.segment(1, devices_).setConstant(t);
      }
      for (int k = 0; k < nx; ++k) {
        value -= std::log(y[k]);
        out.grad[k] -= 1.0 / y[k];
        out.hess(k, k) += 1.0 / (y[k] * y[k]);
      }
    } else {
      for (int k = 0; k < nx; ++k) value -= std::log(y[k]);
    }

    VectorXd da, db, de;
    MatrixXd he;
    if (derivatives) {
      da.resize(n);
      db.resize(n);
      de.resize(n);
    }

    for (int i = 0; i < devices_; ++i) {
      const double z = ctx_.devices[i].z;
      const double b_s = y[1 + i];
      const double a_s = m_scaled - b_s;
      // gamma >= gamma_th, written linearly and normalised.
      const double lin = (gamma_th * b_s - z * a_s) / (z + gamma_th);
      if (!(lin < 0.0)) return out;
      value -= std::log(-lin);

      const double a = a_s * scale;
      const double b = b_s * scale;
      const double eps = fbl::eps_of(z, a, b, ctx_.params.d_bits);
      const double eps_slack = eps_max - eps;
      if (!(eps_slack > 0.0)) return out;
      value -= std::log(eps_slack);

      double level_gap = m / level_ - q_of(eps);
      if (mode_ == Mode::PhaseOne) level_gap -= y[nx];
      if (!(level_gap < 0.0)) return out;
      value -= std::log(-level_gap);

      if (!derivatives) continue;

      da.setZero();
      da.head(nx).setOnes();
      da[1 + i] = 0.0;
      db.setZero();
      db[1 + i] = 1.0;

      const auto g = fbl::eps_gradient(z, a, b, ctx_.params.d_bits);
      const auto h = fbl::eps_hessian(z, a, b, ctx_.params.d_bits);
#ifndef NDEBUG
      if (eps > 1e-12 && eps <= 0.5 &&
          fbl::convexity_condition(fbl::FblPoint{z * a / b, b, ctx_.params.d_bits})) {
        const double sa = a * a, sb = b * b;
        const double det = h[0] * h[3] * sa * sb - h[1] * h[1] * sa * sb;
        const double ref = std::max(std::abs(h[0] * h[3]), h[1] * h[1]) * sa * sb;
        assert(det >= -1e-4 * ref - 1e-300);
      }
#endif
      de = (g[0] * scale) * da + (g[1] * scale) * db;
      he = (h[0] * scale * scale) * da * da.transpose() +
           (h[1] * scale * scale) * (da * db.transpose() + db * da.transpose()) +
           (h[3] * scale * scale) * db * db.transpose();

      // gamma constraint
      {
        const VectorXd dl = (gamma_th * db - z * da) / (z + gamma_th);
        out.grad += dl / (-lin);
        out.hess += dl * dl.transpose() / (lin * lin);
      }
      // eps <= eps_max
      out.grad += de / eps_slack;
      out.hess += de * de.transpose() / (eps_slack * eps_slack) + he / eps_slack;
      // level constraint
      {
        VectorXd dg = VectorXd::Zero(n);
        dg.head(nx).setConstant(scale / level_);
        dg -= dq_of(eps) * de;
        if (mode_ == Mode::PhaseOne) dg[nx] = -1.0;
        const MatrixXd hg = -d2q_of(eps) * de * de.transpose() - dq_of(eps) * he;
        out.grad += dg / (-level_gap);
        out.hess += dg * dg.transpose() / (level_gap * level_gap) + hg / (-level_gap);
      }
    }

    out.in_domain = std::isfinite(value);
    out.value = value;
    return out;
  }

 private:
  const LevelContext& ctx_;
  double level_;
  Mode mode_;
  int devices_;
};

VectorXd newton_direction(const Evaluation& e) {
  const int n = static_cast<int>(e.grad.size());
  double reg = 0.0;
  const double diag_scale = std::max(1e-300, e.hess.diagonal().cwiseAbs().maxCoeff());
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::LDLT<MatrixXd> ldlt(e.hess + reg * MatrixXd::Identity(n, n));
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      VectorXd step = ldlt.solve(-e.grad);
      if (step.allFinite() && e.grad.dot(step) < 0.0) return step;
    }
    reg = reg == 0.0 ? 1e-10 * diag_scale : reg * 10.0;
  }
  return -e.grad / diag_scale;
}

enum class CenterOutcome { Centered, FoundNegativeSlack, Stalled };

/// Damped Newton on the barrier at fixed t. In phase-I mode it returns early
/// once the slack variable turns negative.
CenterOutcome center(const LevelBarrier& barrier, VectorXd& y, double t, int& steps, int max_steps,
                     std::optional<int> slack_index) {
  for (int it = 0; it < max_steps; ++it) {
    const Evaluation e = barrier.evaluate(y, t, true);
    if (!e.in_domain) return CenterOutcome::Stalled;
    const VectorXd dy = newton_direction(e);
    const double decrement = -e.grad.dot(dy);
    if (decrement * 0.5 <= 1e-11) return CenterOutcome::Centered;

    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      VectorXd trial = y + alpha * dy;
      const Evaluation et = barrier.evaluate(trial, t, false);
      if (et.in_domain && et.value <= e.value - 0.25 * alpha * decrement) {
        y = std::move(trial);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++steps;
    if (!accepted) return CenterOutcome::Stalled;
    if (slack_index && y[*slack_index] < 0.0) return CenterOutcome::FoundNegativeSlack;
  }
  return CenterOutcome::Centered;
}

}  // namespace

double max_aoi(const LevelContext& ctx, const VectorXd& x) {
  const int devices = static_cast<int>(ctx.devices.size());
  const double m = x.head(devices + 1).sum() * ctx.scale;
  double worst = 0.0;
  for (int i = 0; i < devices; ++i) {
    const double b = x[1 + i] * ctx.scale;
    const double eps = fbl::eps_of(ctx.devices[i].z, m - b, b, ctx.params.d_bits);
    if (eps >= 1.0 - fbl::kEpsFloor) return kInf;
    worst = std::max(worst, aoi::avg_aoi(m, fbl::clamp_eps(eps)));
  }
  return worst;
}

bool strictly_inside(const LevelContext& ctx, const VectorXd& x) {
  const int devices = static_cast<int>(ctx.devices.size());
  for (int k = 0; k <= devices; ++k) {
    if (!(x[k] > 0.0)) return false;
  }
  const double m = x.head(devices + 1).sum() * ctx.scale;
  for (int i = 0; i < devices; ++i) {
    const double b = x[1 + i] * ctx.scale;
    const double a = m - b;
    if (!(ctx.devices[i].z * a > ctx.params.gamma_th * b)) return false;
    if (!(fbl::eps_of(ctx.devices[i].z, a, b, ctx.params.d_bits) < ctx.params.eps_max)) return false;
  }
  return true;
}

FeasibilityResult find_feasible(const LevelContext& ctx, double level, const VectorXd& x0,
                                const SolverOptions& options) {
  LevelBarrier barrier(ctx, level, Mode::PhaseOne);
  const int nx = static_cast<int>(x0.size());
  FeasibilityResult result;

  const double gap0 = barrier.worst_level_gap(x0);
  if (gap0 < 0.0) {
    result.feasible = true;
    result.x = x0;
    return result;
  }

  VectorXd y(nx + 1);
  y.head(nx) = x0;
  y[nx] = gap0 + 1.0;

  const double m = barrier.constraint_count();
  double t = 1.0;
  while (true) {
    const CenterOutcome outcome = center(barrier, y, t, result.newton_steps, options.max_newton_steps, nx);
    if (outcome == CenterOutcome::FoundNegativeSlack || y[nx] < 0.0) {
      result.feasible = true;
      result.x = y.head(nx);
      return result;
    }
    // The central point is within m/t of the optimal slack.
    if (y[nx] - m / t > 0.0) break;
    if (m / t < options.barrier_gap_tol) break;
    if (outcome == CenterOutcome::Stalled && m / t < 1e-6) break;
    t *= 20.0;
  }
  result.feasible = false;
  result.x = y.head(nx);
  return result;
}

VectorXd minimise_update_time(const LevelContext& ctx, double level, const VectorXd& x0,
                              const SolverOptions& options) {
  LevelBarrier barrier(ctx, level, Mode::MinUpdateTime);
  VectorXd y = x0;
  const double m = barrier.constraint_count();
  int steps = 0;
  double t = m / std::max(1e-12, barrier.objective(y));
  while (true) {
    const CenterOutcome outcome = center(barrier, y, t, steps, options.max_newton_steps, std::nullopt);
    if (outcome == CenterOutcome::Stalled) break;
    if (m / t < options.barrier_gap_tol * barrier.objective(y)) break;
    t *= 20.0;
  }
  return y;
}

}  // namespace aoisched::opt::detail
