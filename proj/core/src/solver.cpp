#include "csmpc/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace csmpc {

void SolverConfig::validate() const {
  if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be > 0");
  if (memory < 1) throw std::invalid_argument("SolverConfig: memory must be >= 1");
  if (!(mu_penalty_growth > 1.0)) throw std::invalid_argument("SolverConfig: penalty growth must be > 1");
  if (!(penalty_initial > 0.0) || penalty_max < penalty_initial)
    throw std::invalid_argument("SolverConfig: invalid penalty range");
  if (!(mu_max > 0.0)) throw std::invalid_argument("SolverConfig: mu_max must be > 0");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void project(std::span<double> z, const std::vector<double>& lo, const std::vector<double>& hi) {
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = std::clamp(z[i], lo[i], hi[i]);
}

double projected_gradient_norm(std::span<const double> z, std::span<const double> g,
                               const std::vector<double>& lo, const std::vector<double>& hi) {
  double norm = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double p = std::clamp(z[i] - g[i], lo[i], hi[i]) - z[i];
    norm = std::max(norm, std::abs(p));
  }
  return norm;
}

struct Pair {
  std::vector<double> s, y;
};

// Two-loop recursion restricted to the free variables: returns -H_F g_F, zero
// on frozen components. Pairs with non-positive restricted curvature are
// skipped.
std::vector<double> quasi_newton_direction(std::span<const double> g, const std::deque<Pair>& mem,
                                           const std::vector<bool>& active) {
  const std::size_t n = g.size();
  auto masked_dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (!active[i]) s += a[i] * b[i];
    return s;
  };
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = active[i] ? 0.0 : g[i];

  std::vector<double> rho(mem.size(), 0.0), alpha(mem.size(), 0.0);
  double gamma = 0.0;
  for (std::size_t k = 0; k < mem.size(); ++k) {
    const double sy = masked_dot(mem[k].s, mem[k].y);
    const double yy = masked_dot(mem[k].y, mem[k].y);
    if (sy > 1e-12 * yy && yy > 0.0) {
      rho[k] = 1.0 / sy;
      gamma = sy / yy;
    }
  }
  for (std::size_t k = mem.size(); k-- > 0;) {
    if (rho[k] == 0.0) continue;
    alpha[k] = rho[k] * masked_dot(mem[k].s, q);
    for (std::size_t i = 0; i < n; ++i)
      if (!active[i]) q[i] -= alpha[k] * mem[k].y[i];
  }
  if (gamma > 0.0)
    for (double& qi : q) qi *= gamma;
  for (std::size_t k = 0; k < mem.size(); ++k) {
    if (rho[k] == 0.0) continue;
    const double beta = rho[k] * masked_dot(mem[k].y, q);
    for (std::size_t i = 0; i < n; ++i)
      if (!active[i]) q[i] += mem[k].s[i] * (alpha[k] - beta);
  }
  for (double& qi : q) qi = -qi;
  return q;
}

}  // namespace

SolveResult solve(const NlpProblem& p, std::span<const double> z0, const SolverConfig& cfg) {
  CurvatureMemory memory;
  return solve(p, z0, cfg, memory);
}

SolveResult solve(const NlpProblem& p, std::span<const double> z0, const SolverConfig& cfg,
                  CurvatureMemory& memory) {
  const auto t0 = Clock::now();
  const std::size_t n = p.dim;
  if (p.lower.size() != n || p.upper.size() != n || z0.size() != n)
    throw std::invalid_argument("solve: dimension mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (p.lower[i] > p.upper[i]) throw std::invalid_argument("solve: lower bound above upper bound");

  SolveResult res;
  std::vector<double> z(z0.begin(), z0.end());
  project(z, p.lower, p.upper);
  std::vector<double> g(n);
  double f = p.objective(z, g);
  res.evaluations = 1;
  if (!std::isfinite(f)) throw std::runtime_error("solve: objective not finite at the initial point");

  std::deque<Pair> mem;
  for (std::size_t k = 0; k < memory.s.size() && k < memory.y.size(); ++k)
    if (memory.s[k].size() == n && memory.y[k].size() == n) mem.push_back({memory.s[k], memory.y[k]});
  while (mem.size() > static_cast<std::size_t>(cfg.memory)) mem.pop_front();
  std::vector<double> z_trial(n), g_trial(n), d;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 40;
  // Quasi-Newton steps may grow by at most this factor over the previous move,
  // which guards against curvature pairs collected across a penalty kink.
  constexpr double kLimitGrowth = 100.0;
  constexpr double kLimitFloor = 1e-10;
  double step_limit = std::numeric_limits<double>::infinity();

  int iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    res.projected_gradient = projected_gradient_norm(z, g, p.lower, p.upper);
    if (res.projected_gradient <= cfg.tol * std::max(1.0, std::abs(f))) {
      res.converged = true;
      break;
    }

    // Variables held at a bound by the gradient are frozen for this step.
    std::vector<bool> active(n);
    for (std::size_t i = 0; i < n; ++i)
      active[i] = (z[i] <= p.lower[i] && g[i] > 0.0) || (z[i] >= p.upper[i] && g[i] < 0.0);

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const bool steepest = attempt == 1 || mem.empty();
      if (steepest) {
        d.assign(g.begin(), g.end());
        for (double& di : d) di = -di;
      } else {
        d = quasi_newton_direction(g, mem, active);
      }
      for (std::size_t i = 0; i < n; ++i)
        if (active[i]) d[i] = 0.0;
      if (!steepest && dot(d, g) >= 0.0) continue;

      // First trial moves no component further than the step limit.
      double dmax = 0.0;
      for (double di : d) dmax = std::max(dmax, std::abs(di));
      const double limit = steepest ? 1.0 : step_limit;
      double step = dmax > limit ? limit / dmax : 1.0;
      for (int bt = 0; bt < kMaxBacktracks; ++bt) {
        for (std::size_t i = 0; i < n; ++i) z_trial[i] = z[i] + step * d[i];
        project(z_trial, p.lower, p.upper);
        double decrease = 0.0;
        for (std::size_t i = 0; i < n; ++i) decrease += g[i] * (z_trial[i] - z[i]);
        if (decrease >= 0.0) break;
        double f_trial;
        try {
          f_trial = p.objective(z_trial, g_trial);
        } catch (const IntegrationError&) {
          ++res.evaluations;
          step *= 0.5;
          continue;
        }
        ++res.evaluations;
        if (!std::isfinite(f_trial)) {
          step *= 0.5;
          continue;
        }
        if (f_trial > f + kArmijo * decrease) {
          // Minimizer of the quadratic through f, the slope and f_trial, safeguarded.
          const double curvature = f_trial - f - decrease;
          const double ratio = curvature > 0.0 ? -decrease / (2.0 * curvature) : 0.5;
          step *= std::clamp(ratio, 0.1, 0.5);
          continue;
        }
        Pair pr;
        pr.s.resize(n);
        pr.y.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          pr.s[i] = z_trial[i] - z[i];
          pr.y[i] = g_trial[i] - g[i];
        }
        const double sy = dot(pr.s, pr.y);
        if (sy > 1e-12 * std::sqrt(dot(pr.s, pr.s) * dot(pr.y, pr.y))) {
          mem.push_back(std::move(pr));
          if (mem.size() > static_cast<std::size_t>(cfg.memory)) mem.pop_front();
        }
        double moved = 0.0;
        for (std::size_t i = 0; i < n; ++i) moved = std::max(moved, std::abs(z_trial[i] - z[i]));
        step_limit = std::max(kLimitGrowth * moved, kLimitFloor);
        z.swap(z_trial);
        g.swap(g_trial);
        f = f_trial;
        accepted = true;
        break;
      }
      if (!accepted) mem.clear();
    }
    if (!accepted) break;
  }

  if (iter == cfg.max_iter) {
    res.projected_gradient = projected_gradient_norm(z, g, p.lower, p.upper);
    res.converged = res.projected_gradient <= cfg.tol * std::max(1.0, std::abs(f));
  }
  memory.s.clear();
  memory.y.clear();
  for (auto& pr : mem) {
    memory.s.push_back(std::move(pr.s));
    memory.y.push_back(std::move(pr.y));
  }
  res.iterations = iter;
  res.z_star = std::move(z);
  res.f_star = f;
  res.wall_time = seconds_since(t0);
  return res;
}

double optimal_slack(std::span<const double> a, double linear, double quadratic, double penalty,
                     double mu_max) {
  if (linear < 0.0 || quadratic < 0.0 || !(penalty > 0.0))
    throw std::invalid_argument("optimal_slack: invalid coefficients");
  // phi'(mu) = linear + 2 quadratic mu - 2 penalty sum_{a_j > mu} (a_j - mu) is
  // non-decreasing; walk the breakpoints from the largest a_j downwards.
  std::vector<double> sorted(a.begin(), a.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  auto slope = [&](double mu) {
    double d = linear + 2.0 * quadratic * mu;
    for (double aj : sorted) {
      if (aj <= mu) break;
      d -= 2.0 * penalty * (aj - mu);
    }
    return d;
  };
  if (slope(0.0) >= 0.0) return 0.0;
  if (slope(mu_max) <= 0.0) return mu_max;
  double sum = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    sum += sorted[k];
    const double next = k + 1 < sorted.size() ? sorted[k + 1] : -std::numeric_limits<double>::infinity();
    const double kk = static_cast<double>(k + 1);
    const double mu = (2.0 * penalty * sum - linear) / (2.0 * quadratic + 2.0 * penalty * kk);
    if (mu >= std::max(next, 0.0) && mu <= sorted[k]) return std::min(mu, mu_max);
  }
  return 0.0;
}

PenaltySolveResult solve_penalized(const PenaltyProblem& p, std::span<const double> z0,
                                   const SolverConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const std::size_t n = p.dim;
  const std::size_t m = p.num_constraints;
  if (p.lower.size() != n || p.upper.size() != n || z0.size() != n)
    throw std::invalid_argument("solve_penalized: dimension mismatch");
  const bool eliminate = p.slack.has_value();
  if (eliminate && (n < 2 || m < 1)) throw std::invalid_argument("solve_penalized: slack needs a constraint");
  const std::size_t nz = eliminate ? n - 1 : n;

  std::vector<double> full(z0.begin(), z0.end()), cost_grad(n), cons(m), jac(m * n), exact(m);
  double penalty = cfg.penalty_initial;

  // With an eliminated slack, evaluate at mu = 0 to read a_j = c_j + mu and
  // the slack-free cost, then add the optimal slack contribution.
  auto slack_at = [&](std::span<const double> z) {
    std::copy(z.begin(), z.end(), full.begin());
    full[n - 1] = 0.0;
    const double cost = p.evaluate(full, cost_grad, cons, jac);
    const double mu = optimal_slack(cons, p.slack->linear, p.slack->quadratic, penalty, p.upper[n - 1]);
    full[n - 1] = mu;
    return std::pair{cost, mu};
  };

  NlpProblem inner;
  inner.dim = nz;
  inner.lower.assign(p.lower.begin(), p.lower.begin() + static_cast<std::ptrdiff_t>(nz));
  inner.upper.assign(p.upper.begin(), p.upper.begin() + static_cast<std::ptrdiff_t>(nz));
  inner.objective = [&](std::span<const double> z, std::span<double> grad) {
    double f = 0.0;
    double mu = 0.0;
    if (eliminate) {
      const auto [cost, mu_star] = slack_at(z);
      mu = mu_star;
      f = cost + p.slack->linear * mu + p.slack->quadratic * mu * mu;
    } else {
      f = p.evaluate(z, cost_grad, cons, jac);
    }
    std::copy_n(cost_grad.begin(), nz, grad.begin());
    for (std::size_t j = 0; j < m; ++j) {
      const double c = cons[j] - mu;
      if (c <= 0.0) continue;
      f += penalty * c * c;
      const double scale = 2.0 * penalty * c;
      for (std::size_t i = 0; i < nz; ++i) grad[i] += scale * jac[j * n + i];
    }
    return f;
  };

  auto residual_at = [&](std::span<const double> z) {
    p.exact(z, exact);
    double r = 0.0;
    for (double c : exact) r = std::max(r, c);
    return r;
  };

  PenaltySolveResult out;
  std::vector<double> z(z0.begin(), z0.begin() + static_cast<std::ptrdiff_t>(nz));
  CurvatureMemory memory;
  // Intermediate stages are solved loosely; the stage that meets the residual
  // target (or the cap) is then polished to the full tolerance.
  SolverConfig loose = cfg;
  loose.tol = std::max(cfg.tol, cfg.stage_tol);
  auto run_stage = [&](const SolverConfig& c) {
    out.inner = solve(inner, z, c, memory);
    out.total_iterations += out.inner.iterations;
    out.total_evaluations += out.inner.evaluations;
    z = out.inner.z_star;
    if (eliminate) {
      slack_at(z);
      out.inner.z_star = full;
    }
    out.residual = residual_at(out.inner.z_star);
    out.penalty = penalty;
  };
  auto done = [&] { return out.residual <= cfg.residual_target || penalty >= cfg.penalty_max; };
  while (true) {
    run_stage(loose);
    if (done() && loose.tol > cfg.tol) run_stage(cfg);
    out.residual_history.push_back(out.residual);
    if (done()) break;
    penalty = std::min(penalty * cfg.mu_penalty_growth, cfg.penalty_max);
  }
  out.cost = p.evaluate(out.inner.z_star, cost_grad, cons, jac);
  out.converged = out.inner.converged && out.residual <= cfg.residual_accept;
  out.wall_time = seconds_since(t0);
  return out;
}

void control_slack_bounds(int horizon, double mu_max, std::vector<double>& lower,
                          std::vector<double>& upper) {
  const std::size_t n = 2 * static_cast<std::size_t>(horizon) + 1;
  lower.assign(n, 0.0);
  upper.assign(n, 0.0);
  for (int i = 0; i < horizon; ++i) {
    upper[2 * i] = ControlInput::kImmuneMax;
    upper[2 * i + 1] = ControlInput::kChemoMax;
  }
  upper[n - 1] = mu_max;
}

SolveRecord solve_nominal(const StateVec& x, const UncertaintyVector& w, const OcpConfig& ocp,
                          const SolverConfig& cfg, const std::optional<ControlSequence>& warm) {
  ocp.validate();
  const int horizon = ocp.horizon;
  const std::size_t nu = 2 * static_cast<std::size_t>(horizon);

  PenaltyProblem p;
  p.dim = nu + 1;
  p.num_constraints = 1;
  control_slack_bounds(horizon, cfg.mu_max, p.lower, p.upper);
  p.evaluate = [&](std::span<const double> z, std::span<double> grad, std::span<double> cons,
                   std::span<double> jac) {
    const auto u = ControlSequence::from_flat(z.first(nu));
    const double mu = z[nu];
    const OcpGradient og = gradient(x, u, w, ocp);
    std::copy(og.dJ.begin(), og.dJ.end(), grad.begin());
    grad[nu] = 2.0 * ocp.rho * mu;
    cons[0] = og.g_smooth - mu;
    std::copy(og.dg_smooth.begin(), og.dg_smooth.end(), jac.begin());
    jac[nu] = -1.0;
    return og.J + ocp.rho * mu * mu;
  };
  p.exact = [&](std::span<const double> z, std::span<double> cons) {
    const auto u = ControlSequence::from_flat(z.first(nu));
    cons[0] = evaluate(x, u, w, ocp).g - z[nu];
  };
  p.slack = PenaltyProblem::Slack{0.0, ocp.rho};

  std::vector<double> z0(nu + 1, 0.0);
  if (warm) {
    if (warm->size() != static_cast<std::size_t>(horizon))
      throw std::invalid_argument("solve_nominal: warm start has the wrong length");
    warm->write_flat(std::span<double>(z0).first(nu));
  }

  const PenaltySolveResult r = solve_penalized(p, z0, cfg);

  SolveRecord rec;
  rec.w = w;
  rec.u_star = ControlSequence::from_flat(std::span<const double>(r.inner.z_star).first(nu));
  rec.mu_star = r.inner.z_star[nu];
  const OcpEvaluation ev = evaluate(x, rec.u_star, w, ocp);
  rec.J_star = ev.J;
  rec.g_star = ev.g;
  rec.residual = std::max(0.0, ev.g - rec.mu_star);
  rec.converged = r.converged;
  rec.iterations = r.total_iterations;
  rec.wall_ms = 1e3 * r.wall_time;
  return rec;
}

}  // namespace csmpc
