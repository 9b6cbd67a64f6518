#include "csmpc/snmpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace csmpc {

void SnmpcConfig::validate() const {
  if (!(eps_J > 0.0 && eps_J < 1.0) || !(eps_g > 0.0 && eps_g < 1.0))
    throw std::invalid_argument("SnmpcConfig: eps_J and eps_g must lie in (0,1)");
  if (rho < 0.0) throw std::invalid_argument("SnmpcConfig: rho must be >= 0");
}

double inflation(double eps, double variance) { return (1.0 - eps) / eps * std::sqrt(variance); }

ClusterScenarioProblem::ClusterScenarioProblem(SnmpcProblem problem) : p_(std::move(problem)) {
  p_.cfg.validate();
  p_.ocp.validate();
  if (p_.summary.empty()) throw std::invalid_argument("ClusterScenarioProblem: empty cluster summary");
  for (const auto& c : p_.summary.clusters) {
    infl_J_.push_back(inflation(p_.cfg.eps_J, c.sigma_J));
    infl_g_.push_back(inflation(p_.cfg.eps_g, c.sigma_g));
  }
}

double ClusterScenarioProblem::evaluate(std::span<const double> z, std::span<double> grad,
                                        std::span<double> constraints, std::span<double> jacobian) const {
  const std::size_t nu = dim() - 1;
  const auto u = ControlSequence::from_flat(z.first(nu));
  const double mu = z[nu];
  std::fill(grad.begin(), grad.end(), 0.0);
  double value = 0.0;
  for (std::size_t i = 0; i < clusters(); ++i) {
    const auto& c = p_.summary.clusters[i];
    const OcpGradient og = gradient(p_.x, u, c.w_center, p_.ocp);
    ++rollouts_;
    value += c.p * (og.J + infl_J_[i] + p_.cfg.rho * mu);
    for (std::size_t k = 0; k < nu; ++k) grad[k] += c.p * og.dJ[k];
    grad[nu] += c.p * p_.cfg.rho;
    if (!constraints.empty()) {
      constraints[i] = og.g_smooth + infl_g_[i] - mu;
      auto row = jacobian.subspan(i * dim(), dim());
      std::copy(og.dg_smooth.begin(), og.dg_smooth.end(), row.begin());
      row[nu] = -1.0;
    }
  }
  return value;
}

double ClusterScenarioProblem::objective(std::span<const double> z, std::span<double> grad) const {
  return evaluate(z, grad, {}, {});
}

void ClusterScenarioProblem::exact_constraints(std::span<const double> z, std::span<double> out) const {
  const std::size_t nu = dim() - 1;
  const auto u = ControlSequence::from_flat(z.first(nu));
  for (std::size_t i = 0; i < clusters(); ++i) {
    const OcpEvaluation ev = evaluate_ocp(i, u);
    out[i] = ev.g + infl_g_[i] - z[nu];
  }
}

std::vector<double> ClusterScenarioProblem::cluster_terms(std::span<const double> z) const {
  const std::size_t nu = dim() - 1;
  const auto u = ControlSequence::from_flat(z.first(nu));
  std::vector<double> out;
  for (std::size_t i = 0; i < clusters(); ++i)
    out.push_back(evaluate_ocp(i, u).J + infl_J_[i] + p_.cfg.rho * z[nu]);
  return out;
}

double ClusterScenarioProblem::cost_offset() const {
  double offset = 0.0;
  for (std::size_t i = 0; i < clusters(); ++i) offset += p_.summary.clusters[i].p * infl_J_[i];
  return offset;
}

OcpEvaluation ClusterScenarioProblem::evaluate_ocp(std::size_t cluster, const ControlSequence& u) const {
  ++rollouts_;
  return csmpc::evaluate(p_.x, u, p_.summary.clusters[cluster].w_center, p_.ocp);
}

PenaltyProblem ClusterScenarioProblem::penalty_problem() const {
  PenaltyProblem pp;
  pp.dim = dim();
  pp.num_constraints = clusters();
  // The inflation constants do not move the minimizer; leaving them out keeps
  // the relative stopping test on the same scale as the nominal problem.
  const double offset = cost_offset();
  pp.evaluate = [this, offset](std::span<const double> z, std::span<double> grad, std::span<double> cons,
                               std::span<double> jac) { return evaluate(z, grad, cons, jac) - offset; };
  pp.exact = [this](std::span<const double> z, std::span<double> cons) { exact_constraints(z, cons); };
  return pp;
}

std::function<double(std::span<const double>, std::span<double>)> assemble_objective(
    const SnmpcProblem& p) {
  auto problem = std::make_shared<ClusterScenarioProblem>(p);
  return [problem](std::span<const double> z, std::span<double> grad) {
    return problem->objective(z, grad);
  };
}

SnmpcSolution solve_snmpc(const SnmpcProblem& p, const SolverConfig& cfg,
                          const std::optional<ControlSequence>& warm) {
  const auto t0 = std::chrono::steady_clock::now();
  const ClusterScenarioProblem problem(p);
  const std::size_t nu = problem.dim() - 1;

  PenaltyProblem pp = problem.penalty_problem();
  control_slack_bounds(p.ocp.horizon, cfg.mu_max, pp.lower, pp.upper);
  pp.slack = PenaltyProblem::Slack{p.cfg.rho, 0.0};

  std::vector<double> z0(problem.dim(), 0.0);
  if (warm) {
    if (warm->size() != static_cast<std::size_t>(p.ocp.horizon))
      throw std::invalid_argument("solve_snmpc: warm start has the wrong length");
    warm->write_flat(std::span<double>(z0).first(nu));
  }

  const PenaltySolveResult r = solve_penalized(pp, z0, cfg);

  SnmpcSolution s;
  s.u_star = ControlSequence::from_flat(std::span<const double>(r.inner.z_star).first(nu));
  s.mu_star = r.inner.z_star[nu];
  s.J_stoch = r.cost + problem.cost_offset();
  s.inflation_g = problem.constraint_inflation();
  for (std::size_t i = 0; i < problem.clusters(); ++i) {
    const double g = evaluate(p.x, s.u_star, p.summary.clusters[i].w_center, p.ocp).g;
    s.per_cluster_g.push_back(g);
    s.residual = std::max(s.residual, g + s.inflation_g[i] - s.mu_star);
  }
  s.converged = r.converged;
  s.iterations = r.total_iterations;
  s.wall_ms = 1e3 * std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

}  // namespace csmpc
