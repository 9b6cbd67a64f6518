#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "csmpc/clustering.hpp"
#include "csmpc/ocp.hpp"
#include "csmpc/solver.hpp"

namespace csmpc {

struct SnmpcConfig {
  double eps_J = 0.1;
  double eps_g = 0.1;
  double rho = 10.0;  // linear slack penalty

  void validate() const;
};

/// (1 - eps) / eps * sqrt(variance).
double inflation(double eps, double variance);

struct SnmpcProblem {
  StateVec x;
  ClusterSummary summary;
  SnmpcConfig cfg;
  OcpConfig ocp;
};

/// The cluster-scenario problem over z = (u-sequence, mu).
///
/// Cost: sum_i p_i [J(u, w_i) + infl_J,i + rho * mu].
/// Constraints, one per cluster: g(u, w_i) + infl_g,i - mu <= 0, mu >= 0.
/// Every evaluation performs exactly one rollout per cluster.
class ClusterScenarioProblem {
 public:
  explicit ClusterScenarioProblem(SnmpcProblem problem);

  std::size_t dim() const { return 2 * static_cast<std::size_t>(p_.ocp.horizon) + 1; }
  std::size_t clusters() const { return p_.summary.size(); }
  const SnmpcProblem& problem() const { return p_; }

  /// Cost and gradient, no constraint terms.
  double objective(std::span<const double> z, std::span<double> grad) const;

  /// Cost, gradient, soft-min constraints and their Jacobian in one sweep.
  double evaluate(std::span<const double> z, std::span<double> grad, std::span<double> constraints,
                  std::span<double> jacobian) const;

  /// Exact constraint values g_i + infl_g,i - mu.
  void exact_constraints(std::span<const double> z, std::span<double> out) const;

  /// Bracketed per-cluster cost terms J_i + infl_J,i + rho * mu.
  std::vector<double> cluster_terms(std::span<const double> z) const;

  const std::vector<double>& cost_inflation() const { return infl_J_; }
  const std::vector<double>& constraint_inflation() const { return infl_g_; }
  /// Weighted sum of the cost inflation constants.
  double cost_offset() const;

  /// Number of single-cluster rollouts performed so far.
  std::size_t rollouts() const { return rollouts_; }

  PenaltyProblem penalty_problem() const;

 private:
  OcpEvaluation evaluate_ocp(std::size_t cluster, const ControlSequence& u) const;

  SnmpcProblem p_;
  std::vector<double> infl_J_;
  std::vector<double> infl_g_;
  mutable std::size_t rollouts_ = 0;
};

/// Objective callable of the cluster-scenario problem (cost only).
std::function<double(std::span<const double>, std::span<double>)> assemble_objective(
    const SnmpcProblem& p);

struct SnmpcSolution {
  ControlSequence u_star;
  double mu_star = 0.0;
  double J_stoch = 0.0;               // cost at the optimizer
  std::vector<double> per_cluster_g;  // raw g(u*, w_i)
  std::vector<double> inflation_g;    // infl_g,i
  double residual = 0.0;              // max_i max(0, g_i + infl_g,i - mu*)
  bool converged = false;
  int iterations = 0;
  double wall_ms = 0.0;
};

SnmpcSolution solve_snmpc(const SnmpcProblem& p, const SolverConfig& cfg,
                          const std::optional<ControlSequence>& warm = {});

}  // namespace csmpc
