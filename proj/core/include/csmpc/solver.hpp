#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "csmpc/model.hpp"
#include "csmpc/ocp.hpp"
#include "csmpc/record.hpp"

namespace csmpc {

/// Smooth objective over a box. The callback returns f(z) and writes the
/// gradient into its second argument.
struct NlpProblem {
  std::size_t dim = 0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::function<double(std::span<const double>, std::span<double>)> objective;
};

struct SolverConfig {
  int max_iter = 200;
  /// Projected-gradient tolerance, scaled by max(1, |f|).
  double tol = 1e-6;
  int memory = 10;

  // Penalty layer used for the constrained controller problems.
  double mu_penalty_growth = 10.0;
  double penalty_initial = 1e2;
  double penalty_max = 1e6;
  double stage_tol = 1e-3;         // inner tolerance before the final penalty stage
  double residual_target = 1e-4;   // escalation stops once max(0, g - mu) is below this
  double residual_accept = 1e-3;   // solves above this are flagged not converged
  double mu_max = 10.0;

  void validate() const;
};

struct SolveResult {
  std::vector<double> z_star;
  double f_star = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  double projected_gradient = 0.0;
  double wall_time = 0.0;  // seconds
};

/// Projected limited-memory quasi-Newton minimization over the box.
///
/// Iterates stay inside the box. Terminates when the infinity norm of the
/// projected gradient step falls below tol * max(1, |f|), after max_iter
/// iterations, or when the projected Armijo search fails along both the
/// quasi-Newton and the steepest-descent directions. Deterministic.
SolveResult solve(const NlpProblem& p, std::span<const double> z0, const SolverConfig& cfg);

/// Curvature pairs kept between related solves (penalty stages).
struct CurvatureMemory {
  std::vector<std::vector<double>> s, y;
};

/// As above, seeding the quasi-Newton memory from `memory` and leaving the
/// final pairs in it.
SolveResult solve(const NlpProblem& p, std::span<const double> z0, const SolverConfig& cfg,
                  CurvatureMemory& memory);

/// Box problem with smooth inequality constraints c_j(z) <= 0, folded into
/// the objective as P * sum_j max(0, c_j)^2 with P escalated geometrically.
struct PenaltyProblem {
  std::size_t dim = 0;
  std::size_t num_constraints = 0;
  std::vector<double> lower;
  std::vector<double> upper;
  /// Returns the cost, writes its gradient, the smooth constraint values and
  /// their row-major Jacobian (num_constraints x dim).
  std::function<double(std::span<const double> z, std::span<double> cost_grad,
                       std::span<double> constraints, std::span<double> jacobian)>
      evaluate;
  /// Exact (non-smoothed) constraint values used for the residual test.
  std::function<void(std::span<const double> z, std::span<double> constraints)> exact;

  /// Shared slack held in the last decision entry: it enters the cost as
  /// linear * mu + quadratic * mu^2 and every constraint as c_j = a_j - mu.
  /// When set, mu is minimized in closed form for each candidate of the
  /// remaining entries and the quasi-Newton iteration runs over those only.
  struct Slack {
    double linear = 0.0;
    double quadratic = 0.0;
  };
  std::optional<Slack> slack;
};

/// Minimizer over mu in [0, mu_max] of
/// linear * mu + quadratic * mu^2 + penalty * sum_j max(0, a_j - mu)^2.
double optimal_slack(std::span<const double> a, double linear, double quadratic, double penalty,
                     double mu_max);

struct PenaltySolveResult {
  SolveResult inner;                     // last stage; z_star is the final iterate
  double cost = 0.0;                     // unpenalized cost at z_star
  double residual = 0.0;                 // max_j max(0, exact c_j) at z_star
  double penalty = 0.0;                  // final P
  std::vector<double> residual_history;  // one entry per stage
  int total_iterations = 0;
  int total_evaluations = 0;
  bool converged = false;
  double wall_time = 0.0;
};

PenaltySolveResult solve_penalized(const PenaltyProblem& p, std::span<const double> z0,
                                   const SolverConfig& cfg);

/// Deterministic per-sample problem: min over (u, mu >= 0) of
/// J(u, w) + rho * mu^2 subject to g(u, w) <= mu, single shooting.
///
/// Cold starts use all-zero controls. The slack is eliminated in closed
/// form inside every penalty stage, so it needs no initial guess. J_star and
/// g_star in the record are the unpenalized evaluate() outputs at the
/// optimizer.
SolveRecord solve_nominal(const StateVec& x, const UncertaintyVector& w, const OcpConfig& ocp,
                          const SolverConfig& cfg, const std::optional<ControlSequence>& warm = {});

/// Box bounds of the (u-sequence, mu) decision vector.
void control_slack_bounds(int horizon, double mu_max, std::vector<double>& lower,
                          std::vector<double>& upper);

}  // namespace csmpc
