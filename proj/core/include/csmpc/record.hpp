#pragma once

#include "csmpc/model.hpp"
#include "csmpc/ocp.hpp"

namespace csmpc {

/// One per-sample solve: the uncertainty vector, the optimal control
/// sequence and the unpenalized cost and constraint indicator there.
struct SolveRecord {
  UncertaintyVector w;
  ControlSequence u_star;
  double J_star = 0.0;
  double g_star = 0.0;
  double mu_star = 0.0;
  int origin_step = 0;  // control period that produced the record
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  // max(0, g_star - mu_star)
  double wall_ms = 0.0;
};

}  // namespace csmpc
