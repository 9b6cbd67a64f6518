#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "csmpc/clustering.hpp"
#include "csmpc/model.hpp"
#include "csmpc/ocp.hpp"
#include "csmpc/sampling.hpp"
#include "csmpc/snmpc.hpp"
#include "csmpc/solver.hpp"

namespace csmpc {

enum class ControllerKind { nominal, stochastic };

std::string to_string(ControllerKind c);
ControllerKind controller_from_string(const std::string& s);

struct SimConfig {
  double tau = 0.2;
  int steps_per_update = 5;
  double duration = 40.0;
  StateVec x0{{1.0, 0.15, 0.0, 1.0}};
  ControllerKind controller = ControllerKind::nominal;
  int N_n = 25;
  int q = 4;
  OcpConfig ocp;
  SnmpcConfig snmpc;
  SamplerConfig sampler;
  ClusteringConfig clustering;
  SolverConfig solver;
  std::uint64_t buffer_stream = kBufferStreamBase;
  /// Re-evaluate each record's cost against its origin state on insertion.
  bool verify_records = false;
  /// Measure solve wall-times; when off every recorded time is zero.
  bool record_timing = true;

  void validate() const;
  int periods() const;
};

/// What happened in one control period.
struct PeriodLog {
  int period = 0;
  double time = 0.0;
  double solve_ms = 0.0;          // controller optimization only
  double sample_solve_ms = 0.0;   // the N_n per-sample solves (stochastic)
  bool converged = false;
  bool failed = false;            // solver threw; previous input held
  bool cold_start = false;        // stochastic controller without a clustering
  int iterations = 0;             // inner solver iterations, all penalty stages
  double mu = 0.0;
  double residual = 0.0;          // controller constraint residual
  std::size_t buffer_size = 0;
  std::size_t samples_accepted = 0;
  double max_sample_residual = 0.0;  // over accepted per-sample solves
  ClusterSummary summary;
};

struct ClosedLoopTrace {
  ControllerKind controller = ControllerKind::nominal;
  std::vector<double> times;          // one per state
  std::vector<StateVec> states;       // size steps + 1
  std::vector<ControlInput> controls; // size steps; controls[i] acts on [times[i], times[i+1])
  std::vector<int> period_of_step;    // size steps
  std::vector<PeriodLog> periods;
  double terminal_tumor = 0.0;
  double min_lymphocytes = 0.0;
  bool violated = false;
  bool failed = false;                // plant integration failed; trace truncated
  std::string error;

  double mean_solve_ms() const;
};

ClosedLoopTrace run_nominal(const UncertaintyVector& true_w, const SimConfig& cfg);
ClosedLoopTrace run_stochastic(const UncertaintyVector& true_w, const SimConfig& cfg);
ClosedLoopTrace run(const UncertaintyVector& true_w, const SimConfig& cfg);

/// Columnar text: time,x1,x2,x3,x4,u1,u2,solve_ms,converged; one row per tau.
/// The final row carries the terminal state with empty control fields.
void write_trace(std::ostream& os, const ClosedLoopTrace& trace);

}  // namespace csmpc
