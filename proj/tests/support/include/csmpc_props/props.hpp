#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csmpc/model.hpp"
#include "csmpc/ocp.hpp"

namespace csmpc::props {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// High-accuracy adaptive integration of the unclamped dynamics over dt
/// (Dormand-Prince 5(4), tolerances 1e-13).
StateVec reference_step(const StateVec& x, const ControlInput& u, const UncertaintyVector& w, double dt);

/// Rollout of evaluate() computed with reference_step; J and g use the same
/// definitions as the production code.
OcpEvaluation reference_evaluate(const StateVec& x, const ControlSequence& u, const UncertaintyVector& w,
                                 const OcpConfig& cfg);

/// err(n) / err(2n) of step() against reference_step over a smooth stretch.
double rk4_order_factor(int substeps);

/// Worst relative error of gradient() against central differences (step
/// 1e-5) over `instances` random interior triples.
double gradient_fd_error(int instances, std::uint64_t seed);

/// Individual property checks.
Check check_rk4_order();
Check check_gradient();
Check check_kmeans_monotone();
Check check_kmeans_bruteforce();
Check check_cluster_weights();
Check check_fifo();
Check check_sampler_moments();
Check check_replay_determinism();

/// Every check above, in a fixed order.
std::vector<Check> run_property_suite();

}  // namespace csmpc::props
