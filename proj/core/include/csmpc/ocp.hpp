#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csmpc/model.hpp"

namespace csmpc {

/// Horizon-length sequence of control inputs.
///
/// The flat layout used by the optimizers is (u1(0), u2(0), u1(1), u2(1), ...).
class ControlSequence {
 public:
  ControlSequence() = default;
  explicit ControlSequence(std::size_t horizon) : steps_(horizon) {}
  explicit ControlSequence(std::vector<ControlInput> steps) : steps_(std::move(steps)) {}

  static ControlSequence from_flat(std::span<const double> flat);
  std::vector<double> flat() const;
  void write_flat(std::span<double> out) const;

  std::size_t size() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }
  ControlInput& operator[](std::size_t i) { return steps_[i]; }
  const ControlInput& operator[](std::size_t i) const { return steps_[i]; }
  const std::vector<ControlInput>& steps() const { return steps_; }

  bool admissible() const;

  /// Drops the first `count` inputs and pads the tail by repeating the last
  /// one, keeping the length.
  ControlSequence shifted(std::size_t count) const;

  bool operator==(const ControlSequence&) const = default;

 private:
  std::vector<ControlInput> steps_;
};

struct OcpConfig {
  int horizon = 10;        // N
  double tau = 0.2;        // days per step
  int substeps = 4;        // RK4 substeps per step
  double rho_f = 1000.0;   // terminal tumor weight
  double rho_u = 1.0;      // control effort weight
  double x2_min = 0.05;    // lymphocyte floor
  double rho = 10.0;       // slack penalty
  double softmin_width = 1e-3;

  void validate() const;
};

struct OcpEvaluation {
  double J = 0.0;
  double g = 0.0;  // x2_min - min_i x2(i); feasible when <= 0
  std::vector<StateVec> trajectory;  // N+1 states, trajectory[0] = x
};

/// Values and control sensitivities of the cost and the smoothed constraint.
struct OcpGradient {
  double J = 0.0;
  double g = 0.0;
  double g_smooth = 0.0;
  std::vector<double> dJ;         // 2N, flat control layout
  std::vector<double> dg_smooth;  // 2N
};

/// Rolls the model N steps with constant w and returns cost, constraint
/// indicator and the predicted trajectory.
OcpEvaluation evaluate(const StateVec& x, const ControlSequence& u, const UncertaintyVector& w,
                       const OcpConfig& cfg);

/// Cost and soft-min constraint with exact discrete-adjoint gradients of the
/// clamped RK4 rollout. Clamped components carry zero sensitivity.
OcpGradient gradient(const StateVec& x, const ControlSequence& u, const UncertaintyVector& w,
                     const OcpConfig& cfg);

/// Soft-min constraint surrogate x2_min + s * log(sum_i exp(-x2(i)/s)) over
/// i = 1..N; never below the hard indicator and at most s*log(N) above it.
double smooth_constraint(std::span<const StateVec> trajectory, const OcpConfig& cfg);

}  // namespace csmpc
