#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace csmpc {

/// Normalized state of the combined-therapy model.
///
/// Components are populations divided by 1e9 (tumor, circulating
/// lymphocytes, effector immune cells) and the dimensionless drug
/// concentration.
struct StateVec {
  std::array<double, 4> v{};

  static constexpr std::size_t kTumor = 0;
  static constexpr std::size_t kLymphocytes = 1;
  static constexpr std::size_t kDrug = 2;
  static constexpr std::size_t kEffector = 3;

  constexpr double& operator[](std::size_t i) { return v[i]; }
  constexpr double operator[](std::size_t i) const { return v[i]; }

  constexpr double tumor() const { return v[kTumor]; }
  constexpr double lymphocytes() const { return v[kLymphocytes]; }
  constexpr double drug() const { return v[kDrug]; }
  constexpr double effector() const { return v[kEffector]; }

  bool operator==(const StateVec&) const = default;
};

/// Immune-cell and chemotherapy introduction rates.
struct ControlInput {
  double immune = 0.0;  // u1 in [0, 5]
  double chemo = 0.0;   // u2 in [0, 1]

  static constexpr double kImmuneMax = 5.0;
  static constexpr double kChemoMax = 1.0;

  bool admissible() const {
    return immune >= 0.0 && immune <= kImmuneMax && chemo >= 0.0 && chemo <= kChemoMax;
  }

  bool operator==(const ControlInput&) const = default;
};

/// The 13 uncertain model parameters, in the order
/// (a, b, c1, k3, delta, k2, s2, gamma0, g, r, p0, k1, s1).
struct UncertaintyVector {
  enum Index : std::size_t { a, b, c1, k3, delta, k2, s2, gamma0, g, r, p0, k1, s1, kCount };

  std::array<double, kCount> values{};

  constexpr double& operator[](std::size_t i) { return values[i]; }
  constexpr double operator[](std::size_t i) const { return values[i]; }

  bool all_positive() const;

  bool operator==(const UncertaintyVector&) const = default;
};

inline constexpr std::size_t kNumUncertain = UncertaintyVector::kCount;

/// Parameter names, aligned with UncertaintyVector::Index.
const std::array<std::string, kNumUncertain>& parameter_names();

/// Constants that are not part of the uncertainty vector.
struct ModelConstants {
  double h = 2.02e1;  // saturation constant, compared against the raw tumor count
  StateVec xbar{{1e9, 1e9, 1.0, 1e9}};
};

/// Thrown when the dynamics produce a non-finite value.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Nominal parameter values of the benchmark.
UncertaintyVector nominal_parameters();

/// Time derivative of the normalized state.
///
/// The raw state X = xbar * x is substituted into the raw dynamics and each
/// equation is divided by the matching xbar entry.
StateVec derivative(const StateVec& x, const ControlInput& u, const UncertaintyVector& w,
                    const ModelConstants& k = {});

/// Jacobian of derivative() with respect to the state, row-major (out, in).
std::array<std::array<double, 4>, 4> state_jacobian(const StateVec& x, const UncertaintyVector& w,
                                                    const ModelConstants& k = {});

/// d(derivative)/du1 and d(derivative)/du2. The model is affine in u.
std::array<StateVec, 2> control_jacobian(const UncertaintyVector& w, const ModelConstants& k = {});

/// Classical RK4 advance over dt with `substeps` equal substeps, input held
/// constant. Each substep output is clamped at zero componentwise.
/// Throws IntegrationError on a non-finite intermediate state.
StateVec step(const StateVec& x, const ControlInput& u, const UncertaintyVector& w, double dt,
              int substeps, const ModelConstants& k = {});

bool is_finite(const StateVec& x);

}  // namespace csmpc
