#include "csmpc/model.hpp"

#include <algorithm>
#include <cmath>

namespace csmpc {

bool UncertaintyVector::all_positive() const {
  return std::all_of(values.begin(), values.end(), [](double p) { return p > 0.0; });
}

const std::array<std::string, kNumUncertain>& parameter_names() {
  static const std::array<std::string, kNumUncertain> names = {
      "a", "b", "c1", "k3", "delta", "k2", "s2", "gamma0", "g", "r", "p0", "k1", "s1"};
  return names;
}

UncertaintyVector nominal_parameters() {
  UncertaintyVector w;
  w[UncertaintyVector::a] = 0.25;
  w[UncertaintyVector::b] = 1.02e-14;
  w[UncertaintyVector::c1] = 4.41e-10;
  w[UncertaintyVector::k3] = 0.6;
  w[UncertaintyVector::delta] = 1.2e-2;
  w[UncertaintyVector::k2] = 0.6;
  w[UncertaintyVector::s2] = 7.5e6;
  w[UncertaintyVector::gamma0] = 0.9;
  w[UncertaintyVector::g] = 1.5e-2;
  w[UncertaintyVector::r] = 4.0e-2;
  w[UncertaintyVector::p0] = 2e-11;
  w[UncertaintyVector::k1] = 0.8;
  w[UncertaintyVector::s1] = 1.2e7;
  return w;
}

bool is_finite(const StateVec& x) {
  return std::all_of(x.v.begin(), x.v.end(), [](double c) { return std::isfinite(c); });
}

StateVec derivative(const StateVec& x, const ControlInput& u, const UncertaintyVector& w,
                    const ModelConstants& k) {
  using W = UncertaintyVector;
  const auto& xb = k.xbar;
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3];
  const double raw_tumor = xb[0] * x1;
  const double saturation = raw_tumor / (k.h + raw_tumor);

  StateVec d;
  d[0] = w[W::a] * x1 * (1.0 - w[W::b] * raw_tumor) - w[W::c1] * xb[3] * x4 * x1 -
         w[W::k3] * xb[2] * x3 * x1;
  d[1] = -w[W::delta] * x2 - w[W::k2] * xb[2] * x3 * x2 + w[W::s2] / xb[1];
  d[2] = -w[W::gamma0] * x3 + u.chemo / xb[2];
  d[3] = w[W::g] * saturation * x4 - w[W::r] * x4 - w[W::p0] * xb[0] * x4 * x1 -
         w[W::k1] * xb[2] * x4 * x3 + w[W::s1] * u.immune / xb[3];
  return d;
}

std::array<std::array<double, 4>, 4> state_jacobian(const StateVec& x, const UncertaintyVector& w,
                                                    const ModelConstants& k) {
  using W = UncertaintyVector;
  const auto& xb = k.xbar;
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3];
  const double raw_tumor = xb[0] * x1;
  const double denom = k.h + raw_tumor;
  const double saturation = raw_tumor / denom;
  const double dsat_dx1 = xb[0] * k.h / (denom * denom);

  std::array<std::array<double, 4>, 4> j{};
  j[0][0] = w[W::a] * (1.0 - 2.0 * w[W::b] * raw_tumor) - w[W::c1] * xb[3] * x4 -
            w[W::k3] * xb[2] * x3;
  j[0][2] = -w[W::k3] * xb[2] * x1;
  j[0][3] = -w[W::c1] * xb[3] * x1;

  j[1][1] = -w[W::delta] - w[W::k2] * xb[2] * x3;
  j[1][2] = -w[W::k2] * xb[2] * x2;

  j[2][2] = -w[W::gamma0];

  j[3][0] = w[W::g] * dsat_dx1 * x4 - w[W::p0] * xb[0] * x4;
  j[3][2] = -w[W::k1] * xb[2] * x4;
  j[3][3] = w[W::g] * saturation - w[W::r] - w[W::p0] * xb[0] * x1 - w[W::k1] * xb[2] * x3;
  return j;
}

std::array<StateVec, 2> control_jacobian(const UncertaintyVector& w, const ModelConstants& k) {
  std::array<StateVec, 2> b{};
  b[0][3] = w[UncertaintyVector::s1] / k.xbar[3];
  b[1][2] = 1.0 / k.xbar[2];
  return b;
}

namespace {

StateVec axpy(const StateVec& x, double a, const StateVec& y) {
  StateVec out;
  for (std::size_t i = 0; i < 4; ++i) out[i] = x[i] + a * y[i];
  return out;
}

}  // namespace

StateVec step(const StateVec& x0, const ControlInput& u, const UncertaintyVector& w, double dt,
              int substeps, const ModelConstants& k) {
  if (substeps < 1) throw std::invalid_argument("step: substeps must be positive");
  if (dt < 0.0) throw std::invalid_argument("step: dt must be non-negative");
  if (dt == 0.0) return x0;

  const double h = dt / substeps;
  StateVec x = x0;
  for (int s = 0; s < substeps; ++s) {
    const StateVec k1 = derivative(x, u, w, k);
    const StateVec k2 = derivative(axpy(x, 0.5 * h, k1), u, w, k);
    const StateVec k3 = derivative(axpy(x, 0.5 * h, k2), u, w, k);
    const StateVec k4 = derivative(axpy(x, h, k3), u, w, k);
    for (std::size_t i = 0; i < 4; ++i) {
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      x[i] = std::max(x[i], 0.0);
    }
    if (!is_finite(x)) throw IntegrationError("step: non-finite state during RK4 integration");
  }
  return x;
}

}  // namespace csmpc
