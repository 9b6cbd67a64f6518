#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "csmpc_props/props.hpp"

namespace csmpc::props {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 4>;

StateVec reference_step(const StateVec& x, const ControlInput& u, const UncertaintyVector& w, double dt) {
  State s = x.v;
  if (dt <= 0.0) return x;
  auto rhs = [&](const State& y, State& dydt, double) {
    StateVec sv;
    sv.v = y;
    dydt = derivative(sv, u, w).v;
  };
  auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_adaptive(stepper, rhs, s, 0.0, dt, dt / 64.0);
  StateVec out;
  out.v = s;
  return out;
}

OcpEvaluation reference_evaluate(const StateVec& x, const ControlSequence& u, const UncertaintyVector& w,
                                 const OcpConfig& cfg) {
  OcpEvaluation ev;
  ev.trajectory.push_back(x);
  double min_x2 = std::numeric_limits<double>::infinity();
  double J = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    StateVec next = reference_step(ev.trajectory.back(), u[i], w, cfg.tau);
    for (double& c : next.v) c = std::max(c, 0.0);
    ev.trajectory.push_back(next);
    J += next.tumor() + cfg.rho_u * (std::abs(u[i].immune) + std::abs(u[i].chemo));
    min_x2 = std::min(min_x2, next.lymphocytes());
  }
  J += cfg.rho_f * ev.trajectory.back().tumor();
  ev.J = J;
  ev.g = cfg.x2_min - min_x2;
  return ev;
}

}  // namespace csmpc::props
