#include "csmpc/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace csmpc {

ControlSequence ControlSequence::from_flat(std::span<const double> flat) {
  if (flat.size() % 2 != 0) throw std::invalid_argument("ControlSequence: odd flat length");
  ControlSequence seq(flat.size() / 2);
  for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = {flat[2 * i], flat[2 * i + 1]};
  return seq;
}

std::vector<double> ControlSequence::flat() const {
  std::vector<double> out(2 * steps_.size());
  write_flat(out);
  return out;
}

void ControlSequence::write_flat(std::span<double> out) const {
  if (out.size() < 2 * steps_.size()) throw std::invalid_argument("ControlSequence: short buffer");
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    out[2 * i] = steps_[i].immune;
    out[2 * i + 1] = steps_[i].chemo;
  }
}

bool ControlSequence::admissible() const {
  return std::all_of(steps_.begin(), steps_.end(), [](const ControlInput& u) { return u.admissible(); });
}

ControlSequence ControlSequence::shifted(std::size_t count) const {
  if (steps_.empty()) return *this;
  ControlSequence out(steps_.size());
  const ControlInput last = steps_.back();
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const std::size_t src = i + count;
    out[i] = src < steps_.size() ? steps_[src] : last;
  }
  return out;
}

void OcpConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("OcpConfig: horizon must be >= 1");
  if (!(tau > 0.0)) throw std::invalid_argument("OcpConfig: tau must be > 0");
  if (substeps < 1) throw std::invalid_argument("OcpConfig: substeps must be >= 1");
  if (rho_f < 0.0 || rho_u < 0.0 || rho < 0.0)
    throw std::invalid_argument("OcpConfig: weights must be non-negative");
  if (!(x2_min > 0.0 && x2_min < 1.0)) throw std::invalid_argument("OcpConfig: x2_min outside (0,1)");
  if (!(softmin_width > 0.0)) throw std::invalid_argument("OcpConfig: softmin_width must be > 0");
}

namespace {

void check_horizon(const ControlSequence& u, const OcpConfig& cfg) {
  if (u.size() != static_cast<std::size_t>(cfg.horizon))
    throw std::invalid_argument("ControlSequence length does not match the horizon");
}

double control_cost(const ControlSequence& u, const OcpConfig& cfg) {
  double s = 0.0;
  for (const auto& ui : u.steps()) s += std::abs(ui.immune) + std::abs(ui.chemo);
  return cfg.rho_u * s;
}

double tumor_cost(std::span<const StateVec> traj, const OcpConfig& cfg) {
  double s = cfg.rho_f * traj.back().tumor();
  for (std::size_t i = 1; i < traj.size(); ++i) s += traj[i].tumor();
  return s;
}

double hard_constraint(std::span<const StateVec> traj, const OcpConfig& cfg) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < traj.size(); ++i) lo = std::min(lo, traj[i].lymphocytes());
  return cfg.x2_min - lo;
}

// Stage data of one RK4 substep, kept for the reverse sweep.
struct Substep {
  StateVec x, s2, s3, s4;
  std::array<bool, 4> passed{};  // false where the output was clamped
};

using Mat4 = std::array<std::array<double, 4>, 4>;

StateVec mat_t_vec(const Mat4& m, const StateVec& v) {
  StateVec out;
  for (std::size_t c = 0; c < 4; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < 4; ++r) s += m[r][c] * v[r];
    out[c] = s;
  }
  return out;
}

double dot(const StateVec& a, const StateVec& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

}  // namespace

double smooth_constraint(std::span<const StateVec> traj, const OcpConfig& cfg) {
  const double s = cfg.softmin_width;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < traj.size(); ++i) lo = std::min(lo, traj[i].lymphocytes());
  double acc = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) acc += std::exp(-(traj[i].lymphocytes() - lo) / s);
  return cfg.x2_min - lo + s * std::log(acc);
}

OcpEvaluation evaluate(const StateVec& x, const ControlSequence& u, const UncertaintyVector& w,
                       const OcpConfig& cfg) {
  check_horizon(u, cfg);
  OcpEvaluation out;
  out.trajectory.reserve(u.size() + 1);
  out.trajectory.push_back(x);
  for (std::size_t i = 0; i < u.size(); ++i)
    out.trajectory.push_back(step(out.trajectory.back(), u[i], w, cfg.tau, cfg.substeps));
  out.J = tumor_cost(out.trajectory, cfg) + control_cost(u, cfg);
  out.g = hard_constraint(out.trajectory, cfg);
  return out;
}

OcpGradient gradient(const StateVec& x0, const ControlSequence& u, const UncertaintyVector& w,
                     const OcpConfig& cfg) {
  check_horizon(u, cfg);
  const std::size_t n = u.size();
  const int m = cfg.substeps;
  const double h = cfg.tau / m;
  const ModelConstants constants;

  // Forward sweep with stage storage. Mirrors model::step exactly.
  std::vector<Substep> tape(n * m);
  std::vector<StateVec> traj(n + 1);
  traj[0] = x0;
  StateVec x = x0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int s = 0; s < m; ++s) {
      Substep& st = tape[i * m + s];
      st.x = x;
      const StateVec k1 = derivative(x, u[i], w, constants);
      for (std::size_t c = 0; c < 4; ++c) st.s2[c] = x[c] + 0.5 * h * k1[c];
      const StateVec k2 = derivative(st.s2, u[i], w, constants);
      for (std::size_t c = 0; c < 4; ++c) st.s3[c] = x[c] + 0.5 * h * k2[c];
      const StateVec k3 = derivative(st.s3, u[i], w, constants);
      for (std::size_t c = 0; c < 4; ++c) st.s4[c] = x[c] + h * k3[c];
      const StateVec k4 = derivative(st.s4, u[i], w, constants);
      for (std::size_t c = 0; c < 4; ++c) {
        const double y = x[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        st.passed[c] = y >= 0.0;
        x[c] = std::max(y, 0.0);
      }
      if (!is_finite(x)) throw IntegrationError("gradient: non-finite state during rollout");
    }
    traj[i + 1] = x;
  }

  OcpGradient out;
  out.J = tumor_cost(traj, cfg) + control_cost(u, cfg);
  out.g = hard_constraint(traj, cfg);
  out.g_smooth = smooth_constraint(traj, cfg);
  out.dJ.assign(2 * n, 0.0);
  out.dg_smooth.assign(2 * n, 0.0);

  // Softmax weights of the soft-min over x2(1..N).
  std::vector<double> weight(n + 1, 0.0);
  {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i <= n; ++i) lo = std::min(lo, traj[i].lymphocytes());
    double acc = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      weight[i] = std::exp(-(traj[i].lymphocytes() - lo) / cfg.softmin_width);
      acc += weight[i];
    }
    for (std::size_t i = 1; i <= n; ++i) weight[i] /= acc;
  }

  for (std::size_t i = 0; i < n; ++i) {
    out.dJ[2 * i] = cfg.rho_u * (u[i].immune >= 0.0 ? 1.0 : -1.0);
    out.dJ[2 * i + 1] = cfg.rho_u * (u[i].chemo >= 0.0 ? 1.0 : -1.0);
  }

  const auto bu = control_jacobian(w, constants);

  // Reverse sweep; two adjoints (cost, smoothed constraint) share Jacobians.
  std::array<StateVec, 2> lam{};
  for (std::size_t i = n; i-- > 0;) {
    // Direct dependence of the outputs on x(i+1).
    lam[0][StateVec::kTumor] += 1.0 + (i + 1 == n ? cfg.rho_f : 0.0);
    lam[1][StateVec::kLymphocytes] += -weight[i + 1];

    for (int s = m; s-- > 0;) {
      const Substep& st = tape[i * m + s];
      const Mat4 j1 = state_jacobian(st.x, w, constants);
      const Mat4 j2 = state_jacobian(st.s2, w, constants);
      const Mat4 j3 = state_jacobian(st.s3, w, constants);
      const Mat4 j4 = state_jacobian(st.s4, w, constants);
      for (auto& l : lam) {
        for (std::size_t c = 0; c < 4; ++c)
          if (!st.passed[c]) l[c] = 0.0;

        StateVec a1, a2, a3, a4;
        for (std::size_t c = 0; c < 4; ++c) {
          a1[c] = h / 6.0 * l[c];
          a2[c] = h / 3.0 * l[c];
          a3[c] = h / 3.0 * l[c];
          a4[c] = h / 6.0 * l[c];
        }
        StateVec lx = l;
        double du1 = 0.0, du2 = 0.0;

        const StateVec l4 = mat_t_vec(j4, a4);
        du1 += dot(bu[0], a4);
        du2 += dot(bu[1], a4);
        for (std::size_t c = 0; c < 4; ++c) {
          a3[c] += h * l4[c];
          lx[c] += l4[c];
        }
        const StateVec l3 = mat_t_vec(j3, a3);
        du1 += dot(bu[0], a3);
        du2 += dot(bu[1], a3);
        for (std::size_t c = 0; c < 4; ++c) {
          a2[c] += 0.5 * h * l3[c];
          lx[c] += l3[c];
        }
        const StateVec l2 = mat_t_vec(j2, a2);
        du1 += dot(bu[0], a2);
        du2 += dot(bu[1], a2);
        for (std::size_t c = 0; c < 4; ++c) {
          a1[c] += 0.5 * h * l2[c];
          lx[c] += l2[c];
        }
        const StateVec l1 = mat_t_vec(j1, a1);
        du1 += dot(bu[0], a1);
        du2 += dot(bu[1], a1);
        for (std::size_t c = 0; c < 4; ++c) lx[c] += l1[c];

        auto& target = (&l == &lam[0]) ? out.dJ : out.dg_smooth;
        target[2 * i] += du1;
        target[2 * i + 1] += du2;
        l = lx;
      }
    }
  }
  return out;
}

}  // namespace csmpc
