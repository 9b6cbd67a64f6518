#include "csmpc/simloop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <tbb/parallel_for.h>

#include "csmpc/buffer.hpp"

namespace csmpc {

std::string to_string(ControllerKind c) {
  return c == ControllerKind::nominal ? "nominal" : "stochastic";
}

ControllerKind controller_from_string(const std::string& s) {
  if (s == "nominal") return ControllerKind::nominal;
  if (s == "stochastic") return ControllerKind::stochastic;
  throw std::invalid_argument("unknown controller '" + s + "'");
}

void SimConfig::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("SimConfig: tau must be > 0");
  if (steps_per_update < 1) throw std::invalid_argument("SimConfig: steps_per_update must be >= 1");
  if (duration < 0.0) throw std::invalid_argument("SimConfig: duration must be >= 0");
  if (std::abs(ocp.tau - tau) > 1e-12) throw std::invalid_argument("SimConfig: ocp.tau must equal tau");
  if (steps_per_update > ocp.horizon)
    throw std::invalid_argument("SimConfig: steps_per_update exceeds the prediction horizon");
  const double period = tau * steps_per_update;
  const double ratio = duration / period;
  if (std::abs(ratio - std::round(ratio)) > 1e-9)
    throw std::invalid_argument("SimConfig: duration must be a multiple of tau * steps_per_update");
  if (N_n < 1 || q < 1) throw std::invalid_argument("SimConfig: N_n and q must be >= 1");
  ocp.validate();
  snmpc.validate();
  sampler.validate();
  clustering.validate();
  solver.validate();
}

int SimConfig::periods() const {
  return static_cast<int>(std::lround(duration / (tau * steps_per_update)));
}

double ClosedLoopTrace::mean_solve_ms() const {
  if (periods.empty()) return 0.0;
  double s = 0.0;
  for (const auto& p : periods) s += p.solve_ms;
  return s / static_cast<double>(periods.size());
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0, bool enabled) {
  if (!enabled) return 0.0;
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

ClosedLoopTrace start_trace(const SimConfig& cfg) {
  ClosedLoopTrace tr;
  tr.controller = cfg.controller;
  tr.times.push_back(0.0);
  tr.states.push_back(cfg.x0);
  tr.min_lymphocytes = cfg.x0.lymphocytes();
  return tr;
}

// Applies the first steps_per_update inputs of `u` to the true plant.
// Returns false when the plant integration failed.
bool apply_to_plant(ClosedLoopTrace& tr, const ControlSequence& u, const UncertaintyVector& true_w,
                    const SimConfig& cfg, int period) {
  for (int j = 0; j < cfg.steps_per_update; ++j) {
    const ControlInput& uj = u[static_cast<std::size_t>(j)];
    StateVec next;
    try {
      next = step(tr.states.back(), uj, true_w, cfg.tau, cfg.ocp.substeps);
    } catch (const IntegrationError& e) {
      tr.failed = true;
      tr.error = e.what();
      return false;
    }
    const std::size_t k = tr.controls.size() + 1;
    tr.controls.push_back(uj);
    tr.period_of_step.push_back(period);
    tr.states.push_back(next);
    tr.times.push_back(static_cast<double>(k) * cfg.tau);
    tr.min_lymphocytes = std::min(tr.min_lymphocytes, next.lymphocytes());
  }
  return true;
}

void finish_trace(ClosedLoopTrace& tr, const SimConfig& cfg) {
  tr.terminal_tumor = tr.states.back().tumor();
  tr.violated = tr.min_lymphocytes < cfg.ocp.x2_min;
}

}  // namespace

ClosedLoopTrace run_nominal(const UncertaintyVector& true_w, const SimConfig& cfg_in) {
  SimConfig cfg = cfg_in;
  cfg.controller = ControllerKind::nominal;
  cfg.validate();
  const UncertaintyVector nominal = nominal_parameters();

  ClosedLoopTrace tr = start_trace(cfg);
  std::optional<ControlSequence> warm;
  ControlSequence held(static_cast<std::size_t>(cfg.ocp.horizon));

  for (int k = 0; k < cfg.periods(); ++k) {
    PeriodLog log;
    log.period = k;
    log.time = tr.times.back();
    const auto t0 = Clock::now();
    ControlSequence u = held;
    try {
      const SolveRecord rec = solve_nominal(tr.states.back(), nominal, cfg.ocp, cfg.solver, warm);
      u = rec.u_star;
      log.converged = rec.converged;
      log.iterations = rec.iterations;
      log.mu = rec.mu_star;
      log.residual = rec.residual;
    } catch (const std::exception&) {
      log.failed = true;
      u = held.shifted(static_cast<std::size_t>(cfg.steps_per_update));
    }
    log.solve_ms = elapsed_ms(t0, cfg.record_timing);
    tr.periods.push_back(std::move(log));
    if (!apply_to_plant(tr, u, true_w, cfg, k)) break;
    held = u;
    warm = u.shifted(static_cast<std::size_t>(cfg.steps_per_update));
  }
  finish_trace(tr, cfg);
  return tr;
}

ClosedLoopTrace run_stochastic(const UncertaintyVector& true_w, const SimConfig& cfg_in) {
  SimConfig cfg = cfg_in;
  cfg.controller = ControllerKind::stochastic;
  cfg.validate();
  const UncertaintyVector nominal = nominal_parameters();

  ClosedLoopTrace tr = start_trace(cfg);
  FifoBuffer buffer(static_cast<std::size_t>(cfg.q), static_cast<std::size_t>(cfg.N_n));
  std::optional<ControlSequence> warm;
  ControlSequence held(static_cast<std::size_t>(cfg.ocp.horizon));

  for (int k = 0; k < cfg.periods(); ++k) {
    PeriodLog log;
    log.period = k;
    log.time = tr.times.back();
    const StateVec x = tr.states.back();

    // Per-sample deterministic solves at the current state.
    const auto samples = draw(cfg.sampler, cfg.buffer_stream, static_cast<std::size_t>(cfg.N_n),
                              static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(cfg.N_n));
    std::vector<SolveRecord> batch(samples.size());
    const auto t_samples = Clock::now();
    tbb::parallel_for(std::size_t{0}, samples.size(), [&](std::size_t j) {
      try {
        batch[j] = solve_nominal(x, samples[j], cfg.ocp, cfg.solver, warm);
      } catch (const std::exception&) {
        batch[j] = SolveRecord{};
        batch[j].w = samples[j];
        batch[j].converged = false;
      }
      batch[j].origin_step = k;
    });
    log.sample_solve_ms = elapsed_ms(t_samples, cfg.record_timing);
    for (const auto& r : batch) {
      if (!r.converged) continue;
      ++log.samples_accepted;
      log.max_sample_residual = std::max(log.max_sample_residual, r.residual);
    }
    if (cfg.verify_records)
      buffer.insert_batch(batch, x, cfg.ocp);
    else
      buffer.insert_batch(batch);
    log.buffer_size = buffer.size();

    // Supervised clustering of the buffered records.
    std::optional<ClusterSummary> summary;
    if (buffer.size() >= static_cast<std::size_t>(cfg.clustering.n_cl)) {
      const auto records = buffer.snapshot();
      ClusteringConfig cc = cfg.clustering;
      cc.seed = mix_seed(cfg.clustering.seed, static_cast<std::uint64_t>(k));
      const KMeansResult km = kmeans(label_vectors(records), cc);
      summary = summarize(records, km.labels, cc.n_cl);
    }

    const auto t0 = Clock::now();
    ControlSequence u = held;
    try {
      if (summary) {
        log.summary = *summary;
        const SnmpcSolution sol = solve_snmpc({x, *summary, cfg.snmpc, cfg.ocp}, cfg.solver, warm);
        u = sol.u_star;
        log.converged = sol.converged;
        log.iterations = sol.iterations;
        log.mu = sol.mu_star;
        log.residual = sol.residual;
      } else {
        log.cold_start = true;
        const SolveRecord rec = solve_nominal(x, nominal, cfg.ocp, cfg.solver, warm);
        u = rec.u_star;
        log.converged = rec.converged;
        log.iterations = rec.iterations;
        log.mu = rec.mu_star;
        log.residual = rec.residual;
      }
    } catch (const std::exception&) {
      log.failed = true;
      u = held.shifted(static_cast<std::size_t>(cfg.steps_per_update));
    }
    log.solve_ms = elapsed_ms(t0, cfg.record_timing);
    tr.periods.push_back(std::move(log));
    if (!apply_to_plant(tr, u, true_w, cfg, k)) break;
    held = u;
    warm = u.shifted(static_cast<std::size_t>(cfg.steps_per_update));
  }
  finish_trace(tr, cfg);
  return tr;
}

ClosedLoopTrace run(const UncertaintyVector& true_w, const SimConfig& cfg) {
  return cfg.controller == ControllerKind::nominal ? run_nominal(true_w, cfg) : run_stochastic(true_w, cfg);
}

void write_trace(std::ostream& os, const ClosedLoopTrace& tr) {
  os << "time,x1,x2,x3,x4,u1,u2,solve_ms,converged\n";
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const StateVec& x = tr.states[i];
    std::string row = fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", tr.times[i], x[0], x[1], x[2], x[3]);
    if (i < tr.controls.size()) {
      const PeriodLog& p = tr.periods[static_cast<std::size_t>(tr.period_of_step[i])];
      row += fmt::format(",{:.17g},{:.17g},{:.6f},{}", tr.controls[i].immune, tr.controls[i].chemo, p.solve_ms,
                         p.converged ? 1 : 0);
    } else {
      row += ",,,,";
    }
    os << row << '\n';
  }
}

}  // namespace csmpc
