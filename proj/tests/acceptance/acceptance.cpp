// One PASS/FAIL line per acceptance criterion; non-zero exit when any fails.
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include <fmt/format.h>

#include "csmpc/campaign.hpp"
#include "csmpc_props/props.hpp"

using namespace csmpc;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& measured) {
  if (!ok) ++failures;
  fmt::print("criterion {} {} {}: {}\n", id, ok ? "PASS" : "FAIL", what, measured);
  std::fflush(stdout);
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

int env_int(const char* name, int fallback) {
  const char* v = std::getenv(name);
  return v ? std::atoi(v) : fallback;
}

}  // namespace

int main() {
  CampaignConfig cfg;
  cfg.runs = env_int("CSMPC_ACCEPTANCE_RUNS", 100);
  cfg.master_seed = 20240601;
  fmt::print("running campaign: {} runs per controller\n", cfg.runs);
  std::fflush(stdout);
  const auto rep = run_campaign(cfg);
  const auto& nom = rep.stats_for(ControllerKind::nominal);
  const auto& sto = rep.stats_for(ControllerKind::stochastic);
  fmt::print("nominal: completed {} failed {}; stochastic: completed {} failed {}\n", nom.completed, nom.failed,
             sto.completed, sto.failed);

  report(1, within(nom.violation_fraction, 0.05, 0.30) && sto.violation_fraction <= 0.05,
         "constraint-violation contrast",
         fmt::format("nominal {:.3f} (want [0.05, 0.30]), stochastic {:.3f} (want <= 0.05)", nom.violation_fraction,
                     sto.violation_fraction));

  report(2,
         sto.median_terminal_x1 < 0.05 && within(nom.median_terminal_x1, 0.10, 0.35) &&
             sto.outlier_fraction <= 0.05,
         "terminal tumor contrast",
         fmt::format("median x1(T) stochastic {:.4g} (want < 0.05), nominal {:.4g} (want [0.10, 0.35]); "
                     "stochastic outliers {:.3f} (want <= 0.05)",
                     sto.median_terminal_x1, nom.median_terminal_x1, sto.outlier_fraction));

  const double ratio = nom.solve_ms_mean > 0 ? sto.solve_ms_mean / nom.solve_ms_mean : 0.0;
  report(3, within(ratio, 1.1, 4.0), "timing ratio",
         fmt::format("stochastic {:.2f} ms / nominal {:.2f} ms = {:.2f} (want [1.1, 4.0])", sto.solve_ms_mean,
                     nom.solve_ms_mean, ratio));

  {
    SimConfig sim = run_config(cfg, 0, ControllerKind::nominal);
    sim.record_timing = false;
    const auto n = run_nominal(nominal_parameters(), sim);
    sim.controller = ControllerKind::stochastic;
    const auto s = run_stochastic(nominal_parameters(), sim);
    double first_nominal = -1.0, max_early = 0.0;
    for (std::size_t i = 0; i < n.controls.size(); ++i)
      if (n.times[i] < 2.0 - 1e-9 && n.controls[i].chemo > 0.5) {
        first_nominal = n.times[i];
        break;
      }
    for (std::size_t i = 0; i < s.controls.size(); ++i)
      if (s.times[i] < 5.0 - 1e-9) max_early = std::max(max_early, s.controls[i].chemo);
    report(4, first_nominal >= 0.0 && max_early < 0.1, "qualitative policy shapes",
           fmt::format("nominal u2 > 0.5 first at t = {} (want < 2 days); stochastic max u2 over [0, 5) = {:.3f} "
                       "(want < 0.1)",
                       first_nominal >= 0 ? fmt::format("{:.1f}", first_nominal) : std::string("never"),
                       max_early));
  }

  {
    SimConfig sim = run_config(cfg, 0, ControllerKind::nominal);
    sim.record_timing = false;
    sim.sampler.sigma = 0.0;
    sim.clustering.n_cl = 1;
    const auto n = run_nominal(nominal_parameters(), sim);
    sim.controller = ControllerKind::stochastic;
    const auto s = run_stochastic(nominal_parameters(), sim);
    double diff = n.states.size() == s.states.size() ? 0.0 : INFINITY;
    for (std::size_t i = 0; i < std::min(n.states.size(), s.states.size()); ++i)
      for (std::size_t j = 0; j < 4; ++j) diff = std::max(diff, std::abs(n.states[i][j] - s.states[i][j]));
    report(5, diff <= 1e-2, "degeneracy oracle", fmt::format("max state difference {:.3g} (want <= 1e-2)", diff));
  }

  {
    const auto checks = props::run_property_suite();
    std::string detail;
    bool ok = true;
    for (const auto& c : checks) {
      ok = ok && c.passed;
      detail += fmt::format("{}{}={}", detail.empty() ? "" : ", ", c.name, c.passed ? "ok" : "FAILED");
      if (!c.passed) fmt::print("  {}: {}\n", c.name, c.detail);
    }
    report(6, ok, "numerical property suite", detail);
  }

  {
    double nominal_worst = 0.0, stochastic_worst = 0.0, sample_worst = 0.0;
    for (const auto& r : rep.runs) {
      if (r.failed) continue;
      double& w = r.controller == ControllerKind::nominal ? nominal_worst : stochastic_worst;
      w = std::max(w, r.max_controller_residual);
      sample_worst = std::max(sample_worst, r.max_sample_residual);
    }
    nominal_worst = std::max(nominal_worst, sample_worst);
    report(7, nominal_worst <= 1e-3 && stochastic_worst <= 1e-3, "feasibility soundness",
           fmt::format("nominal solves {:.3g}, stochastic solves {:.3g} (want <= 1e-3)", nominal_worst,
                       stochastic_worst));
  }

  fmt::print("{} of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
