#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "csmpc/campaign.hpp"
#include "csmpc_props/props.hpp"

using namespace csmpc;

namespace {

struct ModelFlags {
  std::optional<double> sigma, epsJ, epsG, rho;
  std::optional<int> ncl, Nn, q, horizon;

  void add(CLI::App* app) {
    app->add_option("--sigma", sigma, "sampler standard deviation");
    app->add_option("--ncl", ncl, "number of clusters");
    app->add_option("--Nn", Nn, "new samples per control period");
    app->add_option("--q", q, "batches kept in the FIFO buffer");
    app->add_option("--horizon", horizon, "prediction horizon in steps");
    app->add_option("--epsJ", epsJ, "cost confidence parameter");
    app->add_option("--epsG", epsG, "constraint confidence parameter");
    app->add_option("--rho", rho, "slack penalty");
  }

  void apply(SimConfig& s) const {
    if (sigma) s.sampler.sigma = *sigma;
    if (ncl) s.clustering.n_cl = *ncl;
    if (Nn) s.N_n = *Nn;
    if (q) s.q = *q;
    if (horizon) s.ocp.horizon = *horizon;
    if (epsJ) s.snmpc.eps_J = *epsJ;
    if (epsG) s.snmpc.eps_g = *epsG;
    if (rho) {
      s.snmpc.rho = *rho;
      s.ocp.rho = *rho;
    }
  }
};

void print_stats(const CampaignReport& rep) {
  for (const auto& s : rep.stats) {
    fmt::print("{:>10}: completed {:3d}  failed {:3d}  violation {:.3f}  median x1(T) {:.4g}  outliers {:.3f}  "
               "solve {:.2f} +- {:.2f} ms\n",
               to_string(s.controller), s.completed, s.failed, s.violation_fraction, s.median_terminal_x1,
               s.outlier_fraction, s.solve_ms_mean, s.solve_ms_std);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering-based stochastic NMPC for a tumor-therapy model"};
  app.set_config("--config", "", "key-value config file; command-line flags take precedence");
  app.require_subcommand(1);

  // campaign
  auto* campaign = app.add_subcommand("campaign", "Monte Carlo comparison of the controllers");
  int runs = 100;
  std::string controller = "both";
  std::uint64_t seed = 0;
  std::string out = "campaign_out";
  std::string replay;
  int bins = 40;
  bool no_timing = false;
  ModelFlags campaign_flags;
  campaign->add_option("--runs", runs, "runs per controller")->check(CLI::PositiveNumber);
  campaign->add_option("--controller", controller)->check(CLI::IsMember({"nominal", "stochastic", "both"}));
  campaign->add_option("--seed", seed, "master seed");
  campaign->add_option("--out", out, "output directory");
  campaign->add_option("--bins", bins, "histogram bins")->check(CLI::PositiveNumber);
  campaign->add_flag("--no-timing", no_timing, "record zero solve times (byte-stable output)");
  campaign->add_option("--replay", replay, "re-run the config stored in a summary.json")
      ->check(CLI::ExistingFile);
  campaign_flags.add(campaign);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "single closed-loop run, writes the trace");
  std::string sim_controller = "stochastic";
  std::uint64_t sim_seed = 0;
  int scenario = -1;
  std::string trace_out = "-";
  double duration = 40.0;
  ModelFlags sim_flags;
  simulate->add_option("--controller", sim_controller)->check(CLI::IsMember({"nominal", "stochastic"}));
  simulate->add_option("--seed", sim_seed, "master seed");
  simulate->add_option("--scenario", scenario, "evaluation scenario index as plant; nominal plant when omitted");
  simulate->add_option("--duration", duration, "days");
  simulate->add_option("--out", trace_out, "trace file, '-' for stdout");
  sim_flags.add(simulate);

  // selftest
  auto* selftest = app.add_subcommand("selftest", "run the numerical property suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*campaign) {
      CampaignConfig cfg;
      if (!replay.empty()) {
        cfg = config_from_summary(replay);
        if (campaign->count("--out")) cfg.output_dir = out;
      } else {
        cfg.runs = runs;
        cfg.master_seed = seed;
        cfg.output_dir = out;
        cfg.histogram_bins = bins;
        cfg.run_nominal = controller != "stochastic";
        cfg.run_stochastic = controller != "nominal";
        cfg.sim.record_timing = !no_timing;
        campaign_flags.apply(cfg.sim);
      }
      fmt::print("campaign: {} runs, seed {}, output {}\n", cfg.runs, cfg.master_seed, cfg.output_dir);
      const auto rep = run_campaign(cfg);
      emit_report(rep, cfg.output_dir);
      print_stats(rep);
      return 0;
    }

    if (*simulate) {
      CampaignConfig cfg;
      cfg.master_seed = sim_seed;
      cfg.runs = std::max(scenario + 1, 1);
      cfg.sim.duration = duration;
      sim_flags.apply(cfg.sim);
      const auto kind = controller_from_string(sim_controller);
      const SimConfig sim = run_config(cfg, std::max(scenario, 0), kind);
      const UncertaintyVector w =
          scenario >= 0 ? evaluation_scenarios(cfg)[static_cast<std::size_t>(scenario)] : nominal_parameters();
      const auto trace = run(w, sim);
      if (trace_out == "-") {
        write_trace(std::cout, trace);
      } else {
        std::ofstream os(trace_out);
        if (!os) throw std::runtime_error("cannot write " + trace_out);
        write_trace(os, trace);
      }
      std::fprintf(stderr, "terminal x1 %.6g, min x2 %.6g, violated %s%s\n", trace.terminal_tumor,
                   trace.min_lymphocytes, trace.violated ? "yes" : "no", trace.failed ? ", plant failed" : "");
      return trace.failed ? 2 : 0;
    }

    if (*selftest) {
      bool ok = true;
      for (const auto& c : props::run_property_suite()) {
        fmt::print("{} {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
        ok = ok && c.passed;
      }
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
