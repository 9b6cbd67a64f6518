#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "csmpc/simloop.hpp"

namespace csmpc {

struct CampaignConfig {
  int runs = 100;
  bool run_nominal = true;
  bool run_stochastic = true;
  std::uint64_t master_seed = 0;
  std::string output_dir = "campaign_out";
  int histogram_bins = 40;
  SimConfig sim;

  void validate() const;
  std::vector<ControllerKind> controllers() const;
};

struct RunResult {
  int run_id = 0;
  ControllerKind controller = ControllerKind::nominal;
  double terminal_x1 = 0.0;
  double min_x2 = 0.0;
  bool violated = false;
  double mean_solve_ms = 0.0;
  bool failed = false;
  std::string error;
  int nonconverged_periods = 0;
  int cold_start_periods = 0;
  /// Largest controller residual max(0, g - mu) over converged periods.
  double max_controller_residual = 0.0;
  /// Largest per-sample residual over accepted sample solves (stochastic).
  double max_sample_residual = 0.0;
  std::vector<double> solve_ms;  // per control period
  std::vector<double> first_period_chemo;  // applied u2 over the first periods, per tau
};

struct ControllerStats {
  ControllerKind controller = ControllerKind::nominal;
  int completed = 0;
  int failed = 0;
  double violation_fraction = 0.0;
  double median_terminal_x1 = 0.0;
  double mean_terminal_x1 = 0.0;
  double outlier_fraction = 0.0;  // terminal x1 > 1
  double solve_ms_mean = 0.0;
  double solve_ms_std = 0.0;
};

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<std::vector<int>> counts;  // one vector per controller, aligned with CampaignReport::stats
};

struct CampaignReport {
  CampaignConfig config;
  std::vector<UncertaintyVector> true_w;  // shared by every controller
  std::vector<RunResult> runs;            // ordered by (controller, run_id)
  std::vector<ControllerStats> stats;     // one per controller, in config order
  Histogram terminal;
  Histogram min_x2;

  const ControllerStats& stats_for(ControllerKind c) const;
  std::vector<const RunResult*> runs_for(ControllerKind c) const;
};

/// Evaluation scenarios drawn for a campaign (disjoint from buffer feeds).
std::vector<UncertaintyVector> evaluation_scenarios(const CampaignConfig& cfg);

/// Simulation config used for one run of a campaign.
SimConfig run_config(const CampaignConfig& cfg, int run_id, ControllerKind controller);

CampaignReport run_campaign(const CampaignConfig& cfg);

/// Computes aggregate statistics and histograms from the per-run results.
void aggregate(CampaignReport& report);

/// Writes runs.csv, hist_terminal.csv, hist_minx2.csv and summary.json.
void emit_report(const CampaignReport& r, const std::filesystem::path& dir);

std::string config_to_json(const CampaignConfig& cfg);
CampaignConfig config_from_json(const std::string& text);
/// Reads the resolved config embedded in a summary.json.
CampaignConfig config_from_summary(const std::filesystem::path& summary_json);

}  // namespace csmpc
