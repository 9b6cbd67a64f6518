#include "csmpc/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <tbb/parallel_for.h>

#include "json.hpp"

namespace csmpc {

using nlohmann::json;

void CampaignConfig::validate() const {
  if (runs < 1) throw std::invalid_argument("CampaignConfig: runs must be >= 1");
  if (!run_nominal && !run_stochastic) throw std::invalid_argument("CampaignConfig: no controller selected");
  if (histogram_bins < 1) throw std::invalid_argument("CampaignConfig: histogram_bins must be >= 1");
  sim.validate();
}

std::vector<ControllerKind> CampaignConfig::controllers() const {
  std::vector<ControllerKind> out;
  if (run_nominal) out.push_back(ControllerKind::nominal);
  if (run_stochastic) out.push_back(ControllerKind::stochastic);
  return out;
}

const ControllerStats& CampaignReport::stats_for(ControllerKind c) const {
  for (const auto& s : stats)
    if (s.controller == c) return s;
  throw std::out_of_range("CampaignReport: controller " + to_string(c) + " was not run");
}

std::vector<const RunResult*> CampaignReport::runs_for(ControllerKind c) const {
  std::vector<const RunResult*> out;
  for (const auto& r : runs)
    if (r.controller == c) out.push_back(&r);
  return out;
}

std::vector<UncertaintyVector> evaluation_scenarios(const CampaignConfig& cfg) {
  SamplerConfig sc = cfg.sim.sampler;
  sc.seed = cfg.master_seed;
  return draw(sc, kEvaluationStream, static_cast<std::size_t>(cfg.runs));
}

SimConfig run_config(const CampaignConfig& cfg, int run_id, ControllerKind controller) {
  SimConfig sim = cfg.sim;
  sim.controller = controller;
  sim.sampler.seed = cfg.master_seed;
  sim.buffer_stream = kBufferStreamBase + static_cast<std::uint64_t>(run_id);
  sim.clustering.seed = mix_seed(cfg.master_seed, static_cast<std::uint64_t>(run_id));
  return sim;
}

namespace {

RunResult summarize_run(int run_id, const ClosedLoopTrace& tr, const SimConfig& sim) {
  RunResult r;
  r.run_id = run_id;
  r.controller = tr.controller;
  r.terminal_x1 = tr.terminal_tumor;
  r.min_x2 = tr.min_lymphocytes;
  r.violated = tr.violated;
  r.failed = tr.failed;
  r.error = tr.error;
  r.mean_solve_ms = tr.mean_solve_ms();
  for (const auto& p : tr.periods) {
    r.solve_ms.push_back(p.solve_ms);
    if (!p.converged || p.failed) ++r.nonconverged_periods;
    if (p.cold_start) ++r.cold_start_periods;
    if (p.converged && !p.failed) r.max_controller_residual = std::max(r.max_controller_residual, p.residual);
    r.max_sample_residual = std::max(r.max_sample_residual, p.max_sample_residual);
  }
  const std::size_t first = std::min<std::size_t>(tr.controls.size(),
                                                  static_cast<std::size_t>(std::lround(10.0 / sim.tau)));
  for (std::size_t i = 0; i < first; ++i) r.first_period_chemo.push_back(tr.controls[i].chemo);
  return r;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Histogram histogram(const CampaignReport& rep, double RunResult::*field, int bins) {
  Histogram h;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& r : rep.runs) {
    if (r.failed) continue;
    lo = std::min(lo, r.*field);
    hi = std::max(hi, r.*field);
  }
  h.counts.assign(rep.stats.size(), std::vector<int>{});
  if (!(lo <= hi)) return h;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(b == bins ? hi : lo + b * width);
  for (auto& c : h.counts) c.assign(static_cast<std::size_t>(bins), 0);
  for (std::size_t s = 0; s < rep.stats.size(); ++s) {
    for (const auto& r : rep.runs) {
      if (r.failed || r.controller != rep.stats[s].controller) continue;
      auto b = static_cast<int>((r.*field - lo) / width);
      b = std::clamp(b, 0, bins - 1);
      ++h.counts[s][static_cast<std::size_t>(b)];
    }
  }
  return h;
}

json sim_to_json(const SimConfig& s) {
  return json{
      {"tau", s.tau},
      {"steps_per_update", s.steps_per_update},
      {"duration", s.duration},
      {"x0", s.x0.v},
      {"N_n", s.N_n},
      {"q", s.q},
      {"record_timing", s.record_timing},
      {"verify_records", s.verify_records},
      {"ocp",
       {{"horizon", s.ocp.horizon},
        {"substeps", s.ocp.substeps},
        {"rho_f", s.ocp.rho_f},
        {"rho_u", s.ocp.rho_u},
        {"x2_min", s.ocp.x2_min},
        {"rho", s.ocp.rho},
        {"softmin_width", s.ocp.softmin_width}}},
      {"snmpc", {{"eps_J", s.snmpc.eps_J}, {"eps_g", s.snmpc.eps_g}, {"rho", s.snmpc.rho}}},
      {"sampler", {{"sigma", s.sampler.sigma}, {"floor", s.sampler.floor}}},
      {"clustering",
       {{"n_cl", s.clustering.n_cl},
        {"max_iter", s.clustering.max_iter},
        {"restarts", s.clustering.restarts},
        {"standardize", s.clustering.standardize}}},
      {"solver",
       {{"max_iter", s.solver.max_iter},
        {"tol", s.solver.tol},
        {"memory", s.solver.memory},
        {"mu_penalty_growth", s.solver.mu_penalty_growth},
        {"penalty_initial", s.solver.penalty_initial},
        {"penalty_max", s.solver.penalty_max},
        {"stage_tol", s.solver.stage_tol},
        {"residual_target", s.solver.residual_target},
        {"residual_accept", s.solver.residual_accept},
        {"mu_max", s.solver.mu_max}}},
  };
}

SimConfig sim_from_json(const json& j) {
  SimConfig s;
  s.tau = j.at("tau").get<double>();
  s.steps_per_update = j.at("steps_per_update").get<int>();
  s.duration = j.at("duration").get<double>();
  s.x0.v = j.at("x0").get<std::array<double, 4>>();
  s.N_n = j.at("N_n").get<int>();
  s.q = j.at("q").get<int>();
  s.record_timing = j.at("record_timing").get<bool>();
  s.verify_records = j.at("verify_records").get<bool>();
  const json& o = j.at("ocp");
  s.ocp.tau = s.tau;
  s.ocp.horizon = o.at("horizon").get<int>();
  s.ocp.substeps = o.at("substeps").get<int>();
  s.ocp.rho_f = o.at("rho_f").get<double>();
  s.ocp.rho_u = o.at("rho_u").get<double>();
  s.ocp.x2_min = o.at("x2_min").get<double>();
  s.ocp.rho = o.at("rho").get<double>();
  s.ocp.softmin_width = o.at("softmin_width").get<double>();
  const json& sn = j.at("snmpc");
  s.snmpc.eps_J = sn.at("eps_J").get<double>();
  s.snmpc.eps_g = sn.at("eps_g").get<double>();
  s.snmpc.rho = sn.at("rho").get<double>();
  const json& sa = j.at("sampler");
  s.sampler.sigma = sa.at("sigma").get<double>();
  s.sampler.floor = sa.at("floor").get<double>();
  const json& c = j.at("clustering");
  s.clustering.n_cl = c.at("n_cl").get<int>();
  s.clustering.max_iter = c.at("max_iter").get<int>();
  s.clustering.restarts = c.at("restarts").get<int>();
  s.clustering.standardize = c.at("standardize").get<bool>();
  const json& so = j.at("solver");
  s.solver.max_iter = so.at("max_iter").get<int>();
  s.solver.tol = so.at("tol").get<double>();
  s.solver.memory = so.at("memory").get<int>();
  s.solver.mu_penalty_growth = so.at("mu_penalty_growth").get<double>();
  s.solver.penalty_initial = so.at("penalty_initial").get<double>();
  s.solver.penalty_max = so.at("penalty_max").get<double>();
  s.solver.stage_tol = so.at("stage_tol").get<double>();
  s.solver.residual_target = so.at("residual_target").get<double>();
  s.solver.residual_accept = so.at("residual_accept").get<double>();
  s.solver.mu_max = so.at("mu_max").get<double>();
  return s;
}

json config_json(const CampaignConfig& c) {
  return json{{"runs", c.runs},
              {"run_nominal", c.run_nominal},
              {"run_stochastic", c.run_stochastic},
              {"master_seed", c.master_seed},
              {"output_dir", c.output_dir},
              {"histogram_bins", c.histogram_bins},
              {"sim", sim_to_json(c.sim)}};
}

CampaignConfig config_from(const json& j) {
  CampaignConfig c;
  c.runs = j.at("runs").get<int>();
  c.run_nominal = j.at("run_nominal").get<bool>();
  c.run_stochastic = j.at("run_stochastic").get<bool>();
  c.master_seed = j.at("master_seed").get<std::uint64_t>();
  c.output_dir = j.at("output_dir").get<std::string>();
  c.histogram_bins = j.at("histogram_bins").get<int>();
  c.sim = sim_from_json(j.at("sim"));
  return c;
}

void write_histogram(const std::filesystem::path& path, const CampaignReport& rep, const Histogram& h) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  std::string header = "bin_left,bin_right";
  for (const auto& s : rep.stats) header += "," + to_string(s.controller);
  os << header << '\n';
  if (h.edges.empty()) return;
  for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
    std::string row = fmt::format("{:.17g},{:.17g}", h.edges[b], h.edges[b + 1]);
    for (const auto& c : h.counts) row += fmt::format(",{}", c[b]);
    os << row << '\n';
  }
}

}  // namespace

void aggregate(CampaignReport& rep) {
  rep.stats.clear();
  for (ControllerKind c : rep.config.controllers()) {
    ControllerStats s;
    s.controller = c;
    std::vector<double> terminal, times;
    int violated = 0, outliers = 0;
    for (const auto& r : rep.runs) {
      if (r.controller != c) continue;
      if (r.failed) {
        ++s.failed;
        continue;
      }
      ++s.completed;
      terminal.push_back(r.terminal_x1);
      if (r.violated) ++violated;
      if (r.terminal_x1 > 1.0) ++outliers;
      times.insert(times.end(), r.solve_ms.begin(), r.solve_ms.end());
    }
    if (s.completed > 0) {
      s.violation_fraction = static_cast<double>(violated) / s.completed;
      s.outlier_fraction = static_cast<double>(outliers) / s.completed;
      s.median_terminal_x1 = median(terminal);
      double sum = 0.0;
      for (double t : terminal) sum += t;
      s.mean_terminal_x1 = sum / static_cast<double>(terminal.size());
    }
    if (!times.empty()) {
      double mean = 0.0;
      for (double t : times) mean += t;
      mean /= static_cast<double>(times.size());
      double var = 0.0;
      for (double t : times) var += (t - mean) * (t - mean);
      s.solve_ms_mean = mean;
      s.solve_ms_std = std::sqrt(var / static_cast<double>(times.size()));
    }
    rep.stats.push_back(s);
  }
  rep.terminal = histogram(rep, &RunResult::terminal_x1, rep.config.histogram_bins);
  rep.min_x2 = histogram(rep, &RunResult::min_x2, rep.config.histogram_bins);
}

CampaignReport run_campaign(const CampaignConfig& cfg) {
  cfg.validate();
  CampaignReport rep;
  rep.config = cfg;
  rep.true_w = evaluation_scenarios(cfg);

  const auto controllers = cfg.controllers();
  const std::size_t runs = static_cast<std::size_t>(cfg.runs);
  rep.runs.resize(controllers.size() * runs);
  tbb::parallel_for(std::size_t{0}, rep.runs.size(), [&](std::size_t task) {
    const ControllerKind c = controllers[task / runs];
    const int run_id = static_cast<int>(task % runs);
    const SimConfig sim = run_config(cfg, run_id, c);
    try {
      rep.runs[task] = summarize_run(run_id, run(rep.true_w[static_cast<std::size_t>(run_id)], sim), sim);
    } catch (const std::exception& e) {
      RunResult r;
      r.run_id = run_id;
      r.controller = c;
      r.failed = true;
      r.error = e.what();
      rep.runs[task] = std::move(r);
    }
  });
  aggregate(rep);
  return rep;
}

void emit_report(const CampaignReport& rep, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

  {
    std::ofstream os(dir / "runs.csv");
    if (!os) throw std::runtime_error("cannot write " + (dir / "runs.csv").string());
    os << "run_id,controller,terminal_x1,min_x2,violated,mean_solve_ms\n";
    for (const auto& r : rep.runs) {
      if (r.failed) continue;
      os << fmt::format("{},{},{:.17g},{:.17g},{},{:.6f}\n", r.run_id, to_string(r.controller), r.terminal_x1,
                        r.min_x2, r.violated ? 1 : 0, r.mean_solve_ms);
    }
  }
  write_histogram(dir / "hist_terminal.csv", rep, rep.terminal);
  write_histogram(dir / "hist_minx2.csv", rep, rep.min_x2);

  json controllers = json::object();
  for (const auto& s : rep.stats) {
    controllers[to_string(s.controller)] = {
        {"completed", s.completed},
        {"failed", s.failed},
        {"violation_fraction", s.violation_fraction},
        {"median_terminal_x1", s.median_terminal_x1},
        {"mean_terminal_x1", s.mean_terminal_x1},
        {"outlier_fraction", s.outlier_fraction},
        {"solve_ms_mean", s.solve_ms_mean},
        {"solve_ms_std", s.solve_ms_std},
    };
  }
  json failures = json::array();
  for (const auto& r : rep.runs)
    if (r.failed) failures.push_back({{"run_id", r.run_id}, {"controller", to_string(r.controller)}, {"error", r.error}});

  const json summary = {{"config", config_json(rep.config)}, {"controllers", controllers}, {"failed_runs", failures}};
  std::ofstream os(dir / "summary.json");
  if (!os) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
  os << summary.dump(2) << '\n';
}

std::string config_to_json(const CampaignConfig& cfg) { return config_json(cfg).dump(2); }

CampaignConfig config_from_json(const std::string& text) { return config_from(json::parse(text)); }

CampaignConfig config_from_summary(const std::filesystem::path& summary_json) {
  std::ifstream is(summary_json);
  if (!is) throw std::runtime_error("cannot read " + summary_json.string());
  const json j = json::parse(is);
  return config_from(j.at("config"));
}

}  // namespace csmpc
