#include "csmpc/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "csmpc/sampling.hpp"

namespace csmpc {

void ClusteringConfig::validate() const {
  if (n_cl < 1) throw std::invalid_argument("ClusteringConfig: n_cl must be >= 1");
  if (max_iter < 1) throw std::invalid_argument("ClusteringConfig: max_iter must be >= 1");
  if (restarts < 1) throw std::invalid_argument("ClusteringConfig: restarts must be >= 1");
}

namespace {

using Points = std::vector<LabelVector>;

double sq_dist(const LabelVector& a, const LabelVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Points standardized(const Points& pts) {
  Points out = pts;
  const std::size_t dim = pts.front().size();
  const double n = static_cast<double>(pts.size());
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0.0;
    for (const auto& p : pts) mean += p[d];
    mean /= n;
    double var = 0.0;
    for (const auto& p : pts) var += (p[d] - mean) * (p[d] - mean);
    const double sd = std::sqrt(var / n);
    if (sd == 0.0) continue;
    for (auto& p : out) p[d] = (p[d] - mean) / sd;
  }
  return out;
}

Points plus_plus_seeds(const Points& pts, int k, std::mt19937_64& rng) {
  Points centers;
  centers.reserve(k);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  centers.push_back(pts[pick(rng)]);
  std::vector<double> d2(pts.size(), std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < k) {
    for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = std::min(d2[i], sq_dist(pts[i], centers.back()));
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    if (total > 0.0) {
      std::discrete_distribution<std::size_t> weighted(d2.begin(), d2.end());
      centers.push_back(pts[weighted(rng)]);
    } else {
      centers.push_back(pts[pick(rng)]);
    }
  }
  return centers;
}

struct LloydRun {
  std::vector<int> labels;
  double inertia = 0.0;
  std::vector<double> history;
};

LloydRun lloyd(const Points& pts, Points centers, int max_iter) {
  const std::size_t k = centers.size();
  const std::size_t dim = pts.front().size();
  LloydRun run;
  run.labels.assign(pts.size(), -1);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    double inertia = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      int best = 0;
      double best_d = sq_dist(pts[i], centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = sq_dist(pts[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (run.labels[i] != best) changed = true;
      run.labels[i] = best;
      inertia += best_d;
    }
    run.history.push_back(inertia);
    run.inertia = inertia;
    if (!changed) break;

    // Empty clusters keep their previous center.
    Points sums(k, LabelVector(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto c = static_cast<std::size_t>(run.labels[i]);
      ++counts[c];
      for (std::size_t d = 0; d < dim; ++d) sums[c][d] += pts[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) centers[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    }
  }
  return run;
}

void relabel_by_first_appearance(std::vector<int>& labels, int k) {
  std::vector<int> map(k, -1);
  int next = 0;
  for (int& l : labels) {
    if (map[l] < 0) map[l] = next++;
    l = map[l];
  }
}

}  // namespace

KMeansResult kmeans(const std::vector<LabelVector>& points, const ClusteringConfig& cfg) {
  cfg.validate();
  if (points.size() < static_cast<std::size_t>(cfg.n_cl))
    throw InsufficientData(fmt::format("kmeans: {} points for {} clusters", points.size(), cfg.n_cl));
  const std::size_t dim = points.front().size();
  for (const auto& p : points)
    if (p.size() != dim) throw std::invalid_argument("kmeans: inconsistent label dimension");

  const Points pts = cfg.standardize ? standardized(points) : points;

  KMeansResult out;
  out.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.restarts; ++r) {
    std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    LloydRun run = lloyd(pts, plus_plus_seeds(pts, cfg.n_cl, rng), cfg.max_iter);
    out.inertia_history.push_back(run.history);
    if (run.inertia < out.inertia) {
      out.inertia = run.inertia;
      out.labels = std::move(run.labels);
      out.best_restart = r;
    }
  }
  relabel_by_first_appearance(out.labels, cfg.n_cl);
  return out;
}

std::vector<LabelVector> label_vectors(const std::vector<SolveRecord>& records) {
  std::vector<LabelVector> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    LabelVector v = r.u_star.flat();
    v.push_back(r.J_star);
    v.push_back(r.g_star);
    out.push_back(std::move(v));
  }
  return out;
}

double ClusterSummary::weight_sum() const {
  double s = 0.0;
  for (const auto& c : clusters) s += c.p;
  return s;
}

ClusterSummary summarize(const std::vector<SolveRecord>& records, const std::vector<int>& labels,
                         int n_cl) {
  if (records.size() != labels.size()) throw std::invalid_argument("summarize: labels not aligned with records");
  if (n_cl < 1) throw std::invalid_argument("summarize: n_cl must be >= 1");

  std::vector<std::vector<std::size_t>> members(n_cl);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_cl) throw std::invalid_argument("summarize: label out of range");
    members[labels[i]].push_back(i);
  }

  ClusterSummary s;
  const double total = static_cast<double>(records.size());
  for (const auto& idx : members) {
    if (idx.empty()) continue;
    ClusterStats c;
    c.member_count = idx.size();
    const double m = static_cast<double>(idx.size());
    c.p = m / total;
    double mean_J = 0.0, mean_g = 0.0;
    for (std::size_t i : idx) {
      for (std::size_t d = 0; d < kNumUncertain; ++d) c.w_center[d] += records[i].w[d];
      mean_J += records[i].J_star;
      mean_g += records[i].g_star;
    }
    for (double& v : c.w_center.values) v /= m;
    mean_J /= m;
    mean_g /= m;
    for (std::size_t i : idx) {
      c.sigma_J += (records[i].J_star - mean_J) * (records[i].J_star - mean_J);
      c.sigma_g += (records[i].g_star - mean_g) * (records[i].g_star - mean_g);
    }
    c.sigma_J /= m;
    c.sigma_g /= m;
    s.clusters.push_back(c);
  }
  return s;
}

void write_summary(std::ostream& os, const ClusterSummary& s) {
  for (const auto& c : s.clusters) {
    std::string line;
    for (double v : c.w_center.values) line += fmt::format("{:.17g} ", v);
    line += fmt::format("{:.17g} {:.17g} {:.17g}\n", c.p, c.sigma_J, c.sigma_g);
    os << line;
  }
}

ClusterSummary single_cluster(const UncertaintyVector& w) {
  ClusterSummary s;
  ClusterStats c;
  c.w_center = w;
  c.p = 1.0;
  c.member_count = 1;
  s.clusters.push_back(c);
  return s;
}

}  // namespace csmpc
