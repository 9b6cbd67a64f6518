#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "csmpc/model.hpp"
#include "csmpc/record.hpp"

namespace csmpc {

/// Clustering feature of one record: flattened u_star, then J_star, g_star.
using LabelVector = std::vector<double>;

struct ClusteringConfig {
  int n_cl = 3;
  int max_iter = 100;
  int restarts = 8;
  std::uint64_t seed = 0;
  bool standardize = true;

  void validate() const;
};

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KMeansResult {
  /// Cluster index per point, 0-based, numbered in order of first appearance.
  std::vector<int> labels;
  double inertia = 0.0;  // in the (possibly standardized) feature space
  int best_restart = 0;
  /// Inertia after every assignment step, one list per restart.
  std::vector<std::vector<double>> inertia_history;
};

/// Lloyd iterations from k-means++ seeding, best of `restarts` by final
/// inertia. Dimensions with non-zero spread are z-scored first when
/// cfg.standardize is set. Throws InsufficientData when there are fewer
/// points than clusters.
KMeansResult kmeans(const std::vector<LabelVector>& points, const ClusteringConfig& cfg);

std::vector<LabelVector> label_vectors(const std::vector<SolveRecord>& records);

struct ClusterStats {
  UncertaintyVector w_center;  // mean of member w
  double p = 0.0;              // member_count / number of records
  double sigma_J = 0.0;        // population variance of member J_star
  double sigma_g = 0.0;        // population variance of member g_star
  std::size_t member_count = 0;
};

struct ClusterSummary {
  std::vector<ClusterStats> clusters;

  bool empty() const { return clusters.empty(); }
  std::size_t size() const { return clusters.size(); }
  double weight_sum() const;
};

/// Per-cluster centers, weights and dispersions in uncertainty space.
/// Clusters without members are dropped; the weights of the remaining
/// clusters still sum to one.
ClusterSummary summarize(const std::vector<SolveRecord>& records, const std::vector<int>& labels,
                         int n_cl);

/// One line per cluster: 13 center values, p, sigma_J, sigma_g.
void write_summary(std::ostream& os, const ClusterSummary& s);

/// Summary consisting of a single cluster at `w` with zero dispersion.
ClusterSummary single_cluster(const UncertaintyVector& w);

}  // namespace csmpc
