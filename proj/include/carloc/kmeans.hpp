#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "carloc/manifest.hpp"

namespace carloc {

/// Row-per-image embedding matrix with the owning image ids.
struct FeatureTable {
  std::vector<std::string> ids;
  Eigen::MatrixXf vectors;  // |ids| x D

  int dim() const { return int(vectors.cols()); }
  std::size_t size() const { return ids.size(); }
};

/// Binary feature file: one-line JSON header {"format","dim","ids"} followed
/// by raw little-endian float32 rows.
void save_features(const FeatureTable& table, const std::string& path);
FeatureTable load_features(const std::string& path);

struct ClusterResult {
  int k = 0;
  Eigen::MatrixXf centroids;  // k x D
  std::map<std::string, int> assignment;
  double inertia = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> inertia_history;  // one entry per Lloyd iteration
};

/// Lloyd iterations from explicit initial centroids. Assignment ties go to the
/// lowest centroid index; empty clusters keep their previous centroid. Stops at
/// the assignment fixpoint, when every centroid moves less than tol, or after
/// max_iter iterations.
ClusterResult kmeans_lloyd(const FeatureTable& features, const Eigen::MatrixXf& init_centroids,
                           int max_iter, double tol);

/// Seeded k-means++ centroid selection.
Eigen::MatrixXf kmeanspp_init(const FeatureTable& features, int k, std::uint64_t seed);

/// k-means++ initialization followed by Lloyd. Throws KTooLarge when
/// k exceeds the number of vectors.
ClusterResult kmeans_cluster(const FeatureTable& features, int k, std::uint64_t seed,
                             int max_iter = 100, double tol = 1e-4);

struct SizeStats {
  double mean = 0.0;
  double max = 0.0;
  double min = 0.0;
  double stddev = 0.0;  // population
};

struct ClusterStats {
  SizeStats all;
  SizeStats train;
  SizeStats test;
};

/// Statistics over the k cluster cardinalities, for all data and per split.
/// Empty clusters count as size zero.
ClusterStats cluster_stats(const ClusterResult& result, const DatasetManifest& manifest);

}  // namespace carloc
