#include "carloc/kmeans.hpp"

#include <fstream>
#include <limits>

#include "carloc/rng.hpp"
#include "json.hpp"

using nlohmann::json;

namespace carloc {

void save_features(const FeatureTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open features file for write: " + path);
  json header{{"format", "carloc-features-v1"}, {"dim", table.dim()}, {"ids", table.ids}};
  out << header.dump() << "\n";
  std::vector<float> row(static_cast<std::size_t>(table.dim()));
  for (Eigen::Index i = 0; i < table.vectors.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.vectors.cols(); ++j) row[std::size_t(j)] = table.vectors(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              std::streamsize(row.size() * sizeof(float)));
  }
}

FeatureTable load_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open features file: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw ParseError("empty features file: " + path);
  FeatureTable table;
  int dim = 0;
  try {
    json header = json::parse(header_line);
    if (header.at("format").get<std::string>() != "carloc-features-v1")
      throw ParseError("unknown features format");
    dim = header.at("dim").get<int>();
    table.ids = header.at("ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  table.vectors.resize(Eigen::Index(table.ids.size()), dim);
  std::vector<float> row(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < table.vectors.rows(); ++i) {
    in.read(reinterpret_cast<char*>(row.data()), std::streamsize(row.size() * sizeof(float)));
    if (in.gcount() != std::streamsize(row.size() * sizeof(float)))
      throw ParseError("truncated feature rows in " + path);
    for (Eigen::Index j = 0; j < dim; ++j) table.vectors(i, j) = row[std::size_t(j)];
  }
  return table;
}

namespace {

// Nearest centroid in squared euclidean distance; strict improvement keeps
// ties at the lowest index.
int nearest_centroid(const Eigen::MatrixXf& x, Eigen::Index row,
                     const Eigen::MatrixXf& centroids, double* best_out) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const double d =
        (x.row(row).cast<double>() - centroids.row(c).cast<double>()).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = int(c);
    }
  }
  if (best_out) *best_out = best_d;
  return best;
}

}  // namespace

ClusterResult kmeans_lloyd(const FeatureTable& features, const Eigen::MatrixXf& init_centroids,
                           int max_iter, double tol) {
  const Eigen::Index n = features.vectors.rows();
  const int k = int(init_centroids.rows());
  if (k < 1) throw InvalidCount("k must be >= 1");
  if (Eigen::Index(k) > n) throw KTooLarge("k exceeds number of vectors");

  Eigen::MatrixXf centroids = init_centroids;
  std::vector<int> assign(std::size_t(n), 0);

  auto assign_all = [&](std::vector<int>& out) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double d = 0.0;
      out[std::size_t(i)] = nearest_centroid(features.vectors, i, centroids, &d);
      total += d;
    }
    return total;
  };

  ClusterResult result;
  result.k = k;
  result.seed = 0;

  double inertia = assign_all(assign);
  result.inertia_history.push_back(inertia);

  for (int iter = 0; iter < max_iter; ++iter) {
    // Centroid update; empty clusters keep their previous centroid.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, features.vectors.cols());
    std::vector<std::int64_t> counts(std::size_t(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[std::size_t(i)]) += features.vectors.row(i).cast<double>();
      counts[std::size_t(assign[std::size_t(i)])]++;
    }
    double max_shift2 = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[std::size_t(c)] == 0) continue;
      Eigen::RowVectorXf updated =
          (sums.row(c) / double(counts[std::size_t(c)])).cast<float>();
      max_shift2 = std::max(
          max_shift2, (updated.cast<double>() - centroids.row(c).cast<double>()).squaredNorm());
      centroids.row(c) = updated;
    }

    std::vector<int> next(std::size_t(n), 0);
    inertia = assign_all(next);
    result.inertia_history.push_back(inertia);
    const bool fixpoint = (next == assign);
    assign = std::move(next);
    if (fixpoint || max_shift2 < tol * tol) break;
  }

  result.centroids = std::move(centroids);
  result.inertia = inertia;
  for (Eigen::Index i = 0; i < n; ++i)
    result.assignment.emplace(features.ids[std::size_t(i)], assign[std::size_t(i)]);
  return result;
}

Eigen::MatrixXf kmeanspp_init(const FeatureTable& features, int k, std::uint64_t seed) {
  const Eigen::Index n = features.vectors.rows();
  Rng rng(seed);
  Eigen::MatrixXf centroids(k, features.vectors.cols());
  centroids.row(0) = features.vectors.row(Eigen::Index(rng.uniform_index(std::uint64_t(n))));

  Eigen::VectorXd dist2(n);
  for (Eigen::Index i = 0; i < n; ++i)
    dist2(i) = (features.vectors.row(i).cast<double>() - centroids.row(0).cast<double>())
                   .squaredNorm();

  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Eigen::Index chosen;
    if (total <= 0.0) {
      chosen = Eigen::Index(rng.uniform_index(std::uint64_t(n)));
    } else {
      double target = rng.uniform() * total;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= dist2(i);
        if (target <= 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centroids.row(c) = features.vectors.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i)
      dist2(i) = std::min(
          dist2(i),
          (features.vectors.row(i).cast<double>() - centroids.row(c).cast<double>())
              .squaredNorm());
  }
  return centroids;
}

ClusterResult kmeans_cluster(const FeatureTable& features, int k, std::uint64_t seed,
                             int max_iter, double tol) {
  if (k < 1) throw InvalidCount("k must be >= 1");
  if (Eigen::Index(k) > features.vectors.rows())
    throw KTooLarge("k=" + std::to_string(k) + " exceeds " +
                    std::to_string(features.vectors.rows()) + " vectors");
  ClusterResult result = kmeans_lloyd(features, kmeanspp_init(features, k, seed), max_iter, tol);
  result.seed = seed;
  return result;
}

namespace {

SizeStats stats_of(const std::vector<std::int64_t>& sizes) {
  SizeStats s;
  if (sizes.empty()) return s;
  double sum = 0.0;
  s.min = double(sizes[0]);
  s.max = double(sizes[0]);
  for (auto v : sizes) {
    sum += double(v);
    s.min = std::min(s.min, double(v));
    s.max = std::max(s.max, double(v));
  }
  s.mean = sum / double(sizes.size());
  double var = 0.0;
  for (auto v : sizes) var += (double(v) - s.mean) * (double(v) - s.mean);
  s.stddev = std::sqrt(var / double(sizes.size()));
  return s;
}

}  // namespace

ClusterStats cluster_stats(const ClusterResult& result, const DatasetManifest& manifest) {
  std::vector<std::int64_t> all(std::size_t(result.k), 0);
  std::vector<std::int64_t> train(std::size_t(result.k), 0);
  std::vector<std::int64_t> test(std::size_t(result.k), 0);
  for (const auto& img : manifest.images()) {
    auto it = result.assignment.find(img.id);
    if (it == result.assignment.end())
      throw LabelMismatch("cluster assignment missing image id: " + img.id);
    all[std::size_t(it->second)]++;
    (manifest.split(img.id) == Split::Train ? train : test)[std::size_t(it->second)]++;
  }
  return ClusterStats{stats_of(all), stats_of(train), stats_of(test)};
}

}  // namespace carloc
