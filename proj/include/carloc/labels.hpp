#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "carloc/manifest.hpp"

namespace carloc {

enum class LabelKind { Human, Merged, Random, Cluster };

std::string to_string(LabelKind k);
LabelKind label_kind_from_string(const std::string& s);

/// One complete labeling of a manifest: image id -> index into vocab.
struct LabelAssignment {
  std::string space_name;
  LabelKind kind = LabelKind::Human;
  std::vector<std::string> vocab;
  std::map<std::string, int> mapping;

  int num_classes() const { return int(vocab.size()); }
  int label_of(const std::string& id) const;

  friend bool operator==(const LabelAssignment&, const LabelAssignment&) = default;
};

/// Field selector for human and merged label spaces.
enum class LabelField { Make, Model, Year };

std::string to_string(LabelField f);
LabelField label_field_from_string(const std::string& s);

/// Reads one human label field straight off the manifest.
LabelAssignment human_labels(const DatasetManifest& manifest, LabelField field);

/// Concatenates two fields ("value1#value2") into a merged space. The
/// (make, model) pair is rejected in either order: the hierarchy means the
/// merge cannot produce any new label.
LabelAssignment merge_labels(const DatasetManifest& manifest, LabelField first,
                             LabelField second);

/// Uniform labels over [0, n), deterministic per seed.
LabelAssignment random_labels(const DatasetManifest& manifest, int n, std::uint64_t seed);

struct ClusterResult;  // kmeans.hpp

/// Adopts cluster indices as pseudo-labels; vocab is "c0".."c(k-1)" even for
/// empty clusters.
LabelAssignment cluster_to_labels(const ClusterResult& result, const std::string& name);

/// JSON file {"space_name","kind","vocab","mapping"}.
void save_labels(const LabelAssignment& labels, const std::string& path);
LabelAssignment load_labels(const std::string& path);

}  // namespace carloc
