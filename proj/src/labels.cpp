#include "carloc/labels.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>

#include "carloc/kmeans.hpp"
#include "carloc/rng.hpp"
#include "json.hpp"

using nlohmann::json;

namespace carloc {

std::string to_string(LabelKind k) {
  switch (k) {
    case LabelKind::Human: return "human";
    case LabelKind::Merged: return "merged";
    case LabelKind::Random: return "random";
    default: return "cluster";
  }
}

LabelKind label_kind_from_string(const std::string& s) {
  if (s == "human") return LabelKind::Human;
  if (s == "merged") return LabelKind::Merged;
  if (s == "random") return LabelKind::Random;
  if (s == "cluster") return LabelKind::Cluster;
  throw ParseError("unknown label kind: " + s);
}

int LabelAssignment::label_of(const std::string& id) const {
  auto it = mapping.find(id);
  if (it == mapping.end()) throw LabelMismatch("no label for image id: " + id);
  return it->second;
}

std::string to_string(LabelField f) {
  switch (f) {
    case LabelField::Make: return "make";
    case LabelField::Model: return "model";
    default: return "year";
  }
}

LabelField label_field_from_string(const std::string& s) {
  if (s == "make") return LabelField::Make;
  if (s == "model") return LabelField::Model;
  if (s == "year") return LabelField::Year;
  throw ParseError("unknown label field: " + s);
}

namespace {

const std::string& field_value(const LabelRecord& rec, LabelField f) {
  switch (f) {
    case LabelField::Make: return rec.make;
    case LabelField::Model: return rec.model;
    default: return rec.year;
  }
}

LabelAssignment from_values(const DatasetManifest& manifest, const std::string& name,
                            LabelKind kind,
                            const std::function<std::string(const LabelRecord&)>& value_of) {
  std::set<std::string> names;
  for (const auto& img : manifest.images()) names.insert(value_of(manifest.label(img.id)));

  LabelAssignment out;
  out.space_name = name;
  out.kind = kind;
  out.vocab.assign(names.begin(), names.end());
  std::map<std::string, int> index;
  for (int i = 0; i < int(out.vocab.size()); ++i) index.emplace(out.vocab[i], i);
  for (const auto& img : manifest.images())
    out.mapping.emplace(img.id, index.at(value_of(manifest.label(img.id))));
  return out;
}

}  // namespace

LabelAssignment human_labels(const DatasetManifest& manifest, LabelField field) {
  return from_values(manifest, to_string(field), LabelKind::Human,
                     [field](const LabelRecord& r) { return field_value(r, field); });
}

LabelAssignment merge_labels(const DatasetManifest& manifest, LabelField first,
                             LabelField second) {
  if (first == second) throw InvalidPair("merge fields must be distinct");
  const bool make_model = (first == LabelField::Make && second == LabelField::Model) ||
                          (first == LabelField::Model && second == LabelField::Make);
  if (make_model)
    throw InvalidPair("merging make with model yields no new labels (hierarchy)");
  return from_values(manifest, to_string(first) + "-" + to_string(second), LabelKind::Merged,
                     [first, second](const LabelRecord& r) {
                       return field_value(r, first) + "#" + field_value(r, second);
                     });
}

LabelAssignment random_labels(const DatasetManifest& manifest, int n, std::uint64_t seed) {
  if (n < 1) throw InvalidCount("random label count must be >= 1");
  LabelAssignment out;
  out.space_name = "random" + std::to_string(n);
  out.kind = LabelKind::Random;
  for (int i = 0; i < n; ++i) out.vocab.push_back("r" + std::to_string(i));
  Rng rng(seed);
  for (const auto& img : manifest.images())
    out.mapping.emplace(img.id, int(rng.uniform_index(std::uint64_t(n))));
  return out;
}

LabelAssignment cluster_to_labels(const ClusterResult& result, const std::string& name) {
  LabelAssignment out;
  out.space_name = name;
  out.kind = LabelKind::Cluster;
  for (int i = 0; i < result.k; ++i) out.vocab.push_back("c" + std::to_string(i));
  for (const auto& [id, cluster] : result.assignment) out.mapping.emplace(id, cluster);
  return out;
}

void save_labels(const LabelAssignment& labels, const std::string& path) {
  json j{{"space_name", labels.space_name},
         {"kind", to_string(labels.kind)},
         {"vocab", labels.vocab},
         {"mapping", labels.mapping}};
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open labels file for write: " + path);
  out << j.dump(2) << "\n";
}

LabelAssignment load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open labels file: " + path);
  json j;
  try {
    in >> j;
    LabelAssignment out;
    out.space_name = j.at("space_name").get<std::string>();
    out.kind = label_kind_from_string(j.at("kind").get<std::string>());
    out.vocab = j.at("vocab").get<std::vector<std::string>>();
    out.mapping = j.at("mapping").get<std::map<std::string, int>>();
    for (const auto& [id, idx] : out.mapping)
      if (idx < 0 || idx >= int(out.vocab.size()))
        throw ParseError("label index out of vocab range for id " + id);
    return out;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace carloc
