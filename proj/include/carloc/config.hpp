#pragma once

#include <map>
#include <string>
#include <vector>

#include "carloc/boxer.hpp"
#include "carloc/camnet.hpp"

namespace carloc {

/// Flat key-value config file: one `key = value` per line, `#` comments,
/// dotted keys for sections. Unknown keys are rejected by the typed loaders.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  /// Throws InvalidConfig if any key is outside the allowed set.
  void restrict_keys(const std::vector<std::string>& allowed) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

/// Section loaders shared by the CLI subcommands and the pipeline.
TrainConfig train_config_from(const KeyValueConfig& cfg);
CamModelSpec model_spec_from(const KeyValueConfig& cfg);
BoxerConfig boxer_config_from(const KeyValueConfig& cfg);

}  // namespace carloc
