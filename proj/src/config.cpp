#include "carloc/config.hpp"

#include <fstream>
#include <sstream>

namespace carloc {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw InvalidConfig(origin + ":" + std::to_string(line_no) + ": empty key");
    cfg.values_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw InvalidConfig(origin_ + ": key '" + key + "' is not an integer: " + it->second);
  }
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw InvalidConfig(origin_ + ": key '" + key + "' is not a number: " + it->second);
  }
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw InvalidConfig(origin_ + ": key '" + key + "' is not an integer: " + it->second);
  }
}

void KeyValueConfig::restrict_keys(const std::vector<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    bool ok = false;
    for (const auto& a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw InvalidConfig(origin_ + ": unknown config key '" + key + "'");
  }
}

TrainConfig train_config_from(const KeyValueConfig& cfg) {
  TrainConfig t;
  t.epochs = cfg.get_int("train.epochs", t.epochs);
  t.crop_size = cfg.get_int("train.crop_size", t.crop_size);
  t.batch_size = cfg.get_int("train.batch_size", t.batch_size);
  t.learning_rate = float(cfg.get_double("train.learning_rate", t.learning_rate));
  t.momentum = float(cfg.get_double("train.momentum", t.momentum));
  t.seed = cfg.get_u64("seed", t.seed);
  return t;
}

CamModelSpec model_spec_from(const KeyValueConfig& cfg) {
  CamModelSpec spec;
  spec.backbone = cfg.get("model.backbone", spec.backbone);
  spec.truncate_after = cfg.get_int("model.truncate_after", spec.truncate_after);
  spec.num_classes = cfg.get_int("model.num_classes", spec.num_classes);
  if (cfg.has("model.frozen_stages")) {
    spec.frozen_stages.clear();
    std::istringstream ss(cfg.get("model.frozen_stages", ""));
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) spec.frozen_stages.push_back(std::stoi(tok));
  }
  return spec;
}

BoxerConfig boxer_config_from(const KeyValueConfig& cfg) {
  BoxerConfig b;
  b.threshold_fraction = cfg.get_double("boxer.threshold_fraction", b.threshold_fraction);
  b.kernel_size = cfg.get_int("boxer.kernel_size", b.kernel_size);
  b.iterations = cfg.get_int("boxer.iterations", b.iterations);
  b.validate();
  return b;
}

}  // namespace carloc
