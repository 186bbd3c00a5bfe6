#pragma once

// Run configuration: an INI file with [train], [recalibrate], [evaluate] and
// [run] sections.
//
// Precedence, lowest to highest: built-in defaults, the config file, the
// WHEELODO_SEED environment variable, command-line flags.

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <set>
#include <type_traits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "wheelodo/domain_adapt.hpp"
#include "wheelodo/error.hpp"
#include "wheelodo/eval_harness.hpp"
#include "wheelodo/hash.hpp"
#include "wheelodo/text.hpp"
#include "wheelodo/trainer.hpp"

namespace wheelodo {

inline constexpr int kDefaultRecalBatch = 8;

struct RunConfig {
  TrainConfig train;
  int recal_epochs = kDefaultRecalEpochs;
  int recal_batch_size = kDefaultRecalBatch;
  std::vector<std::string> recal_freeze;
  double adapt_seconds = kDefaultSliceSeconds;
  std::vector<int> scenarios = kDefaultScenarios;
  std::optional<double> radius_m;  // overrides WPM radius calibration

  std::uint64_t seed() const { return train.seed; }
  void set_seed(std::uint64_t s) { train.seed = s; }

  TrainConfig recal() const {
    TrainConfig c = recal_config_from(train, recal_epochs);
    c.batch_size = recal_batch_size;
    c.freeze = recal_freeze;
    return c;
  }

  void validate() const {
    train.validate();
    recal().validate();
    if (!(adapt_seconds > 0.0)) fail(Errc::InvalidConfig, "adapt_seconds must be > 0");
    for (int s : scenarios) {
      if (s < 1) fail(Errc::InvalidConfig, "scenario durations must be positive");
    }
    if (radius_m && !(*radius_m > 0.0)) fail(Errc::InvalidConfig, "radius must be > 0");
  }

  nlohmann::json to_json() const {
    nlohmann::json j = {{"train", train.to_json()},
                        {"recalibrate",
                         {{"epochs", recal_epochs},
                          {"batch_size", recal_batch_size},
                          {"freeze", recal_freeze},
                          {"seconds", adapt_seconds}}},
                        {"evaluate", {{"scenarios", scenarios}}},
                        {"seed", seed()}};
    j["radius_m"] = radius_m ? nlohmann::json(*radius_m) : nlohmann::json(nullptr);
    return j;
  }

  std::string hash() const { return hex_digest(fnv1a(to_json().dump())); }
};

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline std::vector<int> parse_scenarios(const std::string& text) {
  std::vector<int> out;
  for (const auto& s : split_list(text)) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      out.push_back(v);
    } catch (const std::exception&) {
      fail(Errc::InvalidConfig, "bad scenario duration '" + s + "'");
    }
  }
  return out;
}

inline std::uint64_t parse_seed(const std::string& text, const std::string& origin) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size() || text.front() == '-') throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    fail(Errc::InvalidConfig, origin + ": seed must be a non-negative integer, got '" + text + "'");
  }
}

/// Applies the keys present in an INI file on top of `cfg`.
inline void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(Errc::MissingFile, path.string());
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
    static const std::set<std::string> kKnown = {
        "train.learning_rate", "train.dropout",       "train.epochs",         "train.batch_size",
        "train.hidden_size",   "train.freeze",        "recalibrate.epochs",   "recalibrate.batch_size",
        "recalibrate.freeze",  "recalibrate.seconds", "evaluate.scenarios",   "run.seed",
        "run.radius_m"};
    for (const auto& [section, body] : tree) {
      for (const auto& [key, value] : body) {
        if (!kKnown.contains(section + "." + key)) {
          fail(Errc::InvalidConfig, path.string() + ": unknown key [" + section + "] " + key);
        }
      }
    }
    // get(path, default) would swallow a malformed value, so only present keys are converted
    auto set = [&tree]<typename T>(const char* key, T& field) {
      if (tree.get_child_optional(key)) field = tree.get<T>(key);
    };
    auto& t = cfg.train;
    set("train.learning_rate", t.learning_rate);
    set("train.dropout", t.dropout_rate);
    set("train.epochs", t.epochs);
    set("train.batch_size", t.batch_size);
    set("train.hidden_size", t.hidden_size);
    if (auto v = tree.get_optional<std::string>("train.freeze")) t.freeze = split_list(*v);
    set("recalibrate.epochs", cfg.recal_epochs);
    set("recalibrate.batch_size", cfg.recal_batch_size);
    if (auto v = tree.get_optional<std::string>("recalibrate.freeze")) cfg.recal_freeze = split_list(*v);
    set("recalibrate.seconds", cfg.adapt_seconds);
    if (auto v = tree.get_optional<std::string>("evaluate.scenarios")) cfg.scenarios = parse_scenarios(*v);
    if (auto v = tree.get_optional<std::string>("run.seed")) cfg.set_seed(parse_seed(*v, path.string()));
    if (tree.get_child_optional("run.radius_m")) cfg.radius_m = tree.get<double>("run.radius_m");
  } catch (const pt::ptree_error& e) {
    fail(Errc::InvalidConfig, path.string() + ": " + e.what());
  }
}

inline void apply_seed_env(RunConfig& cfg) {
  if (const char* s = std::getenv("WHEELODO_SEED"); s && *s) cfg.set_seed(parse_seed(s, "WHEELODO_SEED"));
}

/// The INI text of a configuration, loadable by apply_config_file.
inline std::string config_to_ini(const RunConfig& cfg) {
  auto join = [](const auto& v) {
    std::string s;
    for (const auto& x : v) {
      if (!s.empty()) s += ",";
      if constexpr (std::is_same_v<std::decay_t<decltype(x)>, std::string>) {
        s += x;
      } else {
        s += std::to_string(x);
      }
    }
    return s;
  };
  std::string out;
  out += "[train]\n";
  out += "learning_rate = " + format_double(cfg.train.learning_rate) + "\n";
  out += "dropout = " + format_double(cfg.train.dropout_rate) + "\n";
  out += "epochs = " + std::to_string(cfg.train.epochs) + "\n";
  out += "batch_size = " + std::to_string(cfg.train.batch_size) + "\n";
  out += "hidden_size = " + std::to_string(cfg.train.hidden_size) + "\n";
  out += "freeze = " + join(cfg.train.freeze) + "\n\n";
  out += "[recalibrate]\n";
  out += "epochs = " + std::to_string(cfg.recal_epochs) + "\n";
  out += "batch_size = " + std::to_string(cfg.recal_batch_size) + "\n";
  out += "freeze = " + join(cfg.recal_freeze) + "\n";
  out += "seconds = " + format_double(cfg.adapt_seconds) + "\n\n";
  out += "[evaluate]\n";
  out += "scenarios = " + join(cfg.scenarios) + "\n\n";
  out += "[run]\n";
  out += "seed = " + std::to_string(cfg.seed()) + "\n";
  if (cfg.radius_m) out += "radius_m = " + format_double(*cfg.radius_m) + "\n";
  return out;
}

}  // namespace wheelodo
