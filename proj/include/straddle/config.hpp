#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "straddle/classifiers/classifier.hpp"
#include "straddle/date.hpp"
#include "straddle/error.hpp"
#include "straddle/features.hpp"
#include "straddle/prequential.hpp"
#include "straddle/synth.hpp"

namespace straddle {

inline constexpr int kConfigSchemaVersion = 1;

enum class DataSource { synth, csv };
enum class Schedule { daily, friday };

struct CsvPaths {
  std::string options;
  std::string spx;
  std::string vix;
};

/// A fully resolved experiment description. Relative paths in the file are
/// resolved against the file's directory.
struct ExperimentConfig {
  std::string name;
  DataSource source = DataSource::synth;
  SynthConfig synth;
  CsvPaths csv;
  std::vector<std::string> features;
  Schedule schedule = Schedule::daily;
  long tenor_days = 7;
  int split_frequency_months = 1;
  YearMonth test_start{2014, 2};
  Date train_start{2011, 11, 1};
  int iterations = 5;
  int epochs = 10;
  int evaluate_every = 1;
  ThresholdMode threshold_mode = ThresholdMode::all_samples;
  WeightMode weight_mode = WeightMode::absolute;
  Date cutoff{2019, 1, 1};
  std::uint64_t base_seed = 0;
  std::string output_dir = "runs/out";
  std::vector<ModelEntry> models;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
T field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <typename T>
void optional_field(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  if (j.contains(key)) out = field<T>(j, key, where);
}

inline Date date_field(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto text = field<std::string>(j, key, where);
  auto d = Date::parse(text);
  if (!d) throw ConfigError(where + "." + key + ": expected YYYY-MM-DD, got '" + text + "'");
  return *d;
}

inline std::string resolve_path(const std::string& p, const std::filesystem::path& base) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return path.string();
  return (base / path).lexically_normal().string();
}

inline SynthConfig synth_from_json(const nlohmann::json& j) {
  const std::string where = "data.synth";
  reject_unknown_keys(j, {"seed", "start", "n_days", "spx0", "vix0", "vix_mean", "reversion_speed", "vol_of_vol",
                          "spx_vix_correlation", "annual_drift", "strike_step", "strikes_per_side", "tenors"},
                      where);
  SynthConfig c;
  optional_field(j, "seed", c.seed, where);
  if (j.contains("start")) c.start = date_field(j, "start", where);
  optional_field(j, "n_days", c.n_days, where);
  optional_field(j, "spx0", c.spx0, where);
  optional_field(j, "vix0", c.vix0, where);
  optional_field(j, "vix_mean", c.vix_mean, where);
  optional_field(j, "reversion_speed", c.reversion_speed, where);
  optional_field(j, "vol_of_vol", c.vol_of_vol, where);
  optional_field(j, "spx_vix_correlation", c.spx_vix_correlation, where);
  optional_field(j, "annual_drift", c.annual_drift, where);
  optional_field(j, "strike_step", c.strike_step, where);
  optional_field(j, "strikes_per_side", c.strikes_per_side, where);
  optional_field(j, "tenors", c.tenors, where);
  if (auto err = check_synth_config(c)) throw ConfigError(where + ": " + *err);
  return c;
}

inline nlohmann::json synth_to_json(const SynthConfig& c) {
  return {{"seed", c.seed},
          {"start", c.start.iso()},
          {"n_days", c.n_days},
          {"spx0", c.spx0},
          {"vix0", c.vix0},
          {"vix_mean", c.vix_mean},
          {"reversion_speed", c.reversion_speed},
          {"vol_of_vol", c.vol_of_vol},
          {"spx_vix_correlation", c.spx_vix_correlation},
          {"annual_drift", c.annual_drift},
          {"strike_step", c.strike_step},
          {"strikes_per_side", c.strikes_per_side},
          {"tenors", c.tenors}};
}

}  // namespace detail

/// Parses and validates a config document. `base_dir` anchors relative
/// data paths.
inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  const std::string root = "config";
  reject_unknown_keys(j,
                      {"schema_version", "name", "data", "features", "schedule", "tenor_days",
                       "split_frequency_months", "test_start", "train_start", "iterations", "epochs",
                       "evaluate_every", "threshold_mode", "weight_mode", "cutoff", "base_seed", "output_dir",
                       "models"},
                      root);
  const int version = field<int>(j, "schema_version", root);
  if (version != kConfigSchemaVersion)
    throw ConfigError("config.schema_version: unsupported version " + std::to_string(version));

  ExperimentConfig c;
  optional_field(j, "name", c.name, root);

  const auto& data = j.contains("data") ? j.at("data") : throw ConfigError("config: missing required key 'data'");
  const auto source = field<std::string>(data, "source", "data");
  if (source == "synth") {
    reject_unknown_keys(data, {"source", "synth"}, "data");
    c.source = DataSource::synth;
    c.synth = synth_from_json(data.contains("synth") ? data.at("synth") : nlohmann::json::object());
  } else if (source == "csv") {
    reject_unknown_keys(data, {"source", "options", "spx", "vix"}, "data");
    c.source = DataSource::csv;
    c.csv.options = resolve_path(field<std::string>(data, "options", "data"), base_dir);
    c.csv.spx = resolve_path(field<std::string>(data, "spx", "data"), base_dir);
    c.csv.vix = resolve_path(field<std::string>(data, "vix", "data"), base_dir);
  } else {
    throw ConfigError("data.source: expected 'synth' or 'csv', got '" + source + "'");
  }

  c.features = field<std::vector<std::string>>(j, "features", root);
  try {
    resolve_features(c.features);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config.features: ") + e.what());
  }
  if (c.features.empty()) throw ConfigError("config.features: at least one feature is required");

  if (j.contains("schedule")) {
    const auto s = field<std::string>(j, "schedule", root);
    if (s == "daily") c.schedule = Schedule::daily;
    else if (s == "friday") c.schedule = Schedule::friday;
    else throw ConfigError("config.schedule: expected 'daily' or 'friday'");
  }
  optional_field(j, "tenor_days", c.tenor_days, root);
  if (c.tenor_days < 1) throw ConfigError("config.tenor_days: must be >= 1");
  c.split_frequency_months = field<int>(j, "split_frequency_months", root);
  if (c.split_frequency_months < 1) throw ConfigError("config.split_frequency_months: must be >= 1");
  {
    const auto text = field<std::string>(j, "test_start", root);
    auto ym = YearMonth::parse(text);
    if (!ym) throw ConfigError("config.test_start: expected YYYY-MM, got '" + text + "'");
    c.test_start = *ym;
  }
  c.train_start = date_field(j, "train_start", root);
  optional_field(j, "iterations", c.iterations, root);
  if (c.iterations < 1) throw ConfigError("config.iterations: must be >= 1");
  optional_field(j, "epochs", c.epochs, root);
  if (c.epochs < 1) throw ConfigError("config.epochs: must be >= 1");
  optional_field(j, "evaluate_every", c.evaluate_every, root);
  if (c.evaluate_every < 1) throw ConfigError("config.evaluate_every: must be >= 1");
  if (j.contains("threshold_mode")) {
    const auto s = field<std::string>(j, "threshold_mode", root);
    if (s == "all_samples") c.threshold_mode = ThresholdMode::all_samples;
    else if (s == "per_trade") c.threshold_mode = ThresholdMode::per_trade;
    else throw ConfigError("config.threshold_mode: expected 'all_samples' or 'per_trade'");
  }
  if (j.contains("weight_mode")) {
    const auto s = field<std::string>(j, "weight_mode", root);
    if (s == "absolute") c.weight_mode = WeightMode::absolute;
    else if (s == "signed") c.weight_mode = WeightMode::signed_profit;
    else throw ConfigError("config.weight_mode: expected 'absolute' or 'signed'");
  }
  if (j.contains("cutoff")) c.cutoff = date_field(j, "cutoff", root);
  optional_field(j, "base_seed", c.base_seed, root);
  optional_field(j, "output_dir", c.output_dir, root);
  c.output_dir = resolve_path(c.output_dir, base_dir);

  const auto& models = j.contains("models") ? j.at("models") : throw ConfigError("config: missing required key 'models'");
  if (!models.is_array() || models.empty()) throw ConfigError("config.models: expected a non-empty array");
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string where = "models[" + std::to_string(i) + "]";
    const auto& m = models[i];
    reject_unknown_keys(m, {"id", "kind", "params"}, where);
    ModelEntry e;
    e.id = field<std::string>(m, "id", where);
    if (e.id.empty() || e.id == kBaselineId) throw ConfigError(where + ".id: must be non-empty and not 'All'");
    for (const auto& prev : c.models)
      if (prev.id == e.id) throw ConfigError(where + ".id: duplicate id '" + e.id + "'");
    const auto kind_text = field<std::string>(m, "kind", where);
    auto kind = parse_kind(kind_text);
    if (!kind) throw ConfigError(where + ".kind: unknown classifier '" + kind_text + "'");
    e.spec.kind = *kind;
    try {
      e.spec.params = params_from_json(*kind, m.contains("params") ? m.at("params") : nlohmann::json::object());
    } catch (const ConfigError& err) {
      throw ConfigError(where + ".params: " + err.what());
    }
    c.models.push_back(std::move(e));
  }
  return c;
}

/// Fully resolved form; feeding it back to config_from_json reproduces `c`.
inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json data;
  if (c.source == DataSource::synth) {
    data = {{"source", "synth"}, {"synth", detail::synth_to_json(c.synth)}};
  } else {
    data = {{"source", "csv"}, {"options", c.csv.options}, {"spx", c.csv.spx}, {"vix", c.csv.vix}};
  }
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : c.models)
    models.push_back({{"id", m.id}, {"kind", kind_name(m.spec.kind)}, {"params", params_to_json(m.spec.params)}});
  return {{"schema_version", kConfigSchemaVersion},
          {"name", c.name},
          {"data", data},
          {"features", c.features},
          {"schedule", c.schedule == Schedule::daily ? "daily" : "friday"},
          {"tenor_days", c.tenor_days},
          {"split_frequency_months", c.split_frequency_months},
          {"test_start", c.test_start.iso()},
          {"train_start", c.train_start.iso()},
          {"iterations", c.iterations},
          {"epochs", c.epochs},
          {"evaluate_every", c.evaluate_every},
          {"threshold_mode", c.threshold_mode == ThresholdMode::all_samples ? "all_samples" : "per_trade"},
          {"weight_mode", c.weight_mode == WeightMode::absolute ? "absolute" : "signed"},
          {"cutoff", c.cutoff.iso()},
          {"base_seed", c.base_seed},
          {"output_dir", c.output_dir},
          {"models", models}};
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  // A run manifest embeds the resolved config under "config".
  if (j.is_object() && j.contains("manifest_version") && j.contains("config")) j = j.at("config");
  return config_from_json(j, std::filesystem::path(path).parent_path());
}

/// FNV-1a over the canonical (resolved, key-sorted) config text.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
  const std::string text = config_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline HarnessOptions harness_options(const ExperimentConfig& c) {
  HarnessOptions o;
  o.delta_months = c.split_frequency_months;
  o.test_start = c.test_start;
  o.train_start = c.train_start;
  o.repetitions = c.iterations;
  o.epochs = c.epochs;
  o.evaluate_every = c.evaluate_every;
  o.base_seed = c.base_seed;
  o.threshold_mode = c.threshold_mode;
  o.weight_mode = c.weight_mode;
  o.models = c.models;
  return o;
}

}  // namespace straddle
