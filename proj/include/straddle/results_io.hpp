#pragma once

#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "straddle/error.hpp"
#include "straddle/prequential.hpp"

namespace straddle {

/// Missing metric values serialize as null.
inline nlohmann::json metrics_to_json(const MetricRow& row) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t k = 0; k < kMetricCount; ++k) {
    const auto& v = row.values[k];
    j[std::string(kMetricNames[k])] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  }
  return j;
}

inline MetricRow metrics_from_json(const nlohmann::json& j) {
  MetricRow row;
  for (std::size_t k = 0; k < kMetricCount; ++k) {
    const std::string key(kMetricNames[k]);
    if (j.contains(key) && !j.at(key).is_null()) row.values[k] = j.at(key).get<double>();
  }
  return row;
}

namespace detail {
inline nlohmann::json curve_json(const std::vector<CurvePoint>& pts) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : pts) a.push_back({p.x, p.y});
  return a;
}
inline std::vector<CurvePoint> curve_from(const nlohmann::json& j) {
  std::vector<CurvePoint> pts;
  for (const auto& p : j) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return pts;
}
}  // namespace detail

/// One JSON-lines record. Test windows are written as their first and last
/// calendar day.
inline nlohmann::json window_to_json(const WindowResult& w) {
  nlohmann::json preds = nlohmann::json::array();
  for (const auto& p : w.predictions)
    preds.push_back({p.sample_id, p.trade_date.iso(), p.probability, p.decision, p.label, p.profit});
  return {{"iteration", w.iteration},
          {"model", w.model_id},
          {"repetition", w.repetition},
          {"test_start", w.test.after.plus_days(1).iso()},
          {"test_end", w.test.through.iso()},
          {"threshold", w.threshold ? nlohmann::json(*w.threshold) : nlohmann::json(nullptr)},
          {"validation_avg_profit", w.validation_avg_profit},
          {"epoch_validation_avg_profit", w.epoch_validation_avg_profit},
          {"metrics", metrics_to_json(w.metrics)},
          {"curves", {{"roc", detail::curve_json(w.metrics.curves.roc)}, {"prc", detail::curve_json(w.metrics.curves.prc)}}},
          {"predictions", std::move(preds)}};
}

inline WindowResult window_from_json(const nlohmann::json& j) {
  auto date = [](const nlohmann::json& v) {
    auto d = Date::parse(v.get<std::string>());
    if (!d) throw DataError("results: bad date '" + v.get<std::string>() + "'");
    return *d;
  };
  WindowResult w;
  w.iteration = j.at("iteration").get<std::size_t>();
  w.model_id = j.at("model").get<std::string>();
  w.repetition = j.at("repetition").get<int>();
  w.test = {date(j.at("test_start")).plus_days(-1), date(j.at("test_end"))};
  if (!j.at("threshold").is_null()) w.threshold = j.at("threshold").get<double>();
  w.validation_avg_profit = j.at("validation_avg_profit").get<double>();
  w.epoch_validation_avg_profit = j.at("epoch_validation_avg_profit").get<std::vector<double>>();
  w.metrics = metrics_from_json(j.at("metrics"));
  w.metrics.curves.roc = detail::curve_from(j.at("curves").at("roc"));
  w.metrics.curves.prc = detail::curve_from(j.at("curves").at("prc"));
  for (const auto& p : j.at("predictions"))
    w.predictions.push_back({p.at(0).get<std::size_t>(), date(p.at(1)), p.at(2).get<double>(), p.at(3).get<int>(),
                             p.at(4).get<int>(), p.at(5).get<double>()});
  return w;
}

inline void write_results_jsonl(const std::string& path, std::span<const WindowResult> windows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& w : windows) out << window_to_json(w).dump() << '\n';
}

inline std::vector<WindowResult> read_results_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::vector<WindowResult> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(window_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad results record: ") + e.what(), n);
    }
  }
  return out;
}

}  // namespace straddle
