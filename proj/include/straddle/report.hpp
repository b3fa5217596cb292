#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "straddle/csv.hpp"
#include "straddle/error.hpp"
#include "straddle/stats.hpp"

namespace straddle {

namespace detail {

inline nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json mean_row_json(const MeanRow& row) {
  nlohmann::json mean = nlohmann::json::object(), count = nlohmann::json::object();
  for (std::size_t k = 0; k < kMetricCount; ++k) {
    mean[std::string(kMetricNames[k])] = opt_json(row.mean[k]);
    count[std::string(kMetricNames[k])] = row.count[k];
  }
  return {{"mean", mean}, {"count", count}, {"windows", row.windows}};
}

inline std::string cell(const std::optional<double>& v) { return v ? csv::format_number(*v) : std::string(); }

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  return out;
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
}

/// Models in table order: byte-wise ascending.
inline std::vector<std::string> table_models(const AggregateReport& r) {
  auto ids = r.models;
  std::sort(ids.begin(), ids.end());
  return ids;
}

/// Plot columns: models in run order with the baseline last.
inline std::vector<std::string> plot_models(const AggregateReport& r) {
  std::vector<std::string> ids;
  for (const auto& id : r.models)
    if (id != kBaselineId) ids.push_back(id);
  if (std::find(r.models.begin(), r.models.end(), kBaselineId) != r.models.end()) ids.emplace_back(kBaselineId);
  return ids;
}

}  // namespace detail

inline nlohmann::json report_to_json(const AggregateReport& r) {
  using nlohmann::json;
  json windows = json::array();
  for (const auto& w : r.windows)
    windows.push_back({{"iteration", w.iteration}, {"test_start", w.test.after.plus_days(1).iso()},
                       {"test_end", w.test.through.iso()}});
  json all = json::object(), since = json::object();
  for (const auto& [id, row] : r.mean_all) all[id] = detail::mean_row_json(row);
  for (const auto& [id, row] : r.mean_since) since[id] = detail::mean_row_json(row);
  json pvals = json::object();
  for (const auto& [partition, per_model] : r.pvalues)
    for (const auto& [id, per_metric] : per_model)
      for (const auto& [metric, t] : per_metric)
        pvals[partition][id][std::string(metric_name(metric))] = {
            {"p", t.p_value}, {"p_bonferroni", t.p_adjusted}, {"n", t.n},
            {"degenerate", t.degenerate}, {"small_sample", t.small_sample}};
  json cumulative = json::object();
  for (const auto& [id, series] : r.cumulative_profit) cumulative[id] = series;
  return {{"cutoff", r.cutoff.iso()},
          {"models", r.models},
          {"windows", windows},
          {"mean_all", all},
          {"mean_since", since},
          {"since_empty", r.since_empty},
          {"comparison", {{"baseline", kBaselineId}, {"correction", "bonferroni"},
                          {"m", r.models.size() > 0 ? r.models.size() - 1 : 0}}},
          {"pvalues", pvals},
          {"cumulative_profit", cumulative}};
}

/// Summary table: one row per metric, one column per model over all
/// windows, then one per model over windows since the cutoff, labelled
/// "<id> (<cutoff year>)". Values use five decimals; NA marks a missing mean.
inline std::string metrics_table_csv(const AggregateReport& r) {
  const auto ids = detail::table_models(r);
  const std::string year = std::to_string(r.cutoff.year());
  std::string out = "metric";
  for (const auto& id : ids) out += "," + id;
  for (const auto& id : ids) out += "," + id + " (" + year + ")";
  out += '\n';
  auto fmt = [](const std::map<std::string, MeanRow>& rows, const std::string& id, Metric m) {
    auto it = rows.find(id);
    if (it == rows.end() || !it->second.mean[std::size_t(m)]) return std::string("NA");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.5f", *it->second.mean[std::size_t(m)]);
    return std::string(buf);
  };
  for (Metric m : kTableRows) {
    out += std::string(metric_name(m));
    for (const auto& id : ids) out += "," + fmt(r.mean_all, id, m);
    for (const auto& id : ids) out += "," + fmt(r.mean_since, id, m);
    out += '\n';
  }
  return out;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  auto out = detail::open_out(p);
  out << text;
  if (!out) throw DataError("failed writing " + p.string());
}

/// Writes cumulative_profit.csv, per_window_profit.csv,
/// profit_distribution.csv and metric_boxes.csv into `dir`.
inline void emit_plot_data(const AggregateReport& r, const std::filesystem::path& dir) {
  detail::ensure_dir(dir);
  const auto ids = detail::plot_models(r);
  const std::size_t tot = std::size_t(Metric::tot_profit);

  std::string head = "iteration,test_start,test_end";
  for (const auto& id : ids) head += "," + id;
  head += '\n';

  std::string cum = head, per = head;
  for (std::size_t k = 0; k < r.windows.size(); ++k) {
    const auto& w = r.windows[k];
    const std::string lead =
        std::to_string(w.iteration) + "," + w.test.after.plus_days(1).iso() + "," + w.test.through.iso();
    cum += lead;
    per += lead;
    for (const auto& id : ids) {
      cum += "," + csv::format_number(r.cumulative_profit.at(id)[k]);
      per += "," + detail::cell(r.per_window.at(id)[k][tot]);
    }
    cum += '\n';
    per += '\n';
  }
  write_text(dir / "cumulative_profit.csv", cum);
  write_text(dir / "per_window_profit.csv", per);

  std::string dist = "model,iteration,repetition,test_start,tot_profit,avg_profit\n";
  for (const auto& id : ids)
    for (const auto& w : r.results)
      if (w.model_id == id)
        dist += id + "," + std::to_string(w.iteration) + "," + std::to_string(w.repetition) + "," +
                w.test.after.plus_days(1).iso() + "," + detail::cell(w.metrics[Metric::tot_profit]) + "," +
                detail::cell(w.metrics[Metric::avg_profit]) + "\n";
  write_text(dir / "profit_distribution.csv", dist);

  std::string boxes = "partition,model,iteration,test_start,average_precision,balanced_accuracy\n";
  for (const char* partition : {"all", "since"}) {
    const bool since = std::string(partition) == "since";
    for (const auto& id : ids)
      for (std::size_t k = 0; k < r.windows.size(); ++k) {
        const auto& w = r.windows[k];
        if (since && !window_since(w.test, r.cutoff)) continue;
        const auto& v = r.per_window.at(id)[k];
        boxes += std::string(partition) + "," + id + "," + std::to_string(w.iteration) + "," +
                 w.test.after.plus_days(1).iso() + "," + detail::cell(v[std::size_t(Metric::average_precision)]) +
                 "," + detail::cell(v[std::size_t(Metric::balanced_accuracy)]) + "\n";
      }
  }
  write_text(dir / "metric_boxes.csv", boxes);
}

}  // namespace straddle
