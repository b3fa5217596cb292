#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "straddle/config.hpp"
#include "straddle/csv.hpp"
#include "straddle/data_ingest.hpp"
#include "straddle/features.hpp"
#include "straddle/prequential.hpp"
#include "straddle/report.hpp"
#include "straddle/results_io.hpp"
#include "straddle/stats.hpp"
#include "straddle/synth.hpp"

namespace straddle {

inline constexpr std::string_view kVersion = "1.0.0";
inline constexpr int kManifestVersion = 1;

struct LoadedMarket {
  MarketDataset dataset;
  std::vector<std::string> warnings;
};

inline LoadedMarket load_market(const ExperimentConfig& cfg) {
  LoadedMarket out;
  if (cfg.source == DataSource::synth) {
    out.dataset = generate_market(cfg.synth);
    return out;
  }
  const auto quotes = load_option_chain(cfg.csv.options);
  const auto spx = load_daily_bars(cfg.csv.spx);
  const auto vix = load_daily_bars(cfg.csv.vix);
  auto aligned = align_calendar(quotes, spx, vix);
  for (Date d : aligned.dropped) out.warnings.push_back(d.iso() + ": missing from some source, dropped");
  out.dataset = std::move(aligned.dataset);
  return out;
}

inline SampleSet build_samples(const ExperimentConfig& cfg, const MarketDataset& ds) {
  const auto features = resolve_features(cfg.features);
  const auto& dates = ds.dates();
  if (dates.empty()) throw DataError("market data is empty");
  const Date from = std::max(cfg.train_start, dates.front());
  const std::vector<Date> schedule = cfg.schedule == Schedule::daily ? daily_schedule(ds, from, dates.back())
                                                                      : friday_schedule(dates, from, dates.back());
  return build_dataset(ds, schedule, cfg.tenor_days, features);
}

/// Human-readable split listing; no training.
inline std::string describe_splits(const SplitPlan& plan, std::size_t n_samples) {
  std::ostringstream os;
  os << "samples: " << n_samples << "\n";
  os << "iterations: " << plan.iterations.size() << "\n";
  os << "iteration,train_start,train_end,validation_start,validation_end,test_start,test_end\n";
  for (const auto& it : plan.iterations)
    os << it.index << ',' << it.train_start.iso() << ',' << it.train_end.iso() << ','
       << it.validation.after.plus_days(1).iso() << ',' << it.validation.through.iso() << ','
       << it.test.after.plus_days(1).iso() << ',' << it.test.through.iso() << '\n';
  for (const auto& w : plan.warnings) os << "warning: " << w << '\n';
  return os.str();
}

inline std::string dry_run(const ExperimentConfig& cfg) {
  const auto market = load_market(cfg);
  const auto samples = build_samples(cfg, market.dataset);
  std::vector<Date> dates;
  for (const auto& r : samples.records) dates.push_back(r.trade_date);
  const auto plan = make_splits(dates, cfg.split_frequency_months, cfg.test_start, cfg.train_start);
  return describe_splits(plan, samples.records.size());
}

inline nlohmann::json run_manifest(const ExperimentConfig& cfg) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", (unsigned long long)config_hash(cfg));
  return {{"manifest_version", kManifestVersion},
          {"config_hash", std::string("fnv1a64:") + hash},
          {"base_seed", cfg.base_seed},
          {"versions",
           {{"straddle", kVersion},
            {"config_schema", kConfigSchemaVersion},
            {"model_format", kModelFormatVersion},
            {"compiler", __VERSION__}}},
          {"config", config_to_json(cfg)}};
}

struct RunOutcome {
  std::filesystem::path out_dir;
  AggregateReport report;
  std::vector<std::string> warnings;
};

/// Data -> samples -> walk-forward evaluation -> aggregation, with every
/// artifact written under `out_dir`.
inline RunOutcome run_pipeline(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, int threads = 0) {
  detail::ensure_dir(out_dir);
  RunOutcome outcome;
  outcome.out_dir = out_dir;

  auto market = load_market(cfg);
  outcome.warnings = std::move(market.warnings);
  const auto samples = build_samples(cfg, market.dataset);
  outcome.warnings.insert(outcome.warnings.end(), samples.warnings.begin(), samples.warnings.end());
  write_samples_csv((out_dir / "samples.csv").string(), samples);

  auto opt = harness_options(cfg);
  opt.threads = threads;
  const auto result = run_experiment(opt, samples);
  outcome.warnings.insert(outcome.warnings.end(), result.warnings.begin(), result.warnings.end());
  if (result.windows.empty()) throw DataError("no test window produced results");

  write_results_jsonl((out_dir / "results.jsonl").string(), result.windows);
  outcome.report = aggregate(result.windows, cfg.cutoff);
  write_text(out_dir / "report.json", report_to_json(outcome.report).dump(2) + "\n");
  write_text(out_dir / "metrics_table.csv", metrics_table_csv(outcome.report));
  emit_plot_data(outcome.report, out_dir / "plots");
  write_text(out_dir / "splits.csv", describe_splits({result.splits, {}}, samples.records.size()));
  write_text(out_dir / "manifest.json", run_manifest(cfg).dump(2) + "\n");

  std::string warn;
  for (const auto& w : outcome.warnings) warn += w + "\n";
  write_text(out_dir / "warnings.txt", warn);
  return outcome;
}

// ------------------------------------------------------------- timeline

inline constexpr double kTimelineThreshold = 0.5;

struct TimelineRow {
  int week = 0;
  Date date;
  double probability = 0.0;
  bool trade = false;
};

inline std::string_view trade_marking(bool trade) { return trade ? "trade!" : "don't trade!"; }

/// Week rows in the given order; trade when probability > 0.5.
inline std::vector<TimelineRow> mark_timeline(std::span<const std::pair<Date, double>> points) {
  std::vector<TimelineRow> rows;
  for (std::size_t i = 0; i < points.size(); ++i)
    rows.push_back({int(i + 1), points[i].first, points[i].second, points[i].second > kTimelineThreshold});
  return rows;
}

/// Friday predictions of `model_id` (repetition 0) between `from` and `to`.
/// Weeks without five trading days among the predictions are omitted.
inline std::vector<TimelineRow> timeline_from_results(std::span<const WindowResult> results, const std::string& model_id,
                                                      Date from, Date to) {
  std::map<Date, double> by_date;
  bool found_model = false;
  for (const auto& w : results) {
    if (w.model_id != model_id) continue;
    found_model = true;
    if (w.repetition != 0) continue;
    for (const auto& p : w.predictions) by_date[p.trade_date] = p.probability;
  }
  if (!found_model) throw DataError("no results for model '" + model_id + "'");
  std::vector<Date> days;
  for (const auto& [d, p] : by_date) days.push_back(d);
  std::vector<std::pair<Date, double>> points;
  for (Date f : friday_schedule(days, from, to)) points.emplace_back(f, by_date.at(f));
  return mark_timeline(points);
}

/// Reads `date,probability` rows (header required).
inline std::vector<std::pair<Date, double>> read_prediction_points(const std::string& path) {
  csv::Reader reader(path);
  reader.expect_header("date,probability");
  std::vector<std::pair<Date, double>> out;
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 2) throw ParseError("expected 2 fields", reader.line_number());
    auto d = Date::parse(f[0]);
    auto p = csv::parse_number(f[1]);
    if (!d || !p) throw ParseError("bad date or probability", reader.line_number());
    if (*p < 0.0 || *p > 1.0) throw ValidationError("line " + std::to_string(reader.line_number()) + ": probability outside [0, 1]");
    out.emplace_back(*d, *p);
  }
  return out;
}

inline std::string timeline_csv(std::span<const TimelineRow> rows) {
  std::string out = "week,date,prediction,action\n";
  char buf[32];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.5f", r.probability);
    out += std::to_string(r.week) + "," + r.date.iso() + "," + buf + "," + std::string(trade_marking(r.trade)) + "\n";
  }
  return out;
}

}  // namespace straddle
