// Command-line driver for the straddle backtesting pipeline.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "straddle/pipeline.hpp"

namespace {

enum Exit { kOk = 0, kConfigError = 2, kDataError = 3, kRuntimeError = 4 };

struct RunFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> models;
  std::string since;
  std::optional<int> estimators;
  std::optional<int> iterations;
  int threads = 0;
};

straddle::ExperimentConfig resolve(const RunFlags& f) {
  using namespace straddle;
  auto cfg = load_config(f.config);
  if (f.seed) cfg.base_seed = *f.seed;
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (!f.since.empty()) {
    auto d = Date::parse(f.since);
    if (!d) throw ConfigError("--since: expected YYYY-MM-DD, got '" + f.since + "'");
    cfg.cutoff = *d;
  }
  if (!f.models.empty()) {
    std::vector<ModelEntry> kept;
    for (const auto& id : f.models) {
      auto it = std::find_if(cfg.models.begin(), cfg.models.end(), [&](const ModelEntry& m) { return m.id == id; });
      if (it == cfg.models.end()) throw ConfigError("--models: no model with id '" + id + "' in " + f.config);
      kept.push_back(*it);
    }
    cfg.models = std::move(kept);
  }
  if (f.estimators) {
    if (*f.estimators < 1) throw ConfigError("--estimators must be >= 1");
    for (auto& m : cfg.models) set_estimator_count(m.spec, *f.estimators);
  }
  if (f.iterations) {
    if (*f.iterations < 1) throw ConfigError("--iterations must be >= 1");
    cfg.iterations = *f.iterations;
  }
  return cfg;
}

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "Experiment config (JSON) or a run manifest")->required();
  cmd->add_option("--out", f.out, "Output directory (overrides the config)");
  cmd->add_option("--seed", f.seed, "Base seed (overrides the config)");
  cmd->add_option("--models", f.models, "Only run these model ids")->delimiter(',');
  cmd->add_option("--since", f.since, "Cutoff date for the 'since' tables, YYYY-MM-DD");
  cmd->add_option("--estimators", f.estimators, "Override n_estimators of every ensemble model");
  cmd->add_option("--iterations", f.iterations, "Override the number of seed repetitions");
  cmd->add_option("--threads", f.threads, "Worker threads (0: all hardware threads)");
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return kOk;
  } catch (const straddle::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const straddle::ParseError& e) {
    std::cerr << "data error (line " << e.line() << "): " << e.what() << '\n';
    return kDataError;
  } catch (const straddle::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace straddle;
  CLI::App app{"Short-straddle backtesting and walk-forward classifier evaluation"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Run an experiment and write all report files");
  add_run_flags(run, run_flags);

  RunFlags dry_flags;
  auto* dry = app.add_subcommand("dry-run", "Print the resolved walk-forward splits without training");
  add_run_flags(dry, dry_flags);

  std::string tl_config, tl_run, tl_model = "RF", tl_from, tl_to, tl_predictions, tl_out;
  auto* timeline = app.add_subcommand("timeline", "Weekly trade/don't-trade table from predictions");
  timeline->add_option("--config", tl_config, "Config whose output directory holds a completed run");
  timeline->add_option("--run", tl_run, "Run directory (overrides --config)");
  timeline->add_option("--model", tl_model, "Model id")->capture_default_str();
  timeline->add_option("--from", tl_from, "First date, YYYY-MM-DD");
  timeline->add_option("--to", tl_to, "Last date, YYYY-MM-DD");
  timeline->add_option("--predictions", tl_predictions, "CSV with date,probability rows instead of a run");
  timeline->add_option("--out", tl_out, "Write the table here instead of stdout");

  std::string synth_config, synth_out;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Write synthetic options.csv, spx.csv and vix.csv");
  synth->add_option("--config", synth_config, "Take data.synth from this experiment config");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (*run) {
    return guarded([&] {
      const auto cfg = resolve(run_flags);
      const auto outcome = run_pipeline(cfg, cfg.output_dir, run_flags.threads);
      for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << metrics_table_csv(outcome.report);
      std::cout << "wrote " << outcome.out_dir.string() << '\n';
    });
  }
  if (*dry) {
    return guarded([&] { std::cout << dry_run(resolve(dry_flags)); });
  }
  if (*timeline) {
    return guarded([&] {
      auto parse_date = [](const std::string& s, Date fallback) {
        if (s.empty()) return fallback;
        auto d = Date::parse(s);
        if (!d) throw ConfigError("expected YYYY-MM-DD, got '" + s + "'");
        return *d;
      };
      std::vector<TimelineRow> rows;
      if (!tl_predictions.empty()) {
        auto points = read_prediction_points(tl_predictions);
        const Date lo = parse_date(tl_from, Date(1900, 1, 1)), hi = parse_date(tl_to, Date(2999, 12, 31));
        std::erase_if(points, [&](const auto& p) { return p.first < lo || p.first > hi; });
        rows = mark_timeline(points);
      } else {
        std::filesystem::path dir = tl_run;
        if (dir.empty()) {
          if (tl_config.empty()) throw ConfigError("timeline needs --run, --config or --predictions");
          dir = load_config(tl_config).output_dir;
        }
        const auto results_path = dir / "results.jsonl";
        if (!std::filesystem::exists(results_path))
          throw DataError("missing run artifacts: " + results_path.string());
        const auto results = read_results_jsonl(results_path.string());
        rows = timeline_from_results(results, tl_model, parse_date(tl_from, Date(1900, 1, 1)),
                                     parse_date(tl_to, Date(2999, 12, 31)));
      }
      const auto text = timeline_csv(rows);
      if (tl_out.empty()) std::cout << text;
      else write_text(tl_out, text);
    });
  }
  if (*synth) {
    return guarded([&] {
      SynthConfig sc;
      if (!synth_config.empty()) {
        const auto cfg = load_config(synth_config);
        if (cfg.source != DataSource::synth) throw ConfigError(synth_config + ": data.source is not 'synth'");
        sc = cfg.synth;
      }
      if (synth_seed) sc.seed = *synth_seed;
      if (auto err = check_synth_config(sc)) throw ConfigError("synth: " + *err);
      write_synth_csv(generate_raw_market(sc), synth_out);
      std::cout << "wrote " << synth_out << '\n';
    });
  }
  return kOk;
}
