// crimefis command-line tool.
//
//   crimefis ingest      --input raw.csv --output processed.csv --holiday_calendar_path cal.txt
//   crimefis train       --config run.cfg [--variant hybrid] [--rmse-log rmse.csv] [--selection-split]
//   crimefis predict     --config run.cfg --lat 23.75 --lon 90.37 --date 2013-09-30
//   crimefis evaluate    --config run.cfg [--csv]
//   crimefis export-grid --config run.cfg [--output grid.csv]
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric failure.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "crimefis/crimefis.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::map<std::string, std::string> values;
  bool selection_split = false;
};

// Every config key becomes a same-named flag on the subcommand.
void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "key = value configuration file");
  for (const auto& key : crimefis::config_keys()) {
    if (key == "selection_split") continue;
    cmd->add_option("--" + key, o.values[key], "overrides '" + key + "' from the config file");
  }
  cmd->add_flag("--selection-split,--selection_split", o.selection_split,
                "choose hybrid variants on a block disjoint from the evaluation block");
}

crimefis::Config resolve(const Overrides& o) {
  crimefis::Config cfg = o.config_path.empty() ? crimefis::Config{} : crimefis::load_config(o.config_path);
  for (const auto& [key, value] : o.values) {
    if (!value.empty()) cfg.set(key, value);
  }
  if (o.selection_split) cfg.selection_split = true;
  cfg.validate();
  return cfg;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const crimefis::UsageError*>(&e) || dynamic_cast<const crimefis::ConfigError*>(&e)) return 1;
  if (dynamic_cast<const crimefis::DataError*>(&e) || dynamic_cast<const crimefis::ModelError*>(&e)) return 2;
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-label fuzzy experts for spatiotemporal crime-type prediction"};
  app.require_subcommand(1);

  Overrides ingest_o, train_o, predict_o, eval_o, grid_o;
  std::string ingest_in, ingest_out, grid_out, rmse_log, date_text;
  double lat = 0, lon = 0;
  bool csv = false;

  auto* ingest = app.add_subcommand("ingest", "convert raw records (label,latitude,longitude,date) to model inputs");
  add_config_flags(ingest, ingest_o);
  ingest->add_option("--input", ingest_in, "raw CSV")->required();
  ingest->add_option("--output", ingest_out, "processed CSV (default: stdout)");

  auto* train = app.add_subcommand("train", "train one expert per label and write the models");
  add_config_flags(train, train_o);
  train->add_option("--rmse-log", rmse_log, "write per-epoch ANFIS RMSE as CSV");

  auto* predict = app.add_subcommand("predict", "predict the crime type for a location and date");
  add_config_flags(predict, predict_o);
  predict->add_option("--lat", lat, "latitude (decimal degrees)")->required();
  predict->add_option("--lon", lon, "longitude (decimal degrees)")->required();
  predict->add_option("--date", date_text, "query date YYYY-MM-DD")->required();

  auto* evaluate = app.add_subcommand("evaluate", "accuracy tables for fis, anfis and hybrid");
  add_config_flags(evaluate, eval_o);
  evaluate->add_flag("--csv", csv, "emit CSV tables instead of aligned text");

  auto* grid = app.add_subcommand("export-grid", "grid cells, counts and confidences per label");
  add_config_flags(grid, grid_o);
  grid->add_option("--output", grid_out, "output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*ingest) {
      const auto cfg = resolve(ingest_o);
      const auto calendar = crimefis::calendar_from(cfg);
      std::ifstream in(ingest_in);
      if (!in) throw crimefis::ConfigError("cannot open " + ingest_in);
      if (ingest_out.empty()) {
        crimefis::cmd_ingest(in, std::cout, calendar);
      } else {
        std::ofstream out(ingest_out, std::ios::binary);
        if (!out) throw crimefis::ConfigError("cannot write " + ingest_out);
        crimefis::cmd_ingest(in, out, calendar);
      }
    } else if (*train) {
      const auto cfg = resolve(train_o);
      std::optional<std::filesystem::path> log_path;
      if (!rmse_log.empty()) log_path = rmse_log;
      crimefis::cmd_train(cfg, std::cerr, log_path);
    } else if (*predict) {
      const auto cfg = resolve(predict_o);
      crimefis::cmd_predict(cfg, lat, lon, crimefis::parse_date(date_text), std::cout);
    } else if (*evaluate) {
      crimefis::cmd_evaluate(resolve(eval_o), std::cout, csv);
    } else if (*grid) {
      const auto cfg = resolve(grid_o);
      if (grid_out.empty()) {
        crimefis::cmd_export_grid(cfg, std::cout);
      } else {
        std::ofstream out(grid_out, std::ios::binary);
        if (!out) throw crimefis::ConfigError("cannot write " + grid_out);
        crimefis::cmd_export_grid(cfg, out);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
