#pragma once

// Implementations of the CLI subcommands. Each takes an already-parsed
// Config and writes its human-readable output to the given streams, so the
// commands can be driven from tests without spawning a process.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "crimefis/anfis.hpp"
#include "crimefis/config.hpp"
#include "crimefis/dataset.hpp"
#include "crimefis/error.hpp"
#include "crimefis/experts.hpp"
#include "crimefis/grid.hpp"
#include "crimefis/serialization.hpp"

namespace crimefis {

// Model directory layout:
//   manifest.txt            label order, plus the hybrid choice when trained
//   expert_<i>.<variant>.model

inline constexpr const char* kManifestName = "manifest.txt";

struct Manifest {
  std::vector<std::string> labels;
  std::map<std::string, Variant> hybrid;  // empty unless a hybrid was trained
};

inline std::filesystem::path model_path(const std::filesystem::path& dir, std::size_t index, Variant v) {
  return dir / ("expert_" + std::to_string(index) + "." + std::string(to_string(v)) + ".model");
}

inline void write_manifest(std::ostream& out, const Manifest& m) {
  out << "crimefis-ensemble 1\n";
  for (std::size_t i = 0; i < m.labels.size(); ++i) out << "expert " << i << ' ' << m.labels[i] << '\n';
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    auto it = m.hybrid.find(m.labels[i]);
    if (it != m.hybrid.end()) out << "hybrid " << i << ' ' << to_string(it->second) << '\n';
  }
}

inline Manifest read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / kManifestName);
  if (!in) throw ModelError("no trained models in " + dir.string() + " (missing " + kManifestName + ")");
  Manifest m;
  std::string line;
  std::getline(in, line);
  if (detail::trim(line) != "crimefis-ensemble 1") throw ModelError("unsupported manifest header");
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    std::istringstream ss(line);
    std::string kind;
    std::size_t index = 0;
    ss >> kind >> index;
    std::string rest;
    std::getline(ss, rest);
    rest = std::string(detail::trim(rest));
    if (kind == "expert") {
      if (index != m.labels.size()) throw ModelError("manifest experts out of order");
      m.labels.push_back(rest);
    } else if (kind == "hybrid") {
      if (index >= m.labels.size()) throw ModelError("manifest hybrid entry for unknown expert");
      try {
        m.hybrid[m.labels[index]] = parse_variant(rest);
      } catch (const ConfigError& e) {
        throw ModelError(e.what());
      }
    } else {
      throw ModelError("unknown manifest entry '" + kind + "'");
    }
  }
  if (m.labels.empty()) throw ModelError("manifest lists no experts");
  return m;
}

/// Loads the ensemble for one variant; hybrid follows the manifest choice.
inline ExpertEnsemble load_ensemble(const std::filesystem::path& dir, ModelChoice choice) {
  const auto m = read_manifest(dir);
  std::vector<Expert> experts;
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    Variant v = Variant::Fis;
    if (choice == ModelChoice::Anfis) v = Variant::Anfis;
    if (choice == ModelChoice::Hybrid) {
      auto it = m.hybrid.find(m.labels[i]);
      if (it == m.hybrid.end()) throw ModelError("no hybrid model trained in " + dir.string());
      v = it->second;
    }
    const auto path = model_path(dir, i, v);
    if (!std::filesystem::exists(path)) {
      throw ModelError("missing " + std::string(to_string(v)) + " model for '" + m.labels[i] + "' (" + path.string() + ")");
    }
    experts.push_back({m.labels[i], load_model(path)});
  }
  return ExpertEnsemble(std::move(experts));
}

inline HolidayCalendar calendar_from(const Config& cfg) {
  if (cfg.holiday_calendar_path.empty()) throw ConfigError("holiday_calendar_path is not set");
  return load_holiday_calendar(cfg.holiday_calendar_path);
}

/// Loads the configured data file. Processed files need no calendar.
inline std::vector<ProcessedRecord> records_from(const Config& cfg) {
  if (cfg.data_path.empty()) throw ConfigError("data_path is not set");
  std::optional<HolidayCalendar> cal;
  if (!cfg.holiday_calendar_path.empty()) cal = calendar_from(cfg);
  return load_dataset(cfg.data_path, cal ? &*cal : nullptr);
}

inline void cmd_ingest(std::istream& raw, std::ostream& out, const HolidayCalendar& calendar) {
  write_processed_csv(out, read_dataset(raw, &calendar));
}

struct TrainSummary {
  std::vector<std::string> labels;
  std::map<std::string, TrainingReport> reports;  // anfis runs
  std::map<std::string, Variant> hybrid;
};

namespace detail {

inline std::vector<ProcessedRecord> slice(const std::vector<ProcessedRecord>& r, std::size_t b, std::size_t e) {
  return {r.begin() + static_cast<std::ptrdiff_t>(b), r.begin() + static_cast<std::ptrdiff_t>(e)};
}

inline void warn_partitions(std::ostream& log, const std::vector<TrainedExpert>& trained) {
  for (const auto& t : trained) {
    for (std::size_t d = 0; d < t.partition.dims(); ++d) {
      if (t.partition.degenerate(d)) {
        log << "warning: '" << t.label << "': all training values of " << t.partition.dimension_names()[d]
            << " are equal; using a single MF with sigma 1\n";
      }
    }
    if (t.report) {
      for (const auto& w : t.report->warnings) log << "warning: '" << t.label << "': " << w << '\n';
    }
  }
}

}  // namespace detail

/// Trains the configured variant(s) and writes them to model_dir. Hybrid
/// trains both variants and records the per-label choice in the manifest.
inline TrainSummary cmd_train(const Config& cfg, std::ostream& log,
                              const std::optional<std::filesystem::path>& rmse_log = std::nullopt) {
  cfg.validate();
  const auto records = records_from(cfg);
  if (records.empty()) throw DataError("no records in " + cfg.data_path.string());
  const auto split = make_split(records.size(), cfg);
  const auto train = detail::slice(records, 0, split.train_end);
  if (train.empty()) throw DataError("no training records after the split");

  const auto opt = cfg.expert_options();
  std::filesystem::create_directories(cfg.model_dir);

  TrainSummary summary;
  summary.labels = labels_in_order(train);
  std::optional<ExpertEnsemble> fis, anfis;

  const bool want_fis = cfg.variant != ModelChoice::Anfis;
  const bool want_anfis = cfg.variant != ModelChoice::Fis;
  if (want_fis) {
    const auto trained = train_experts(train, Variant::Fis, opt);
    detail::warn_partitions(log, trained);
    fis = make_ensemble(trained);
    for (std::size_t i = 0; i < trained.size(); ++i) save_model(model_path(cfg.model_dir, i, Variant::Fis), trained[i].model);
  }
  if (want_anfis) {
    const auto trained = train_experts(train, Variant::Anfis, opt);
    detail::warn_partitions(log, trained);
    anfis = make_ensemble(trained);
    for (std::size_t i = 0; i < trained.size(); ++i) {
      save_model(model_path(cfg.model_dir, i, Variant::Anfis), trained[i].model);
      summary.reports[trained[i].label] = *trained[i].report;
      log << "anfis '" << trained[i].label << "': " << trained[i].report->epochs_run << " epochs, final RMSE "
          << detail::format_real(trained[i].report->final_rmse) << '\n';
    }
    if (rmse_log) {
      std::ofstream out(*rmse_log, std::ios::binary);
      if (!out) throw ConfigError("cannot write " + rmse_log->string());
      out << "label,epoch,rmse\n";
      for (const auto& label : summary.labels) {
        const auto& h = summary.reports.at(label).rmse_history;
        for (std::size_t e = 0; e < h.size(); ++e) out << label << ',' << e + 1 << ',' << detail::format_real(h[e]) << '\n';
      }
    }
  }

  Manifest manifest{summary.labels, {}};
  if (cfg.variant == ModelChoice::Hybrid) {
    const auto selection = detail::slice(records, split.selection_begin, split.selection_end);
    if (selection.empty()) throw DataError("hybrid selection needs a non-empty selection block");
    if (split.selection_is_test) {
      log << "warning: hybrid variants are chosen on the evaluation block itself; "
             "use --selection-split for a disjoint selection block\n";
    }
    auto chosen = build_hybrid(*fis, *anfis, selection);
    for (const auto& [label, v] : chosen.chosen) {
      manifest.hybrid[label] = v;
      log << "hybrid '" << label << "': " << to_string(v) << '\n';
    }
    summary.hybrid = manifest.hybrid;
  }
  std::ofstream mout(cfg.model_dir / kManifestName, std::ios::binary);
  if (!mout) throw ConfigError("cannot write manifest in " + cfg.model_dir.string());
  write_manifest(mout, manifest);
  return summary;
}

inline void write_prediction(std::ostream& out, const Prediction& p) {
  out << "prediction: " << p.label << '\n';
  out << "confidence: " << detail::format_real(p.confidence) << '\n';
  for (const auto& [label, score] : p.all_scores) out << "score " << label << ' ' << detail::format_real(score) << '\n';
}

inline Prediction cmd_predict(const Config& cfg, double latitude, double longitude, const Date& date, std::ostream& out) {
  const auto ensemble = load_ensemble(cfg.model_dir, cfg.variant);
  const auto calendar = calendar_from(cfg);
  const auto input = make_query(latitude, longitude, date, calendar);
  const auto p = predict(ensemble, input);
  out << "input: latitude " << detail::format_shortest(input.latitude) << ", longitude "
      << detail::format_shortest(input.longitude) << ", day " << input.day << ", holiday_diff " << input.holiday_diff
      << '\n';
  write_prediction(out, p);
  return p;
}

struct EvaluationReport {
  EvaluationTable fis;
  EvaluationTable anfis;
  EvaluationTable hybrid;
  std::vector<std::pair<std::string, Variant>> hybrid_choice;
};

/// Scores fis, anfis and the per-label hybrid on the evaluation block.
inline EvaluationReport cmd_evaluate(const Config& cfg, std::ostream& out, bool csv = false) {
  cfg.validate();
  const auto records = records_from(cfg);
  const auto split = make_split(records.size(), cfg);
  const auto test = detail::slice(records, split.test_begin, records.size());
  const auto selection = detail::slice(records, split.selection_begin, split.selection_end);
  if (test.empty()) throw DataError("evaluation block is empty");

  const auto fis = load_ensemble(cfg.model_dir, ModelChoice::Fis);
  const auto anfis = load_ensemble(cfg.model_dir, ModelChoice::Anfis);
  const auto hybrid = build_hybrid(fis, anfis, selection);

  EvaluationReport r{evaluate_accuracy(fis, test), evaluate_accuracy(anfis, test),
                     evaluate_accuracy(hybrid.ensemble, test), hybrid.chosen};
  if (split.selection_is_test) {
    out << "note: hybrid variants were selected on the evaluation block itself\n";
  }
  const std::pair<const char*, const EvaluationTable*> tables[] = {
      {"fis", &r.fis}, {"anfis", &r.anfis}, {"hybrid", &r.hybrid}};
  for (const auto& [name, table] : tables) {
    out << "\n== " << name << " ==\n";
    if (csv) {
      write_evaluation_csv(out, *table);
    } else {
      write_evaluation_text(out, *table);
    }
  }
  out << '\n';
  for (const auto& [name, table] : tables) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-6s total accuracy %.2f%% (%zu/%zu)\n", name, table->total.accuracy(),
                  table->total.predicted, table->total.actual);
    out << buf;
  }
  out << "hybrid choice:";
  for (const auto& [label, v] : r.hybrid_choice) out << ' ' << label << '=' << to_string(v);
  out << '\n';
  return r;
}

/// Grid cells and confidences of every label's training subset, as CSV.
inline void cmd_export_grid(const Config& cfg, std::ostream& out) {
  cfg.validate();
  const auto records = records_from(cfg);
  const auto split = make_split(records.size(), cfg);
  const auto train = detail::slice(records, 0, split.train_end);
  const auto groups = split_by_label(train);
  bool header = true;
  for (const auto& label : labels_in_order(train)) {
    const auto& subset = groups.at(label);
    const auto partition = build_partition(subset, cfg.mf_counts);
    const auto denom =
        cfg.confidence_denominator == ConfidenceDenominator::Subset ? subset.size() : train.size();
    const auto stats = count_per_cell(partition, to_samples(subset), denom);
    write_grid_table(out, partition, stats, label, header);
    header = false;
  }
}

}  // namespace crimefis
