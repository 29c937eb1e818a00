#pragma once

// Flat `key = value` configuration shared by all CLI commands.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crimefis/dataset.hpp"
#include "crimefis/error.hpp"
#include "crimefis/experts.hpp"

namespace crimefis {

enum class ModelChoice { Fis, Anfis, Hybrid };

inline ModelChoice parse_model_choice(std::string_view s) {
  if (s == "fis") return ModelChoice::Fis;
  if (s == "anfis") return ModelChoice::Anfis;
  if (s == "hybrid") return ModelChoice::Hybrid;
  throw ConfigError("variant must be fis, anfis or hybrid (got '" + std::string(s) + "')");
}

inline std::string_view to_string(ModelChoice c) {
  switch (c) {
    case ModelChoice::Fis: return "fis";
    case ModelChoice::Anfis: return "anfis";
    case ModelChoice::Hybrid: return "hybrid";
  }
  return "?";
}

struct Config {
  std::filesystem::path data_path;
  std::filesystem::path holiday_calendar_path;
  std::filesystem::path model_dir = "models";
  std::vector<std::size_t> mf_counts = default_mf_counts();
  ModelChoice variant = ModelChoice::Hybrid;
  TrainingConfig training;
  double test_fraction = 0.2;
  std::optional<std::size_t> test_count;
  ConfidenceDenominator confidence_denominator = ConfidenceDenominator::Subset;
  /// Train on every record (including the evaluation block) or only on the
  /// records before it.
  bool train_on_all = true;
  /// Choose hybrid variants on a block disjoint from the evaluation block.
  bool selection_split = false;

  void validate() const {
    if (mf_counts.size() != InputVector::kDims) throw ConfigError("mf_counts needs 4 values");
    for (auto c : mf_counts) {
      if (c < 1) throw ConfigError("mf_counts must all be >= 1");
    }
    if (!(test_fraction > 0 && test_fraction < 1)) throw ConfigError("test_fraction must lie in (0, 1)");
    training.validate();
  }

  /// Applies one setting. Keys match the CLI flag names.
  void set(const std::string& key, const std::string& raw_value) {
    const std::string value(detail::trim(raw_value));
    auto number = [&](auto& out) {
      if (!detail::parse_number(value, out)) throw ConfigError("bad value for " + key + ": '" + value + "'");
    };
    if (key == "data_path") {
      data_path = value;
    } else if (key == "holiday_calendar_path") {
      holiday_calendar_path = value;
    } else if (key == "model_dir") {
      model_dir = value;
    } else if (key == "mf_counts") {
      std::vector<std::size_t> counts;
      for (auto part : detail::split(value, ',')) {
        std::size_t c = 0;
        if (!detail::parse_number(part, c)) throw ConfigError("bad mf_counts entry '" + std::string(part) + "'");
        counts.push_back(c);
      }
      mf_counts = std::move(counts);
    } else if (key == "variant") {
      variant = parse_model_choice(value);
    } else if (key == "epochs") {
      number(training.epochs);
    } else if (key == "learning_rate") {
      number(training.learning_rate);
    } else if (key == "min_sigma") {
      double v = 0;
      number(v);
      training.min_sigma = v;
    } else if (key == "rmse_tolerance") {
      number(training.rmse_tolerance);
    } else if (key == "test_fraction") {
      number(test_fraction);
    } else if (key == "test_count") {
      std::size_t v = 0;
      number(v);
      test_count = v;
    } else if (key == "confidence_denominator") {
      if (value == "subset") {
        confidence_denominator = ConfidenceDenominator::Subset;
      } else if (value == "global") {
        confidence_denominator = ConfidenceDenominator::Global;
      } else {
        throw ConfigError("confidence_denominator must be subset or global");
      }
    } else if (key == "train_split") {
      if (value == "all") {
        train_on_all = true;
      } else if (value == "holdout") {
        train_on_all = false;
      } else {
        throw ConfigError("train_split must be all or holdout");
      }
    } else if (key == "selection_split") {
      if (value == "true" || value == "1") {
        selection_split = true;
      } else if (value == "false" || value == "0") {
        selection_split = false;
      } else {
        throw ConfigError("selection_split must be true or false");
      }
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }

  ExpertTrainingOptions expert_options() const { return {mf_counts, confidence_denominator, training}; }
};

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "data_path",      "holiday_calendar_path", "model_dir",  "mf_counts",  "variant",
      "epochs",         "learning_rate",         "min_sigma",  "rmse_tolerance",
      "test_fraction",  "test_count",            "confidence_denominator", "train_split",
      "selection_split"};
  return keys;
}

/// Parses `key = value` lines; `#` starts a comment. Relative paths are
/// resolved against `base_dir` when it is given.
inline Config read_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  Config cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = detail::trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key(detail::trim(body.substr(0, eq)));
    try {
      cfg.set(key, std::string(body.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!base_dir.empty()) {
    for (auto* p : {&cfg.data_path, &cfg.holiday_calendar_path, &cfg.model_dir}) {
      if (!p->empty() && p->is_relative()) *p = base_dir / *p;
    }
  }
  return cfg;
}

inline Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return read_config(in, path.parent_path());
}

/// Index ranges of the record blocks used by train/evaluate.
struct DataSplit {
  std::size_t train_end = 0;        // records [0, train_end) are training data
  std::size_t selection_begin = 0;  // hybrid selection block
  std::size_t selection_end = 0;
  std::size_t test_begin = 0;       // evaluation block = [test_begin, n)
  std::size_t size = 0;
  bool selection_is_test = true;
};

/// The evaluation block is the last `test_count` records, or the last
/// test_fraction of them rounded to the nearest integer.
inline DataSplit make_split(std::size_t n, const Config& cfg) {
  DataSplit s;
  s.size = n;
  std::size_t test = cfg.test_count.value_or(static_cast<std::size_t>(std::lround(static_cast<double>(n) * cfg.test_fraction)));
  if (test > n) throw ConfigError("test block larger than the dataset");
  s.test_begin = n - test;
  if (cfg.selection_split) {
    if (2 * test > n) throw ConfigError("not enough records for a separate selection block");
    s.selection_begin = s.test_begin - test;
    s.selection_end = s.test_begin;
    s.selection_is_test = false;
  } else {
    s.selection_begin = s.test_begin;
    s.selection_end = n;
  }
  s.train_end = cfg.train_on_all ? n : (cfg.selection_split ? s.selection_begin : s.test_begin);
  return s;
}

}  // namespace crimefis
