#pragma once

// One fuzzy expert per label; the ensemble answers with the label of the
// highest-scoring expert.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crimefis/anfis.hpp"
#include "crimefis/dataset.hpp"
#include "crimefis/error.hpp"
#include "crimefis/fuzzy.hpp"
#include "crimefis/grid.hpp"

namespace crimefis {

struct Expert {
  std::string label;
  SugenoFis model;
};

class ExpertEnsemble {
 public:
  explicit ExpertEnsemble(std::vector<Expert> experts) : experts_(std::move(experts)) {
    if (experts_.empty()) throw ConfigError("an ensemble needs at least one expert");
    std::set<std::string> seen;
    for (const auto& e : experts_) {
      if (!seen.insert(e.label).second) throw ConfigError("duplicate expert label '" + e.label + "'");
      if (e.model.dimension_names() != experts_.front().model.dimension_names()) {
        throw ConfigError("experts disagree on input dimensions");
      }
    }
  }

  const std::vector<Expert>& experts() const noexcept { return experts_; }
  std::size_t size() const noexcept { return experts_.size(); }
  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    for (const auto& e : experts_) out.push_back(e.label);
    return out;
  }
  const Expert* find(const std::string& label) const {
    for (const auto& e : experts_) {
      if (e.label == label) return &e;
    }
    return nullptr;
  }

 private:
  std::vector<Expert> experts_;
};

struct Prediction {
  std::string label;
  double confidence = 0;
  std::vector<std::pair<std::string, double>> all_scores;
};

/// Argmax over scores in expert order. A later score must be strictly greater
/// to win, so ties go to the earlier expert.
inline std::size_t argmax_first(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

inline Prediction predict(const ExpertEnsemble& ensemble, std::span<const double> input) {
  Prediction p;
  std::vector<double> scores;
  for (const auto& e : ensemble.experts()) {
    scores.push_back(evaluate(e.model, input));
    p.all_scores.emplace_back(e.label, scores.back());
  }
  const auto best = argmax_first(scores);
  p.label = ensemble.experts()[best].label;
  p.confidence = scores[best];
  return p;
}

inline Prediction predict(const ExpertEnsemble& ensemble, const InputVector& input) {
  const auto v = input.values();
  return predict(ensemble, std::span<const double>(v));
}

struct EvaluationRow {
  std::string label;
  std::size_t actual = 0;
  std::size_t predicted = 0;  // correctly predicted
  double accuracy() const {
    return actual == 0 ? 0.0 : static_cast<double>(predicted) / static_cast<double>(actual) * 100.0;
  }
};

struct EvaluationTable {
  std::vector<EvaluationRow> rows;  // ensemble label order
  EvaluationRow total{"Total"};

  const EvaluationRow* row(const std::string& label) const {
    for (const auto& r : rows) {
      if (r.label == label) return &r;
    }
    return nullptr;
  }
};

inline EvaluationTable evaluate_accuracy(const ExpertEnsemble& ensemble, std::span<const ProcessedRecord> records) {
  EvaluationTable t;
  std::map<std::string, std::size_t> pos;
  for (const auto& label : ensemble.labels()) {
    pos[label] = t.rows.size();
    t.rows.push_back({label});
  }
  std::set<std::string> unknown;
  for (const auto& r : records) {
    if (!pos.count(r.label)) unknown.insert(r.label);
  }
  if (!unknown.empty()) {
    std::string list;
    for (const auto& u : unknown) list += (list.empty() ? "" : ", ") + u;
    throw ConfigError("test records carry labels without an expert: " + list);
  }
  for (const auto& r : records) {
    auto& row = t.rows[pos[r.label]];
    ++row.actual;
    if (predict(ensemble, to_input(r)).label == r.label) ++row.predicted;
  }
  for (const auto& row : t.rows) {
    t.total.actual += row.actual;
    t.total.predicted += row.predicted;
  }
  return t;
}

inline std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

/// Aligned Label/Actual/Predicted/Accuracy table with a Total row.
/// Accuracies are rounded to whole percent for display.
inline void write_evaluation_text(std::ostream& out, const EvaluationTable& t) {
  std::size_t width = 5;
  for (const auto& r : t.rows) width = std::max(width, r.label.size());
  auto line = [&](const std::string& a, const std::string& b, const std::string& c, const std::string& d) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-*s  %6s  %9s  %8s\n", static_cast<int>(width), a.c_str(), b.c_str(),
                  c.c_str(), d.c_str());
    out << buf;
  };
  auto pct = [](double v) { return std::to_string(static_cast<long>(std::lround(v))) + "%"; };
  line("Label", "Actual", "Predicted", "Accuracy");
  for (const auto& r : t.rows) {
    line(capitalize(r.label), std::to_string(r.actual), std::to_string(r.predicted), pct(r.accuracy()));
  }
  line("Total", std::to_string(t.total.actual), std::to_string(t.total.predicted), pct(t.total.accuracy()));
}

inline void write_evaluation_csv(std::ostream& out, const EvaluationTable& t) {
  out << "label,actual,predicted,accuracy\n";
  for (const auto& r : t.rows) {
    out << r.label << ',' << r.actual << ',' << r.predicted << ',' << detail::format_shortest(r.accuracy()) << '\n';
  }
  out << "total," << t.total.actual << ',' << t.total.predicted << ','
      << detail::format_shortest(t.total.accuracy()) << '\n';
}

struct HybridSelection {
  ExpertEnsemble ensemble;
  std::vector<std::pair<std::string, Variant>> chosen;  // per label, ensemble order
};

/// Per label, keeps whichever variant scored the higher per-label accuracy on
/// `selection`; ties keep the trained (anfis) model.
inline HybridSelection build_hybrid(const ExpertEnsemble& fis, const ExpertEnsemble& anfis,
                                    std::span<const ProcessedRecord> selection) {
  const auto labels = fis.labels();
  const auto other = anfis.labels();
  if (std::set<std::string>(labels.begin(), labels.end()) != std::set<std::string>(other.begin(), other.end())) {
    throw ConfigError("fis and anfis ensembles cover different labels");
  }
  // Both ensembles are scored in the fis label order so that tie-breaking
  // inside predict() is the same for both.
  std::vector<Expert> reordered;
  for (const auto& l : labels) reordered.push_back(*anfis.find(l));
  const ExpertEnsemble anfis_ordered(std::move(reordered));

  const auto fis_table = evaluate_accuracy(fis, selection);
  const auto anfis_table = evaluate_accuracy(anfis_ordered, selection);

  std::vector<Expert> mixed;
  std::vector<std::pair<std::string, Variant>> chosen;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool take_fis = fis_table.rows[i].accuracy() > anfis_table.rows[i].accuracy();
    mixed.push_back(take_fis ? fis.experts()[i] : anfis_ordered.experts()[i]);
    chosen.emplace_back(labels[i], take_fis ? Variant::Fis : Variant::Anfis);
  }
  return {ExpertEnsemble(std::move(mixed)), std::move(chosen)};
}

enum class ConfidenceDenominator { Subset, Global };

struct ExpertTrainingOptions {
  std::vector<std::size_t> mf_counts = default_mf_counts();
  ConfidenceDenominator denominator = ConfidenceDenominator::Subset;
  TrainingConfig training;
};

/// Everything produced while fitting one label's expert.
struct TrainedExpert {
  std::string label;
  GridPartition partition;
  std::vector<CellStats> stats;
  std::vector<double> targets;
  SugenoFis model;
  std::optional<TrainingReport> report;  // anfis only
};

inline TrainedExpert train_expert(const std::string& label, std::span<const ProcessedRecord> subset,
                                  std::size_t global_total, Variant variant, const ExpertTrainingOptions& opt) {
  if (subset.empty()) throw DataError("label '" + label + "' has no training records");
  auto partition = build_partition(subset, opt.mf_counts);
  const auto samples = to_samples(subset);
  const std::size_t denom = opt.denominator == ConfidenceDenominator::Subset ? subset.size() : global_total;
  auto stats = count_per_cell(partition, samples, denom);
  auto targets = assign_targets(partition, stats, samples);
  auto model = generate_fis(partition, stats, variant);
  std::optional<TrainingReport> report;
  if (variant == Variant::Anfis) {
    auto result = train_hybrid(std::move(model), samples, targets, opt.training);
    model = std::move(result.model);
    report = std::move(result.report);
  }
  return {label, std::move(partition), std::move(stats), std::move(targets), std::move(model), std::move(report)};
}

/// Trains one expert per label in first-appearance order.
inline std::vector<TrainedExpert> train_experts(std::span<const ProcessedRecord> records, Variant variant,
                                                const ExpertTrainingOptions& opt) {
  const std::vector<ProcessedRecord> all(records.begin(), records.end());
  const auto groups = split_by_label(all);
  std::vector<TrainedExpert> out;
  for (const auto& label : labels_in_order(all)) {
    out.push_back(train_expert(label, groups.at(label), all.size(), variant, opt));
  }
  return out;
}

inline ExpertEnsemble make_ensemble(const std::vector<TrainedExpert>& trained) {
  std::vector<Expert> experts;
  for (const auto& t : trained) experts.push_back({t.label, t.model});
  return ExpertEnsemble(std::move(experts));
}

}  // namespace crimefis
