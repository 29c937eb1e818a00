#pragma once

// Uniform grid partition over a training subset. Each grid cell becomes one
// fuzzy rule; the share of records inside a cell becomes its confidence score.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "crimefis/dataset.hpp"
#include "crimefis/error.hpp"
#include "crimefis/fuzzy.hpp"

namespace crimefis {

using Sample = std::vector<double>;

/// Default MF counts for (latitude, longitude, day, holiday_diff).
inline const std::vector<std::size_t>& default_mf_counts() {
  static const std::vector<std::size_t> counts{4, 4, 2, 2};
  return counts;
}

/// Boundary snapping tolerance, relative to the interval width. Values within
/// it of a boundary count as lying on that boundary.
inline constexpr double kBoundaryTolerance = 1e-9;

/// sigma = width / (2 sqrt(2 ln 2)): neighbouring MFs cross at 0.5.
inline double half_crossing_sigma(double width) { return width / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

struct GridCell {
  std::vector<std::size_t> index;  // interval index per dimension
  auto operator<=>(const GridCell&) const = default;
};

struct CellStats {
  std::size_t count = 0;
  double confidence = 0;  // percent
};

class GridPartition {
 public:
  GridPartition(std::vector<std::string> names, std::vector<std::vector<double>> boundaries,
                std::vector<bool> degenerate)
      : names_(std::move(names)), bounds_(std::move(boundaries)), degenerate_(std::move(degenerate)) {
    if (names_.size() != bounds_.size() || degenerate_.size() != bounds_.size()) {
      throw UsageError("grid partition: inconsistent dimension data");
    }
    for (std::size_t d = 0; d < bounds_.size(); ++d) {
      const auto& b = bounds_[d];
      if (b.size() < 2) throw UsageError("grid partition: dimension needs at least one interval");
      if (degenerate_[d]) {
        if (b.size() != 2 || b[0] != b[1]) throw UsageError("degenerate dimension must have one point interval");
        continue;
      }
      for (std::size_t k = 1; k < b.size(); ++k) {
        if (!(b[k] > b[k - 1])) throw UsageError("grid boundaries must be strictly increasing");
      }
    }
  }

  std::size_t dims() const noexcept { return bounds_.size(); }
  const std::vector<std::string>& dimension_names() const noexcept { return names_; }
  const std::vector<double>& boundaries(std::size_t d) const { return bounds_.at(d); }
  std::size_t intervals(std::size_t d) const { return bounds_.at(d).size() - 1; }
  bool degenerate(std::size_t d) const { return degenerate_.at(d); }
  double lower(std::size_t d) const { return bounds_.at(d).front(); }
  double upper(std::size_t d) const { return bounds_.at(d).back(); }

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (std::size_t d = 0; d < dims(); ++d) n *= intervals(d);
    return n;
  }

  /// Row-major position of a cell; the first dimension is most significant.
  std::size_t flat_index(const GridCell& cell) const {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < dims(); ++d) flat = flat * intervals(d) + cell.index.at(d);
    return flat;
  }

  GridCell cell_at(std::size_t flat) const {
    GridCell cell{std::vector<std::size_t>(dims())};
    for (std::size_t d = dims(); d-- > 0;) {
      cell.index[d] = flat % intervals(d);
      flat /= intervals(d);
    }
    return cell;
  }

  /// Tolerance used when testing membership of a closed interval in dimension d.
  double tolerance(std::size_t d) const {
    if (degenerate(d)) return kBoundaryTolerance;
    return kBoundaryTolerance * (upper(d) - lower(d)) / static_cast<double>(intervals(d));
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> bounds_;
  std::vector<bool> degenerate_;
};

inline std::vector<Sample> to_samples(std::span<const ProcessedRecord> records) {
  std::vector<Sample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const auto v = to_input(r).values();
    out.emplace_back(v.begin(), v.end());
  }
  return out;
}

/// Equal-width intervals between the observed min and max of every dimension.
/// A dimension whose values are all equal collapses to a single interval.
inline GridPartition build_partition(std::span<const Sample> samples, std::span<const std::size_t> mf_counts,
                                     std::vector<std::string> names = {}) {
  if (samples.empty()) throw UsageError("cannot build a grid from zero records");
  const std::size_t dims = mf_counts.size();
  if (names.empty()) {
    for (std::size_t d = 0; d < dims; ++d) names.push_back("x" + std::to_string(d));
  }
  if (names.size() != dims) throw UsageError("grid: one name per dimension required");
  std::vector<std::vector<double>> bounds(dims);
  std::vector<bool> degenerate(dims, false);
  for (std::size_t d = 0; d < dims; ++d) {
    if (mf_counts[d] < 1) throw ConfigError("MF counts must be at least 1");
    double lo = samples.front().at(d), hi = lo;
    for (const auto& s : samples) {
      if (s.size() != dims) throw UsageError("sample dimension mismatch");
      lo = std::min(lo, s[d]);
      hi = std::max(hi, s[d]);
    }
    if (hi == lo) {
      degenerate[d] = true;
      bounds[d] = {lo, hi};
      continue;
    }
    const auto n = mf_counts[d];
    bounds[d].resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      // Same arithmetic as averaging the end points when n == 2.
      bounds[d][k] = (static_cast<double>(n - k) * lo + static_cast<double>(k) * hi) / static_cast<double>(n);
    }
    bounds[d].front() = lo;
    bounds[d].back() = hi;
  }
  return GridPartition(std::move(names), std::move(bounds), std::move(degenerate));
}

inline GridPartition build_partition(std::span<const ProcessedRecord> records,
                                     std::span<const std::size_t> mf_counts = default_mf_counts()) {
  if (mf_counts.size() != InputVector::kDims) throw ConfigError("expected 4 MF counts");
  const auto& n = dimension_names();
  return build_partition(to_samples(records), mf_counts, std::vector<std::string>(n.begin(), n.end()));
}

/// Every cell whose closed constraints contain the sample, in row-major order.
/// Returns an empty list when the sample lies outside the partition.
inline std::vector<GridCell> cells_containing(const GridPartition& p, std::span<const double> sample) {
  if (sample.size() != p.dims()) throw UsageError("sample dimension mismatch");
  std::vector<std::vector<std::size_t>> per_dim(p.dims());
  for (std::size_t d = 0; d < p.dims(); ++d) {
    const auto& b = p.boundaries(d);
    const double tol = p.tolerance(d);
    for (std::size_t k = 0; k + 1 < b.size(); ++k) {
      if (sample[d] >= b[k] - tol && sample[d] <= b[k + 1] + tol) per_dim[d].push_back(k);
    }
    if (per_dim[d].empty()) return {};
  }
  std::vector<GridCell> cells;
  GridCell cur{std::vector<std::size_t>(p.dims())};
  std::function<void(std::size_t)> rec = [&](std::size_t d) {
    if (d == p.dims()) {
      cells.push_back(cur);
      return;
    }
    for (auto k : per_dim[d]) {
      cur.index[d] = k;
      rec(d + 1);
    }
  };
  rec(0);
  return cells;
}

/// Per-cell support counts and confidence = count / total * 100, indexed by
/// row-major cell position. `total` defaults to the number of samples.
inline std::vector<CellStats> count_per_cell(const GridPartition& p, std::span<const Sample> samples,
                                             std::optional<std::size_t> total = std::nullopt) {
  const std::size_t denom = total.value_or(samples.size());
  std::vector<CellStats> stats(p.cell_count());
  for (const auto& s : samples) {
    for (const auto& cell : cells_containing(p, s)) ++stats[p.flat_index(cell)].count;
  }
  if (denom == 0) return stats;
  for (auto& st : stats) {
    st.confidence = static_cast<double>(st.count) / static_cast<double>(denom) * 100.0;
  }
  return stats;
}

/// Confidence of the last containing cell in row-major order.
inline double assign_target_confidence(const GridPartition& p, std::span<const CellStats> stats,
                                       std::span<const double> sample) {
  const auto cells = cells_containing(p, sample);
  if (cells.empty()) throw UsageError("record lies outside the grid partition");
  return stats[p.flat_index(cells.back())].confidence;
}

inline std::vector<double> assign_targets(const GridPartition& p, std::span<const CellStats> stats,
                                          std::span<const Sample> samples) {
  std::vector<double> t;
  t.reserve(samples.size());
  for (const auto& s : samples) t.push_back(assign_target_confidence(p, stats, s));
  return t;
}

/// One rule per cell, MFs centred on interval midpoints. The fis variant gets
/// the cell confidences as constants; anfis starts from all-zero linear outputs.
inline SugenoFis generate_fis(const GridPartition& p, std::span<const CellStats> stats, Variant variant) {
  if (stats.size() != p.cell_count()) throw UsageError("cell statistics do not match the partition");
  std::vector<std::vector<GaussianMF>> banks(p.dims());
  for (std::size_t d = 0; d < p.dims(); ++d) {
    const auto& b = p.boundaries(d);
    if (p.degenerate(d)) {
      banks[d].emplace_back(b[0], 1.0);
      continue;
    }
    for (std::size_t k = 0; k + 1 < b.size(); ++k) {
      banks[d].emplace_back(0.5 * (b[k] + b[k + 1]), half_crossing_sigma(b[k + 1] - b[k]));
    }
  }
  std::vector<Rule> rules;
  rules.reserve(p.cell_count());
  for (std::size_t i = 0; i < p.cell_count(); ++i) {
    Rule r;
    r.antecedent = p.cell_at(i).index;
    if (variant == Variant::Fis) {
      r.consequent = ConstantConsequent{stats[i].confidence};
    } else {
      r.consequent = LinearConsequent{std::vector<double>(p.dims(), 0.0), 0.0};
    }
    rules.push_back(std::move(r));
  }
  return SugenoFis(p.dimension_names(), std::move(banks), std::move(rules), variant);
}

/// CSV rows: cell, then per dimension index/lo/hi, then count and confidence.
/// A non-empty `label` is emitted as the first column.
inline void write_grid_table(std::ostream& out, const GridPartition& p, std::span<const CellStats> stats,
                             const std::string& label = {}, bool header = true) {
  if (header) {
    if (!label.empty()) out << "label,";
    out << "cell";
    for (const auto& n : p.dimension_names()) out << ',' << n << "_idx," << n << "_lo," << n << "_hi";
    out << ",count,confidence\n";
  }
  for (std::size_t i = 0; i < p.cell_count(); ++i) {
    const auto cell = p.cell_at(i);
    if (!label.empty()) out << label << ',';
    out << i;
    for (std::size_t d = 0; d < p.dims(); ++d) {
      const auto k = cell.index[d];
      out << ',' << k << ',' << detail::format_shortest(p.boundaries(d)[k]) << ','
          << detail::format_shortest(p.boundaries(d)[k + 1]);
    }
    out << ',' << stats[i].count << ',' << detail::format_shortest(stats[i].confidence) << '\n';
  }
}

}  // namespace crimefis
