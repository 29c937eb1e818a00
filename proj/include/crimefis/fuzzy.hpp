#pragma once

// Takagi-Sugeno inference with Gaussian premises and a product AND.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crimefis/dataset.hpp"
#include "crimefis/error.hpp"

namespace crimefis {

/// Below this total firing strength the weighted average is replaced by the
/// consequent of the strongest rule.
inline constexpr double kFiringFloor = 1e-12;

class GaussianMF {
 public:
  GaussianMF(double center, double sigma) : center_(center), sigma_(sigma) {
    if (!(sigma > 0) || !std::isfinite(sigma) || !std::isfinite(center)) {
      throw ModelError("Gaussian MF needs finite center and sigma > 0");
    }
  }

  double center() const noexcept { return center_; }
  double sigma() const noexcept { return sigma_; }

  double operator()(double x) const noexcept {
    const double u = (x - center_) / sigma_;
    return std::exp(-0.5 * u * u);
  }

  bool operator==(const GaussianMF&) const = default;

 private:
  double center_;
  double sigma_;
};

inline double membership(const GaussianMF& mf, double x) { return mf(x); }

struct ConstantConsequent {
  double value = 0;
  bool operator==(const ConstantConsequent&) const = default;
};

struct LinearConsequent {
  std::vector<double> coefficients;
  double bias = 0;
  bool operator==(const LinearConsequent&) const = default;
};

using Consequent = std::variant<ConstantConsequent, LinearConsequent>;

inline double consequent_output(const Consequent& c, std::span<const double> input) {
  if (const auto* k = std::get_if<ConstantConsequent>(&c)) return k->value;
  const auto& lin = std::get<LinearConsequent>(c);
  double z = lin.bias;
  for (std::size_t d = 0; d < lin.coefficients.size(); ++d) z += lin.coefficients[d] * input[d];
  return z;
}

inline double consequent_output(const Consequent& c, const InputVector& input) {
  const auto v = input.values();
  return consequent_output(c, std::span<const double>(v));
}

struct Rule {
  std::vector<std::size_t> antecedent;  // one MF index per dimension
  Consequent consequent;

  bool operator==(const Rule&) const = default;
};

enum class Variant { Fis, Anfis };

inline std::string_view to_string(Variant v) { return v == Variant::Fis ? "fis" : "anfis"; }

inline Variant parse_variant(std::string_view s) {
  if (s == "fis") return Variant::Fis;
  if (s == "anfis") return Variant::Anfis;
  throw ConfigError("unknown model variant '" + std::string(s) + "'");
}

/// A single Sugeno expert. Construction validates the structure; training
/// code mutates parameters through the setters, which keep the invariants.
class SugenoFis {
 public:
  SugenoFis(std::vector<std::string> dimension_names, std::vector<std::vector<GaussianMF>> mf_banks,
            std::vector<Rule> rules, Variant variant)
      : names_(std::move(dimension_names)),
        banks_(std::move(mf_banks)),
        rules_(std::move(rules)),
        variant_(variant) {
    if (names_.size() != banks_.size()) throw ModelError("one MF bank per dimension required");
    for (std::size_t d = 0; d < banks_.size(); ++d) {
      if (banks_[d].empty()) throw ModelError("empty MF bank for dimension " + names_[d]);
    }
    if (rules_.empty()) throw ModelError("a fuzzy model needs at least one rule");
    const bool constant = std::holds_alternative<ConstantConsequent>(rules_.front().consequent);
    for (const auto& r : rules_) {
      if (r.antecedent.size() != banks_.size()) throw ModelError("rule antecedent has wrong arity");
      for (std::size_t d = 0; d < banks_.size(); ++d) {
        if (r.antecedent[d] >= banks_[d].size()) throw ModelError("rule references a missing MF");
      }
      check_consequent(r.consequent, constant);
    }
  }

  std::size_t dims() const noexcept { return banks_.size(); }
  std::size_t rule_count() const noexcept { return rules_.size(); }
  const std::vector<std::string>& dimension_names() const noexcept { return names_; }
  const std::vector<std::vector<GaussianMF>>& mf_banks() const noexcept { return banks_; }
  const std::vector<Rule>& rules() const noexcept { return rules_; }
  Variant variant() const noexcept { return variant_; }
  bool has_linear_consequents() const {
    return std::holds_alternative<LinearConsequent>(rules_.front().consequent);
  }

  void set_mf(std::size_t dim, std::size_t index, const GaussianMF& mf) { banks_.at(dim).at(index) = mf; }

  void set_consequent(std::size_t rule, Consequent c) {
    check_consequent(c, std::holds_alternative<ConstantConsequent>(rules_.front().consequent));
    rules_.at(rule).consequent = std::move(c);
  }

  bool operator==(const SugenoFis&) const = default;

 private:
  void check_consequent(const Consequent& c, bool constant) const {
    if (std::holds_alternative<ConstantConsequent>(c) != constant) {
      throw ModelError("all rules must share one consequent kind");
    }
    if (const auto* k = std::get_if<ConstantConsequent>(&c)) {
      if (!(k->value >= 0 && k->value <= 100)) throw ModelError("constant consequent outside [0, 100]");
    } else if (std::get<LinearConsequent>(c).coefficients.size() != banks_.size()) {
      throw ModelError("linear consequent needs one coefficient per dimension");
    }
  }

  std::vector<std::string> names_;
  std::vector<std::vector<GaussianMF>> banks_;
  std::vector<Rule> rules_;
  Variant variant_;
};

namespace detail {

inline void check_input(const SugenoFis& fis, std::span<const double> input) {
  if (input.size() != fis.dims()) {
    throw UsageError("input has " + std::to_string(input.size()) + " components, model expects " +
                     std::to_string(fis.dims()));
  }
}

}  // namespace detail

inline double firing_strength(const SugenoFis& fis, std::size_t rule_index, std::span<const double> input) {
  detail::check_input(fis, input);
  const auto& rule = fis.rules().at(rule_index);
  double w = 1.0;
  for (std::size_t d = 0; d < fis.dims(); ++d) w *= fis.mf_banks()[d][rule.antecedent[d]](input[d]);
  return w;
}

inline std::vector<double> firing_strengths(const SugenoFis& fis, std::span<const double> input) {
  detail::check_input(fis, input);
  // Memberships are computed once per MF, then multiplied per rule.
  std::vector<std::vector<double>> mu(fis.dims());
  for (std::size_t d = 0; d < fis.dims(); ++d) {
    for (const auto& mf : fis.mf_banks()[d]) mu[d].push_back(mf(input[d]));
  }
  std::vector<double> w(fis.rule_count(), 1.0);
  for (std::size_t i = 0; i < fis.rule_count(); ++i) {
    const auto& ante = fis.rules()[i].antecedent;
    for (std::size_t d = 0; d < fis.dims(); ++d) w[i] *= mu[d][ante[d]];
  }
  return w;
}

/// Index of the rule with the largest firing strength, compared in the log
/// domain so that underflowed strengths still rank. Ties go to the lower index.
inline std::size_t strongest_rule(const SugenoFis& fis, std::span<const double> input) {
  detail::check_input(fis, input);
  std::size_t best = 0;
  double best_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fis.rule_count(); ++i) {
    double lw = 0;
    for (std::size_t d = 0; d < fis.dims(); ++d) {
      const auto& mf = fis.mf_banks()[d][fis.rules()[i].antecedent[d]];
      const double u = (input[d] - mf.center()) / mf.sigma();
      lw -= 0.5 * u * u;
    }
    if (lw > best_log) {
      best_log = lw;
      best = i;
    }
  }
  return best;
}

/// Firing-strength weighted average of the rule outputs.
inline double evaluate(const SugenoFis& fis, std::span<const double> input) {
  const auto w = firing_strengths(fis, input);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    num += w[i] * consequent_output(fis.rules()[i].consequent, input);
    den += w[i];
  }
  if (den < kFiringFloor) {
    return consequent_output(fis.rules()[strongest_rule(fis, input)].consequent, input);
  }
  return num / den;
}

inline double evaluate(const SugenoFis& fis, const InputVector& input) {
  const auto v = input.values();
  return evaluate(fis, std::span<const double>(v));
}

}  // namespace crimefis
