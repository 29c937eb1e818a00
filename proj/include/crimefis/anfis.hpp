#pragma once

// Hybrid ANFIS learning: linear consequents by least squares, Gaussian
// premises by gradient descent on the sum of squared errors.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crimefis/error.hpp"
#include "crimefis/fuzzy.hpp"
#include "crimefis/grid.hpp"

namespace crimefis {

struct TrainingConfig {
  std::size_t epochs = 100;
  double learning_rate = 0.01;
  /// Absolute sigma floor. When unset, each dimension uses 1e-6 x its data range.
  std::optional<double> min_sigma;
  double rmse_tolerance = 1e-6;

  void validate() const {
    if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
    if (min_sigma && !(*min_sigma > 0)) throw ConfigError("min_sigma must be > 0");
    if (!(rmse_tolerance >= 0)) throw ConfigError("rmse_tolerance must be >= 0");
  }
};

struct TrainingReport {
  std::vector<double> rmse_history;  // one entry per epoch (initial RMSE when no epoch ran)
  double final_rmse = 0;
  std::size_t epochs_run = 0;
  bool diverged = false;
  std::vector<std::string> warnings;
};

inline double rmse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw UsageError("rmse: length mismatch");
  if (predictions.empty()) throw UsageError("rmse: empty input");
  double sse = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - targets[i];
    sse += e * e;
  }
  return std::sqrt(sse / static_cast<double>(predictions.size()));
}

inline std::vector<double> predict_all(const SugenoFis& fis, std::span<const Sample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(evaluate(fis, s));
  return out;
}

inline double training_rmse(const SugenoFis& fis, std::span<const Sample> samples, std::span<const double> targets) {
  const auto p = predict_all(fis, samples);
  return rmse(p, targets);
}

/// Normalized firing strengths as used by `evaluate`, including the one-hot
/// fallback when the total strength is below the floor.
inline std::vector<double> normalized_strengths(const SugenoFis& fis, std::span<const double> input) {
  auto w = firing_strengths(fis, input);
  double total = 0;
  for (double v : w) total += v;
  if (total < kFiringFloor) {
    const auto best = strongest_rule(fis, input);
    std::fill(w.begin(), w.end(), 0.0);
    w[best] = 1.0;
    return w;
  }
  for (double& v : w) v /= total;
  return w;
}

/// Design matrix of the consequent least-squares problem: row j holds, for
/// every rule i, wbar_ij * (x_j, 1). Parameters are stacked per rule as
/// (coefficients..., bias).
inline Eigen::MatrixXd consequent_design_matrix(const SugenoFis& fis, std::span<const Sample> samples) {
  const auto dims = fis.dims();
  const auto block = dims + 1;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(fis.rule_count() * block));
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const auto wbar = normalized_strengths(fis, samples[j]);
    for (std::size_t i = 0; i < fis.rule_count(); ++i) {
      const auto col = static_cast<Eigen::Index>(i * block);
      const auto row = static_cast<Eigen::Index>(j);
      for (std::size_t d = 0; d < dims; ++d) a(row, col + static_cast<Eigen::Index>(d)) = wbar[i] * samples[j][d];
      a(row, col + static_cast<Eigen::Index>(dims)) = wbar[i];
    }
  }
  return a;
}

/// Minimum-norm least-squares consequents for fixed premises.
inline std::vector<LinearConsequent> lse_consequents(const SugenoFis& fis, std::span<const Sample> samples,
                                                     std::span<const double> targets) {
  if (samples.empty()) throw UsageError("least squares needs at least one record");
  if (samples.size() != targets.size()) throw UsageError("one target per record required");
  if (!fis.has_linear_consequents()) throw UsageError("least squares needs linear consequents");

  const Eigen::MatrixXd a = consequent_design_matrix(fis, samples);
  const Eigen::Map<const Eigen::VectorXd> t(targets.data(), static_cast<Eigen::Index>(targets.size()));
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  const Eigen::VectorXd theta = cod.solve(t);
  if (!theta.allFinite()) throw NumericError("least-squares solve produced non-finite parameters");

  const auto block = fis.dims() + 1;
  std::vector<LinearConsequent> out(fis.rule_count());
  for (std::size_t i = 0; i < fis.rule_count(); ++i) {
    auto& c = out[i];
    c.coefficients.resize(fis.dims());
    for (std::size_t d = 0; d < fis.dims(); ++d) c.coefficients[d] = theta(static_cast<Eigen::Index>(i * block + d));
    c.bias = theta(static_cast<Eigen::Index>(i * block + fis.dims()));
  }
  return out;
}

inline void apply_consequents(SugenoFis& fis, const std::vector<LinearConsequent>& consequents) {
  for (std::size_t i = 0; i < consequents.size(); ++i) fis.set_consequent(i, consequents[i]);
}

/// dE/dcenter and dE/dsigma for every MF, indexed [dimension][mf].
struct PremiseGradients {
  std::vector<std::vector<double>> center;
  std::vector<std::vector<double>> sigma;
};

/// Analytic gradients of E = sum_j (y_j - t_j)^2 with respect to all premise
/// parameters. Records that fall under the firing floor contribute nothing,
/// since their output does not depend on the premises locally.
inline PremiseGradients premise_gradients(const SugenoFis& fis, std::span<const Sample> samples,
                                          std::span<const double> targets) {
  if (samples.size() != targets.size()) throw UsageError("one target per record required");
  PremiseGradients g;
  for (const auto& bank : fis.mf_banks()) {
    g.center.emplace_back(bank.size(), 0.0);
    g.sigma.emplace_back(bank.size(), 0.0);
  }
  const auto& banks = fis.mf_banks();
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const auto& x = samples[j];
    const auto w = firing_strengths(fis, x);
    double total = 0, num = 0;
    std::vector<double> z(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      z[i] = consequent_output(fis.rules()[i].consequent, x);
      total += w[i];
      num += w[i] * z[i];
    }
    if (total < kFiringFloor) continue;
    const double y = num / total;
    const double two_e = 2.0 * (y - targets[j]);
    for (std::size_t i = 0; i < w.size(); ++i) {
      // dE/dw_i, then chain through w_i = prod_d mu_d.
      const double de_dw = two_e * (z[i] - y) / total;
      if (de_dw == 0.0 || w[i] == 0.0) continue;
      const auto& ante = fis.rules()[i].antecedent;
      for (std::size_t d = 0; d < fis.dims(); ++d) {
        const auto& mf = banks[d][ante[d]];
        const double diff = x[d] - mf.center();
        const double s2 = mf.sigma() * mf.sigma();
        g.center[d][ante[d]] += de_dw * w[i] * diff / s2;
        g.sigma[d][ante[d]] += de_dw * w[i] * diff * diff / (s2 * mf.sigma());
      }
    }
  }
  return g;
}

namespace detail {

inline std::vector<double> dimension_ranges(std::span<const Sample> samples, std::size_t dims) {
  std::vector<double> range(dims, 1.0);
  if (samples.empty()) return range;
  for (std::size_t d = 0; d < dims; ++d) {
    double lo = samples.front()[d], hi = lo;
    for (const auto& s : samples) {
      lo = std::min(lo, s[d]);
      hi = std::max(hi, s[d]);
    }
    if (hi > lo) range[d] = hi - lo;
  }
  return range;
}

// One descent step. Each dimension's parameters are measured in units of
// that dimension's data range and the step has length `step` in those units,
// so latitude degrees and day counts move comparably.
inline SugenoFis premise_step(const SugenoFis& fis, const PremiseGradients& g, std::span<const double> range,
                              std::span<const double> floor, double step) {
  double norm2 = 0;
  for (std::size_t d = 0; d < fis.dims(); ++d) {
    for (std::size_t k = 0; k < g.center[d].size(); ++k) {
      norm2 += std::pow(g.center[d][k] * range[d], 2) + std::pow(g.sigma[d][k] * range[d], 2);
    }
  }
  SugenoFis next = fis;
  if (!(norm2 > 0) || !std::isfinite(norm2)) return next;
  const double scale = step / std::sqrt(norm2);
  for (std::size_t d = 0; d < fis.dims(); ++d) {
    for (std::size_t k = 0; k < g.center[d].size(); ++k) {
      const auto& mf = fis.mf_banks()[d][k];
      const double c = mf.center() - scale * g.center[d][k] * range[d] * range[d];
      const double s = std::max(floor[d], mf.sigma() - scale * g.sigma[d][k] * range[d] * range[d]);
      if (!std::isfinite(c) || !std::isfinite(s)) return fis;
      next.set_mf(d, k, GaussianMF(c, s));
    }
  }
  return next;
}

}  // namespace detail

struct TrainingResult {
  SugenoFis model;
  TrainingReport report;
};

/// Hybrid training. Each epoch takes one premise step from the current best
/// model, re-solves the consequents, and keeps the result only if the RMSE
/// did not grow; otherwise the step size is halved. Stops after `epochs`
/// or once an accepted epoch improves by less than `rmse_tolerance`.
inline TrainingResult train_hybrid(SugenoFis fis, std::span<const Sample> samples, std::span<const double> targets,
                                   const TrainingConfig& config = {}) {
  config.validate();
  if (samples.empty()) throw UsageError("training needs at least one record");
  if (samples.size() != targets.size()) throw UsageError("one target per record required");
  if (!fis.has_linear_consequents()) throw UsageError("hybrid training needs linear consequents");

  TrainingReport report;
  if (config.epochs == 0) {
    report.final_rmse = training_rmse(fis, samples, targets);
    report.rmse_history.push_back(report.final_rmse);
    return {std::move(fis), std::move(report)};
  }

  const auto range = detail::dimension_ranges(samples, fis.dims());
  std::vector<double> floor(fis.dims());
  for (std::size_t d = 0; d < fis.dims(); ++d) floor[d] = config.min_sigma.value_or(1e-6 * range[d]);
  // Clamp the starting sigmas too, so the floor holds throughout.
  for (std::size_t d = 0; d < fis.dims(); ++d) {
    for (std::size_t k = 0; k < fis.mf_banks()[d].size(); ++k) {
      const auto& mf = fis.mf_banks()[d][k];
      if (mf.sigma() < floor[d]) fis.set_mf(d, k, GaussianMF(mf.center(), floor[d]));
    }
  }

  apply_consequents(fis, lse_consequents(fis, samples, targets));
  double best_rmse = training_rmse(fis, samples, targets);
  if (!std::isfinite(best_rmse)) throw NumericError("initial model output is not finite");

  double step = config.learning_rate;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    ++report.epochs_run;
    if (epoch == 0) {
      report.rmse_history.push_back(best_rmse);
      if (best_rmse <= config.rmse_tolerance) break;
      continue;
    }
    const auto grads = premise_gradients(fis, samples, targets);
    SugenoFis candidate = detail::premise_step(fis, grads, range, floor, step);
    double cand_rmse = std::numeric_limits<double>::quiet_NaN();
    try {
      apply_consequents(candidate, lse_consequents(candidate, samples, targets));
      cand_rmse = training_rmse(candidate, samples, targets);
    } catch (const NumericError&) {
    }
    if (!std::isfinite(cand_rmse)) {
      report.diverged = true;
      report.warnings.push_back("training diverged at epoch " + std::to_string(epoch + 1) +
                                "; keeping the last finite model");
      report.rmse_history.push_back(best_rmse);
      break;
    }
    if (cand_rmse <= best_rmse) {
      const double improvement = best_rmse - cand_rmse;
      fis = std::move(candidate);
      best_rmse = cand_rmse;
      report.rmse_history.push_back(best_rmse);
      if (improvement < config.rmse_tolerance) break;
    } else {
      step *= 0.5;
      report.rmse_history.push_back(best_rmse);
    }
  }
  report.final_rmse = report.rmse_history.back();
  return {std::move(fis), std::move(report)};
}

}  // namespace crimefis
