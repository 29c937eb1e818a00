#pragma once

// Test-only reference computations. Nothing here calls into the library's
// numeric paths; results are used to check those paths.

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crimefis/dataset.hpp"
#include "crimefis/fuzzy.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<long double>>;

// Plain transcription of the weighted-average formula:
//   sum_i w_i z_i / sum_i w_i,  w_i = prod_d exp(-(x_d - c)^2 / (2 s^2)).
inline double weighted_average(const crimefis::SugenoFis& fis, const Vec& x, std::vector<double>* weights = nullptr) {
  long double num = 0, den = 0;
  std::vector<double> ws;
  for (const auto& rule : fis.rules()) {
    long double w = 1;
    for (std::size_t d = 0; d < x.size(); ++d) {
      const auto& mf = fis.mf_banks()[d][rule.antecedent[d]];
      const long double diff = x[d] - mf.center();
      w *= std::exp(-(diff * diff) / (2.0L * mf.sigma() * mf.sigma()));
    }
    long double z;
    if (const auto* k = std::get_if<crimefis::ConstantConsequent>(&rule.consequent)) {
      z = k->value;
    } else {
      const auto& lin = std::get<crimefis::LinearConsequent>(rule.consequent);
      z = lin.bias;
      for (std::size_t d = 0; d < x.size(); ++d) z += static_cast<long double>(lin.coefficients[d]) * x[d];
    }
    num += w * z;
    den += w;
    ws.push_back(static_cast<double>(w));
  }
  if (weights) *weights = ws;
  return static_cast<double>(num / den);
}

// Solves M y = b by Gauss-Jordan elimination with partial pivoting.
inline std::vector<long double> solve(Mat m, std::vector<long double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    }
    if (m[piv][c] == 0) throw std::runtime_error("singular system in oracle");
    std::swap(m[piv], m[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const long double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= m[i][i];
  return b;
}

// Moore-Penrose solution pinv(A) t for a full-rank A, via the smaller Gram
// matrix: (A^T A)^-1 A^T t when tall, A^T (A A^T)^-1 t when wide.
inline Vec pseudoinverse_solve(const Mat& a, const Vec& t) {
  const std::size_t rows = a.size(), cols = a.front().size();
  if (rows >= cols) {
    Mat g(cols, std::vector<long double>(cols, 0));
    std::vector<long double> rhs(cols, 0);
    for (std::size_t i = 0; i < cols; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t r = 0; r < rows; ++r) g[i][j] += a[r][i] * a[r][j];
      }
      for (std::size_t r = 0; r < rows; ++r) rhs[i] += a[r][i] * t[r];
    }
    auto y = solve(g, rhs);
    return Vec(y.begin(), y.end());
  }
  Mat g(rows, std::vector<long double>(rows, 0));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < rows; ++j) {
      for (std::size_t c = 0; c < cols; ++c) g[i][j] += a[i][c] * a[j][c];
    }
  }
  auto y = solve(g, std::vector<long double>(t.begin(), t.end()));
  Vec theta(cols, 0);
  for (std::size_t c = 0; c < cols; ++c) {
    long double s = 0;
    for (std::size_t r = 0; r < rows; ++r) s += a[r][c] * y[r];
    theta[c] = static_cast<double>(s);
  }
  return theta;
}

// Consequent design matrix rebuilt from scratch: row j = wbar_ij * (x_j, 1).
inline Mat design_matrix(const crimefis::SugenoFis& fis, const std::vector<Vec>& xs) {
  Mat a;
  for (const auto& x : xs) {
    std::vector<double> w;
    weighted_average(fis, x, &w);
    long double total = 0;
    for (double v : w) total += v;
    std::vector<long double> row;
    for (double wi : w) {
      for (double xd : x) row.push_back(wi / total * xd);
      row.push_back(wi / total);
    }
    a.push_back(std::move(row));
  }
  return a;
}

inline double sse(const crimefis::SugenoFis& fis, const std::vector<Vec>& xs, const Vec& t) {
  double s = 0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double e = weighted_average(fis, xs[j]) - t[j];
    s += e * e;
  }
  return s;
}

struct FdGradients {
  std::vector<std::vector<double>> center, sigma;
};

// Central finite differences of the sum of squared errors.
inline FdGradients finite_difference_gradients(const crimefis::SugenoFis& fis, const std::vector<Vec>& xs,
                                               const Vec& t) {
  FdGradients g;
  for (std::size_t d = 0; d < fis.dims(); ++d) {
    g.center.emplace_back();
    g.sigma.emplace_back();
    for (std::size_t k = 0; k < fis.mf_banks()[d].size(); ++k) {
      const auto mf = fis.mf_banks()[d][k];
      for (int which = 0; which < 2; ++which) {
        const double p = which == 0 ? mf.center() : mf.sigma();
        const double h = 1e-6 * std::max(1.0, std::fabs(p));
        auto plus = fis, minus = fis;
        if (which == 0) {
          plus.set_mf(d, k, crimefis::GaussianMF(p + h, mf.sigma()));
          minus.set_mf(d, k, crimefis::GaussianMF(p - h, mf.sigma()));
        } else {
          plus.set_mf(d, k, crimefis::GaussianMF(mf.center(), p + h));
          minus.set_mf(d, k, crimefis::GaussianMF(mf.center(), p - h));
        }
        const double fd = (sse(plus, xs, t) - sse(minus, xs, t)) / (2 * h);
        (which == 0 ? g.center : g.sigma).back().push_back(fd);
      }
    }
  }
  return g;
}

// Random grid-structured model: banks of 1..max_mfs Gaussians per dimension
// and one rule per combination, capped at max_rules by dropping the tail.
inline crimefis::SugenoFis random_fis(std::mt19937_64& rng, std::size_t dims, std::size_t max_mfs,
                                      std::size_t max_rules, bool linear) {
  std::uniform_real_distribution<double> center(-1.0, 1.0), sigma(0.3, 1.2), coef(-2.0, 2.0), conf(0.0, 100.0);
  std::uniform_int_distribution<std::size_t> nmf(1, max_mfs);
  std::vector<std::string> names;
  std::vector<std::vector<crimefis::GaussianMF>> banks(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    names.push_back("x" + std::to_string(d));
    const auto n = nmf(rng);
    for (std::size_t k = 0; k < n; ++k) banks[d].emplace_back(center(rng), sigma(rng));
  }
  std::vector<crimefis::Rule> rules;
  std::vector<std::size_t> idx(dims, 0);
  for (;;) {
    crimefis::Rule r;
    r.antecedent = idx;
    if (linear) {
      crimefis::LinearConsequent lin;
      for (std::size_t d = 0; d < dims; ++d) lin.coefficients.push_back(coef(rng));
      lin.bias = coef(rng);
      r.consequent = lin;
    } else {
      r.consequent = crimefis::ConstantConsequent{conf(rng)};
    }
    rules.push_back(std::move(r));
    if (rules.size() == max_rules) break;
    std::size_t d = dims;
    while (d-- > 0) {
      if (++idx[d] < banks[d].size()) break;
      idx[d] = 0;
    }
    if (d == static_cast<std::size_t>(-1)) break;
  }
  return crimefis::SugenoFis(std::move(names), std::move(banks), std::move(rules),
                             linear ? crimefis::Variant::Anfis : crimefis::Variant::Fis);
}

inline std::vector<Vec> random_inputs(std::mt19937_64& rng, std::size_t n, std::size_t dims, double lo = -1.5,
                                      double hi = 1.5) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vec> xs(n, Vec(dims));
  for (auto& x : xs) {
    for (auto& v : x) v = u(rng);
  }
  return xs;
}

// Two labels in disjoint lat/lon boxes. Each label's records are mostly
// packed into a dense core in its own box, with the rest spread over the
// whole study area, so every expert's grid spans both boxes.
inline std::vector<crimefis::ProcessedRecord> separated_clusters(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> day(1, 28);
  std::uniform_int_distribution<long> hdiff(0, 40);
  std::vector<crimefis::ProcessedRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool a = (i % 2) == 0;
    crimefis::ProcessedRecord r;
    r.label = a ? "kidnapping" : "murder";
    if (unit(rng) < 0.9) {
      // Dense core: SW box for kidnapping, NE box for murder.
      const double lat0 = a ? 23.70 : 23.83, lon0 = a ? 90.36 : 90.44;
      r.latitude = lat0 + 0.05 * unit(rng);
      r.longitude = lon0 + 0.05 * unit(rng);
    } else {
      r.latitude = 23.70 + 0.18 * unit(rng);
      r.longitude = 90.36 + 0.13 * unit(rng);
    }
    r.day = day(rng);
    r.holiday_diff = hdiff(rng);
    out.push_back(r);
  }
  return out;
}

}  // namespace oracle
