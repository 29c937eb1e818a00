// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure or time-limit overrun.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "crimefis/crimefis.hpp"
#include "oracles.hpp"

using namespace crimefis;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

void require(Outcome& o, bool cond, const std::string& what) {
  if (!cond && o.ok) {
    o.ok = false;
    o.detail = what;
  }
}

// Relative error, falling back to absolute error for values that are zero up
// to rounding.
double relative_error(double a, double b, double zero = 1e-12) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return scale < zero ? std::fabs(a - b) : std::fabs(a - b) / scale;
}

std::string file_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome worked_example() {
  Outcome o;
  const std::vector<Sample> s{{23.777, 90.555}, {23.666, 90.666}, {23.888, 90.777}};
  const std::vector<std::size_t> counts{2, 2};
  const auto p = build_partition(s, counts);
  const auto stats = count_per_cell(p, s);
  const std::size_t expect_count[] = {2, 1, 1, 1};
  const long expect_pct[] = {67, 33, 33, 33};
  require(o, stats.size() == 4, "cell count");
  for (std::size_t i = 0; i < 4 && o.ok; ++i) {
    require(o, stats[i].count == expect_count[i], "count of cell " + std::to_string(i));
    require(o, std::lround(stats[i].confidence) == expect_pct[i], "percent of cell " + std::to_string(i));
    require(o, std::lround(stats[i].confidence * 100) == expect_pct[i] * 100 + (i == 0 ? -33 : 33),
            "two-decimal confidence of cell " + std::to_string(i));
  }
  for (const auto& x : assign_targets(p, stats, s)) {
    require(o, std::lround(x * 100) == 3333, "per-record target");
  }
  return o;
}

Outcome rule_count() {
  Outcome o;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<ProcessedRecord> records;
  for (int i = 0; i < 40; ++i) {
    records.push_back({"x", 23.7 + 0.2 * u(rng), 90.3 + 0.2 * u(rng), 1 + static_cast<int>(rng() % 28),
                       static_cast<long>(rng() % 50)});
  }
  ExpertTrainingOptions opt;
  for (const auto v : {Variant::Fis, Variant::Anfis}) {
    opt.training.epochs = 1;
    const auto experts = train_experts(records, v, opt);
    require(o, experts.size() == 1 && experts[0].model.rule_count() == 64,
            "rule count " + std::to_string(experts[0].model.rule_count()));
  }
  return o;
}

Outcome sugeno_oracle() {
  Outcome o;
  std::mt19937_64 rng(3);
  double worst = 0;
  for (int t = 0; t < 200; ++t) {
    const auto fis = oracle::random_fis(rng, 1 + t % 3, 3, 8, t % 2 == 0);
    for (const auto& x : oracle::random_inputs(rng, 20, fis.dims())) {
      worst = std::max(worst, relative_error(evaluate(fis, x), oracle::weighted_average(fis, x)));
    }
  }
  require(o, worst <= 1e-10, "max relative error " + std::to_string(worst));
  o.detail = o.ok ? "max relative error " + detail::format_real(worst) : o.detail;
  return o;
}

std::vector<double> flatten(const std::vector<LinearConsequent>& cs) {
  std::vector<double> out;
  for (const auto& c : cs) {
    out.insert(out.end(), c.coefficients.begin(), c.coefficients.end());
    out.push_back(c.bias);
  }
  return out;
}

Outcome lse_optimality() {
  Outcome o;
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> target(0, 100);
  std::normal_distribution<double> noise(0, 0.5);
  double worst = 0;
  for (int t = 0; t < 50 && o.ok; ++t) {
    const std::size_t dims = 1 + t % 2;
    auto fis = oracle::random_fis(rng, dims, 2, 4, true);
    const auto xs = oracle::random_inputs(rng, 5 + rng() % 16, dims);
    std::vector<double> ts;
    for (std::size_t j = 0; j < xs.size(); ++j) ts.push_back(target(rng));
    const auto sol = lse_consequents(fis, xs, ts);
    const auto got = flatten(sol);
    const auto expect = oracle::pseudoinverse_solve(oracle::design_matrix(fis, xs), ts);
    for (std::size_t k = 0; k < got.size(); ++k) {
      worst = std::max(worst, std::fabs(got[k] - expect[k]) / std::max(1.0, std::fabs(expect[k])));
    }
    apply_consequents(fis, sol);
    const double best = training_rmse(fis, xs, ts);
    for (int k = 0; k < 100; ++k) {
      auto other = fis;
      for (std::size_t i = 0; i < other.rule_count(); ++i) {
        auto lin = std::get<LinearConsequent>(other.rules()[i].consequent);
        for (auto& c : lin.coefficients) c += noise(rng);
        lin.bias += noise(rng);
        other.set_consequent(i, lin);
      }
      require(o, best <= training_rmse(other, xs, ts) + 1e-12, "perturbation beat LSE in instance " + std::to_string(t));
    }
  }
  require(o, worst <= 1e-8, "max deviation from oracle " + detail::format_real(worst));
  if (o.ok) o.detail = "max deviation from oracle " + detail::format_real(worst);
  return o;
}

Outcome gradients() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> target(-5, 5);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t dims = 1 + t % 3;
    const auto fis = oracle::random_fis(rng, dims, 3, 9, t % 4 != 0);
    const auto xs = oracle::random_inputs(rng, 12, dims);
    std::vector<double> ts;
    for (std::size_t j = 0; j < xs.size(); ++j) ts.push_back(target(rng));
    const auto g = premise_gradients(fis, xs, ts);
    const auto fd = oracle::finite_difference_gradients(fis, xs, ts);
    for (std::size_t d = 0; d < dims; ++d) {
      for (std::size_t k = 0; k < g.center[d].size(); ++k) {
        // Partials that vanish analytically come out as rounding noise.
        worst = std::max({worst, relative_error(g.center[d][k], fd.center[d][k], 1e-8),
                          relative_error(g.sigma[d][k], fd.sigma[d][k], 1e-8)});
      }
    }
  }
  require(o, worst < 1e-4, "max relative error " + detail::format_real(worst));
  if (o.ok) o.detail = "max relative error " + detail::format_real(worst);
  return o;
}

// A fresh grid-initialized ANFIS learns targets produced by a model with the
// same premise structure and random linear consequents.
Outcome training_efficacy() {
  Outcome o;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> coef(-20, 20), bias(20, 80);
  double worst = 0;
  for (int run = 0; run < 5; ++run) {
    const std::size_t dims = 2;
    const auto xs = oracle::random_inputs(rng, 80, dims, 0, 1);
    const std::vector<std::size_t> counts{3, 2};
    const auto p = build_partition(xs, counts);
    auto fresh = generate_fis(p, count_per_cell(p, xs), Variant::Anfis);
    auto gen = fresh;
    for (std::size_t i = 0; i < gen.rule_count(); ++i) gen.set_consequent(i, LinearConsequent{{coef(rng), coef(rng)}, bias(rng)});
    std::vector<double> ts;
    for (const auto& x : xs) ts.push_back(evaluate(gen, x));
    TrainingConfig cfg;
    cfg.epochs = 20;
    const auto [model, report] = train_hybrid(fresh, xs, ts, cfg);
    worst = std::max(worst, report.final_rmse);
    require(o, report.rmse_history.back() <= report.rmse_history.front(), "history grew in run " + std::to_string(run));
  }
  require(o, worst < 1e-3, "final RMSE " + detail::format_real(worst));
  if (o.ok) o.detail = "worst final RMSE " + detail::format_real(worst);
  return o;
}

Outcome separated_clusters() {
  Outcome o;
  std::mt19937_64 rng(2018);
  const auto train = oracle::separated_clusters(rng, 200);
  const auto test = oracle::separated_clusters(rng, 40);
  ExpertTrainingOptions opt;
  const auto fis = make_ensemble(train_experts(train, Variant::Fis, opt));
  const auto anfis = make_ensemble(train_experts(train, Variant::Anfis, opt));
  // Default configuration: the selection set is the evaluation block.
  const auto hybrid = build_hybrid(fis, anfis, test);
  const auto tf = evaluate_accuracy(fis, test), ta = evaluate_accuracy(anfis, test),
             th = evaluate_accuracy(hybrid.ensemble, test);
  require(o, ta.total.accuracy() >= 90.0, "anfis below 90%");
  require(o, th.total.predicted >= std::max(tf.total.predicted, ta.total.predicted), "hybrid below the better variant");
  char buf[160];
  std::snprintf(buf, sizeof buf, "fis %zu/40, anfis %zu/40, hybrid %zu/40", tf.total.predicted, ta.total.predicted,
                th.total.predicted);
  o.detail = o.ok ? std::string(buf) : o.detail + " (" + buf + ")";
  return o;
}

SugenoFis linear_model(double a, double b) {
  std::vector<std::vector<GaussianMF>> banks(4, {GaussianMF(0, 1)});
  return SugenoFis({"latitude", "longitude", "day", "holiday_diff"}, banks,
                   {{{0, 0, 0, 0}, LinearConsequent{{a, 0, 0, 0}, b}}}, Variant::Anfis);
}

Outcome argmax_invariants() {
  Outcome o;
  const ExpertEnsemble tie({{"a", linear_model(0, 5)}, {"b", linear_model(0, 5)}});
  require(o, predict(tie, InputVector{}).label == "a", "tie did not go to the earlier expert");
  const ExpertEnsemble e({{"a", linear_model(2, 1)}, {"b", linear_model(-1, 2)}, {"c", linear_model(0.5, 0)}});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 1000 && o.ok; ++i) {
    const InputVector x{u(rng), 0, 1, 0};
    const auto p = predict(e, x);
    std::vector<double> scores;
    for (const auto& [label, s] : p.all_scores) scores.push_back(std::exp(s / 10) + 3);
    require(o, e.experts()[argmax_first(scores)].label == p.label, "transform changed the label");
  }
  return o;
}

Outcome round_trip() {
  Outcome o;
  std::mt19937_64 rng(9);
  const auto fis = oracle::random_fis(rng, 4, 3, 20, true);
  const auto back = from_text(to_text(fis));
  for (const auto& x : oracle::random_inputs(rng, 100, 4)) {
    require(o, detail::format_real(evaluate(back, x)) == detail::format_real(evaluate(fis, x)),
            "evaluation differs after reload");
  }

  const auto dir = fs::temp_directory_path() / "crimefis_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "data.csv", std::ios::binary);
    write_processed_csv(out, oracle::separated_clusters(rng, 80));
  }
  Config cfg;
  cfg.data_path = dir / "data.csv";
  cfg.model_dir = dir / "models";
  cfg.training.epochs = 10;
  std::ostringstream log;
  cmd_train(cfg, log);
  std::vector<std::pair<fs::path, std::string>> first;
  for (const auto& f : fs::directory_iterator(cfg.model_dir)) first.emplace_back(f.path(), file_text(f.path()));
  cmd_train(cfg, log);
  for (const auto& [path, text] : first) require(o, file_text(path) == text, "retrain changed " + path.filename().string());
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"worked example counts, confidences and targets", 1, worked_example},
      {"64 rules for mf_counts (4,4,2,2)", 1, rule_count},
      {"inference matches weighted-average oracle", 5, sugeno_oracle},
      {"least squares optimality", 10, lse_optimality},
      {"premise gradients match finite differences", 10, gradients},
      {"training efficacy", 30, training_efficacy},
      {"separated clusters accuracy and hybrid", 60, separated_clusters},
      {"argmax invariants", 5, argmax_invariants},
      {"serialization and training round trip", 5, round_trip},
  };
  int failures = 0;
  int index = 1;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out.ok && secs >= c.limit_s) out = {false, "took longer than the limit"};
    failures += !out.ok;
    std::printf("[%s] %d. %s (%.3f s, limit %.0f s)%s%s\n", out.ok ? "PASS" : "FAIL", index++, c.name, secs, c.limit_s,
                out.detail.empty() ? "" : ": ", out.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
