//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "scalelaw/error.hpp"
#include "scalelaw/eval.hpp"
#include "scalelaw/synth.hpp"
#include "support.hpp"

using namespace scalelaw;
using scalelaw::testing::uniform;

namespace {

BenchmarkSpec bench(double q_random = 0.25) {
  return { "B", MetricType::kAcc, q_random, kDefaultMargin };
}

HoldoutRule paper_rule() {
  HoldoutRule r;
  r.flops_threshold = 6e21;
  r.tpr_holdout = 160;
  return r;
}

}  // namespace

TEST_CASE("metric examples") {
  const std::vector<double> a { 0.4, 0.8 };
  const auto same = compute_metrics(a, a);
  CHECK(same.mae == 0);
  CHECK(*same.mre_pct == 0);
  CHECK(same.rmse == 0);
  CHECK(same.r2 == 1);

  const std::vector<double> mean { 0.6, 0.6 };
  CHECK(compute_metrics(mean, a).r2 == doctest::Approx(0).epsilon(1e-12));

  // |d| = 0.1 at both points; relative 0.25 and 0.125; SS_res 0.02, SS_tot 0.08.
  const std::vector<double> p { 0.5, 0.7 };
  const auto m = compute_metrics(p, a);
  CHECK(m.mae == doctest::Approx(0.1));
  CHECK(*m.mre_pct == doctest::Approx(18.75));
  CHECK(m.rmse == doctest::Approx(0.1));
  CHECK(m.r2 == doctest::Approx(0.75));

  const std::vector<double> with_zero { 0.0, 0.8 };
  const auto z = compute_metrics(p, with_zero);
  CHECK(!z.mre_pct.has_value());
  CHECK(z.mae == doctest::Approx(0.3));
  CHECK_THROWS_AS(mean_relative_error_pct(p, with_zero), DomainError);

  const std::vector<double> one { 0.5 };
  CHECK_THROWS_AS(compute_metrics(one, a), InvalidArgument);
  CHECK_THROWS_AS(compute_metrics(std::vector<double> {}, std::vector<double> {}), InvalidArgument);
}

TEST_CASE("metric properties") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + t % 30;
    std::vector<double> p(n), a(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = uniform(rng, 0.01, 1);
      p[i] = a[i] + uniform(rng, -0.3, 0.3);
    }
    const auto m = compute_metrics(p, a);
    CHECK(m.mae >= 0);
    CHECK(m.mae <= m.rmse + 1e-15);
    CHECK(m.r2 <= 1);

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
      idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<double> ps(n), as(n);
    for (std::size_t i = 0; i < n; ++i) {
      ps[i] = p[idx[i]];
      as[i] = a[idx[i]];
    }
    const auto s = compute_metrics(ps, as);
    CHECK(s.mae == doctest::Approx(m.mae).epsilon(1e-12));
    CHECK(*s.mre_pct == doctest::Approx(*m.mre_pct).epsilon(1e-12));
    CHECK(s.rmse == doctest::Approx(m.rmse).epsilon(1e-12));
    CHECK(s.r2 == doctest::Approx(m.r2).epsilon(1e-9));
  }
}

TEST_CASE("validation on noise-free data") {
  const auto &pre = paper_coefficient_presets().at("ARC-E");
  GridSpec g;
  g.benchmarks = { { pre.spec, pre.nd } };
  const auto recs = generate_grid(g);
  const auto split = split_holdout(recs, paper_rule());
  const auto model = fit_nd_law(split.train, pre.spec, FitConfig {});
  const auto res = validate_model(model, recs, paper_rule());
  CHECK(!res.valid.empty);
  CHECK(res.valid.metrics.mae <= 1e-6);
  CHECK(res.train.metrics.mae <= 1e-6);
  CHECK(res.valid.points + res.valid.excluded_points
        == split.valid.size());
  CHECK(res.train.points == model.fit_stats.train_points);

  // Residuals agree with predictions recomputed from scratch.
  for (const auto &r: res.train.residuals) {
    const auto *rec = &*std::find_if(recs.begin(), recs.end(),
                                     [&](const ExperimentRecord &x) { return x.run_id == r.run_id; });
    Query q;
    q.n_params = rec->n_params;
    q.d_tokens = rec->d_tokens;
    const double raw = std::clamp(denormalize_accuracy(eval_nd_law(pre.nd, rec->n_params, rec->d_tokens), pre.spec.q_random), 0.0, 1.0);
    CHECK(r.predicted == doctest::Approx(predict(model, q).raw).epsilon(1e-15));
    CHECK(r.predicted == doctest::Approx(raw).epsilon(1e-6));
    CHECK(r.actual == rec->observations[0].value);
  }

  HoldoutRule none;
  none.flops_threshold = 1e30;
  const auto e = validate_model(model, recs, none);
  CHECK(e.valid.empty);
  CHECK(e.valid.points == 0);
  CHECK(to_json(e)["valid"]["empty"] == true);
  const auto csv = reports_to_csv("m", "ARC-E", e);
  CHECK(csv.find("m,ARC-E,valid,0,0,0,true,,,,") != std::string::npos);
}

TEST_CASE("validation MAE sits at the noise floor") {
  const auto &pre = paper_coefficient_presets().at("ARC-E");
  int inside = 0;
  double lo = 1, hi = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GridSpec g;
    g.benchmarks = { { pre.spec, pre.nd } };
    g.noise = { NoiseKind::kGaussianAccuracy, 0.01 };
    g.seed = seed;
    const auto recs = generate_grid(g);
    const auto split = split_holdout(recs, paper_rule());
    const auto model = fit_nd_law(split.train, pre.spec, FitConfig {});
    const double mae = validate_model(model, recs, paper_rule()).valid.metrics.mae;
    lo = std::min(lo, mae);
    hi = std::max(hi, mae);
    inside += mae >= 0.004 && mae <= 0.02 ? 1 : 0;
  }
  CAPTURE(lo);
  CAPTURE(hi);
  CHECK(inside == 50);
}

TEST_CASE("threshold grid") {
  const auto t = default_sweep_thresholds();
  REQUIRE(t.size() == 20);
  CHECK(t.front() == 6e19);
  CHECK(t.back() == 5e22);
  for (std::size_t i = 1; i < t.size(); ++i) {
    CHECK(t[i] > t[i - 1]);
    CHECK(t[i] / t[i - 1] == doctest::Approx(t[1] / t[0]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(log_uniform_grid(1, 10, 1), InvalidArgument);
  CHECK_THROWS_AS(log_uniform_grid(10, 1, 5), InvalidArgument);
}

TEST_CASE("sweep where the law holds everywhere") {
  const auto s = bench();
  GridSpec g;
  g.benchmarks = { { s, PowerLawLogAcc { 1.609, 0.35, 1e21 } } };
  const auto recs = generate_grid(g);
  const auto sweep = threshold_sweep(recs, make_strategy("power_law", s, FitConfig {}),
                                     default_sweep_thresholds());
  REQUIRE(sweep.points.size() == 20);
  double first = 0;
  for (const auto &p: sweep.points) {
    if (!p.evaluable)
      continue;
    if (first == 0)
      first = p.threshold;
    CHECK(p.success);
  }
  REQUIRE(first > 0);
  CHECK(sweep.has_flag(kFlagCrossingLowerEdge));
  REQUIRE(sweep.crossing.has_value());
  CHECK(*sweep.crossing <= first);
  CHECK(!sweep.logistic.has_value());
}

TEST_CASE("sweep finds a regime switch") {
  const auto s = bench();
  const double c_star = 1e21;
  GridSpec g;
  g.benchmarks = { { s, RegimeSwitchTruth { { 1.609, 0.35, 1e21 }, c_star, 0.6 } } };
  g.noise = { NoiseKind::kGaussianLogit, 0.05 };
  g.seed = 1;
  const auto recs = generate_grid(g);
  const auto fit = make_strategy("power_law", s, FitConfig {});
  const auto sweep = threshold_sweep(recs, fit, default_sweep_thresholds());
  REQUIRE(sweep.crossing.has_value());
  CHECK(*sweep.crossing >= c_star / 3);
  CHECK(*sweep.crossing <= c_star * 3);
  // Early thresholds fail, late ones succeed.
  CHECK(!sweep.points.front().success);
  CHECK(sweep.points[sweep.points.size() - 2].success);

  const auto again = threshold_sweep(recs, fit, default_sweep_thresholds());
  CHECK(to_json(again).dump() == to_json(sweep).dump());
}

TEST_CASE("sweep marks thresholds without enough data") {
  const auto s = bench();
  GridSpec g;
  g.benchmarks = { { s, PowerLawLogAcc { 1.609, 0.35, 1e21 } } };
  const auto recs = generate_grid(g);
  const std::vector<double> t { 1e17, 1e21, 1e23 };
  const auto sweep = threshold_sweep(recs, make_strategy("power_law", s, FitConfig {}), t);
  REQUIRE(sweep.points.size() == 3);
  CHECK(!sweep.points[0].evaluable);
  CHECK(!sweep.points[0].note.empty());
  CHECK(sweep.points[1].evaluable);
  // Nothing to validate above the largest budget.
  CHECK(!sweep.points[2].evaluable);

  GridSpec noisy = g;
  noisy.noise = { NoiseKind::kGaussianLogit, 0.05 };
  const auto never = threshold_sweep(generate_grid(noisy),
                                     make_strategy("power_law", s, FitConfig {}), t, 0.01);
  CHECK_THROWS_AS(threshold_sweep(recs, make_strategy("power_law", s, FitConfig {}), t, 0.0),
                  InvalidArgument);
  CHECK(never.has_flag(kFlagNeverSucceeds));
  CHECK(!never.crossing.has_value());

  const std::vector<double> bad { 1e17, 1e16 };
  CHECK_THROWS_AS(threshold_sweep(recs, make_strategy("power_law", s, FitConfig {}), bad), InvalidArgument);
}

TEST_CASE("strategy comparison") {
  const auto s = bench();
  GridSpec g;
  g.benchmarks = { { s, PowerLawLogAcc { 1.609, 0.35, 1e21 },
                     ProxyTruth { "nll", { 1.8, 0.9, 0.25, 1e21 }, 0.0 } } };
  const auto recs = generate_grid(g);
  const FitConfig cfg;
  const auto rule = paper_rule();

  const auto one = compare_strategies(recs, { { "power_law", make_strategy("power_law", s, cfg) } }, rule);
  CHECK(one.size() == 1);

  std::vector<NamedStrategy> four;
  for (const char *name: { "power_law", "bnsl", "two_stage_linear", "two_stage_logistic" })
    four.push_back({ name, make_strategy(name, s, cfg) });
  const auto rows = compare_strategies(recs, four, rule);
  REQUIRE(rows.size() == 4);
  for (const auto &r: rows) {
    CAPTURE(r.strategy);
    REQUIRE(!r.error);
    REQUIRE(r.valid.has_value());
    REQUIRE(r.train.has_value());
  }
  CHECK(rows[0].valid->metrics.mae < rows[2].valid->metrics.mae);
  CHECK(rows[0].valid->metrics.mae < rows[3].valid->metrics.mae);
  CHECK(rows[0].valid->metrics.mae <= 1e-9);

  const auto csv = comparison_to_csv("B", rows);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(to_json(rows).size() == 4);

  // A strategy that cannot run becomes an error row; the rest continue.
  const auto mixed = compare_strategies(
      recs,
      { { "two_stage_linear", make_strategy("two_stage_linear", s, cfg, "perplexity") },
        { "power_law", make_strategy("power_law", s, cfg) } },
      rule);
  REQUIRE(mixed.size() == 2);
  CHECK(mixed[0].error.has_value());
  CHECK(mixed[0].error->find("perplexity") != std::string::npos);
  CHECK(!mixed[1].error.has_value());
}
