//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.
//
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "scalelaw/eval.hpp"
#include "scalelaw/fitpipes.hpp"
#include "scalelaw/forms.hpp"
#include "scalelaw/io.hpp"
#include "scalelaw/synth.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace scalelaw;
using scalelaw::testing::uniform;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

BenchmarkSpec bench(const char *name = "B", double q_random = 0.25,
                    MetricType mt = MetricType::kAcc) {
  return { name, mt, q_random, kDefaultMargin };
}

std::vector<ExperimentRecord> grid(const BenchmarkTruth &bt, double sigma = 0,
                                   std::uint64_t seed = 0) {
  GridSpec g;
  g.benchmarks = { bt };
  if (sigma > 0)
    g.noise = { NoiseKind::kGaussianLogit, sigma };
  g.seed = seed;
  return generate_grid(g);
}

double rel(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

double max_prediction_error(const ScalingModel &m, const BenchmarkTruth &bt,
                            const std::vector<ExperimentRecord> &records) {
  double worst = 0;
  for (const auto &p: model_points(m, records)) {
    const double truth = truth_accuracy(bt, p.flops, p.query.n_params.value_or(0),
                                        p.query.d_tokens.value_or(0), p.k.value_or(1));
    worst = std::max(worst, std::abs(predict(m, p.query).unclamped - truth));
  }
  return worst;
}

// ---------------------------------------------------------------------------

Outcome recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  const FitConfig cfg;
  std::vector<std::string> bad;
  auto need = [&](bool ok, const std::string &what) {
    if (!ok)
      bad.push_back(what);
  };

  const auto s = bench();
  const PowerLawLogAcc pl { 1.2, 0.35, 1e21 };
  const auto pp = std::get<PowerLawLogAcc>(fit_power_law(grid({ s, pl }), s, cfg).params);
  need(rel(pp.A, pl.A) <= 1e-9 && rel(pp.alpha, pl.alpha) <= 1e-9, "power_law");

  const auto &arc = paper_coefficient_presets().at("ARC-E");
  const auto nd = std::get<NDLawParams>(fit_nd_law(grid({ arc.spec, arc.nd }), arc.spec, cfg).params);
  need(rel(nd.A, arc.nd.A) <= 1e-4 && rel(nd.alpha, arc.nd.alpha) <= 1e-4
           && rel(nd.B, arc.nd.B) <= 1e-4 && rel(nd.beta, arc.nd.beta) <= 1e-4,
       "nd_law");

  const auto h = bench("H", 0.0, MetricType::kPassAtK);
  const PassKLawParams pk { std::log(0.84), -0.45, -0.03, -0.12, 1e21 };
  const auto kp = std::get<PassKLawParams>(fit_passk(grid({ h, PassKTruth { pk } }), h, cfg).params);
  need(rel(kp.logA, pk.logA) <= 1e-9 && rel(kp.alpha, pk.alpha) <= 1e-9
           && rel(kp.beta, pk.beta) <= 1e-9 && rel(kp.delta, pk.delta) <= 1e-9,
       "passk");

  const IrreducibleParams ir { 1.5, 0.3, -std::log(0.903), 1e21 };
  const auto ip = std::get<IrreducibleParams>(fit_irreducible(grid({ s, ir }), s, cfg).params);
  need(rel(ip.A, ir.A) <= 1e-4 && rel(ip.alpha, ir.alpha) <= 1e-4 && rel(ip.E, ir.E) <= 1e-4,
       "irreducible");

  const BenchmarkTruth bn { s, BNSLParams { 0.9, -0.6, 0.02, 1.5, 0.3, 1.0, 1 } };
  const auto brecs = grid(bn);
  need(max_prediction_error(fit_bnsl(brecs, s, cfg), bn, brecs) <= 1e-5, "bnsl");

  const BenchmarkTruth ch {
    s, ChainTruth { { 1.8, 1.2, 0.25, 1e21 }, { LogisticLink { 0.7, 0.25, -3.0, 2.6 } }, "nll" }
  };
  const auto crecs = grid(ch);
  need(max_prediction_error(fit_two_stage(crecs, s, "nll", LinkKind::kLogistic, cfg), ch, crecs)
           <= 1e-5,
       "two_stage_logistic");
  const BenchmarkTruth cl { s, ChainTruth { { 1.8, 1.2, 0.25, 1e21 }, { LinearLink { 1.0, -0.08 } },
                                            "nll" } };
  const auto lrecs = grid(cl);
  need(max_prediction_error(fit_two_stage(lrecs, s, "nll", LinkKind::kLinear, cfg), cl, lrecs)
           <= 1e-5,
       "two_stage_linear");

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  need(secs <= 60, "runtime");
  std::string fails;
  for (const auto &b: bad)
    fails += " " + b;
  return { bad.empty(), fmt("%.1f s%s%s", secs, bad.empty() ? "" : ", failed:", fails.c_str()) };
}

// One nd-law fit under the holdout protocol (>6e21 FLOPs or TPR 160).
struct ProtocolRun {
  double train_mae, valid_mae, valid_mre;
};

ProtocolRun protocol_run(const CoefficientPreset &pre, double sigma, std::uint64_t seed) {
  HoldoutRule rule;
  rule.tpr_holdout = 160;
  const auto sp = split_holdout(grid({ pre.spec, pre.nd }, sigma, seed), rule);
  const auto m = fit_nd_law(sp.train, pre.spec, FitConfig {});
  const auto tr = evaluate_points(m, sp.train, Split::kTrain);
  const auto va = evaluate_points(m, sp.valid, Split::kValid);
  return { tr.metrics.mae, va.metrics.mae, va.metrics.mre_pct.value_or(INFINITY) };
}

Outcome protocol() {
  std::string detail;
  bool ok = true;
  for (const char *name: { "ARC-E", "GSM8K" }) {
    const auto &pre = paper_coefficient_presets().at(name);
    // Calibrate sigma on seeds disjoint from the scored ones.
    auto mean_train = [&](double sigma) {
      double sum = 0;
      for (std::uint64_t s = 1000; s < 1005; ++s)
        sum += protocol_run(pre, sigma, s).train_mae;
      return sum / 5;
    };
    double lo = 0.01, hi = 0.3;
    for (int i = 0; i < 12; ++i) {
      const double mid = std::sqrt(lo * hi);
      (mean_train(mid) < 0.009 ? lo : hi) = mid;
    }
    const double sigma = std::sqrt(lo * hi);
    int pass = 0;
    double train = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      try {
        const auto r = protocol_run(pre, sigma, seed);
        train += r.train_mae / 50;
        pass += r.valid_mae <= 0.03 && r.valid_mre <= 10;
      } catch (const std::exception &) {
      }
    }
    ok = ok && pass >= 45;
    detail += fmt("%s sigma %.4f train MAE %.4f: %d/50; ", name, sigma, train, pass);
  }
  detail.resize(detail.size() - 2);
  return { ok, detail };
}

Outcome bounds() {
  int points = 0, violations = 0;
  for (int qi = 0; qi < 200; ++qi) {
    const double q = qi / 199.0;
    for (int j = 0; j < 12; ++j) {
      const int k = static_cast<int>(std::lround(std::pow(4096.0, j / 11.0)));
      const auto b = passk_bounds(q, k);
      const double e = passk_exact(q, k);
      ++points;
      if (!(b.loose_lower <= b.tight_lower + 1e-12 && b.tight_lower <= e + 1e-12
            && e <= std::min(k * q, 1.0) + 1e-12))
        ++violations;
    }
  }
  return { violations == 0, fmt("%d points, %d violations", points, violations) };
}

Outcome monotonicity() {
  std::mt19937_64 rng(2024);
  constexpr int kDraws = 10000;
  std::map<std::string, int> viol { { "power_law", 0 },
                                    { "irreducible", 0 },
                                    { "nd_law", 0 },
                                    { "passk_exact", 0 } };
  auto log_uniform = [&](double lo, double hi) {
    return std::exp(uniform(rng, std::log(lo), std::log(hi)));
  };
  // q2 must not fall below q1, and must rise unless q1 sits at a saturated end.
  auto increasing = [](double q1, double q2) {
    if (q2 < q1)
      return false;
    return q2 > q1 || q1 <= 1e-300 || q2 >= 1 - 1e-15;
  };
  for (int i = 0; i < kDraws; ++i) {
    const double A = std::exp(uniform(rng, -3, 3)), alpha = uniform(rng, 0.02, 2);
    const double c1 = log_uniform(1e17, 1e24), c2 = c1 * std::exp(uniform(rng, 0.01, 2));
    const PowerLawLogAcc pl { A, alpha, 1e21 };
    viol["power_law"] += !increasing(eval_power_law(pl, c1), eval_power_law(pl, c2));
    const IrreducibleParams ir { A, alpha, uniform(rng, 0, 1), 1e21 };
    const double i1 = eval_irreducible(ir, c1), i2 = eval_irreducible(ir, c2);
    viol["irreducible"] += !(i2 >= i1 && (i2 > i1 || i1 <= 1e-300 || i2 >= ir.q_max() * (1 - 1e-15)));
  }
  for (int i = 0; i < kDraws; ++i) {
    const NDLawParams nd { std::exp(uniform(rng, 0, 8)), uniform(rng, 0.1, 0.6),
                           std::exp(uniform(rng, 0, 8)), uniform(rng, 0.1, 0.6) };
    const double n = log_uniform(1e7, 1e11), d = log_uniform(1e8, 1e13);
    const double f = std::exp(uniform(rng, 0.01, 2));
    const double base = eval_nd_law(nd, n, d);
    viol["nd_law"] += !increasing(base, eval_nd_law(nd, n * f, d));
    viol["nd_law"] += !increasing(base, eval_nd_law(nd, n, d * f));
  }
  for (int i = 0; i < kDraws; ++i) {
    const double q = uniform(rng, 0, 1), dq = uniform(rng, 0, 1 - q);
    const int k = 1 + static_cast<int>(rng() % 4096), dk = 1 + static_cast<int>(rng() % 64);
    viol["passk_exact"] += passk_exact(q, k + dk) < passk_exact(q, k);
    viol["passk_exact"] += passk_exact(q + dq, k) < passk_exact(q, k);
  }
  int total = 0;
  std::string detail = fmt("%d draws per form;", kDraws);
  for (const auto &[name, v]: viol) {
    total += v;
    detail += fmt(" %s %d", name.c_str(), v);
  }
  return { total == 0, detail };
}

Outcome gradients() {
  int failures = 0;
  std::string detail;
  for (const auto &form: scalelaw::testing::grad_forms()) {
    const auto r = scalelaw::testing::check_gradients(form, 100, 7);
    failures += r.failures + (r.draws != 100);
  }
  return { failures == 0, fmt("%zu forms x 100 draws, %d failures",
                              scalelaw::testing::grad_forms().size(), failures) };
}

Outcome sweep() {
  const auto s = bench();
  const FitConfig cfg;
  const double planted = 1e21;
  int pass = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto recs =
        grid({ s, RegimeSwitchTruth { { 1.609, 0.35, 1e21 }, planted, 0.6 } }, 0.05, seed);
    try {
      const auto sw =
          threshold_sweep(recs, make_strategy("power_law", s, cfg), default_sweep_thresholds(), 10);
      pass += sw.crossing && *sw.crossing >= planted / 3 && *sw.crossing <= planted * 3;
    } catch (const std::exception &) {
    }
  }
  const auto exact = threshold_sweep(grid({ s, PowerLawLogAcc { 1.609, 0.35, 1e21 } }),
                                     make_strategy("power_law", s, cfg),
                                     default_sweep_thresholds(), 10);
  int evaluable = 0, failed = 0;
  for (const auto &p: exact.points) {
    evaluable += p.evaluable;
    failed += p.evaluable && !p.success;
  }
  return { pass >= 45 && evaluable > 0 && failed == 0,
           fmt("regime switch %d/50 within 3x; law-exact %d evaluable, %d failed", pass,
               evaluable, failed) };
}

Outcome ordering() {
  const auto s = bench();
  const FitConfig cfg;
  HoldoutRule rule;
  rule.tpr_holdout = 160;
  std::vector<NamedStrategy> strategies;
  for (const char *n: { "power_law", "two_stage_linear", "two_stage_logistic" })
    strategies.push_back({ n, make_strategy(n, s, cfg) });
  int pass = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    BenchmarkTruth bt { s, PowerLawLogAcc { 1.609, 0.35, 1e21 } };
    bt.proxy = ProxyTruth { "nll", { 1.8, 0.9, 0.25, 1e21 }, 0.005 };
    const auto rows = compare_strategies(grid(bt, 0.05, seed), strategies, rule);
    double mae[3];
    for (int i = 0; i < 3; ++i)
      mae[i] = rows[i].error || !rows[i].valid ? INFINITY : rows[i].valid->metrics.mae;
    pass += mae[0] < mae[1] && mae[0] < mae[2];
  }
  return { pass >= 40, fmt("power_law best in %d/50 seeds", pass) };
}

// --- CLI determinism ---------------------------------------------------------

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string &args, const fs::path &stdout_path) {
  const std::string cmd = "SCALELAW_SEED=11 \"" SCALELAW_CLI_PATH "\" " + args + " >\""
                          + stdout_path.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Every JSON file under `dir`, plus captured stdout, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path &dir) {
  std::map<std::string, std::string> out;
  for (const auto &e: fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()
        && (e.path().extension() == ".json" || e.path().filename().string().rfind("stdout", 0) == 0))
      out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / ("scalelaw_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir / "models");
  const std::string d = dir.string();
  const std::string data = d + "/arc.csv", cfg = " --config " + d + "/arc.config.json";
  const std::vector<std::pair<std::string, std::string>> commands = {
    { "synth", "synth --preset ARC-E --noise-kind gaussian_logit --noise-sigma 0.05 --out " + data },
    { "fit", "fit --input " + data + " --benchmark ARC-E --form nd_law" + cfg + " --out " + d
                 + "/models/nd.json" },
    { "fit bnsl", "fit --input " + data + " --benchmark ARC-E --form bnsl" + cfg + " --out " + d
                      + "/bnsl.json" },
    { "validate", "validate --model " + d + "/models/nd.json --input " + data + cfg + " --out "
                      + d + "/val" },
    { "sweep", "sweep --input " + data + " --benchmark ARC-E --form power_law" + cfg + " --out "
                   + d + "/sweep" },
    { "predict", "predict --model " + d + "/models/nd.json --n 1e9 --d 2e10" },
    { "report", "report --models " + d + "/models --input " + data + cfg + " --out " + d
                    + "/report" },
  };
  std::vector<std::string> bad;
  std::map<std::string, std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t c = 0; c < commands.size(); ++c)
      if (run(commands[c].second, dir / ("stdout" + std::to_string(c) + ".txt")) != 0)
        bad.push_back(commands[c].first + " exited nonzero");
    auto snap = snapshot(dir);
    if (pass == 0) {
      first = std::move(snap);
      continue;
    }
    if (first.size() != snap.size())
      bad.push_back("file set changed");
    for (const auto &[path, bytes]: first) {
      auto it = snap.find(path);
      if (it == snap.end() || it->second != bytes)
        bad.push_back(path + " differs");
    }
  }
  const std::size_t files = first.size();
  fs::remove_all(dir);
  std::string detail = fmt("%zu commands run twice, %zu outputs compared", commands.size(),
                           files);
  for (const auto &b: bad)
    detail += "; " + b;
  return { bad.empty() && files > 0, detail };
}

Outcome worked_example() {
  ScalingModel m;
  m.params = paper_coefficient_presets().at("ARC-E").nd;
  m.benchmark = "ARC-E";
  m.q_random = 0.2918;
  Query q;
  q.n_params = 1e9;
  q.d_tokens = 2e10;
  const double raw = predict(m, q).raw;
  return { std::abs(raw - 0.5538) <= 5e-4, fmt("raw accuracy %.6f", raw) };
}

}  // namespace

int main() {
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria = {
    { "parameter recovery", recovery },
    { "protocol reproduction at matched noise", protocol },
    { "pass@k bounds containment", bounds },
    { "monotonicity suite", monotonicity },
    { "gradient checks", gradients },
    { "threshold sweep behavior", sweep },
    { "direct beats two-stage", ordering },
    { "CLI determinism", determinism },
    { "worked example", worked_example },
  };
  int failed = 0, i = 0;
  for (const auto &[name, fn]: criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception &e) {
      o = { false, std::string("exception: ") + e.what() };
    }
    failed += !o.pass;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", ++i, name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
