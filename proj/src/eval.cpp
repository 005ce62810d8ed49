//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#include "scalelaw/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>

#include "scalelaw/error.hpp"

namespace scalelaw {

namespace {
  void check_lengths(std::span<const double> p, std::span<const double> a) {
    if (p.size() != a.size())
      throw InvalidArgument("metrics: predicted has " + std::to_string(p.size())
                            + " values, actual has " + std::to_string(a.size()));
    if (p.empty())
      throw InvalidArgument("metrics: no points");
  }

  std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
  }

  template <class T> nlohmann::json opt_json(const std::optional<T> &v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  }
}  // namespace

double mean_relative_error_pct(std::span<const double> predicted,
                               std::span<const double> actual) {
  check_lengths(predicted, actual);
  double s = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0)
      throw DomainError("MRE undefined: actual value at index " + std::to_string(i)
                        + " is 0");
    s += std::abs(predicted[i] - actual[i]) / std::abs(actual[i]);
  }
  return 100.0 * s / static_cast<double>(actual.size());
}

Metrics compute_metrics(std::span<const double> predicted,
                        std::span<const double> actual) {
  check_lengths(predicted, actual);
  const auto n = static_cast<double>(actual.size());
  Metrics m;
  double abs_sum = 0, sq_sum = 0, mean = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double d = predicted[i] - actual[i];
    abs_sum += std::abs(d);
    sq_sum += d * d;
    mean += actual[i];
  }
  mean /= n;
  double ss_tot = 0;
  for (double a: actual)
    ss_tot += (a - mean) * (a - mean);
  m.mae = abs_sum / n;
  m.rmse = std::sqrt(sq_sum / n);
  m.r2 = ss_tot > 0 ? 1.0 - sq_sum / ss_tot : (sq_sum == 0 ? 1.0 : 0.0);
  if (std::none_of(actual.begin(), actual.end(), [](double a) { return a == 0; }))
    m.mre_pct = mean_relative_error_pct(predicted, actual);
  return m;
}

const char *to_string(Split split) {
  return split == Split::kTrain ? "train" : "valid";
}

ValidationReport evaluate_points(const ScalingModel &model,
                                 const std::vector<ExperimentRecord> &records,
                                 Split split) {
  ValidationReport rep;
  rep.split = split;
  const auto pts = model_points(model, records, &rep.excluded_points);
  rep.points = pts.size();
  rep.empty = pts.empty();
  if (rep.empty)
    return rep;
  std::vector<double> pred, act;
  for (const auto &p: pts) {
    const Prediction pr = predict(model, p.query);
    rep.residuals.push_back({ p.run_id, p.flops, p.k, pr.raw, p.actual, pr.clamped });
    rep.clamp_count += pr.clamped ? 1 : 0;
    pred.push_back(pr.raw);
    act.push_back(p.actual);
  }
  rep.metrics = compute_metrics(pred, act);
  return rep;
}

ValidationResult validate_model(const ScalingModel &model,
                                const std::vector<ExperimentRecord> &records,
                                const HoldoutRule &rule) {
  const auto split = split_holdout(records, rule);
  return { evaluate_points(model, split.train, Split::kTrain),
           evaluate_points(model, split.valid, Split::kValid) };
}

// ---------------------------------------------------------------------------

std::vector<double> log_uniform_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0) || !(hi > lo))
    throw InvalidArgument("threshold grid needs 0 < min < max");
  if (n < 2)
    throw InvalidArgument("threshold grid needs at least 2 points");
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> default_sweep_thresholds() {
  return log_uniform_grid(kSweepMinFlops, kSweepMaxFlops, kSweepDefaultPoints);
}

bool ThresholdSweep::has_flag(const std::string &flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

namespace {
  SweepPoint sweep_one(const std::vector<ExperimentRecord> &records,
                       const FitFn &fit_fn, double t, double success_mre) {
    SweepPoint sp;
    sp.threshold = t;
    std::vector<ExperimentRecord> train, valid;
    for (const auto &r: records)
      (r.flops <= t ? train : valid).push_back(r);
    if (train.empty() || valid.empty()) {
      sp.note = train.empty() ? "no runs at or below threshold"
                              : "no runs above threshold";
      return sp;
    }
    ScalingModel model;
    try {
      model = fit_fn(train);
    } catch (const Error &e) {
      sp.note = std::string("fit failed: ") + e.what();
      return sp;
    }
    sp.train_points = model.fit_stats.train_points;
    const auto rep = evaluate_points(model, valid, Split::kValid);
    sp.valid_points = rep.points;
    if (rep.empty) {
      sp.note = "no validation points pass the filter";
      return sp;
    }
    sp.valid_mae = rep.metrics.mae;
    if (!rep.metrics.mre_pct) {
      sp.note = "validation MRE undefined";
      return sp;
    }
    sp.valid_mre_pct = rep.metrics.mre_pct;
    sp.evaluable = true;
    sp.success = *rep.metrics.mre_pct < success_mre;
    return sp;
  }
}  // namespace

ThresholdSweep threshold_sweep(const std::vector<ExperimentRecord> &records,
                               const FitFn &fit_fn,
                               const std::vector<double> &thresholds,
                               double success_mre) {
  if (thresholds.size() < 2)
    throw InvalidArgument("threshold_sweep needs at least 2 thresholds");
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (!(thresholds[i] > thresholds[i - 1]))
      throw InvalidArgument("thresholds must be strictly increasing");
  if (!(success_mre > 0))
    throw InvalidArgument("success_mre must be > 0");

  ThresholdSweep sweep;
  sweep.success_mre = success_mre;
  std::vector<std::future<SweepPoint>> futs;
  for (double t: thresholds)
    futs.push_back(std::async(std::launch::async, sweep_one, std::cref(records),
                              std::cref(fit_fn), t, success_mre));
  for (auto &f: futs)
    sweep.points.push_back(f.get());

  std::vector<double> xs;
  std::vector<int> ys;
  for (const auto &p: sweep.points)
    if (p.evaluable) {
      xs.push_back(std::log(p.threshold));
      ys.push_back(p.success ? 1 : 0);
    }
  if (xs.empty()) {
    sweep.flags.push_back(kFlagNoEvaluable);
    return sweep;
  }
  const auto n_success = std::count(ys.begin(), ys.end(), 1);
  if (n_success == static_cast<long>(ys.size())) {
    sweep.crossing = std::exp(xs.front());
    sweep.flags.push_back(kFlagCrossingLowerEdge);
    return sweep;
  }
  if (n_success == 0) {
    sweep.flags.push_back(kFlagNeverSucceeds);
    return sweep;
  }
  sweep.logistic = fit_logistic_binary(xs, ys);
  sweep.crossing = std::exp(sweep.logistic->crossing);
  return sweep;
}

std::vector<StrategyRow> compare_strategies(const std::vector<ExperimentRecord> &records,
                                            const std::vector<NamedStrategy> &strategies,
                                            const HoldoutRule &rule) {
  if (strategies.empty())
    throw InvalidArgument("compare_strategies needs at least one strategy");
  const auto split = split_holdout(records, rule);
  std::vector<StrategyRow> rows;
  for (const auto &s: strategies) {
    StrategyRow row;
    row.strategy = s.name;
    try {
      const ScalingModel model = s.fit(split.train);
      row.train = evaluate_points(model, split.train, Split::kTrain);
      row.valid = evaluate_points(model, split.valid, Split::kValid);
    } catch (const Error &e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const Metrics &m) {
  return { { "mae", m.mae },
           { "mre_pct", opt_json(m.mre_pct) },
           { "rmse", m.rmse },
           { "r2", m.r2 } };
}

nlohmann::json to_json(const ValidationReport &r) {
  nlohmann::json res = nlohmann::json::array();
  for (const auto &x: r.residuals)
    res.push_back({ { "run_id", x.run_id },
                    { "flops", x.flops },
                    { "k", opt_json(x.k) },
                    { "predicted", x.predicted },
                    { "actual", x.actual },
                    { "clamped", x.clamped } });
  nlohmann::json j = { { "split", to_string(r.split) },
                       { "empty", r.empty },
                       { "points", r.points },
                       { "excluded_points", r.excluded_points },
                       { "clamp_count", r.clamp_count },
                       { "residuals", res } };
  if (r.empty)
    j["metrics"] = nullptr;
  else
    j["metrics"] = to_json(r.metrics);
  return j;
}

nlohmann::json to_json(const ValidationResult &r) {
  return { { "train", to_json(r.train) }, { "valid", to_json(r.valid) } };
}

nlohmann::json to_json(const ThresholdSweep &s) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto &p: s.points)
    pts.push_back({ { "threshold", p.threshold },
                    { "evaluable", p.evaluable },
                    { "success", p.success },
                    { "valid_mre_pct", opt_json(p.valid_mre_pct) },
                    { "valid_mae", opt_json(p.valid_mae) },
                    { "train_points", p.train_points },
                    { "valid_points", p.valid_points },
                    { "note", p.note } });
  nlohmann::json j = { { "success_mre", s.success_mre },
                       { "points", pts },
                       { "crossing", opt_json(s.crossing) },
                       { "flags", s.flags } };
  if (s.logistic) {
    const auto &l = *s.logistic;
    j["logistic"] = { { "w", opt_json(l.w) },
                      { "b", opt_json(l.b) },
                      { "separated", l.separated },
                      { "bracket", { std::exp(l.bracket_lo), std::exp(l.bracket_hi) } },
                      { "iterations", l.iterations } };
  } else {
    j["logistic"] = nullptr;
  }
  return j;
}

nlohmann::json to_json(const std::vector<StrategyRow> &rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto &r: rows) {
    nlohmann::json j = { { "strategy", r.strategy }, { "error", opt_json(r.error) } };
    if (r.valid && !r.valid->empty) {
      j["valid_mae"] = r.valid->metrics.mae;
      j["valid_mre_pct"] = opt_json(r.valid->metrics.mre_pct);
    } else {
      j["valid_mae"] = j["valid_mre_pct"] = nullptr;
    }
    if (r.train && !r.train->empty) {
      j["train_rmse"] = r.train->metrics.rmse;
      j["train_r2"] = r.train->metrics.r2;
    } else {
      j["train_rmse"] = j["train_r2"] = nullptr;
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::string reports_to_csv(const std::string &model_name, const std::string &benchmark,
                           const ValidationResult &r) {
  std::ostringstream os;
  os << "model,benchmark,split,points,excluded_points,clamp_count,empty,mae,mre_pct,"
        "rmse,r2\n";
  for (const auto *rep: { &r.train, &r.valid }) {
    os << model_name << ',' << benchmark << ',' << to_string(rep->split) << ','
       << rep->points << ',' << rep->excluded_points << ',' << rep->clamp_count << ','
       << (rep->empty ? "true" : "false") << ',';
    if (rep->empty) {
      os << ",,,\n";
      continue;
    }
    const auto &m = rep->metrics;
    os << num(m.mae) << ',' << (m.mre_pct ? num(*m.mre_pct) : "") << ','
       << num(m.rmse) << ',' << num(m.r2) << '\n';
  }
  return os.str();
}

std::string comparison_to_csv(const std::string &benchmark,
                              const std::vector<StrategyRow> &rows) {
  std::ostringstream os;
  os << "benchmark,strategy,valid_mre_pct,valid_mae,train_rmse,train_r2,error\n";
  for (const auto &r: rows) {
    os << benchmark << ',' << r.strategy << ',';
    const bool v = r.valid && !r.valid->empty;
    const bool t = r.train && !r.train->empty;
    os << (v && r.valid->metrics.mre_pct ? num(*r.valid->metrics.mre_pct) : "") << ','
       << (v ? num(r.valid->metrics.mae) : "") << ','
       << (t ? num(r.train->metrics.rmse) : "") << ','
       << (t ? num(r.train->metrics.r2) : "") << ',';
    if (r.error) {
      std::string e = *r.error;
      std::replace(e.begin(), e.end(), '"', '\'');
      os << '"' << e << '"';
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace scalelaw
