//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#include "scalelaw/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "scalelaw/error.hpp"
#include "scalelaw/optim.hpp"

namespace scalelaw {

using nlohmann::json;

const char *to_string(NoiseKind kind) {
  switch (kind) {
  case NoiseKind::kNone:
    return "none";
  case NoiseKind::kGaussianAccuracy:
    return "gaussian_accuracy";
  case NoiseKind::kGaussianLogit:
    return "gaussian_logit";
  }
  return "none";
}

NoiseKind parse_noise_kind(const std::string &name) {
  for (auto k: { NoiseKind::kNone, NoiseKind::kGaussianAccuracy,
                 NoiseKind::kGaussianLogit })
    if (name == to_string(k))
      return k;
  throw SchemaError("noise.kind", "unknown noise kind '" + name + "'");
}

void GridSpec::validate() const {
  if (!(flops_min > 0) || !(flops_max > flops_min))
    throw InvalidArgument("grid: need 0 < flops_min < flops_max");
  if (points < 2)
    throw InvalidArgument("grid: need at least 2 budgets");
  if (tprs.empty())
    throw InvalidArgument("grid: need at least one tpr");
  for (double t: tprs)
    if (!(t > 0))
      throw InvalidArgument("grid: tpr values must be > 0");
  if (!(noise.sigma >= 0))
    throw InvalidArgument("grid: noise sigma must be >= 0");
}

double truth_accuracy(const BenchmarkTruth &bt, double flops, double n_params,
                      double d_tokens, int k) {
  const double qr = bt.spec.q_random;
  return std::visit(
      [&](const auto &t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, PowerLawLogAcc>) {
          return denormalize_accuracy(eval_power_law(t, flops), qr);
        } else if constexpr (std::is_same_v<T, BNSLParams>) {
          return eval_bnsl(t, flops);
        } else if constexpr (std::is_same_v<T, NDLawParams>) {
          return denormalize_accuracy(eval_nd_law(t, n_params, d_tokens), qr);
        } else if constexpr (std::is_same_v<T, IrreducibleParams>) {
          return denormalize_accuracy(eval_irreducible(t, flops), qr);
        } else if constexpr (std::is_same_v<T, PassKTruth>) {
          return denormalize_accuracy(eval_passk_law(t.law, flops, k), qr);
        } else if constexpr (std::is_same_v<T, ChainTruth>) {
          return eval_link(t.link, eval_stage1(t.stage1, flops));
        } else {
          double qn = eval_power_law(t.law, flops);
          if (flops < t.switch_flops)
            qn *= std::pow(flops / t.switch_flops, t.gamma);
          return denormalize_accuracy(qn, qr);
        }
      },
      bt.truth);
}

namespace {
  double apply_noise(double q, double q_random, const NoiseSpec &noise,
                     std::mt19937_64 &rng) {
    switch (noise.kind) {
    case NoiseKind::kNone:
      break;
    case NoiseKind::kGaussianAccuracy:
      q += noise.sigma * standard_normal(rng);
      break;
    case NoiseKind::kGaussianLogit: {
      // Always draw so the stream does not depend on the accuracy values.
      const double z = standard_normal(rng);
      const double qn = normalize_accuracy(std::clamp(q, 0.0, 1.0), q_random);
      if (qn > 0 && qn < 1) {
        const double logit = std::log(qn) - std::log1p(-qn);
        q = denormalize_accuracy(sigmoid(logit + noise.sigma * z), q_random);
      }
      break;
    }
    }
    return std::clamp(q, 0.0, 1.0);
  }

  std::string run_name(std::size_t i, double tpr) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "c%03zu_tpr%g", i, tpr);
    return buf;
  }
}  // namespace

std::vector<ExperimentRecord> generate_grid(const GridSpec &spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::vector<ExperimentRecord> out;
  const double a = std::log(spec.flops_min), b = std::log(spec.flops_max);
  for (std::size_t i = 0; i < spec.points; ++i) {
    double c = std::exp(a + (b - a) * static_cast<double>(i)
                                / static_cast<double>(spec.points - 1));
    if (i == 0)
      c = spec.flops_min;
    if (i + 1 == spec.points)
      c = spec.flops_max;
    for (double tpr: spec.tprs) {
      ExperimentRecord rec;
      rec.run_id = run_name(i, tpr);
      rec.n_params = std::sqrt(c / (6.0 * tpr));
      rec.d_tokens = tpr * rec.n_params;
      rec.flops = c;
      rec.tpr = tpr;
      rec.dataset = spec.dataset;
      for (const auto &bt: spec.benchmarks) {
        std::vector<std::optional<int>> ks;
        if (const auto *pk = std::get_if<PassKTruth>(&bt.truth))
          for (int k: pk->ks)
            ks.emplace_back(k);
        else if (bt.spec.metric_type == MetricType::kPassAtK)
          ks.emplace_back(1);
        else
          ks.emplace_back(std::nullopt);

        std::map<std::string, double> proxies;
        if (const auto *ch = std::get_if<ChainTruth>(&bt.truth))
          proxies[ch->proxy_name] = eval_stage1(ch->stage1, c);
        if (bt.proxy)
          proxies[bt.proxy->name] = eval_stage1(bt.proxy->stage1, c)
                                    + bt.proxy->sigma * standard_normal(rng);

        for (const auto &k: ks) {
          MetricObservation obs;
          obs.benchmark = bt.spec.name;
          obs.metric_type = bt.spec.metric_type;
          obs.k = k;
          const double q = truth_accuracy(bt, c, rec.n_params, rec.d_tokens,
                                          k.value_or(1));
          obs.value = apply_noise(q, bt.spec.q_random, spec.noise, rng);
          obs.proxies = proxies;
          rec.observations.push_back(std::move(obs));
        }
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

const std::map<std::string, CoefficientPreset, std::less<>> &paper_coefficient_presets() {
  static const auto presets = [] {
    std::map<std::string, CoefficientPreset, std::less<>> m;
    auto add = [&](const char *name, MetricType mt, double A, double alpha, double B,
                   double beta, double q_random, double q_max) {
      CoefficientPreset p;
      p.spec.name = name;
      p.spec.metric_type = mt;
      p.spec.q_random = q_random;
      p.spec.filter_margin = std::string(name) == "LBPP" ? kLbppMargin : kDefaultMargin;
      p.nd = { A, alpha, B, beta };
      p.q_max = q_max;
      m.emplace(name, p);
    };
    using M = MetricType;
    add("ARC-E", M::kAccNorm, 1533.4592, 0.3749, 2923.3999, 0.3812, 0.2918, 1.0);
    add("ARC-C", M::kAccNorm, 19299.0332, 0.4600, 1485.5598, 0.3075, 0.2150, 1.0);
    add("SciQ", M::kAccNorm, 8337.3408, 0.5125, 40321.4180, 0.5396, 0.3039, 1.0);
    add("PIQA", M::kAccNorm, 7089.8726, 0.4722, 55.5856, 0.1908, 0.5286, 0.903);
    add("HellaSwag", M::kAccNorm, 1428930.3750, 0.7129, 23078.4102, 0.4476, 0.2518,
        0.912);
    add("Winogrande", M::kAcc, 22017.3926, 0.4690, 22097.4961, 0.4240, 0.5000, 0.776);
    add("WebQS", M::kExactMatch, 1639.4487, 0.3363, 100.6403, 0.1855, 0.0, 0.51);
    add("TriviaQA", M::kExactMatch, 11691.8994, 0.4424, 10492.5020, 0.3853, 0.0, 1.0);
    add("LAMBADA", M::kAcc, 11417.5391, 0.5088, 90.9843, 0.2349, 0.0, 0.947);
    add("GSM8K", M::kExactMatch, 51693336.0, 0.8205, 9641845.0, 0.6506, 0.0, 1.0);
    add("HumanEval", M::kPassAtK, 2985.0347, 0.3745, 1341.2744, 0.3002, 0.0, 1.0);
    add("LBPP", M::kPassAtK, 3306785.0, 0.7146, 150.6138, 0.1617, 0.0, 1.0);
    return m;
  }();
  return presets;
}

BenchmarkTruth truth_from_model(const ScalingModel &model) {
  BenchmarkTruth bt;
  bt.spec = model.spec();
  switch (model.form()) {
  case FormKind::kPowerLaw:
    bt.truth = std::get<PowerLawLogAcc>(model.params);
    break;
  case FormKind::kBnsl:
    bt.truth = std::get<BNSLParams>(model.params);
    break;
  case FormKind::kNdLaw:
    bt.truth = std::get<NDLawParams>(model.params);
    break;
  case FormKind::kIrreducible:
    bt.truth = std::get<IrreducibleParams>(model.params);
    break;
  case FormKind::kPassKLaw:
    bt.spec.metric_type = MetricType::kPassAtK;
    bt.truth = PassKTruth { std::get<PassKLawParams>(model.params) };
    break;
  case FormKind::kTwoStage: {
    const auto &ts = std::get<TwoStageModel>(model.params);
    bt.truth = ChainTruth { ts.stage1, ts.stage2, ts.proxy_name };
    break;
  }
  case FormKind::kProxyLink:
  case FormKind::kAveragePowerLaw:
    throw InvalidArgument(std::string("form ") + to_string(model.form())
                          + " cannot serve as a generator");
  }
  return bt;
}

GridSpec grid_from_json(const json &j) {
  if (!j.is_object())
    throw SchemaError("grid", "must be a JSON object");
  GridSpec g;
  try {
    g.flops_min = j.value("flops_min", g.flops_min);
    g.flops_max = j.value("flops_max", g.flops_max);
    g.points = j.value("points", g.points);
    g.tprs = j.value("tprs", g.tprs);
    g.seed = j.value("seed", g.seed);
    g.dataset = j.value("dataset", g.dataset);
    if (j.contains("noise")) {
      const auto &n = j.at("noise");
      g.noise.kind = parse_noise_kind(n.value("kind", std::string("none")));
      g.noise.sigma = n.value("sigma", 0.0);
    }
  } catch (const json::exception &e) {
    throw SchemaError("grid", e.what());
  }
  g.validate();
  return g;
}

json grid_to_json(const GridSpec &g) {
  return { { "flops_min", g.flops_min },
           { "flops_max", g.flops_max },
           { "points", g.points },
           { "tprs", g.tprs },
           { "noise", { { "kind", to_string(g.noise.kind) }, { "sigma", g.noise.sigma } } },
           { "seed", g.seed },
           { "dataset", g.dataset } };
}

}  // namespace scalelaw
