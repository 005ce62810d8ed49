//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#include "scalelaw/scaling_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "scalelaw/error.hpp"
#include "scalelaw/io.hpp"

namespace scalelaw {

using nlohmann::json;

double eval_stage1(const Stage1Params &p, double c) {
  if (!(c > 0))
    throw InvalidArgument("eval_stage1: compute must be > 0");
  return p.l0 + p.a * std::pow(c / p.c_ref, -p.alpha);
}

const char *to_string(FormKind form) {
  switch (form) {
  case FormKind::kPowerLaw:
    return "power_law";
  case FormKind::kBnsl:
    return "bnsl";
  case FormKind::kNdLaw:
    return "nd_law";
  case FormKind::kIrreducible:
    return "irreducible";
  case FormKind::kPassKLaw:
    return "passk_law";
  case FormKind::kTwoStage:
    return "two_stage";
  case FormKind::kProxyLink:
    return "proxy_link";
  case FormKind::kAveragePowerLaw:
    return "average_power_law";
  }
  return "power_law";
}

FormKind parse_form_kind(const std::string &name) {
  for (int i = 0; i <= static_cast<int>(FormKind::kAveragePowerLaw); ++i) {
    auto f = static_cast<FormKind>(i);
    if (name == to_string(f))
      return f;
  }
  throw SchemaError("form", "unknown form '" + name + "'");
}

bool ScalingModel::has_flag(const std::string &flag) const {
  const auto &f = fit_stats.flags;
  return std::find(f.begin(), f.end(), flag) != f.end();
}

BenchmarkSpec ScalingModel::spec() const {
  BenchmarkSpec s;
  s.name = benchmark;
  s.q_random = q_random;
  s.filter_margin = filter_margin;
  return s;
}

// ---------------------------------------------------------------------------
// Prediction

namespace {
  double need(const std::optional<double> &v, const char *what, FormKind form) {
    if (!v)
      throw ShapeMismatch(std::string("query for form ") + to_string(form)
                          + " needs " + what);
    return *v;
  }

  void forbid(bool present, const char *what, FormKind form) {
    if (present)
      throw ShapeMismatch(std::string("query for form ") + to_string(form)
                          + " does not take " + what);
  }
}  // namespace

Prediction predict(const ScalingModel &model, const Query &q) {
  const FormKind form = model.form();
  bool raw_space = false;  // true when the form emits raw accuracy
  double value = 0;

  switch (form) {
  case FormKind::kPowerLaw:
  case FormKind::kIrreducible:
  case FormKind::kBnsl:
  case FormKind::kTwoStage:
  case FormKind::kAveragePowerLaw: {
    const double c = need(q.flops, "flops", form);
    forbid(q.n_params || q.d_tokens, "n/d", form);
    forbid(q.k.has_value(), "k", form);
    forbid(q.proxy.has_value(), "a proxy value", form);
    if (form == FormKind::kPowerLaw) {
      value = eval_power_law(std::get<PowerLawLogAcc>(model.params), c);
    } else if (form == FormKind::kIrreducible) {
      value = eval_irreducible(std::get<IrreducibleParams>(model.params), c);
    } else if (form == FormKind::kAveragePowerLaw) {
      value = eval_power_law(std::get<AveragePowerLaw>(model.params).law, c);
    } else if (form == FormKind::kBnsl) {
      value = eval_bnsl(std::get<BNSLParams>(model.params), c);
      raw_space = true;
    } else {
      const auto &ts = std::get<TwoStageModel>(model.params);
      value = eval_link(ts.stage2, eval_stage1(ts.stage1, c));
      raw_space = true;
    }
    break;
  }
  case FormKind::kNdLaw: {
    const double n = need(q.n_params, "n", form);
    const double d = need(q.d_tokens, "d", form);
    forbid(q.flops.has_value(), "flops", form);
    forbid(q.k.has_value(), "k", form);
    forbid(q.proxy.has_value(), "a proxy value", form);
    value = eval_nd_law(std::get<NDLawParams>(model.params), n, d);
    break;
  }
  case FormKind::kPassKLaw: {
    const double c = need(q.flops, "flops", form);
    if (!q.k)
      throw ShapeMismatch("query for form passk_law needs k");
    forbid(q.n_params || q.d_tokens, "n/d", form);
    forbid(q.proxy.has_value(), "a proxy value", form);
    value = eval_passk_law(std::get<PassKLawParams>(model.params), c, *q.k);
    break;
  }
  case FormKind::kProxyLink: {
    const double l = need(q.proxy, "a proxy value", form);
    forbid(q.flops || q.n_params || q.d_tokens || q.k, "compute/n/d/k", form);
    const auto &pl = std::get<ProxyLinkModel>(model.params);
    value = eval_link(LinkParams { pl.link }, l);
    raw_space = true;
    break;
  }
  }

  Prediction p;
  p.unclamped = raw_space ? value : denormalize_accuracy(value, model.q_random);
  p.raw = std::clamp(p.unclamped, 0.0, 1.0);
  p.clamped = p.raw != p.unclamped || !std::isfinite(p.unclamped);
  if (!std::isfinite(p.unclamped))
    p.raw = p.unclamped > 0 ? 1.0 : 0.0;
  p.normalized = normalize_accuracy(p.raw, model.q_random);
  return p;
}

// ---------------------------------------------------------------------------
// JSON

namespace {
  double get_num(const json &o, const char *field) {
    if (!o.is_object() || !o.contains(field) || !o[field].is_number())
      throw SchemaError(field, "missing or not a number");
    return o[field].get<double>();
  }

  std::string get_str(const json &o, const char *field) {
    if (!o.is_object() || !o.contains(field) || !o[field].is_string())
      throw SchemaError(field, "missing or not a string");
    return o[field].get<std::string>();
  }

  json link_to_json(const LinkParams &p) {
    json j = { { "kind", to_string(p.kind()) } };
    std::visit(
        [&](const auto &v) {
          using T = std::decay_t<decltype(v)>;
          j["a"] = v.a;
          j["b"] = v.b;
          if constexpr (std::is_same_v<T, LogisticLink>) {
            j["k"] = v.k;
            j["L0"] = v.l0;
          }
        },
        p.value);
    return j;
  }

  LinkParams link_from_json(const json &j) {
    switch (parse_link_kind(get_str(j, "kind"))) {
    case LinkKind::kLinear:
      return { LinearLink { get_num(j, "a"), get_num(j, "b") } };
    case LinkKind::kLogistic:
      return { LogisticLink { get_num(j, "a"), get_num(j, "b"), get_num(j, "k"),
                              get_num(j, "L0") } };
    case LinkKind::kProxyLogistic:
      return { ProxyLogisticLink { get_num(j, "a"), get_num(j, "b") } };
    }
    throw SchemaError("kind", "unknown link");
  }

  json params_to_json(const ModelParams &params) {
    struct Visitor {
      json operator()(const PowerLawLogAcc &p) const {
        return { { "A", p.A }, { "alpha", p.alpha } };
      }
      json operator()(const BNSLParams &p) const {
        return { { "a", p.a },   { "b", p.b },   { "c0", p.c0 },
                 { "c1", p.c1 }, { "d1", p.d1 }, { "f1", p.f1 } };
      }
      json operator()(const NDLawParams &p) const {
        return { { "A", p.A }, { "alpha", p.alpha }, { "B", p.B }, { "beta", p.beta } };
      }
      json operator()(const IrreducibleParams &p) const {
        return { { "A", p.A }, { "alpha", p.alpha }, { "E", p.E }, { "q_max", p.q_max() } };
      }
      json operator()(const PassKLawParams &p) const {
        return { { "logA", p.logA }, { "alpha", p.alpha }, { "beta", p.beta },
                 { "delta", p.delta } };
      }
      json operator()(const TwoStageModel &p) const {
        return { { "proxy_name", p.proxy_name },
                 { "stage1", { { "l0", p.stage1.l0 }, { "a", p.stage1.a },
                               { "alpha", p.stage1.alpha } } },
                 { "link", link_to_json(p.stage2) } };
      }
      json operator()(const ProxyLinkModel &p) const {
        return { { "proxy_name", p.proxy_name }, { "a", p.link.a }, { "b", p.link.b },
                 { "rmse", p.rmse }, { "r2", p.r2 } };
      }
      json operator()(const AveragePowerLaw &p) const {
        json comps = json::array();
        for (const auto &c: p.components)
          comps.push_back({ { "name", c.name }, { "q_random", c.q_random },
                            { "filter_margin", c.filter_margin } });
        return { { "A", p.law.A }, { "alpha", p.law.alpha }, { "benchmarks", comps } };
      }
    };
    return std::visit(Visitor {}, params);
  }

  ModelParams params_from_json(FormKind form, const json &j, double c_ref) {
    switch (form) {
    case FormKind::kPowerLaw:
      return PowerLawLogAcc { get_num(j, "A"), get_num(j, "alpha"), c_ref };
    case FormKind::kBnsl:
      return BNSLParams { get_num(j, "a"),  get_num(j, "b"),  get_num(j, "c0"),
                          get_num(j, "c1"), get_num(j, "d1"), get_num(j, "f1"),
                          c_ref };
    case FormKind::kNdLaw:
      return NDLawParams { get_num(j, "A"), get_num(j, "alpha"), get_num(j, "B"),
                           get_num(j, "beta") };
    case FormKind::kIrreducible:
      return IrreducibleParams { get_num(j, "A"), get_num(j, "alpha"),
                                 get_num(j, "E"), c_ref };
    case FormKind::kPassKLaw:
      return PassKLawParams { get_num(j, "logA"), get_num(j, "alpha"),
                              get_num(j, "beta"), get_num(j, "delta"), c_ref };
    case FormKind::kTwoStage: {
      if (!j.contains("stage1"))
        throw SchemaError("stage1", "missing");
      const auto &s1 = j["stage1"];
      TwoStageModel ts;
      ts.proxy_name = get_str(j, "proxy_name");
      ts.stage1 = { get_num(s1, "l0"), get_num(s1, "a"), get_num(s1, "alpha"), c_ref };
      if (!j.contains("link"))
        throw SchemaError("link", "missing");
      ts.stage2 = link_from_json(j["link"]);
      return ts;
    }
    case FormKind::kProxyLink: {
      ProxyLinkModel pl;
      pl.proxy_name = get_str(j, "proxy_name");
      pl.link = { get_num(j, "a"), get_num(j, "b") };
      pl.rmse = j.value("rmse", 0.0);
      pl.r2 = j.value("r2", 0.0);
      return pl;
    }
    case FormKind::kAveragePowerLaw: {
      AveragePowerLaw avg;
      avg.law = { get_num(j, "A"), get_num(j, "alpha"), c_ref };
      if (!j.contains("benchmarks") || !j["benchmarks"].is_array())
        throw SchemaError("benchmarks", "missing or not an array");
      for (const auto &c: j["benchmarks"]) {
        BenchmarkSpec s;
        s.name = get_str(c, "name");
        s.q_random = get_num(c, "q_random");
        s.filter_margin = get_num(c, "filter_margin");
        avg.components.push_back(std::move(s));
      }
      return avg;
    }
    }
    throw SchemaError("form", "unhandled form");
  }
}  // namespace

json to_json(const ScalingModel &m) {
  json fit = {
    { "loss", to_string(m.loss) },
    { "filter_rule", { { "rule", std::string(to_string(m.filter_rule)) },
                       { "margin", m.filter_margin } } },
    { "train_range", json::array({ m.fit_stats.train_c_min, m.fit_stats.train_c_max }) },
    { "train_points", m.fit_stats.train_points },
    { "excluded_points", m.fit_stats.excluded_points },
    { "objective", m.fit_stats.objective },
    { "flags", m.fit_stats.flags },
  };
  return { { "form", to_string(m.form()) },
           { "params", params_to_json(m.params) },
           { "c_ref", m.c_ref },
           { "benchmark", m.benchmark },
           { "q_random", m.q_random },
           { "fit", fit } };
}

ScalingModel model_from_json(const json &j) {
  if (!j.is_object())
    throw SchemaError("model", "must be a JSON object");
  ScalingModel m;
  const FormKind form = parse_form_kind(get_str(j, "form"));
  m.c_ref = get_num(j, "c_ref");
  m.benchmark = get_str(j, "benchmark");
  m.q_random = j.value("q_random", 0.0);
  if (!j.contains("params"))
    throw SchemaError("params", "missing");
  m.params = params_from_json(form, j["params"], m.c_ref);
  if (j.contains("fit")) {
    const auto &fit = j["fit"];
    m.loss = parse_loss_kind(fit.value("loss", std::string("squared")));
    if (fit.contains("filter_rule")) {
      m.filter_rule = parse_filter_rule(
          fit["filter_rule"].value("rule", std::string("margin")));
      m.filter_margin = fit["filter_rule"].value("margin", kDefaultMargin);
    }
    if (fit.contains("train_range") && fit["train_range"].size() == 2) {
      m.fit_stats.train_c_min = fit["train_range"][0].get<double>();
      m.fit_stats.train_c_max = fit["train_range"][1].get<double>();
    }
    m.fit_stats.train_points = fit.value("train_points", std::size_t { 0 });
    m.fit_stats.excluded_points = fit.value("excluded_points", std::size_t { 0 });
    m.fit_stats.objective = fit.value("objective", 0.0);
    m.fit_stats.flags = fit.value("flags", std::vector<std::string> {});
  }
  return m;
}

void save_model(const ScalingModel &model, const std::filesystem::path &path) {
  write_file_atomic(path, to_json(model).dump(2) + "\n");
}

ScalingModel load_model(const std::filesystem::path &path) {
  const std::string text = read_file(path);
  try {
    return model_from_json(json::parse(text));
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("model file ") + path.string() + ": " + e.what(),
                     1);
  }
}

// ---------------------------------------------------------------------------
// Points

std::vector<FitPoint> collect_points(const std::vector<ExperimentRecord> &records,
                                     const BenchmarkSpec &spec, FilterRule rule,
                                     PointShape shape,
                                     const std::string &proxy_name,
                                     std::size_t *excluded) {
  std::vector<FitPoint> out;
  std::size_t dropped = 0;
  auto base = [](const ExperimentRecord &rec, const MetricObservation &obs) {
    FitPoint p;
    p.run_id = rec.run_id;
    p.actual = obs.value;
    p.flops = rec.flops;
    p.tpr = rec.tpr;
    p.k = obs.k;
    return p;
  };

  for (const auto &rec: records) {
    if (shape == PointShape::kComputeK) {
      for (const auto &obs: rec.observations) {
        if (obs.benchmark != spec.name || !obs.k)
          continue;
        if (!passes_filter(obs.value, spec, rule) || obs.value >= 1) {
          ++dropped;
          continue;
        }
        FitPoint p = base(rec, obs);
        p.query.flops = rec.flops;
        p.query.k = obs.k;
        out.push_back(std::move(p));
      }
      continue;
    }
    const auto *obs = rec.primary(spec.name);
    if (obs == nullptr)
      continue;
    if (!passes_filter(obs->value, spec, rule)) {
      ++dropped;
      continue;
    }
    FitPoint p = base(rec, *obs);
    switch (shape) {
    case PointShape::kCompute:
      p.query.flops = rec.flops;
      break;
    case PointShape::kParamsTokens:
      p.query.n_params = rec.n_params;
      p.query.d_tokens = rec.d_tokens;
      break;
    case PointShape::kProxy: {
      auto it = obs->proxies.find(proxy_name);
      if (it == obs->proxies.end()) {
        ++dropped;
        continue;
      }
      p.query.proxy = it->second;
      break;
    }
    case PointShape::kComputeK:
      break;
    }
    p.k.reset();
    out.push_back(std::move(p));
  }
  if (excluded != nullptr)
    *excluded = dropped;
  return out;
}

std::vector<FitPoint>
collect_average_points(const std::vector<ExperimentRecord> &records,
                       const std::vector<BenchmarkSpec> &components,
                       std::size_t *excluded) {
  std::vector<FitPoint> out;
  std::size_t dropped = 0;
  if (components.empty())
    throw InvalidArgument("average: empty benchmark set");
  for (const auto &rec: records) {
    double sum = 0;
    bool ok = true;
    for (const auto &spec: components) {
      const auto *obs = rec.primary(spec.name);
      if (obs == nullptr || !passes_filter(obs->value, spec, FilterRule::kMargin)) {
        ok = false;
        break;
      }
      sum += normalize_accuracy(obs->value, spec.q_random);
    }
    if (!ok) {
      ++dropped;
      continue;
    }
    FitPoint p;
    p.run_id = rec.run_id;
    p.actual = sum / static_cast<double>(components.size());
    p.flops = rec.flops;
    p.tpr = rec.tpr;
    p.query.flops = rec.flops;
    out.push_back(std::move(p));
  }
  if (excluded != nullptr)
    *excluded = dropped;
  return out;
}

std::vector<FitPoint> model_points(const ScalingModel &model,
                                   const std::vector<ExperimentRecord> &records,
                                   std::size_t *excluded) {
  const BenchmarkSpec spec = model.spec();
  switch (model.form()) {
  case FormKind::kPowerLaw:
  case FormKind::kBnsl:
  case FormKind::kIrreducible:
  case FormKind::kTwoStage:
    return collect_points(records, spec, model.filter_rule, PointShape::kCompute,
                          {}, excluded);
  case FormKind::kNdLaw:
    return collect_points(records, spec, model.filter_rule,
                          PointShape::kParamsTokens, {}, excluded);
  case FormKind::kPassKLaw:
    return collect_points(records, spec, model.filter_rule, PointShape::kComputeK,
                          {}, excluded);
  case FormKind::kProxyLink:
    return collect_points(records, spec, model.filter_rule, PointShape::kProxy,
                          std::get<ProxyLinkModel>(model.params).proxy_name,
                          excluded);
  case FormKind::kAveragePowerLaw:
    return collect_average_points(
        records, std::get<AveragePowerLaw>(model.params).components, excluded);
  }
  return {};
}

}  // namespace scalelaw
