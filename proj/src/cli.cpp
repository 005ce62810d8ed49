//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#include "scalelaw/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "scalelaw/error.hpp"
#include "scalelaw/eval.hpp"
#include "scalelaw/io.hpp"
#include "scalelaw/scaling_model.hpp"
#include "scalelaw/svg.hpp"
#include "scalelaw/synth.hpp"

namespace scalelaw {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
  // Bad flag combinations found after parsing.
  struct UsageError: std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  std::string dump(const json &j) { return j.dump(2) + "\n"; }

  fs::path manifest_path_for_file(const fs::path &out) {
    fs::path p = out;
    p.replace_extension(".manifest.json");
    return p;
  }

  void write_manifest(const fs::path &where, RunManifest m) {
    m.outputs.push_back(where.string());
    write_file_atomic(where, dump(to_json(m)));
  }
}  // namespace

// ---------------------------------------------------------------------------
// Config

CliConfig config_from_json(const json &j) {
  if (!j.is_object())
    throw SchemaError("config", "must be a JSON object");
  for (const auto &[key, _]: j.items())
    if (key != "benchmarks" && key != "fit" && key != "holdout")
      throw SchemaError(key, "unknown config section");
  CliConfig c;
  try {
    if (j.contains("benchmarks"))
      c.registry.merge(BenchmarkRegistry::from_json(j.at("benchmarks")));
    if (j.contains("fit")) {
      const auto &f = j.at("fit");
      if (!f.is_object())
        throw SchemaError("fit", "must be an object");
      auto &cfg = c.fit;
      if (f.contains("loss"))
        cfg.loss = parse_loss_kind(f.at("loss").get<std::string>());
      cfg.huber_delta = f.value("huber_delta", cfg.huber_delta);
      cfg.max_iters = f.value("max_iters", cfg.max_iters);
      cfg.grad_tol = f.value("grad_tol", cfg.grad_tol);
      cfg.seed = f.value("seed", cfg.seed);
      cfg.basin_hops = f.value("basin_hops", cfg.basin_hops);
      cfg.basin_step = f.value("basin_step", cfg.basin_step);
      cfg.c_ref = f.value("c_ref", cfg.c_ref);
      if (f.contains("init_grid"))
        for (const auto &row: f.at("init_grid")) {
          const auto v = row.get<std::vector<double>>();
          cfg.init_grid.push_back(Eigen::Map<const Vector>(
              v.data(), static_cast<Eigen::Index>(v.size())));
        }
      cfg.validate();
    }
    if (j.contains("holdout")) {
      const auto &h = j.at("holdout");
      c.holdout.flops_threshold = h.value("flops_threshold", c.holdout.flops_threshold);
      if (h.contains("tpr_holdout") && !h.at("tpr_holdout").is_null())
        c.holdout.tpr_holdout = h.at("tpr_holdout").get<double>();
      if (h.contains("k_max") && !h.at("k_max").is_null())
        c.holdout.k_max = h.at("k_max").get<int>();
      if (!(c.holdout.flops_threshold > 0))
        throw SchemaError("holdout.flops_threshold", "must be > 0");
    }
  } catch (const json::exception &e) {
    throw SchemaError("config", e.what());
  }
  return c;
}

CliConfig load_config(const std::optional<fs::path> &path) {
  if (!path)
    return {};
  json j;
  try {
    j = json::parse(read_file(*path));
  } catch (const json::parse_error &e) {
    throw ParseError(path->string() + ": " + e.what(), 0);
  }
  return config_from_json(j);
}

json fit_config_to_json(const FitConfig &cfg) {
  json grid = json::array();
  for (const auto &v: cfg.init_grid)
    grid.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  return { { "loss", to_string(cfg.loss) },     { "huber_delta", cfg.huber_delta },
           { "max_iters", cfg.max_iters },      { "grad_tol", cfg.grad_tol },
           { "seed", cfg.seed },                { "basin_hops", cfg.basin_hops },
           { "basin_step", cfg.basin_step },    { "c_ref", cfg.c_ref },
           { "init_grid", grid } };
}

json to_json(const RunManifest &m) {
  return { { "command", m.command },           { "config_path", m.config_path },
           { "input_paths", m.input_paths },   { "seed", m.seed },
           { "tool_version", m.tool_version }, { "outputs", m.outputs } };
}

// ---------------------------------------------------------------------------
// Shared option blocks

namespace {
  struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;

    void attach(CLI::App *cmd) {
      cmd->add_option("--config", config, "JSON config (benchmarks, fit, holdout)");
      cmd->add_option("--seed", seed, "random seed (overrides config and env)");
    }

    CliConfig load() const {
      CliConfig c = load_config(config.empty() ? std::nullopt
                                               : std::optional<fs::path>(config));
      if (const char *env = std::getenv(kSeedEnvVar); env != nullptr && *env != '\0') {
        char *end = nullptr;
        errno = 0;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (errno != 0 || end == env || *end != '\0' || *env == '-')
          throw InvalidArgument(std::string(kSeedEnvVar) + " is not an unsigned integer: "
                                + env);
        c.fit.seed = v;
      }
      if (seed)
        c.fit.seed = *seed;
      return c;
    }

    RunManifest manifest(const std::string &command, const CliConfig &c,
                         std::vector<std::string> inputs) const {
      RunManifest m;
      m.command = command;
      m.config_path = config;
      m.input_paths = std::move(inputs);
      m.seed = c.fit.seed;
      return m;
    }
  };

  const std::vector<std::string> kForms = { "power_law",   "bnsl",  "nd_law",
                                            "irreducible", "passk", "two_stage",
                                            "proxy_link",  "average" };

  std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty())
        out.push_back(item);
    return out;
  }

  struct FitSelection {
    std::string form;
    std::string benchmark;
    std::string proxy = "nll";
    std::string link = "linear";

    void attach(CLI::App *cmd, bool benchmark_required) {
      auto *b = cmd->add_option("--benchmark", benchmark,
                                "benchmark name (comma list for --form average)");
      if (benchmark_required)
        b->required();
      cmd->add_option("--form", form, "functional form")
          ->required()
          ->check(CLI::IsMember(kForms));
      cmd->add_option("--proxy", proxy, "proxy metric name for two_stage/proxy_link");
      cmd->add_option("--link", link, "two_stage link")
          ->check(CLI::IsMember({ "linear", "logistic" }));
    }

    std::string label() const {
      return form + (form == "two_stage" ? "_" + link : "") + " on "
             + (benchmark.empty() ? std::string("average") : benchmark);
    }

    FitFn make(const CliConfig &c) const {
      if (form == "average") {
        std::vector<BenchmarkSpec> comps;
        const auto names = benchmark.empty() ? default_average_benchmarks()
                                             : split_list(benchmark);
        for (const auto &n: names)
          comps.push_back(c.registry.at(n));
        const FitConfig cfg = c.fit;
        return [comps, cfg](const std::vector<ExperimentRecord> &r) {
          return fit_average(r, comps, cfg);
        };
      }
      if (benchmark.empty())
        throw UsageError("--benchmark is required for --form " + form);
      const BenchmarkSpec &spec = c.registry.at(benchmark);
      const std::string name = form == "two_stage" ? "two_stage_" + link : form;
      return make_strategy(name, spec, c.fit, proxy);
    }
  };

  template <class F> auto with_context(const std::string &what, F &&f) {
    try {
      return f();
    } catch (const Error &e) {
      throw Error(e.kind(), what + ": " + e.what());
    }
  }

  // ------------------------------------------------------------------------

  struct FitCmd {
    Common common;
    FitSelection sel;
    std::string input, out;

    void attach(CLI::App *cmd) {
      common.attach(cmd);
      sel.attach(cmd, false);
      cmd->add_option("--input", input, "experiments file (.csv or .json)")->required();
      cmd->add_option("--out", out, "model JSON path")->required();
    }

    int run() const {
      const CliConfig c = common.load();
      const auto records = load_experiments(input);
      const ScalingModel model = with_context("fit " + sel.label(), [&] {
        return sel.make(c)(records);
      });
      save_model(model, out);
      auto m = common.manifest("fit", c, { input });
      m.outputs.push_back(out);
      write_manifest(manifest_path_for_file(out), m);
      for (const auto &f: model.fit_stats.flags)
        std::cerr << "warning: " << sel.label() << ": " << f << "\n";
      return kExitOk;
    }
  };

  struct ValidateCmd {
    Common common;
    std::string model_path, input, out;
    std::optional<double> threshold, tpr_holdout;
    std::optional<int> k_max;

    void attach(CLI::App *cmd) {
      common.attach(cmd);
      cmd->add_option("--model", model_path, "model JSON")->required();
      cmd->add_option("--input", input, "experiments file")->required();
      cmd->add_option("--flops-threshold", threshold,
                      "holdout runs above this compute (default 6e21)");
      cmd->add_option("--tpr-holdout", tpr_holdout, "also hold out this TPR");
      cmd->add_option("--k-max", k_max, "pass@k: hold out observations with larger k");
      cmd->add_option("--out", out, "output directory")->required();
    }

    int run() const {
      CliConfig c = common.load();
      if (threshold)
        c.holdout.flops_threshold = *threshold;
      if (tpr_holdout)
        c.holdout.tpr_holdout = *tpr_holdout;
      if (k_max)
        c.holdout.k_max = *k_max;
      const ScalingModel model = load_model(model_path);
      const auto records = load_experiments(input);
      const auto result = with_context("validate " + model.benchmark, [&] {
        return validate_model(model, records, c.holdout);
      });
      const fs::path dir(out);
      json j = to_json(result);
      j["model"] = model_path;
      j["benchmark"] = model.benchmark;
      j["form"] = to_string(model.form());
      j["holdout"] = { { "flops_threshold", c.holdout.flops_threshold },
                       { "tpr_holdout", c.holdout.tpr_holdout
                                            ? json(*c.holdout.tpr_holdout)
                                            : json(nullptr) },
                       { "k_max", c.holdout.k_max ? json(*c.holdout.k_max) : json(nullptr) } };
      const fs::path jp = dir / "validation.json", cp = dir / "validation.csv";
      write_file_atomic(jp, dump(j));
      write_file_atomic(cp, reports_to_csv(to_string(model.form()), model.benchmark, result));
      auto m = common.manifest("validate", c, { model_path, input });
      m.outputs = { jp.string(), cp.string() };
      write_manifest(dir / "manifest.json", m);
      if (result.valid.empty)
        std::cerr << "warning: validation split is empty\n";
      return kExitOk;
    }
  };

  std::vector<double> parse_thresholds(const std::string &s) {
    if (s.empty() || s == "default")
      return default_sweep_thresholds();
    const auto parts = [&] {
      std::vector<std::string> p;
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ':'))
        p.push_back(item);
      return p;
    }();
    if (parts.size() != 3)
      throw UsageError("--thresholds must be min:max:n or default");
    try {
      std::size_t pos = 0;
      const double lo = std::stod(parts[0], &pos);
      if (pos != parts[0].size())
        throw std::invalid_argument(parts[0]);
      const double hi = std::stod(parts[1], &pos);
      if (pos != parts[1].size())
        throw std::invalid_argument(parts[1]);
      const long n = std::stol(parts[2], &pos);
      if (pos != parts[2].size() || n < 2)
        throw std::invalid_argument(parts[2]);
      return log_uniform_grid(lo, hi, static_cast<std::size_t>(n));
    } catch (const std::logic_error &) {
      throw UsageError("--thresholds must be min:max:n with n >= 2, got '" + s + "'");
    }
  }

  std::string sweep_svg(const ThresholdSweep &sw, const std::string &title) {
    SvgPlot plot;
    plot.title = title;
    plot.x_label = "FLOPs threshold";
    plot.y_label = "P(success)";
    plot.y_range = { -0.05, 1.05 };
    SvgSeries ok { "success", {}, {}, SvgSeries::Style::kPoints, svg_color(2) };
    SvgSeries bad { "failure", {}, {}, SvgSeries::Style::kPoints, svg_color(1) };
    double lo = sw.points.front().threshold, hi = sw.points.back().threshold;
    for (const auto &p: sw.points) {
      if (!p.evaluable)
        continue;
      auto &s = p.success ? ok : bad;
      s.x.push_back(p.threshold);
      s.y.push_back(p.success ? 1.0 : 0.0);
    }
    plot.x_range = { std::pow(10.0, std::floor(std::log10(lo))),
                     std::pow(10.0, std::ceil(std::log10(hi))) };
    plot.series = { ok, bad };
    if (sw.logistic && sw.logistic->w) {
      SvgSeries curve { "logistic fit", {}, {}, SvgSeries::Style::kLine, svg_color(0) };
      const auto grid = log_uniform_grid(plot.x_range->first, plot.x_range->second, 200);
      for (double t: grid) {
        curve.x.push_back(t);
        curve.y.push_back(sigmoid(*sw.logistic->w * std::log(t) + *sw.logistic->b));
      }
      plot.series.push_back(curve);
    }
    plot.hlines = { 0.5 };
    if (sw.crossing) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "50%% at %.3g", *sw.crossing);
      plot.vlines.emplace_back(*sw.crossing, buf);
    }
    return plot.render();
  }

  std::string sweep_csv(const ThresholdSweep &sw) {
    std::ostringstream os;
    os << "threshold,evaluable,success,valid_mre_pct,valid_mae,train_points,valid_points\n";
    for (const auto &p: sw.points) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%.10g,%s,%s,", p.threshold,
                    p.evaluable ? "true" : "false", p.success ? "true" : "false");
      os << buf;
      if (p.valid_mre_pct) {
        std::snprintf(buf, sizeof buf, "%.10g", *p.valid_mre_pct);
        os << buf;
      }
      os << ',';
      if (p.valid_mae) {
        std::snprintf(buf, sizeof buf, "%.10g", *p.valid_mae);
        os << buf;
      }
      os << ',' << p.train_points << ',' << p.valid_points << '\n';
    }
    return os.str();
  }

  struct SweepCmd {
    Common common;
    FitSelection sel;
    std::string input, out, thresholds = "default";
    double success_mre = kDefaultSuccessMre;

    void attach(CLI::App *cmd) {
      common.attach(cmd);
      sel.attach(cmd, false);
      cmd->add_option("--input", input, "experiments file")->required();
      cmd->add_option("--thresholds", thresholds, "min:max:n or default");
      cmd->add_option("--success-mre", success_mre, "success bar on valid MRE (%)");
      cmd->add_option("--out", out, "output directory")->required();
    }

    int run() const {
      const CliConfig c = common.load();
      const auto grid = parse_thresholds(thresholds);
      const auto records = load_experiments(input);
      const FitFn fn = sel.make(c);
      const auto sw = with_context("sweep " + sel.label(), [&] {
        return threshold_sweep(records, fn, grid, success_mre);
      });
      const fs::path dir(out);
      json j = to_json(sw);
      j["form"] = sel.form;
      j["benchmark"] = sel.benchmark;
      const fs::path jp = dir / "sweep.json", sp = dir / "sweep.svg",
                     cp = dir / "sweep.csv";
      write_file_atomic(jp, dump(j));
      write_file_atomic(sp, sweep_svg(sw, "Threshold sweep: " + sel.label()));
      write_file_atomic(cp, sweep_csv(sw));
      auto m = common.manifest("sweep", c, { input });
      m.outputs = { jp.string(), sp.string(), cp.string() };
      write_manifest(dir / "manifest.json", m);
      return kExitOk;
    }
  };

  struct PredictCmd {
    std::string model_path;
    std::optional<double> flops, n, d, proxy;
    std::optional<int> k;

    void attach(CLI::App *cmd) {
      cmd->add_option("--model", model_path, "model JSON")->required();
      cmd->add_option("--flops", flops, "training compute");
      cmd->add_option("--n", n, "parameter count");
      cmd->add_option("--d", d, "token count");
      cmd->add_option("--k", k, "pass@k sample count");
      cmd->add_option("--proxy", proxy, "proxy metric value");
    }

    int run() const {
      const ScalingModel model = load_model(model_path);
      const Prediction p = predict(model, Query { flops, n, d, k, proxy });
      char buf[128];
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%s\n", p.raw, p.normalized,
                    p.clamped ? "true" : "false");
      std::cout << buf;
      return kExitOk;
    }
  };

  struct SynthCmd {
    Common common;
    std::string preset, params, grid, out;
    std::optional<std::string> noise_kind;
    std::optional<double> noise_sigma;

    void attach(CLI::App *cmd) {
      common.attach(cmd);
      auto *p = cmd->add_option("--preset", preset, "published coefficient preset");
      auto *q = cmd->add_option("--params", params, "model JSON used as ground truth");
      p->excludes(q);
      cmd->add_option("--grid", grid, "grid JSON (flops range, points, tprs, noise)");
      cmd->add_option("--noise-kind", noise_kind, "none|gaussian_accuracy|gaussian_logit");
      cmd->add_option("--noise-sigma", noise_sigma, "noise standard deviation");
      cmd->add_option("--out", out, "output experiments file (.csv or .json)")->required();
    }

    int run() const {
      if (preset.empty() == params.empty())
        throw UsageError("synth needs exactly one of --preset or --params");
      const CliConfig c = common.load();
      GridSpec g;
      if (!grid.empty()) {
        try {
          g = grid_from_json(json::parse(read_file(grid)));
        } catch (const json::parse_error &e) {
          throw ParseError(grid + ": " + e.what(), 0);
        }
      }
      // Grid seed unless a seed came from the command line or environment.
      if (common.seed || std::getenv(kSeedEnvVar) != nullptr || grid.empty())
        g.seed = c.fit.seed;
      if (noise_kind)
        g.noise.kind = parse_noise_kind(*noise_kind);
      if (noise_sigma)
        g.noise.sigma = *noise_sigma;

      std::vector<std::string> inputs;
      if (!preset.empty()) {
        const auto &presets = paper_coefficient_presets();
        const auto it = presets.find(preset);
        if (it == presets.end())
          throw NotFound("no coefficient preset for benchmark: " + preset);
        g.benchmarks.push_back({ it->second.spec, it->second.nd, std::nullopt });
      } else {
        g.benchmarks.push_back(truth_from_model(load_model(params)));
        inputs.push_back(params);
      }
      if (!grid.empty())
        inputs.push_back(grid);
      const auto records = generate_grid(g);
      const fs::path op(out);
      const DataFormat fmt = format_from_path(op);
      write_file_atomic(op, fmt == DataFormat::kCsv ? experiments_to_csv(records)
                                                    : dump(experiments_to_json(records)));
      // Registry entries matching the generator, for exact refits.
      json reg = json::object();
      for (const auto &bt: g.benchmarks) {
        BenchmarkRegistry one;
        one.add(bt.spec);
        reg.update(one.to_json());
      }
      fs::path cfg_path = op;
      cfg_path.replace_extension(".config.json");
      write_file_atomic(cfg_path, dump({ { "benchmarks", reg } }));
      auto m = common.manifest("synth", c, inputs);
      m.seed = g.seed;
      m.outputs.push_back(out);
      m.outputs.push_back(cfg_path.string());
      write_manifest(manifest_path_for_file(op), m);
      return kExitOk;
    }
  };

  // ------------------------------------------------------------------------
  // report

  std::vector<double> compute_axis(const std::vector<FitPoint> &pts) {
    double lo = pts.front().flops, hi = lo;
    for (const auto &p: pts) {
      lo = std::min(lo, p.flops);
      hi = std::max(hi, p.flops);
    }
    if (hi == lo)
      hi = lo * 10;
    return log_uniform_grid(lo, hi, 200);
  }

  std::string model_svg(const ScalingModel &model, const std::string &name,
                        const std::vector<ExperimentRecord> &records,
                        const HoldoutRule &rule) {
    SvgPlot plot;
    plot.title = name + " (" + to_string(model.form()) + ")";
    plot.y_label = model.form() == FormKind::kAveragePowerLaw ? "mean normalized accuracy"
                                                              : "accuracy";
    const auto pts = model_points(model, records);
    if (pts.empty())
      throw NotFound("report: no data points for benchmark " + model.benchmark);

    if (model.form() == FormKind::kProxyLink) {
      plot.log_x = false;
      plot.x_label = std::get<ProxyLinkModel>(model.params).proxy_name;
      SvgSeries data { "observed", {}, {}, SvgSeries::Style::kPoints, svg_color(0) };
      double lo = *pts.front().query.proxy, hi = lo;
      for (const auto &p: pts) {
        data.x.push_back(*p.query.proxy);
        data.y.push_back(p.actual);
        lo = std::min(lo, *p.query.proxy);
        hi = std::max(hi, *p.query.proxy);
      }
      SvgSeries fit { "fit", {}, {}, SvgSeries::Style::kLine, svg_color(1) };
      for (int i = 0; i < 200; ++i) {
        const double l = lo + (hi - lo) * i / 199.0;
        fit.x.push_back(l);
        fit.y.push_back(predict(model, Query { {}, {}, {}, {}, l }).raw);
      }
      plot.series = { data, fit };
      return plot.render();
    }

    plot.x_label = "training FLOPs";
    SvgSeries train { "train", {}, {}, SvgSeries::Style::kPoints, svg_color(0) };
    SvgSeries held { "holdout", {}, {}, SvgSeries::Style::kPoints, svg_color(1) };
    std::set<double> tprs;
    for (const auto &p: pts) {
      ExperimentRecord probe;
      probe.flops = p.flops;
      probe.tpr = p.tpr;
      const bool h = is_holdout(probe, rule) || (rule.k_max && p.k && *p.k > *rule.k_max);
      (h ? held : train).x.push_back(p.flops);
      (h ? held : train).y.push_back(p.actual);
      tprs.insert(p.tpr);
    }
    plot.series = { train, held };
    const auto cs = compute_axis(pts);
    const bool normalized_avg = model.form() == FormKind::kAveragePowerLaw;
    auto curve_value = [&](const Query &q) {
      const Prediction pr = predict(model, q);
      return normalized_avg ? pr.normalized : pr.raw;
    };
    std::size_t color = 2;
    if (model.form() == FormKind::kNdLaw) {
      for (double tpr: tprs) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "fit, TPR %g", tpr);
        SvgSeries s { buf, {}, {}, SvgSeries::Style::kLine, svg_color(color++) };
        for (double c: cs) {
          const double n = std::sqrt(c / (6 * tpr));
          s.x.push_back(c);
          s.y.push_back(curve_value(Query { {}, n, tpr * n, {}, {} }));
        }
        plot.series.push_back(std::move(s));
      }
    } else if (model.form() == FormKind::kPassKLaw) {
      std::set<int> ks;
      for (const auto &p: pts)
        ks.insert(*p.k);
      for (int k: ks) {
        SvgSeries s { "fit, k=" + std::to_string(k), {}, {}, SvgSeries::Style::kLine,
                      svg_color(color++) };
        for (double c: cs) {
          s.x.push_back(c);
          s.y.push_back(curve_value(Query { c, {}, {}, k, {} }));
        }
        plot.series.push_back(std::move(s));
      }
    } else {
      SvgSeries s { "fit", {}, {}, SvgSeries::Style::kLine, svg_color(color) };
      for (double c: cs) {
        s.x.push_back(c);
        s.y.push_back(curve_value(Query { c, {}, {}, {}, {} }));
      }
      plot.series.push_back(std::move(s));
    }
    plot.shade_x = { rule.flops_threshold, cs.back() * 10 };
    plot.shade_label = "holdout";
    return plot.render();
  }

  struct ReportCmd {
    Common common;
    std::string models, input, out, proxy = "nll";
    std::optional<double> threshold, tpr_holdout;

    void attach(CLI::App *cmd) {
      common.attach(cmd);
      cmd->add_option("--models", models, "directory of model JSON files")->required();
      cmd->add_option("--input", input, "experiments file")->required();
      cmd->add_option("--out", out, "output directory")->required();
      cmd->add_option("--proxy", proxy, "proxy metric for the two-stage strategies");
      cmd->add_option("--flops-threshold", threshold, "holdout compute threshold");
      cmd->add_option("--tpr-holdout", tpr_holdout, "also hold out this TPR");
    }

    int run() const {
      CliConfig c = common.load();
      if (threshold)
        c.holdout.flops_threshold = *threshold;
      if (tpr_holdout)
        c.holdout.tpr_holdout = *tpr_holdout;
      const auto records = load_experiments(input);
      const fs::path dir(out);

      std::vector<fs::path> files;
      if (!fs::is_directory(models))
        throw IoError("not a directory: " + models);
      for (const auto &e: fs::directory_iterator(models)) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && e.path().extension() == ".json"
            && name.find(".manifest.") == std::string::npos && name != "manifest.json")
          files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());

      RunManifest m = common.manifest("report", c, { models, input });
      json index = json::array();
      std::set<std::string> benchmarks;
      for (const auto &f: files) {
        const json j = json::parse(read_file(f));
        if (!j.is_object() || !j.contains("form"))
          continue;
        const ScalingModel model = model_from_json(j);
        const std::string stem = f.stem().string();
        const fs::path svg = dir / (stem + ".svg");
        write_file_atomic(svg, with_context("report " + stem, [&] {
          return model_svg(model, stem, records, c.holdout);
        }));
        m.outputs.push_back(svg.string());
        const auto v = validate_model(model, records, c.holdout);
        index.push_back({ { "model", f.string() },
                          { "form", to_string(model.form()) },
                          { "benchmark", model.benchmark },
                          { "plot", svg.string() },
                          { "validation", to_json(v) } });
        if (model.form() != FormKind::kAveragePowerLaw)
          benchmarks.insert(model.benchmark);
      }

      json comparison = json::object();
      std::string csv;
      for (const auto &b: benchmarks) {
        const BenchmarkSpec &spec = c.registry.at(b);
        std::vector<NamedStrategy> strategies;
        for (const char *s: { "power_law", "bnsl", "two_stage_linear",
                              "two_stage_logistic" })
          strategies.push_back({ s, make_strategy(s, spec, c.fit, proxy) });
        const auto rows = compare_strategies(records, strategies, c.holdout);
        comparison[b] = to_json(rows);
        const auto part = comparison_to_csv(b, rows);
        csv += csv.empty() ? part : part.substr(part.find('\n') + 1);
      }
      const fs::path rp = dir / "report.json", cp = dir / "comparison.csv";
      write_file_atomic(rp, dump({ { "models", index }, { "comparison", comparison } }));
      write_file_atomic(cp, csv.empty() ? comparison_to_csv("", {}) : csv);
      m.outputs.push_back(rp.string());
      m.outputs.push_back(cp.string());
      write_manifest(dir / "manifest.json", m);
      return kExitOk;
    }
  };
}  // namespace

int run_cli(int argc, const char *const *argv) {
  CLI::App app { "Fit, validate and extrapolate downstream scaling laws", "scalelaw" };
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  FitCmd fit;
  ValidateCmd validate;
  SweepCmd sweep;
  PredictCmd pred;
  SynthCmd synth;
  ReportCmd report;
  auto *c_fit = app.add_subcommand("fit", "fit a scaling law to experiments");
  auto *c_val = app.add_subcommand("validate", "holdout validation of a fitted model");
  auto *c_swp = app.add_subcommand("sweep", "FLOPs-threshold sensitivity sweep");
  auto *c_pre = app.add_subcommand("predict", "evaluate a fitted model");
  auto *c_syn = app.add_subcommand("synth", "generate a synthetic experiment grid");
  auto *c_rep = app.add_subcommand("report", "plots and strategy comparison");
  fit.attach(c_fit);
  validate.attach(c_val);
  sweep.attach(c_swp);
  pred.attach(c_pre);
  synth.attach(c_syn);
  report.attach(c_rep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_fit->parsed())
      return fit.run();
    if (c_val->parsed())
      return validate.run();
    if (c_swp->parsed())
      return sweep.run();
    if (c_pre->parsed())
      return pred.run();
    if (c_syn->parsed())
      return synth.run();
    return report.run();
  } catch (const UsageError &e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error &e) {
    std::cerr << "error (" << error_kind_name(e.kind()) << "): " << e.what() << "\n";
    return kExitError;
  } catch (const json::exception &e) {
    std::cerr << "error (json): " << e.what() << "\n";
    return kExitError;
  } catch (const fs::filesystem_error &e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace scalelaw
