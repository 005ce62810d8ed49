//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "scalelaw/data_model.hpp"
#include "scalelaw/forms.hpp"
#include "scalelaw/optim.hpp"

namespace scalelaw {

/// Compute -> proxy power law with an asymptotic floor:
/// L(C) = l0 + a (C / c_ref)^-alpha.
struct Stage1Params {
  double l0 = 0;
  double a = 1;
  double alpha = 0.3;
  double c_ref = kDefaultCRef;
};

double eval_stage1(const Stage1Params &p, double c);

struct TwoStageModel {
  Stage1Params stage1;
  LinkParams stage2;
  std::string proxy_name;
};

struct ProxyLinkModel {
  std::string proxy_name;
  ProxyLogisticLink link;
  double rmse = 0;
  double r2 = 0;
};

struct AveragePowerLaw {
  PowerLawLogAcc law;
  std::vector<BenchmarkSpec> components;
};

using ModelParams =
    std::variant<PowerLawLogAcc, BNSLParams, NDLawParams, IrreducibleParams,
                 PassKLawParams, TwoStageModel, ProxyLinkModel, AveragePowerLaw>;

// Enumerators follow the ModelParams alternative order.
enum class FormKind {
  kPowerLaw,
  kBnsl,
  kNdLaw,
  kIrreducible,
  kPassKLaw,
  kTwoStage,
  kProxyLink,
  kAveragePowerLaw,
};

const char *to_string(FormKind form);
FormKind parse_form_kind(const std::string &name);

struct FitStats {
  std::size_t train_points = 0;
  std::size_t excluded_points = 0;
  double objective = 0;
  double train_c_min = 0;
  double train_c_max = 0;
  std::vector<std::string> flags;
};

struct ScalingModel {
  ModelParams params;
  double c_ref = kDefaultCRef;
  std::string benchmark;
  double q_random = 0;
  FilterRule filter_rule = FilterRule::kMargin;
  double filter_margin = kDefaultMargin;
  LossKind loss = LossKind::kSquared;
  FitStats fit_stats;

  FormKind form() const { return static_cast<FormKind>(params.index()); }
  bool has_flag(const std::string &flag) const;
  // Benchmark spec reconstructed from the stored filter provenance.
  BenchmarkSpec spec() const;
};

struct Query {
  std::optional<double> flops;
  std::optional<double> n_params;
  std::optional<double> d_tokens;
  std::optional<int> k;
  std::optional<double> proxy;
};

struct Prediction {
  double raw = 0;          // clamped to [0, 1]
  double normalized = 0;   // normalize(raw, q_random)
  bool clamped = false;
  double unclamped = 0;
};

Prediction predict(const ScalingModel &model, const Query &query);

nlohmann::json to_json(const ScalingModel &model);
ScalingModel model_from_json(const nlohmann::json &j);
void save_model(const ScalingModel &model, const std::filesystem::path &path);
ScalingModel load_model(const std::filesystem::path &path);

/// One observation paired with the query a model needs to predict it.
struct FitPoint {
  std::string run_id;
  Query query;
  double actual = 0;  // raw accuracy
  double flops = 0;
  double tpr = 0;
  std::optional<int> k;
};

enum class PointShape { kCompute, kParamsTokens, kComputeK, kProxy };

/// Gathers the benchmark's observations as fit points, keeping those that
/// pass `rule`. kComputeK takes every pass@k observation and additionally
/// drops values of exactly 1; the other shapes use the primary observation.
std::vector<FitPoint> collect_points(const std::vector<ExperimentRecord> &records,
                                     const BenchmarkSpec &spec, FilterRule rule,
                                     PointShape shape,
                                     const std::string &proxy_name = {},
                                     std::size_t *excluded = nullptr);

/// Per-record mean of normalized scores over `components`. A record is
/// skipped when it lacks a component or any component sits below its
/// margin.
std::vector<FitPoint>
collect_average_points(const std::vector<ExperimentRecord> &records,
                       const std::vector<BenchmarkSpec> &components,
                       std::size_t *excluded = nullptr);

/// The points a fitted model is evaluated on, under its own filter.
std::vector<FitPoint> model_points(const ScalingModel &model,
                                   const std::vector<ExperimentRecord> &records,
                                   std::size_t *excluded = nullptr);

}  // namespace scalelaw
