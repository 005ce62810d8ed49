//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "scalelaw/data_model.hpp"
#include "scalelaw/forms.hpp"
#include "scalelaw/scaling_model.hpp"

namespace scalelaw {

enum class NoiseKind { kNone, kGaussianAccuracy, kGaussianLogit };

const char *to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string &name);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kNone;
  // Additive std on raw accuracy, or on the logit of normalized accuracy.
  double sigma = 0;
};

struct PassKTruth {
  PassKLawParams law;
  std::vector<int> ks = { 1, 2, 4, 8, 16, 32, 64, 128 };
};

// Compute -> proxy -> accuracy; the proxy is emitted alongside accuracy.
struct ChainTruth {
  Stage1Params stage1;
  LinkParams link;
  std::string proxy_name = "nll";
};

// Power law above `switch_flops`; below it normalized accuracy is further
// suppressed by (c / switch_flops)^gamma, an emergence-style regime.
struct RegimeSwitchTruth {
  PowerLawLogAcc law;
  double switch_flops = 1e21;
  double gamma = 1.5;
};

using GroundTruth = std::variant<PowerLawLogAcc, BNSLParams, NDLawParams,
                                 IrreducibleParams, PassKTruth, ChainTruth,
                                 RegimeSwitchTruth>;

// Optional side proxy for truths without one: stage1(c) plus Gaussian noise.
struct ProxyTruth {
  std::string name = "nll";
  Stage1Params stage1;
  double sigma = 0;
};

struct BenchmarkTruth {
  BenchmarkSpec spec;
  GroundTruth truth;
  std::optional<ProxyTruth> proxy;
};

struct GridSpec {
  double flops_min = 1e18;
  double flops_max = 3.77e22;
  std::size_t points = 48;  // log-uniform budgets
  std::vector<double> tprs = { 10, 20, 40, 80, 160 };
  std::vector<BenchmarkTruth> benchmarks;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  std::string dataset = "synthetic";

  void validate() const;
};

/// Noise-free raw accuracy of `truth` for a run. `k` is used by pass@k
/// truths only.
double truth_accuracy(const BenchmarkTruth &truth, double flops, double n_params,
                      double d_tokens, int k = 1);

/// One record per (budget, tpr) with N = sqrt(C / (6 tpr)), D = tpr N.
std::vector<ExperimentRecord> generate_grid(const GridSpec &spec);

struct CoefficientPreset {
  BenchmarkSpec spec;
  NDLawParams nd;
  // Fitted accuracy ceiling of the irreducible-error variant.
  double q_max = 1.0;
};

/// Published per-benchmark coefficients of -log Q' = A/N^alpha + B/D^beta
/// and the fitted accuracy ceilings.
const std::map<std::string, CoefficientPreset, std::less<>> &paper_coefficient_presets();

/// Ground truth from a serialized model (two_stage becomes a chain).
BenchmarkTruth truth_from_model(const ScalingModel &model);

/// Grid from JSON {flops_min, flops_max, points, tprs, noise: {kind, sigma},
/// seed, dataset}; absent fields keep their defaults. Benchmarks are not read.
GridSpec grid_from_json(const nlohmann::json &j);
nlohmann::json grid_to_json(const GridSpec &spec);

}  // namespace scalelaw
