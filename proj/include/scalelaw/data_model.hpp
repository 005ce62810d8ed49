//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace scalelaw {

enum class MetricType { kAcc, kAccNorm, kExactMatch, kPassAtK };

std::string_view to_string(MetricType type);
MetricType parse_metric_type(std::string_view name);

struct MetricObservation {
  std::string benchmark;
  MetricType metric_type = MetricType::kAcc;
  double value = 0;
  std::optional<int> k;
  std::map<std::string, double> proxies;
};

/// One training run: model size, token count, compute and the benchmark
/// scores measured on the final checkpoint.
struct ExperimentRecord {
  std::string run_id;
  double n_params = 0;
  double d_tokens = 0;
  double flops = 0;
  double tpr = 0;
  std::string dataset;
  std::vector<MetricObservation> observations;

  // Observation for `benchmark` with the smallest k (or the only one when
  // the metric has no k). nullptr when the run lacks the benchmark.
  const MetricObservation *primary(std::string_view benchmark) const;
  const MetricObservation *find(std::string_view benchmark,
                                std::optional<int> k) const;
};

struct BenchmarkSpec {
  std::string name;
  MetricType metric_type = MetricType::kAcc;
  double q_random = 0;
  double filter_margin = 0.05;
};

struct HoldoutRule {
  double flops_threshold = 6e21;
  std::optional<double> tpr_holdout;
  // pass@k only: observations with k above this go to the validation split,
  // even for runs that otherwise train.
  std::optional<int> k_max;
};

enum class FilterRule { kMargin, kAboveFloor };

std::string_view to_string(FilterRule rule);
FilterRule parse_filter_rule(std::string_view name);

inline constexpr double kDefaultMargin = 0.05;
inline constexpr double kLbppMargin = 0.02;
inline constexpr double kTprMatchTolerance = 0.01;

/// Name -> BenchmarkSpec map. The default instance holds the twelve
/// benchmarks of the reference study with their chance-level floors.
class BenchmarkRegistry {
public:
  BenchmarkRegistry() = default;

  static BenchmarkRegistry defaults();
  static BenchmarkRegistry from_json(const nlohmann::json &j);
  nlohmann::json to_json() const;

  void add(BenchmarkSpec spec);
  bool contains(std::string_view name) const;
  const BenchmarkSpec &at(std::string_view name) const;
  const std::map<std::string, BenchmarkSpec, std::less<>> &all() const {
    return specs_;
  }

  // Defaults overlaid with entries of `other`.
  void merge(const BenchmarkRegistry &other);

private:
  std::map<std::string, BenchmarkSpec, std::less<>> specs_;
};

/// The ten benchmarks averaged by default (LBPP and GSM8K not included).
std::vector<std::string> default_average_benchmarks();

double compute_flops(double n_params, double d_tokens);
double normalize_accuracy(double q, double q_random);
double denormalize_accuracy(double q_norm, double q_random);

// Inclusion test shared by filter_fit_points and the fitting pipelines.
bool passes_filter(double value, const BenchmarkSpec &spec, FilterRule rule);

std::vector<ExperimentRecord>
filter_fit_points(const std::vector<ExperimentRecord> &records,
                  const BenchmarkSpec &spec, FilterRule rule);

struct HoldoutSplit {
  std::vector<ExperimentRecord> train;
  std::vector<ExperimentRecord> valid;
};

bool is_holdout(const ExperimentRecord &record, const HoldoutRule &rule);
HoldoutSplit split_holdout(const std::vector<ExperimentRecord> &records,
                           const HoldoutRule &rule);

enum class DataFormat { kCsv, kJson };

DataFormat format_from_path(const std::filesystem::path &path);

std::vector<ExperimentRecord> parse_experiments_csv(std::string_view text);
std::vector<ExperimentRecord> parse_experiments_json(std::string_view text);
std::vector<ExperimentRecord> load_experiments(const std::filesystem::path &path,
                                               DataFormat format);
std::vector<ExperimentRecord> load_experiments(const std::filesystem::path &path);

std::string experiments_to_csv(const std::vector<ExperimentRecord> &records);
nlohmann::json experiments_to_json(const std::vector<ExperimentRecord> &records);

void validate_record(const ExperimentRecord &record);

}  // namespace scalelaw
