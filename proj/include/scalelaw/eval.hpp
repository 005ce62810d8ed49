//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "scalelaw/data_model.hpp"
#include "scalelaw/fitpipes.hpp"
#include "scalelaw/optim.hpp"
#include "scalelaw/scaling_model.hpp"

namespace scalelaw {

struct Metrics {
  double mae = 0;
  // Unset when some actual value is zero.
  std::optional<double> mre_pct;
  double rmse = 0;
  double r2 = 0;
};

/// MAE, MRE (percent, relative to actual), RMSE and R^2. R^2 is taken as 1
/// for a perfect fit of constant data and 0 otherwise when actual has no
/// variance.
Metrics compute_metrics(std::span<const double> predicted,
                        std::span<const double> actual);

/// 100 * mean(|p - a| / a). Throws DomainError when an actual value is 0.
double mean_relative_error_pct(std::span<const double> predicted,
                               std::span<const double> actual);

enum class Split { kTrain, kValid };
const char *to_string(Split split);

struct Residual {
  std::string run_id;
  double flops = 0;
  std::optional<int> k;
  double predicted = 0;  // clamped raw accuracy
  double actual = 0;
  bool clamped = false;
};

struct ValidationReport {
  Split split = Split::kTrain;
  // No points survived the split and filter; metrics are left at zero.
  bool empty = false;
  Metrics metrics;
  std::size_t points = 0;
  std::size_t excluded_points = 0;
  std::size_t clamp_count = 0;
  std::vector<Residual> residuals;
};

/// Evaluates `model` on the points of `records` that pass its own filter.
ValidationReport evaluate_points(const ScalingModel &model,
                                 const std::vector<ExperimentRecord> &records,
                                 Split split);

struct ValidationResult {
  ValidationReport train;
  ValidationReport valid;
};

ValidationResult validate_model(const ScalingModel &model,
                                const std::vector<ExperimentRecord> &records,
                                const HoldoutRule &rule);

inline constexpr double kSweepMinFlops = 6e19;
inline constexpr double kSweepMaxFlops = 5e22;
inline constexpr std::size_t kSweepDefaultPoints = 20;
inline constexpr double kDefaultSuccessMre = 10.0;

/// `n` log-uniform points over [lo, hi].
std::vector<double> log_uniform_grid(double lo, double hi, std::size_t n);
std::vector<double> default_sweep_thresholds();

struct SweepPoint {
  double threshold = 0;
  bool evaluable = false;
  bool success = false;
  std::optional<double> valid_mre_pct;
  std::optional<double> valid_mae;
  std::size_t train_points = 0;
  std::size_t valid_points = 0;
  std::string note;  // why the threshold could not be evaluated
};

// Flags set on ThresholdSweep::flags.
inline constexpr const char *kFlagCrossingLowerEdge = "crossing_at_lower_edge";
inline constexpr const char *kFlagNeverSucceeds = "never_succeeds";
inline constexpr const char *kFlagNoEvaluable = "no_evaluable_thresholds";

struct ThresholdSweep {
  std::vector<SweepPoint> points;
  double success_mre = kDefaultSuccessMre;
  // Logistic fit on (ln T, success) over evaluable thresholds, when both
  // outcomes occur.
  std::optional<LogisticFit> logistic;
  // FLOPs at which the success probability crosses 0.5.
  std::optional<double> crossing;
  std::vector<std::string> flags;

  bool has_flag(const std::string &flag) const;
};

/// For each threshold T: fit on runs with flops <= T, validate on runs
/// above T, success iff valid MRE < success_mre.
ThresholdSweep threshold_sweep(const std::vector<ExperimentRecord> &records,
                               const FitFn &fit_fn,
                               const std::vector<double> &thresholds,
                               double success_mre = kDefaultSuccessMre);

struct StrategyRow {
  std::string strategy;
  std::optional<std::string> error;
  std::optional<ValidationReport> train;
  std::optional<ValidationReport> valid;
};

struct NamedStrategy {
  std::string name;
  FitFn fit;
};

/// Fits every strategy on the train split; rows keep valid MAE/MRE and
/// train RMSE/R^2. A failing strategy becomes an error row.
std::vector<StrategyRow> compare_strategies(const std::vector<ExperimentRecord> &records,
                                            const std::vector<NamedStrategy> &strategies,
                                            const HoldoutRule &rule);

nlohmann::json to_json(const Metrics &m);
nlohmann::json to_json(const ValidationReport &r);
nlohmann::json to_json(const ValidationResult &r);
nlohmann::json to_json(const ThresholdSweep &s);
nlohmann::json to_json(const std::vector<StrategyRow> &rows);

// Flat CSV: one row per split.
std::string reports_to_csv(const std::string &model_name, const std::string &benchmark,
                           const ValidationResult &r);
std::string comparison_to_csv(const std::string &benchmark,
                              const std::vector<StrategyRow> &rows);

}  // namespace scalelaw
