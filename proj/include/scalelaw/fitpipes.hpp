//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "scalelaw/data_model.hpp"
#include "scalelaw/optim.hpp"
#include "scalelaw/scaling_model.hpp"

namespace scalelaw {

// Flags attached to FitStats::flags.
inline constexpr const char *kFlagSingleTpr = "ill_posed_single_tpr";
inline constexpr const char *kFlagCeilingUnconstrained = "ceiling_unconstrained";
inline constexpr const char *kFlagNotConverged = "not_converged";

/// Closed-form fit of -log Q' = A (C/c_ref)^-alpha in double-log space on
/// points at least `filter_margin` above chance.
ScalingModel fit_power_law(const std::vector<ExperimentRecord> &records,
                           const BenchmarkSpec &spec, const FitConfig &cfg);

/// Huber fit of the one-break BNSL on raw accuracy, global search by basin
/// hopping. Uses every point strictly above chance.
ScalingModel fit_bnsl(const std::vector<ExperimentRecord> &records,
                      const BenchmarkSpec &spec, const FitConfig &cfg);

/// Huber fit of -log Q' = A N^-alpha + B D^-beta in -log Q' space, best of
/// an initialization grid.
ScalingModel fit_nd_law(const std::vector<ExperimentRecord> &records,
                        const BenchmarkSpec &spec, const FitConfig &cfg);

/// Huber fit of the power law with an additive irreducible term E >= 0.
/// Flags `ceiling_unconstrained` when near-optimal fits disagree on
/// Q_max = exp(-E) by more than 0.1.
ScalingModel fit_irreducible(const std::vector<ExperimentRecord> &records,
                             const BenchmarkSpec &spec, const FitConfig &cfg);

/// Closed-form pass@k law in ln(-ln Q) over {1, u, ln k, u ln k}.
ScalingModel fit_passk(const std::vector<ExperimentRecord> &records,
                       const BenchmarkSpec &spec, const FitConfig &cfg);

/// Compute -> proxy power law followed by a proxy -> accuracy link.
ScalingModel fit_two_stage(const std::vector<ExperimentRecord> &records,
                           const BenchmarkSpec &spec, const std::string &proxy_name,
                           LinkKind link_kind, const FitConfig &cfg);

/// Acc = 1 / (1 + exp(-a proxy + b)) by least squares; stores RMSE and R^2.
ScalingModel fit_proxy_link(const std::vector<ExperimentRecord> &records,
                            const BenchmarkSpec &spec,
                            const std::string &proxy_name,
                            const FitConfig &cfg = {});

/// Power law fitted to the per-run mean of normalized scores across
/// `components`.
ScalingModel fit_average(const std::vector<ExperimentRecord> &records,
                         const std::vector<BenchmarkSpec> &components,
                         const FitConfig &cfg);

using FitFn = std::function<ScalingModel(const std::vector<ExperimentRecord> &)>;

/// Named fitting strategy bound to a benchmark and config. Names:
/// power_law, bnsl, nd_law, irreducible, passk, two_stage_linear,
/// two_stage_logistic, proxy_link.
FitFn make_strategy(const std::string &name, const BenchmarkSpec &spec,
                    const FitConfig &cfg, const std::string &proxy_name = "nll");

}  // namespace scalelaw
