//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scalelaw/error.hpp"
#include "scalelaw/forms.hpp"

namespace scalelaw {

enum class LossKind { kHuber, kSquared };

const char *to_string(LossKind kind);
LossKind parse_loss_kind(const std::string &name);

inline constexpr double kDefaultHuberDelta = 1e-3;

struct FitConfig {
  LossKind loss = LossKind::kHuber;
  double huber_delta = kDefaultHuberDelta;
  int max_iters = 1000;
  double grad_tol = 1e-11;
  std::uint64_t seed = 0;
  // Optional explicit starting points in the pipeline's fit space. Empty means
  // the pipeline builds its default grid.
  std::vector<Vector> init_grid;
  int basin_hops = 100;
  // Per-dimension uniform perturbation half-width; a single entry is
  // broadcast to every dimension.
  std::vector<double> basin_step = { 0.5 };
  double c_ref = kDefaultCRef;

  void validate() const;
};

struct OptResult {
  Vector params;
  double objective = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

/// Raised when the objective turns non-finite and no acceptable step exists.
/// Carries the best point seen before the failure.
class LineSearchFailure: public Error {
public:
  LineSearchFailure(const std::string &msg, OptResult best)
      : Error(ErrorKind::kLineSearch, msg), best_(std::move(best)) { }

  const OptResult &best() const noexcept { return best_; }

private:
  OptResult best_;
};

// Returns f(x) and, when grad is non-null, writes the gradient into it.
using Objective = std::function<double(const Vector &x, Vector *grad)>;

struct Bounds {
  Vector lower;
  Vector upper;

  static Bounds unbounded(Eigen::Index n);
  Eigen::Index size() const { return lower.size(); }
  bool contains(const Vector &x) const;
  Vector clamp(const Vector &x) const;
};

double huber(double residual, double delta);
double huber_derivative(double residual, double delta);

// Per-residual loss and its derivative for the configured loss kind.
double loss_value(const FitConfig &cfg, double residual);
double loss_derivative(const FitConfig &cfg, double residual);

/// Least-squares coefficients via column-pivoted QR on a column-scaled
/// design. Throws DegenerateFit naming a null direction when the design is
/// rank deficient.
Vector linear_least_squares(const Eigen::MatrixXd &design, const Vector &targets);

/// Projected quasi-Newton minimization inside a box.
OptResult minimize_bounded(const Objective &objective, const Vector &x0,
                           const Bounds &bounds, const FitConfig &cfg);

/// Greedy basin hopping around minimize_bounded; the trace holds the
/// best-so-far objective after the initial descent and after every hop.
OptResult basin_hopping(const Objective &objective, const Vector &x0,
                        const Bounds &bounds, const FitConfig &cfg);

/// Runs minimize_bounded from every start concurrently. A start whose local
/// search fails yields a result with infinite objective.
std::vector<OptResult> minimize_from_each(const Objective &objective,
                                          const std::vector<Vector> &starts,
                                          const Bounds &bounds,
                                          const FitConfig &cfg);

// Index of the lowest finite objective, ties to the lowest index.
std::optional<std::size_t> best_index(const std::vector<OptResult> &results);

struct LogisticFit {
  // Set when the maximum likelihood estimate exists.
  std::optional<double> w;
  std::optional<double> b;
  bool separated = false;
  // Separation bracket [max x of the lower class, min x of the upper class].
  double bracket_lo = 0;
  double bracket_hi = 0;
  // Decision point: -b / w, or the bracket midpoint under separation.
  double crossing = 0;
  bool increasing = true;
  int iterations = 0;
};

/// Maximum-likelihood fit of P(y = 1) = sigmoid(w x + b).
LogisticFit fit_logistic_binary(std::span<const double> xs, std::span<const int> ys);

// Uniform double in [0, 1) from 53 random bits; identical on every platform.
double uniform01(std::mt19937_64 &rng);
// Standard normal via Box-Muller on uniform01.
double standard_normal(std::mt19937_64 &rng);

}  // namespace scalelaw
