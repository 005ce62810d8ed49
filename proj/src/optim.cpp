//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#include "scalelaw/optim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

namespace scalelaw {

namespace {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 60;
}  // namespace

const char *to_string(LossKind kind) {
  return kind == LossKind::kHuber ? "huber" : "squared";
}

LossKind parse_loss_kind(const std::string &name) {
  if (name == "huber")
    return LossKind::kHuber;
  if (name == "squared")
    return LossKind::kSquared;
  throw InvalidArgument("unknown loss '" + name + "'");
}

void FitConfig::validate() const {
  if (!(huber_delta > 0))
    throw InvalidArgument("huber_delta must be > 0");
  if (max_iters <= 0)
    throw InvalidArgument("max_iters must be > 0");
  if (!(grad_tol > 0))
    throw InvalidArgument("grad_tol must be > 0");
  if (basin_hops < 0)
    throw InvalidArgument("basin_hops must be >= 0");
  if (basin_step.empty())
    throw InvalidArgument("basin_step must have at least one entry");
  for (double s: basin_step)
    if (!(s >= 0))
      throw InvalidArgument("basin_step entries must be >= 0");
  if (!(c_ref > 0))
    throw InvalidArgument("c_ref must be > 0");
}

Bounds Bounds::unbounded(Eigen::Index n) {
  return { Vector::Constant(n, -kInf), Vector::Constant(n, kInf) };
}

bool Bounds::contains(const Vector &x) const {
  if (x.size() != lower.size())
    return false;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i]))
      return false;
  return true;
}

Vector Bounds::clamp(const Vector &x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

double huber(double r, double delta) {
  const double a = std::abs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

double huber_derivative(double r, double delta) {
  if (std::abs(r) <= delta)
    return r;
  return r > 0 ? delta : -delta;
}

double loss_value(const FitConfig &cfg, double r) {
  return cfg.loss == LossKind::kHuber ? huber(r, cfg.huber_delta) : 0.5 * r * r;
}

double loss_derivative(const FitConfig &cfg, double r) {
  return cfg.loss == LossKind::kHuber ? huber_derivative(r, cfg.huber_delta) : r;
}

double uniform01(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64 &rng) {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// ---------------------------------------------------------------------------
// Linear least squares

Vector linear_least_squares(const Eigen::MatrixXd &design, const Vector &targets) {
  const auto rows = design.rows(), cols = design.cols();
  if (targets.size() != rows)
    throw InvalidArgument("linear_least_squares: design/targets size mismatch");
  if (cols == 0)
    throw InvalidArgument("linear_least_squares: empty design");
  if (!design.allFinite() || !targets.allFinite())
    throw DomainError("linear_least_squares: non-finite input");

  Vector scale(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double norm = design.col(j).norm();
    scale[j] = norm > 0 ? norm : 1.0;
  }
  const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-10);
  if (rows < cols || qr.rank() < cols) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeFullV);
    Vector null_dir = svd.matrixV().col(cols - 1);
    null_dir = (null_dir.array() / scale.array()).matrix().normalized();
    std::ostringstream os;
    os << "rank-deficient design (" << rows << "x" << cols << ", rank "
       << qr.rank() << "); null direction [";
    for (Eigen::Index j = 0; j < cols; ++j)
      os << (j ? ", " : "") << null_dir[j];
    os << "]";
    throw DegenerateFit(os.str());
  }
  Vector coef = qr.solve(targets);
  return coef.cwiseQuotient(scale);
}

// ---------------------------------------------------------------------------
// Bounded quasi-Newton

namespace {
  // Variables pinned at a bound with the gradient pushing outward.
  std::vector<bool> binding_set(const Vector &x, const Vector &g,
                                const Bounds &bounds) {
    std::vector<bool> bind(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i)
      bind[i] = (x[i] <= bounds.lower[i] && g[i] > 0)
                || (x[i] >= bounds.upper[i] && g[i] < 0);
    return bind;
  }

  double projected_grad_norm(const Vector &x, const Vector &g,
                             const Bounds &bounds) {
    double m = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double step = std::clamp(x[i] - g[i], bounds.lower[i], bounds.upper[i]);
      m = std::max(m, std::abs(step - x[i]));
    }
    return m;
  }
}  // namespace

OptResult minimize_bounded(const Objective &objective, const Vector &x0,
                           const Bounds &bounds, const FitConfig &cfg) {
  cfg.validate();
  const auto n = x0.size();
  if (bounds.size() != n)
    throw InvalidArgument("minimize_bounded: bounds dimension mismatch");
  if (!bounds.contains(x0))
    throw InvalidArgument("minimize_bounded: x0 outside bounds");

  OptResult res;
  res.params = x0;
  Vector g(n);
  double f = objective(x0, &g);
  res.objective = f;
  if (!std::isfinite(f) || !g.allFinite()) {
    res.objective = kInf;
    throw LineSearchFailure("objective not finite at the starting point", res);
  }
  res.trace.push_back(f);

  Vector x = x0;
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool h_is_identity = true;
  std::vector<bool> prev_bind = binding_set(x, g, bounds);

  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    if (projected_grad_norm(x, g, bounds) <= cfg.grad_tol) {
      res.converged = true;
      break;
    }
    auto bind = binding_set(x, g, bounds);
    if (bind != prev_bind && !h_is_identity) {
      H.setIdentity();
      h_is_identity = true;
    }
    prev_bind = bind;

    Vector d = -H * g;
    for (Eigen::Index i = 0; i < n; ++i)
      if (bind[i])
        d[i] = 0;
    if (!(g.dot(d) < 0)) {
      H.setIdentity();
      h_is_identity = true;
      d = -g;
      for (Eigen::Index i = 0; i < n; ++i)
        if (bind[i])
          d[i] = 0;
    }

    // The very first steepest-descent step is capped to unit length.
    double t = 1.0;
    if (h_is_identity) {
      const double dn = d.lpNorm<Eigen::Infinity>();
      if (dn > 1)
        t = 1.0 / dn;
    }

    bool accepted = false, saw_nonfinite = false;
    Vector x_new(n), g_new(n), s(n);
    double f_new = f;
    for (int bt = 0; bt < kMaxBacktracks; ++bt, t *= saw_nonfinite ? 0.1 : 0.5) {
      x_new = bounds.clamp(x + t * d);
      s = x_new - x;
      if (s.lpNorm<Eigen::Infinity>() == 0)
        break;
      f_new = objective(x_new, &g_new);
      if (!std::isfinite(f_new) || !g_new.allFinite()) {
        saw_nonfinite = true;
        continue;
      }
      if (f_new <= f + kArmijo * g.dot(s)) {
        accepted = true;
        break;
      }
    }

    if (!accepted) {
      if (!h_is_identity) {
        H.setIdentity();
        h_is_identity = true;
        continue;
      }
      if (saw_nonfinite) {
        res.iterations = iter;
        throw LineSearchFailure("objective became non-finite during line search",
                                res);
      }
      break;  // stalled at machine precision
    }

    const Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (h_is_identity)
        H *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd V =
          Eigen::MatrixXd::Identity(n, n) - rho * y * s.transpose();
      H = V.transpose() * H * V + rho * s * s.transpose();
      h_is_identity = false;
    }

    x = x_new;
    f = f_new;
    g = g_new;
    res.params = x;
    res.objective = f;
    res.trace.push_back(f);
  }
  res.iterations = iter;
  if (!res.converged && projected_grad_norm(x, g, bounds) <= cfg.grad_tol)
    res.converged = true;
  return res;
}

OptResult basin_hopping(const Objective &objective, const Vector &x0,
                        const Bounds &bounds, const FitConfig &cfg) {
  cfg.validate();
  const auto n = x0.size();
  std::mt19937_64 rng(cfg.seed);

  auto step_for = [&](Eigen::Index i) {
    return cfg.basin_step.size() == 1
               ? cfg.basin_step[0]
               : cfg.basin_step.at(static_cast<std::size_t>(i));
  };
  if (cfg.basin_step.size() != 1 && cfg.basin_step.size() != static_cast<std::size_t>(n))
    throw InvalidArgument("basin_step size must be 1 or match the dimension");

  std::optional<OptResult> best;
  std::optional<LineSearchFailure> last_failure;
  int total_iters = 0;
  try {
    best = minimize_bounded(objective, x0, bounds, cfg);
    total_iters += best->iterations;
  } catch (const LineSearchFailure &e) {
    last_failure = e;
  }

  std::vector<double> trace;
  if (best)
    trace.push_back(best->objective);

  for (int hop = 0; hop < cfg.basin_hops; ++hop) {
    const Vector &center = best ? best->params : x0;
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double step = step_for(i);
      x[i] = center[i] + (2.0 * uniform01(rng) - 1.0) * step;
    }
    x = bounds.clamp(x);
    try {
      OptResult r = minimize_bounded(objective, x, bounds, cfg);
      total_iters += r.iterations;
      if (!best || r.objective < best->objective)
        best = std::move(r);
    } catch (const LineSearchFailure &e) {
      last_failure = e;
    }
    if (best)
      trace.push_back(best->objective);
  }

  if (!best)
    throw LineSearchFailure(std::string("basin hopping: every local search "
                                        "failed; last: ")
                                + last_failure->what(),
                            last_failure->best());
  best->iterations = total_iters;
  best->trace = std::move(trace);
  return *best;
}

std::vector<OptResult> minimize_from_each(const Objective &objective,
                                          const std::vector<Vector> &starts,
                                          const Bounds &bounds,
                                          const FitConfig &cfg) {
  std::vector<std::future<OptResult>> jobs;
  jobs.reserve(starts.size());
  for (const auto &x0: starts) {
    jobs.push_back(std::async(std::launch::async, [&, x0] {
      try {
        return minimize_bounded(objective, bounds.clamp(x0), bounds, cfg);
      } catch (const LineSearchFailure &e) {
        OptResult r = e.best();
        r.objective = kInf;
        r.converged = false;
        return r;
      }
    }));
  }
  std::vector<OptResult> out;
  out.reserve(jobs.size());
  for (auto &job: jobs)
    out.push_back(job.get());
  return out;
}

std::optional<std::size_t> best_index(const std::vector<OptResult> &results) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!std::isfinite(results[i].objective))
      continue;
    if (!best || results[i].objective < results[*best].objective)
      best = i;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Logistic regression

LogisticFit fit_logistic_binary(std::span<const double> xs,
                                std::span<const int> ys) {
  if (xs.size() != ys.size())
    throw InvalidArgument("fit_logistic_binary: xs/ys size mismatch");
  double max0 = -kInf, min0 = kInf, max1 = -kInf, min1 = kInf;
  std::size_t n0 = 0, n1 = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]))
      throw InvalidArgument("fit_logistic_binary: non-finite regressor");
    if (ys[i] == 0) {
      ++n0;
      max0 = std::max(max0, xs[i]);
      min0 = std::min(min0, xs[i]);
    } else if (ys[i] == 1) {
      ++n1;
      max1 = std::max(max1, xs[i]);
      min1 = std::min(min1, xs[i]);
    } else {
      throw InvalidArgument("fit_logistic_binary: outcomes must be 0 or 1");
    }
  }
  if (n0 == 0 || n1 == 0)
    throw DomainError("fit_logistic_binary: need at least one 0 and one 1 "
                      "outcome (complete separation)");

  LogisticFit fit;
  // Complete or quasi-complete separation: the likelihood has no maximizer.
  if (max0 <= min1) {
    fit.separated = true;
    fit.increasing = true;
    fit.bracket_lo = max0;
    fit.bracket_hi = min1;
  } else if (max1 <= min0) {
    fit.separated = true;
    fit.increasing = false;
    fit.bracket_lo = max1;
    fit.bracket_hi = min0;
  }
  if (fit.separated) {
    fit.crossing = 0.5 * (fit.bracket_lo + fit.bracket_hi);
    return fit;
  }

  // Newton iterations on standardized x.
  const double n = static_cast<double>(xs.size());
  double mean = 0;
  for (double x: xs)
    mean += x;
  mean /= n;
  double var = 0;
  for (double x: xs)
    var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / n);

  auto loglik = [&](double w, double b) {
    double ll = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double z = w * (xs[i] - mean) / sd + b;
      // log sigmoid(z) = -softplus(-z); log(1 - sigmoid(z)) = -softplus(z)
      ll -= ys[i] ? softplus(-z) : softplus(z);
    }
    return ll;
  };

  double w = 0, b = 0;
  double ll = loglik(w, b);
  int iter = 0;
  for (; iter < 200; ++iter) {
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    Eigen::Matrix2d info = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double xi = (xs[i] - mean) / sd;
      const double p = sigmoid(w * xi + b);
      const Eigen::Vector2d row(xi, 1.0);
      grad += (ys[i] - p) * row;
      info += p * (1 - p) * row * row.transpose();
    }
    if (grad.norm() <= 1e-8)
      break;
    Eigen::Vector2d step = info.ldlt().solve(grad);
    if (!step.allFinite())
      step = grad;
    double t = 1;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
      const double ll_new = loglik(w + t * step[0], b + t * step[1]);
      if (ll_new >= ll) {
        w += t * step[0];
        b += t * step[1];
        ll = ll_new;
        moved = true;
        break;
      }
    }
    if (!moved)
      break;
  }
  fit.iterations = iter;
  // Back to the original x scale.
  fit.w = w / sd;
  fit.b = b - w * mean / sd;
  fit.increasing = *fit.w >= 0;
  fit.crossing = *fit.w != 0 ? -*fit.b / *fit.w : mean;
  return fit;
}

}  // namespace scalelaw
