//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#include "scalelaw/fitpipes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "scalelaw/error.hpp"

namespace scalelaw {

namespace {
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Canonical order makes every fit independent of record order.
  void sort_points(std::vector<FitPoint> &pts) {
    std::sort(pts.begin(), pts.end(), [](const FitPoint &a, const FitPoint &b) {
      if (a.flops != b.flops)
        return a.flops < b.flops;
      if (a.run_id != b.run_id)
        return a.run_id < b.run_id;
      return a.k.value_or(0) < b.k.value_or(0);
    });
  }

  void require_points(const std::vector<FitPoint> &pts, std::size_t need,
                      const std::string &what) {
    if (pts.size() < need)
      throw TooFewPoints(what, pts.size(), need);
  }

  ScalingModel base_model(const BenchmarkSpec &spec, FilterRule rule,
                          const FitConfig &cfg, LossKind loss,
                          const std::vector<FitPoint> &pts, std::size_t excluded) {
    ScalingModel m;
    m.c_ref = cfg.c_ref;
    m.benchmark = spec.name;
    m.q_random = spec.q_random;
    m.filter_rule = rule;
    m.filter_margin = spec.filter_margin;
    m.loss = loss;
    m.fit_stats.train_points = pts.size();
    m.fit_stats.excluded_points = excluded;
    if (!pts.empty()) {
      auto [lo, hi] = std::minmax_element(
          pts.begin(), pts.end(),
          [](const FitPoint &a, const FitPoint &b) { return a.flops < b.flops; });
      m.fit_stats.train_c_min = lo->flops;
      m.fit_stats.train_c_max = hi->flops;
    }
    return m;
  }

  // Robust/least-squares objective sum_i loss(model(theta, i) - y_i).
  template <class Pred>
  Objective residual_objective(const FitConfig &cfg, std::vector<double> y,
                               Pred pred) {
    return [cfg, y = std::move(y), pred](const Vector &theta, Vector *grad) {
      double f = 0;
      Vector gi;
      if (grad != nullptr)
        grad->setZero(theta.size());
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double v = pred(theta, i, grad != nullptr ? &gi : nullptr);
        const double r = v - y[i];
        f += loss_value(cfg, r);
        if (grad != nullptr)
          *grad += loss_derivative(cfg, r) * gi;
      }
      return f;
    };
  }

  double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  }

  double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  }

  const std::vector<double> kExponentGrid = { 0.1, 0.3, 0.5, 0.8 };
  const std::vector<double> kCeilingGrid = { 0.0, 0.05, 0.2 };

  // Normalized accuracy in (0, 1) or a DomainError naming the run.
  double checked_normalized(const FitPoint &p, double q_random) {
    const double qn = normalize_accuracy(p.actual, q_random);
    if (!(qn > 0 && qn < 1))
      throw DomainError("normalized accuracy " + std::to_string(qn) + " of run "
                        + p.run_id + " is outside (0, 1)");
    return qn;
  }

  // Shared closed-form core for fit_power_law and fit_average.
  std::pair<PowerLawLogAcc, double>
  solve_power_law(const std::vector<FitPoint> &pts, double q_random, double c_ref) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd X(n, 2);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double qn = checked_normalized(pts[i], q_random);
      X(i, 0) = 1.0;
      X(i, 1) = std::log(pts[i].flops / c_ref);
      y[i] = std::log(-std::log(qn));
    }
    const Vector coef = linear_least_squares(X, y);
    const double alpha = -coef[1];
    if (!(alpha > 0))
      throw DegenerateFit("power law fit produced non-positive alpha "
                          + std::to_string(alpha)
                          + " (accuracy not increasing with compute)");
    const double objective = 0.5 * (X * coef - y).squaredNorm();
    return { PowerLawLogAcc { std::exp(coef[0]), alpha, c_ref }, objective };
  }
}  // namespace

// ---------------------------------------------------------------------------

ScalingModel fit_power_law(const std::vector<ExperimentRecord> &records,
                           const BenchmarkSpec &spec, const FitConfig &cfg) {
  cfg.validate();
  std::size_t excluded = 0;
  auto pts = collect_points(records, spec, FilterRule::kMargin,
                            PointShape::kCompute, {}, &excluded);
  sort_points(pts);
  require_points(pts, 2, "power_law on " + spec.name);
  auto m = base_model(spec, FilterRule::kMargin, cfg, LossKind::kSquared, pts,
                      excluded);
  auto [law, objective] = solve_power_law(pts, spec.q_random, cfg.c_ref);
  m.params = law;
  m.fit_stats.objective = objective;
  return m;
}

ScalingModel fit_average(const std::vector<ExperimentRecord> &records,
                         const std::vector<BenchmarkSpec> &components,
                         const FitConfig &cfg) {
  cfg.validate();
  std::size_t excluded = 0;
  auto pts = collect_average_points(records, components, &excluded);
  sort_points(pts);
  if (pts.empty())
    throw TooFewPoints("average: no runs left after exclusion", 0, 2);
  require_points(pts, 2, "average");

  BenchmarkSpec avg_spec;
  avg_spec.name = "average";
  avg_spec.q_random = 0;
  avg_spec.filter_margin = components.front().filter_margin;
  auto m = base_model(avg_spec, FilterRule::kMargin, cfg, LossKind::kSquared, pts,
                      excluded);
  auto [law, objective] = solve_power_law(pts, 0.0, cfg.c_ref);
  m.params = AveragePowerLaw { law, components };
  m.fit_stats.objective = objective;
  return m;
}

ScalingModel fit_passk(const std::vector<ExperimentRecord> &records,
                       const BenchmarkSpec &spec, const FitConfig &cfg) {
  cfg.validate();
  std::size_t excluded = 0;
  auto pts = collect_points(records, spec, FilterRule::kAboveFloor,
                            PointShape::kComputeK, {}, &excluded);
  sort_points(pts);
  bool any_k = false;
  for (const auto &rec: records)
    for (const auto &obs: rec.observations)
      any_k = any_k || (obs.benchmark == spec.name && obs.k.has_value());
  if (!any_k)
    throw SchemaError("k", "no pass_at_k observations with a k column for "
                               + spec.name);
  require_points(pts, 4, "passk on " + spec.name);

  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd X(n, 4);
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double qn = checked_normalized(pts[i], spec.q_random);
    const double u = std::log(pts[i].flops / cfg.c_ref);
    const double lk = std::log(static_cast<double>(*pts[i].k));
    X.row(i) << 1.0, u, lk, u * lk;
    y[i] = std::log(-std::log(qn));
  }
  const Vector coef = linear_least_squares(X, y);

  auto m = base_model(spec, FilterRule::kAboveFloor, cfg, LossKind::kSquared, pts,
                      excluded);
  m.params = PassKLawParams { coef[0], coef[1], coef[2], coef[3], cfg.c_ref };
  m.fit_stats.objective = 0.5 * (X * coef - y).squaredNorm();
  return m;
}

// ---------------------------------------------------------------------------

ScalingModel fit_nd_law(const std::vector<ExperimentRecord> &records,
                        const BenchmarkSpec &spec, const FitConfig &cfg) {
  cfg.validate();
  std::size_t excluded = 0;
  auto pts = collect_points(records, spec, FilterRule::kMargin,
                            PointShape::kParamsTokens, {}, &excluded);
  sort_points(pts);
  require_points(pts, 5, "nd_law on " + spec.name);

  double mean_ln_n = 0, mean_ln_d = 0;
  for (const auto &p: pts) {
    mean_ln_n += std::log(*p.query.n_params);
    mean_ln_d += std::log(*p.query.d_tokens);
  }
  mean_ln_n /= static_cast<double>(pts.size());
  mean_ln_d /= static_cast<double>(pts.size());

  std::vector<double> u, v, y;
  for (const auto &p: pts) {
    u.push_back(std::log(*p.query.n_params) - mean_ln_n);
    v.push_back(std::log(*p.query.d_tokens) - mean_ln_d);
    y.push_back(-std::log(checked_normalized(p, spec.q_random)));
  }
  auto objective = residual_objective(
      cfg, y, [u, v](const Vector &th, std::size_t i, Vector *g) {
        return fitspace::nd_neglog(th, u[i], v[i], g);
      });

  Bounds bounds;
  bounds.lower.resize(4);
  bounds.upper.resize(4);
  bounds.lower << -40, std::log(1e-3), -40, std::log(1e-3);
  bounds.upper << 40, std::log(5.0), 40, std::log(5.0);

  std::vector<Vector> starts = cfg.init_grid;
  if (starts.empty()) {
    const double amp = std::log(std::max(median(y) / 2, 1e-6));
    for (double a: kExponentGrid)
      for (double b: kExponentGrid) {
        Vector s(4);
        s << amp, std::log(a), amp, std::log(b);
        starts.push_back(s);
      }
  }
  auto results = minimize_from_each(objective, starts, bounds, cfg);
  auto best = best_index(results);
  if (!best)
    throw DegenerateFit("nd_law on " + spec.name + ": every start failed");
  const auto &r = results[*best];

  auto m = base_model(spec, FilterRule::kMargin, cfg, cfg.loss, pts, excluded);
  const double alpha = std::exp(r.params[1]);
  const double beta = std::exp(r.params[3]);
  m.params = NDLawParams { std::exp(r.params[0] + alpha * mean_ln_n), alpha,
                           std::exp(r.params[2] + beta * mean_ln_d), beta };
  m.fit_stats.objective = r.objective;
  if (!r.converged)
    m.fit_stats.flags.push_back(kFlagNotConverged);

  std::set<long> tprs;
  for (const auto &p: pts)
    tprs.insert(std::lround(p.tpr * 100));
  if (tprs.size() < 2)
    m.fit_stats.flags.push_back(kFlagSingleTpr);
  return m;
}

ScalingModel fit_irreducible(const std::vector<ExperimentRecord> &records,
                             const BenchmarkSpec &spec, const FitConfig &cfg) {
  cfg.validate();
  std::size_t excluded = 0;
  auto pts = collect_points(records, spec, FilterRule::kMargin,
                            PointShape::kCompute, {}, &excluded);
  sort_points(pts);
  require_points(pts, 4, "irreducible on " + spec.name);

  std::vector<double> u, y;
  for (const auto &p: pts) {
    u.push_back(std::log(p.flops / cfg.c_ref));
    y.push_back(-std::log(checked_normalized(p, spec.q_random)));
  }
  auto objective = residual_objective(
      cfg, y, [u](const Vector &th, std::size_t i, Vector *g) {
        return fitspace::irreducible_neglog(th, u[i], g);
      });

  Bounds bounds;
  bounds.lower.resize(3);
  bounds.upper.resize(3);
  bounds.lower << -40, std::log(1e-3), 0.0;
  bounds.upper << 40, std::log(5.0), 10.0;

  const double med = median(y);
  std::vector<Vector> starts = cfg.init_grid;
  if (starts.empty()) {
    for (double a: kExponentGrid)
      for (double e: kCeilingGrid) {
        Vector s(3);
        s << std::log(std::max(med - e, 1e-3)), std::log(a), e;
        starts.push_back(s);
      }
  }
  auto results = minimize_from_each(objective, starts, bounds, cfg);
  auto best = best_index(results);
  if (!best)
    throw DegenerateFit("irreducible on " + spec.name + ": every start failed");
  const OptResult r = results[*best];

  // Profile over fixed ceilings to see how well the data pins E down.
  std::vector<OptResult> candidates = results;
  for (double e: { 0.0, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0 }) {
    Bounds fixed = bounds;
    fixed.lower[2] = fixed.upper[2] = e;
    std::vector<Vector> pstarts;
    for (double a: kExponentGrid) {
      Vector s(3);
      s << std::log(std::max(med - e, 1e-3)), std::log(a), e;
      pstarts.push_back(s);
    }
    auto prof = minimize_from_each(objective, pstarts, fixed, cfg);
    if (auto pb = best_index(prof))
      candidates.push_back(prof[*pb]);
  }
  const double tol = 1.05 * r.objective + 1e-12 * static_cast<double>(pts.size());
  double qmax_lo = 1, qmax_hi = 0;
  for (const auto &c: candidates) {
    if (!(c.objective <= tol))
      continue;
    const double q = std::exp(-c.params[2]);
    qmax_lo = std::min(qmax_lo, q);
    qmax_hi = std::max(qmax_hi, q);
  }

  auto m = base_model(spec, FilterRule::kMargin, cfg, cfg.loss, pts, excluded);
  m.params = IrreducibleParams { std::exp(r.params[0]), std::exp(r.params[1]),
                                 r.params[2], cfg.c_ref };
  m.fit_stats.objective = r.objective;
  if (!r.converged)
    m.fit_stats.flags.push_back(kFlagNotConverged);
  if (qmax_hi - qmax_lo > 0.1)
    m.fit_stats.flags.push_back(kFlagCeilingUnconstrained);
  return m;
}

// ---------------------------------------------------------------------------

ScalingModel fit_bnsl(const std::vector<ExperimentRecord> &records,
                      const BenchmarkSpec &spec, const FitConfig &cfg) {
  cfg.validate();
  std::size_t excluded = 0;
  auto pts = collect_points(records, spec, FilterRule::kAboveFloor,
                            PointShape::kCompute, {}, &excluded);
  sort_points(pts);
  require_points(pts, 7, "bnsl on " + spec.name);

  std::vector<double> u, y;
  for (const auto &p: pts) {
    u.push_back(std::log(p.flops / cfg.c_ref));
    y.push_back(p.actual);
  }
  auto objective = residual_objective(
      cfg, y, [u](const Vector &th, std::size_t i, Vector *g) {
        return fitspace::bnsl_acc(th, u[i], g);
      });

  const double u_lo = u.front(), u_hi = u.back();
  const double ln10 = std::log(10.0);
  Bounds bounds;
  bounds.lower.resize(6);
  bounds.upper.resize(6);
  bounds.lower << -5, -50, -2, -5, u_lo - ln10, 0.05;
  bounds.upper << 5, 50, 2, 10, u_hi + ln10, 10;

  std::vector<Vector> starts = cfg.init_grid;
  if (starts.empty()) {
    // Variable projection: for each nonlinear shape solve (a, b) exactly.
    const auto n = static_cast<Eigen::Index>(u.size());
    const Vector yv = Eigen::Map<const Vector>(y.data(), n);
    for (double c0: { 0.1, 0.4 })
      for (double c1: { 0.3, 1.0 })
        for (double q: { 0.25, 0.5, 0.75 })
          for (double f1: { 0.5, 2.0 }) {
            const double ln_d1 = quantile(u, q);
            Eigen::MatrixXd X(n, 2);
            for (Eigen::Index i = 0; i < n; ++i) {
              const double z = (u[i] - ln_d1) / f1;
              X(i, 0) = 1.0;
              X(i, 1) = std::exp(-c0 * u[i] - c1 * f1 * softplus(z));
            }
            Vector ab;
            try {
              ab = linear_least_squares(X, yv);
            } catch (const DegenerateFit &) {
              continue;
            }
            Vector s(6);
            s << ab[0], ab[1], c0, c1, ln_d1, f1;
            starts.push_back(bounds.clamp(s));
          }
  }
  auto results = minimize_from_each(objective, starts, bounds, cfg);
  auto best = best_index(results);
  if (!best)
    throw DegenerateFit("bnsl on " + spec.name + ": every start failed");

  OptResult r = basin_hopping(objective, results[*best].params, bounds, cfg);
  if (results[*best].objective < r.objective)
    r = results[*best];

  auto m = base_model(spec, FilterRule::kAboveFloor, cfg, cfg.loss, pts, excluded);
  m.params = BNSLParams { r.params[0], r.params[1], r.params[2], r.params[3],
                          std::exp(r.params[4]), r.params[5], cfg.c_ref };
  m.fit_stats.objective = r.objective;
  return m;
}

// ---------------------------------------------------------------------------

namespace {
  struct LinkFit {
    LinkParams link;
    double objective;
  };

  LinkFit fit_link(LinkKind kind, const std::vector<double> &l,
                   const std::vector<double> &acc, const FitConfig &cfg) {
    const auto n = static_cast<Eigen::Index>(l.size());
    const Vector y = Eigen::Map<const Vector>(acc.data(), n);
    auto [amin, amax] = std::minmax_element(acc.begin(), acc.end());
    if (*amax - *amin <= 0)
      throw DegenerateFit("link fit: accuracy has zero variance");
    auto [lmin, lmax] = std::minmax_element(l.begin(), l.end());
    const double lrange = *lmax - *lmin;
    if (lrange <= 0)
      throw DegenerateFit("link fit: proxy is constant (rank-deficient design)");

    if (kind == LinkKind::kLinear) {
      Eigen::MatrixXd X(n, 2);
      for (Eigen::Index i = 0; i < n; ++i)
        X.row(i) << 1.0, l[i];
      const Vector coef = linear_least_squares(X, y);
      return { LinkParams { LinearLink { coef[0], coef[1] } },
               0.5 * (X * coef - y).squaredNorm() };
    }

    auto objective = residual_objective(
        cfg, acc, [l](const Vector &th, std::size_t i, Vector *g) {
          return fitspace::logistic_link(th, l[i], g);
        });
    Bounds bounds;
    bounds.lower.resize(4);
    bounds.upper.resize(4);
    const double kmax = 1e3 / lrange;
    bounds.lower << -100, -100, -kmax, *lmin - 10 * lrange;
    bounds.upper << 100, 100, kmax, *lmax + 10 * lrange;

    double corr = 0;
    {
      double ml = 0, ma = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        ml += l[i];
        ma += acc[i];
      }
      ml /= static_cast<double>(n);
      ma /= static_cast<double>(n);
      for (Eigen::Index i = 0; i < n; ++i)
        corr += (l[i] - ml) * (acc[i] - ma);
    }
    const double sign = corr >= 0 ? 1.0 : -1.0;

    std::vector<Vector> starts = cfg.init_grid;
    if (starts.empty()) {
      for (double kscale: { 1.0, 4.0, 16.0 })
        for (double q: { 0.0, 0.25, 0.5, 0.75, 1.0 }) {
          const double k = sign * kscale / lrange;
          const double l0 = quantile(l, q);
          Eigen::MatrixXd X(n, 2);
          for (Eigen::Index i = 0; i < n; ++i)
            X.row(i) << sigmoid(k * (l[i] - l0)), 1.0;
          Vector ab;
          try {
            ab = linear_least_squares(X, y);
          } catch (const DegenerateFit &) {
            continue;
          }
          Vector s(4);
          s << ab[0], ab[1], k, l0;
          starts.push_back(bounds.clamp(s));
        }
    }
    auto results = minimize_from_each(objective, starts, bounds, cfg);
    auto best = best_index(results);
    if (!best)
      throw DegenerateFit("logistic link: every start failed");
    const auto &r = results[*best];
    return { LinkParams { LogisticLink { r.params[0], r.params[1], r.params[2],
                                         r.params[3] } },
             r.objective };
  }
}  // namespace

ScalingModel fit_two_stage(const std::vector<ExperimentRecord> &records,
                           const BenchmarkSpec &spec, const std::string &proxy_name,
                           LinkKind link_kind, const FitConfig &cfg) {
  cfg.validate();
  if (link_kind == LinkKind::kProxyLogistic)
    throw InvalidArgument("two_stage link must be linear or logistic");
  std::size_t excluded = 0;
  auto pts = collect_points(records, spec, FilterRule::kMargin, PointShape::kProxy,
                            proxy_name, &excluded);
  sort_points(pts);
  if (pts.empty())
    throw NotFound("two_stage on " + spec.name + ": no observations carry proxy '"
                   + proxy_name + "'");
  require_points(pts, 5, "two_stage on " + spec.name);

  std::vector<double> u, l, acc;
  for (const auto &p: pts) {
    u.push_back(std::log(p.flops / cfg.c_ref));
    l.push_back(*p.query.proxy);
    acc.push_back(p.actual);
  }

  // Stage 1: compute -> proxy.
  auto objective = residual_objective(
      cfg, l, [u](const Vector &th, std::size_t i, Vector *g) {
        return fitspace::stage1_proxy(th, u[i], g);
      });
  auto [lmin_it, lmax_it] = std::minmax_element(l.begin(), l.end());
  const double lmin = *lmin_it, lrange = std::max(*lmax_it - *lmin_it, 1e-9);
  Bounds bounds;
  bounds.lower.resize(3);
  bounds.upper.resize(3);
  bounds.lower << lmin - 20 * lrange - 10, -40, std::log(1e-3);
  bounds.upper << lmin, 40, std::log(5.0);

  std::vector<Vector> starts;
  const double u_med = median(u), l_med = median(l);
  for (double a: kExponentGrid)
    for (double floor_frac: { 0.1, 0.5, 2.0 }) {
      const double l0 = lmin - floor_frac * lrange;
      Vector s(3);
      s << l0, std::log(std::max(l_med - l0, 1e-9)) + a * u_med, std::log(a);
      starts.push_back(bounds.clamp(s));
    }
  auto results = minimize_from_each(objective, starts, bounds, cfg);
  auto best = best_index(results);
  if (!best)
    throw DegenerateFit("two_stage stage 1 on " + spec.name + ": every start failed");
  const auto &r1 = results[*best];

  // Stage 2: observed proxy -> observed accuracy.
  FitConfig link_cfg = cfg;
  link_cfg.init_grid.clear();
  const LinkFit lf = fit_link(link_kind, l, acc, link_cfg);

  auto m = base_model(spec, FilterRule::kMargin, cfg, cfg.loss, pts, excluded);
  TwoStageModel ts;
  ts.proxy_name = proxy_name;
  ts.stage1 = { r1.params[0], std::exp(r1.params[1]), std::exp(r1.params[2]),
                cfg.c_ref };
  ts.stage2 = lf.link;
  m.params = ts;
  m.fit_stats.objective = lf.objective;
  if (!r1.converged)
    m.fit_stats.flags.push_back(kFlagNotConverged);
  return m;
}

ScalingModel fit_proxy_link(const std::vector<ExperimentRecord> &records,
                            const BenchmarkSpec &spec,
                            const std::string &proxy_name, const FitConfig &cfg) {
  cfg.validate();
  std::size_t excluded = 0;
  auto pts = collect_points(records, spec, FilterRule::kMargin, PointShape::kProxy,
                            proxy_name, &excluded);
  sort_points(pts);
  if (pts.empty())
    throw NotFound("proxy_link on " + spec.name + ": no observations carry proxy '"
                   + proxy_name + "'");
  require_points(pts, 4, "proxy_link on " + spec.name);

  const auto n = static_cast<Eigen::Index>(pts.size());
  std::vector<double> l, acc;
  for (const auto &p: pts) {
    l.push_back(*p.query.proxy);
    acc.push_back(p.actual);
  }
  auto [lmin, lmax] = std::minmax_element(l.begin(), l.end());
  if (*lmax - *lmin <= 0)
    throw DegenerateFit("proxy_link on " + spec.name
                        + ": proxy is constant (rank-deficient design)");

  // Start from a linear fit in logit space.
  Eigen::MatrixXd X(n, 2);
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = std::clamp(acc[i], 1e-3, 1 - 1e-3);
    X.row(i) << l[i], -1.0;
    z[i] = std::log(a / (1 - a));
  }
  const Vector init = linear_least_squares(X, z);

  FitConfig ls_cfg = cfg;
  ls_cfg.loss = LossKind::kSquared;
  auto objective = residual_objective(
      ls_cfg, acc, [l](const Vector &th, std::size_t i, Vector *g) {
        return fitspace::proxy_link(th, l[i], g);
      });
  auto r = minimize_bounded(objective, init, Bounds::unbounded(2), ls_cfg);

  ProxyLinkModel pl;
  pl.proxy_name = proxy_name;
  pl.link = { r.params[0], r.params[1] };
  double mean = 0;
  for (double a: acc)
    mean += a;
  mean /= static_cast<double>(n);
  double ss_res = 0, ss_tot = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pred = fitspace::proxy_link(r.params, l[i], nullptr);
    ss_res += (pred - acc[i]) * (pred - acc[i]);
    ss_tot += (acc[i] - mean) * (acc[i] - mean);
  }
  pl.rmse = std::sqrt(ss_res / static_cast<double>(n));
  pl.r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : (ss_res == 0 ? 1.0 : 0.0);

  auto m = base_model(spec, FilterRule::kMargin, cfg, LossKind::kSquared, pts,
                      excluded);
  m.params = pl;
  m.fit_stats.objective = r.objective;
  if (!r.converged)
    m.fit_stats.flags.push_back(kFlagNotConverged);
  return m;
}

FitFn make_strategy(const std::string &name, const BenchmarkSpec &spec,
                    const FitConfig &cfg, const std::string &proxy_name) {
  if (name == "power_law")
    return [=](const auto &r) { return fit_power_law(r, spec, cfg); };
  if (name == "bnsl")
    return [=](const auto &r) { return fit_bnsl(r, spec, cfg); };
  if (name == "nd_law")
    return [=](const auto &r) { return fit_nd_law(r, spec, cfg); };
  if (name == "irreducible")
    return [=](const auto &r) { return fit_irreducible(r, spec, cfg); };
  if (name == "passk")
    return [=](const auto &r) { return fit_passk(r, spec, cfg); };
  if (name == "two_stage_linear")
    return [=](const auto &r) {
      return fit_two_stage(r, spec, proxy_name, LinkKind::kLinear, cfg);
    };
  if (name == "two_stage_logistic")
    return [=](const auto &r) {
      return fit_two_stage(r, spec, proxy_name, LinkKind::kLogistic, cfg);
    };
  if (name == "proxy_link")
    return [=](const auto &r) { return fit_proxy_link(r, spec, proxy_name, cfg); };
  throw InvalidArgument("unknown strategy '" + name + "'");
}

}  // namespace scalelaw
