//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "scalelaw/error.hpp"
#include "scalelaw/optim.hpp"
#include "support.hpp"

using namespace scalelaw;
using scalelaw::testing::uniform;
using scalelaw::testing::vec;

namespace {

Bounds box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  return { vec(lo), vec(hi) };
}

double quad3(const Vector &x, Vector *g) {
  if (g)
    *g = vec({ 2 * (x[0] - 3) });
  return (x[0] - 3) * (x[0] - 3);
}

double rosenbrock(const Vector &x, Vector *g) {
  const double a = 1 - x[0], b = x[1] - x[0] * x[0];
  if (g)
    *g = vec({ -2 * a - 400 * x[0] * b, 200 * b });
  return a * a + 100 * b * b;
}

double double_well(const Vector &x, Vector *g) {
  const double v = x[0];
  if (g)
    *g = vec({ 4 * v * v * v - 8 * v + 0.5 });
  return v * v * v * v - 4 * v * v + 0.5 * v;
}

// Root of the double well derivative in the left basin by bisection.
double left_well_root() {
  double lo = -2, hi = -1;  // derivative is negative at -2 and positive at -1
  for (int i = 0; i < 200; ++i) {
    const double mid = (lo + hi) / 2;
    (4 * mid * mid * mid - 8 * mid + 0.5 < 0 ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace

TEST_CASE("huber examples") {
  CHECK(huber(0, 1e-3) == 0);
  const double d = 1e-3;
  CHECK(huber(d, d) == doctest::Approx(d * d / 2).epsilon(1e-14));
  CHECK(d * (d - d / 2) == doctest::Approx(d * d / 2).epsilon(1e-14));
  CHECK(huber(1, 1e-3) == doctest::Approx(9.995e-4).epsilon(1e-12));
  CHECK(huber(-1, 1e-3) == huber(1, 1e-3));
}

TEST_CASE("huber properties") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double delta = std::exp(uniform(rng, -8, 1));
    const double r = uniform(rng, -5, 5) * delta;
    CHECK(huber(r, delta) == huber(-r, delta));
    CHECK(huber(std::abs(r) * 1.1, delta) >= huber(r, delta));
    // Derivative matches central differences away from the knee.
    if (std::abs(std::abs(r) - delta) > 1e-3 * delta) {
      const double h = 1e-7 * delta;
      const double fd = (huber(r + h, delta) - huber(r - h, delta)) / (2 * h);
      CHECK(huber_derivative(r, delta) == doctest::Approx(fd).epsilon(1e-5));
    }
    // Continuity of the derivative at the knee.
    CHECK(huber_derivative(delta * (1 - 1e-12), delta)
          == doctest::Approx(huber_derivative(delta * (1 + 1e-12), delta)));
  }
  FitConfig sq;
  sq.loss = LossKind::kSquared;
  CHECK(loss_value(sq, 2) == doctest::Approx(2.0));
  CHECK(loss_derivative(sq, 2) == doctest::Approx(2.0));
  CHECK(parse_loss_kind("huber") == LossKind::kHuber);
  CHECK_THROWS_AS(parse_loss_kind("l1"), InvalidArgument);
}

TEST_CASE("fit config validation") {
  FitConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.huber_delta = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.grad_tol = -1;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("linear least squares examples") {
  Eigen::MatrixXd X(3, 2);
  X << 1, 0, 1, 1, 1, 2;
  const Vector line = linear_least_squares(X, vec({ 1, 3, 5 }));
  CHECK(line[0] == doctest::Approx(1).epsilon(1e-12));
  CHECK(line[1] == doctest::Approx(2).epsilon(1e-12));

  const Vector zero = linear_least_squares(X, vec({ 0, 0, 0 }));
  CHECK(zero.norm() == 0);

  // Normal equations by hand: [3 3; 3 5] beta = [10, 17], so the slope is
  // 7 / 2 and the intercept (10 - 10.5) / 3 = -1/6.
  const Vector outlier = linear_least_squares(X, vec({ 0, 3, 7 }));
  CHECK(outlier[1] == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(outlier[0] == doctest::Approx(-1.0 / 6).epsilon(1e-12));
  const Vector resid = vec({ 0, 3, 7 }) - X * outlier;
  CHECK(resid.sum() == doctest::Approx(0).epsilon(1e-12));

  Eigen::MatrixXd bad(3, 2);
  bad << 1, 2, 1, 2, 1, 2;
  CHECK_THROWS_AS(linear_least_squares(bad, vec({ 1, 2, 3 })), DegenerateFit);
  Eigen::MatrixXd wide(1, 2);
  wide << 1, 2;
  CHECK_THROWS_AS(linear_least_squares(wide, vec({ 1 })), Error);
}

TEST_CASE("least squares residuals are orthogonal to the design") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 100; ++t) {
    const int n = 5 + t % 20, p = 1 + t % 4;
    Eigen::MatrixXd X(n, p);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j)
        X(i, j) = uniform(rng, -1, 1) * std::pow(10.0, j);
      y[i] = uniform(rng, -3, 3);
    }
    const Vector beta = linear_least_squares(X, y);
    const Vector r = y - X * beta;
    for (int j = 0; j < p; ++j)
      CHECK(std::abs(X.col(j).dot(r)) <= 1e-8 * X.col(j).norm() * (1 + y.norm()));
  }
}

TEST_CASE("minimize_bounded examples") {
  FitConfig cfg;
  auto interior = minimize_bounded(quad3, vec({ 0 }), box({ 0 }, { 10 }), cfg);
  CHECK(interior.params[0] == doctest::Approx(3).epsilon(1e-8));
  CHECK(interior.converged);

  auto active = minimize_bounded(quad3, vec({ 0 }), box({ 0 }, { 2 }), cfg);
  CHECK(active.params[0] == 2);
  CHECK(active.objective == doctest::Approx(1));
  CHECK(active.converged);

  auto rb = minimize_bounded(rosenbrock, vec({ -1.2, 1 }), box({ -5, -5 }, { 5, 5 }), cfg);
  CHECK(std::abs(rb.params[0] - 1) < 1e-6);
  CHECK(std::abs(rb.params[1] - 1) < 1e-6);

  Objective nan_everywhere_but_start = [](const Vector &x, Vector *g) {
    if (g)
      *g = vec({ -1 });
    return x[0] == 0 ? 1.0 : NAN;
  };
  CHECK_THROWS_AS(minimize_bounded(nan_everywhere_but_start, vec({ 0 }), box({ 0 }, { 1 }), cfg),
                  LineSearchFailure);
  CHECK_THROWS_AS(minimize_bounded(quad3, vec({ 20 }), box({ 0 }, { 10 }), cfg), InvalidArgument);
}

TEST_CASE("minimize_bounded stays in bounds and never goes uphill") {
  std::mt19937_64 rng(17);
  FitConfig cfg;
  cfg.max_iters = 200;
  for (int t = 0; t < 100; ++t) {
    // Random convex-plus-ripple objectives in 3 dimensions.
    Vector centre(3), w(3);
    for (int i = 0; i < 3; ++i) {
      centre[i] = uniform(rng, -4, 4);
      w[i] = uniform(rng, 0.1, 5);
    }
    Objective f = [&](const Vector &x, Vector *g) {
      double v = 0;
      if (g)
        g->resize(3);
      for (int i = 0; i < 3; ++i) {
        const double d = x[i] - centre[i];
        v += w[i] * d * d + 0.3 * std::sin(3 * x[i]);
        if (g)
          (*g)[i] = 2 * w[i] * d + 0.9 * std::cos(3 * x[i]);
      }
      return v;
    };
    Bounds b { vec({ -2, -1, -3 }), vec({ 1, 2, 0.5 }) };
    Vector x0(3);
    for (int i = 0; i < 3; ++i)
      x0[i] = uniform(rng, b.lower[i], b.upper[i]);
    const auto r = minimize_bounded(f, x0, b, cfg);
    CHECK(b.contains(r.params));
    CHECK(r.objective <= f(x0, nullptr));
    CHECK(r.objective == doctest::Approx(f(r.params, nullptr)));
  }
}

TEST_CASE("basin hopping") {
  FitConfig cfg;
  cfg.basin_hops = 0;
  const auto b = box({ -3 }, { 3 });
  const auto plain = minimize_bounded(double_well, vec({ 1.3 }), b, cfg);
  const auto zero = basin_hopping(double_well, vec({ 1.3 }), b, cfg);
  CHECK(zero.params[0] == plain.params[0]);
  CHECK(zero.objective == plain.objective);
  // Started on the right, a plain descent stays in the shallow well.
  CHECK(plain.params[0] > 0);

  cfg.basin_hops = 20;
  cfg.basin_step = { 2.0 };
  cfg.seed = 7;
  const auto hop = basin_hopping(double_well, vec({ 1.3 }), b, cfg);
  const double root = left_well_root();
  CHECK(root == doctest::Approx(-1.446).epsilon(1e-3));
  CHECK(hop.params[0] == doctest::Approx(root).epsilon(1e-6));
  for (std::size_t i = 1; i < hop.trace.size(); ++i)
    CHECK(hop.trace[i] <= hop.trace[i - 1]);
  CHECK(hop.trace.size() == 21);

  const auto again = basin_hopping(double_well, vec({ 1.3 }), b, cfg);
  CHECK(again.params[0] == hop.params[0]);
  CHECK(again.objective == hop.objective);

  cfg.basin_hops = 10;
  const auto convex = basin_hopping(quad3, vec({ 0 }), box({ 0 }, { 10 }), cfg);
  CHECK(convex.params[0] == doctest::Approx(3).epsilon(1e-8));
}

TEST_CASE("basin hopping trace is monotone over random seeds") {
  FitConfig cfg;
  cfg.basin_hops = 15;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    const auto r = basin_hopping(rosenbrock, vec({ -1.2, 1 }), box({ -5, -5 }, { 5, 5 }), cfg);
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      CHECK(r.trace[i] <= r.trace[i - 1]);
  }
}

TEST_CASE("minimize_from_each picks the best start deterministically") {
  FitConfig cfg;
  std::vector<Vector> starts { vec({ 1.3 }), vec({ -0.5 }), vec({ 1.3 }) };
  const auto rs = minimize_from_each(double_well, starts, box({ -3 }, { 3 }), cfg);
  REQUIRE(rs.size() == 3);
  CHECK(best_index(rs) == std::optional<std::size_t>(1));
  CHECK(rs[0].params[0] == rs[2].params[0]);

  std::vector<OptResult> none(2);
  none[0].objective = none[1].objective = INFINITY;
  CHECK(!best_index(none).has_value());
  std::vector<OptResult> tie(2);
  CHECK(best_index(tie) == std::optional<std::size_t>(0));
}

TEST_CASE("logistic regression examples") {
  const std::vector<double> sx { 1, 2, 3, 4 };
  const std::vector<int> sy { 0, 0, 1, 1 };
  const auto sep = fit_logistic_binary(sx, sy);
  CHECK(sep.separated);
  CHECK(sep.bracket_lo == 2);
  CHECK(sep.bracket_hi == 3);
  CHECK(sep.crossing >= 2);
  CHECK(sep.crossing <= 3);
  CHECK(sep.increasing);

  const std::vector<double> xs { -1, 1, -2, 2 };
  const std::vector<int> ys { 0, 1, 0, 1 };
  const auto sym = fit_logistic_binary(xs, ys);
  CHECK(sym.separated);
  CHECK(sym.crossing == doctest::Approx(0));

  // The classes touch only at x = 1: the likelihood keeps rising as w grows
  // with the crossing pinned at 1, so this is reported as separated.
  const std::vector<double> ix { 0, 1, 1, 2 };
  const std::vector<int> iy { 0, 0, 1, 1 };
  const auto inter = fit_logistic_binary(ix, iy);
  CHECK(inter.separated);
  CHECK(inter.crossing == doctest::Approx(1.0).epsilon(1e-9));

  // With genuine overlap the estimate exists and symmetry puts it at 1.
  const std::vector<double> ox { 0, 0.5, 1.5, 2, 0.5, 1.5 };
  const std::vector<int> oy { 0, 0, 0, 1, 1, 1 };
  const auto over = fit_logistic_binary(ox, oy);
  REQUIRE(!over.separated);
  REQUIRE(over.w.has_value());
  CHECK(*over.b == doctest::Approx(-*over.w).epsilon(1e-9));
  CHECK(over.crossing == doctest::Approx(1.0).epsilon(1e-9));

  const std::vector<int> all_one { 1, 1, 1, 1 };
  CHECK_THROWS_AS(fit_logistic_binary(ix, all_one), Error);
  const std::vector<int> bad { 0, 2, 1, 1 };
  CHECK_THROWS_AS(fit_logistic_binary(ix, bad), InvalidArgument);
}

TEST_CASE("logistic crossing follows affine maps of x") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x, x2;
    std::vector<int> y;
    const double w = uniform(rng, 0.5, 3), c = uniform(rng, -2, 2);
    for (int i = 0; i < 40; ++i) {
      const double v = uniform(rng, -4, 4);
      x.push_back(v);
      x2.push_back(2 * v + 5);
      y.push_back(uniform01(rng) < sigmoid(w * (v - c)) ? 1 : 0);
    }
    const auto a = fit_logistic_binary(x, y);
    const auto b = fit_logistic_binary(x2, y);
    CHECK(a.separated == b.separated);
    CHECK(b.crossing == doctest::Approx(2 * a.crossing + 5).epsilon(1e-6));
    if (!a.separated) {
      // Gradient of the log-likelihood vanishes at the estimate.
      double gw = 0, gb = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - sigmoid(*a.w * x[i] + *a.b);
        gw += r * x[i];
        gb += r;
      }
      CHECK(std::abs(gw) < 1e-6);
      CHECK(std::abs(gb) < 1e-6);
    }
  }
}

TEST_CASE("random draws are platform independent") {
  std::mt19937_64 a(5), b(5);
  for (int i = 0; i < 100; ++i) {
    const double u = uniform01(a);
    CHECK(u >= 0);
    CHECK(u < 1);
    CHECK(u == uniform01(b));
  }
  std::mt19937_64 rng(1);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(sq / n == doctest::Approx(1).epsilon(0.03));
}
