//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
// Helpers shared by the unit tests and the acceptance binary.
//
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "scalelaw/forms.hpp"

namespace scalelaw::testing {

inline double uniform(std::mt19937_64 &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// One fit-space function bound to a random input, plus a parameter sampler.
struct GradForm {
  std::string name;
  std::function<Vector(std::mt19937_64 &)> draw_theta;
  // Returns f(theta) at a freshly drawn input; the input is captured by the
  // returned closure so the same point is used for all perturbations.
  std::function<std::function<double(const Vector &, Vector *)>(std::mt19937_64 &)>
      draw_input;
};

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x: v)
    out[i++] = x;
  return out;
}

inline std::vector<GradForm> grad_forms() {
  using R = std::mt19937_64;
  std::vector<GradForm> f;
  f.push_back({ "power_law_loglog",
                [](R &r) { return vec({ uniform(r, -3, 3), uniform(r, 0.05, 2) }); },
                [](R &r) {
                  const double u = uniform(r, -7, 4);
                  return [u](const Vector &t, Vector *g) {
                    return fitspace::power_law_loglog(t, u, g);
                  };
                } });
  f.push_back({ "passk_loglog",
                [](R &r) {
                  return vec({ uniform(r, -1, 1), uniform(r, -1, 1), uniform(r, -1, 1),
                               uniform(r, -1, 1) });
                },
                [](R &r) {
                  const double u = uniform(r, -7, 4), lk = uniform(r, 0, std::log(1024.0));
                  return [u, lk](const Vector &t, Vector *g) {
                    return fitspace::passk_loglog(t, u, lk, g);
                  };
                } });
  f.push_back({ "nd_neglog",
                [](R &r) {
                  return vec({ uniform(r, -3, 3), std::log(uniform(r, 0.05, 2)),
                               uniform(r, -3, 3), std::log(uniform(r, 0.05, 2)) });
                },
                [](R &r) {
                  const double u = uniform(r, -4, 4), v = uniform(r, -4, 4);
                  return [u, v](const Vector &t, Vector *g) {
                    return fitspace::nd_neglog(t, u, v, g);
                  };
                } });
  f.push_back({ "irreducible_neglog",
                [](R &r) {
                  return vec({ uniform(r, -3, 3), std::log(uniform(r, 0.05, 2)),
                               uniform(r, 0, 1) });
                },
                [](R &r) {
                  const double u = uniform(r, -7, 4);
                  return [u](const Vector &t, Vector *g) {
                    return fitspace::irreducible_neglog(t, u, g);
                  };
                } });
  f.push_back({ "bnsl_acc",
                [](R &r) {
                  return vec({ uniform(r, -1, 1), uniform(r, -2, 2), uniform(r, -0.5, 0.5),
                               uniform(r, 0, 3), uniform(r, -5, 5), uniform(r, 0.2, 5) });
                },
                [](R &r) {
                  const double u = uniform(r, -7, 4);
                  return [u](const Vector &t, Vector *g) {
                    return fitspace::bnsl_acc(t, u, g);
                  };
                } });
  f.push_back({ "stage1_proxy",
                [](R &r) {
                  return vec({ uniform(r, 0, 3), uniform(r, -2, 2),
                               std::log(uniform(r, 0.05, 1)) });
                },
                [](R &r) {
                  const double u = uniform(r, -7, 4);
                  return [u](const Vector &t, Vector *g) {
                    return fitspace::stage1_proxy(t, u, g);
                  };
                } });
  f.push_back({ "linear_link",
                [](R &r) { return vec({ uniform(r, -1, 1), uniform(r, -1, 1) }); },
                [](R &r) {
                  const double l = uniform(r, 0, 4);
                  return [l](const Vector &t, Vector *g) {
                    return fitspace::linear_link(t, l, g);
                  };
                } });
  f.push_back({ "logistic_link",
                [](R &r) {
                  return vec({ uniform(r, -1, 1), uniform(r, -1, 1), uniform(r, -5, 5),
                               uniform(r, 0, 4) });
                },
                [](R &r) {
                  const double l = uniform(r, 0, 4);
                  return [l](const Vector &t, Vector *g) {
                    return fitspace::logistic_link(t, l, g);
                  };
                } });
  f.push_back({ "proxy_link",
                [](R &r) { return vec({ uniform(r, -5, 5), uniform(r, -5, 5) }); },
                [](R &r) {
                  const double l = uniform(r, 0, 4);
                  return [l](const Vector &t, Vector *g) {
                    return fitspace::proxy_link(t, l, g);
                  };
                } });
  return f;
}

struct GradCheck {
  int draws = 0;
  int failures = 0;
  double worst = 0;  // worst relative error seen
};

// Central differences with step 1e-6 * max(1, |theta_i|). A component
// passes when |analytic - numeric| <= rel * max(|analytic|, |numeric|, floor).
// The floor 1e-5 (1 + |f|) puts rel * floor at ten times the rounding noise
// of a difference quotient, eps |f| / h ~ 1e-10 |f|; without it vanishing
// gradient components compare noise against noise.
inline GradCheck check_gradients(const GradForm &form, int draws, std::uint64_t seed,
                                 double rel = 1e-4) {
  std::mt19937_64 rng(seed);
  GradCheck out;
  for (int i = 0; i < draws; ++i) {
    const Vector theta = form.draw_theta(rng);
    const auto fn = form.draw_input(rng);
    Vector g;
    const double f0 = fn(theta, &g);
    bool ok = std::isfinite(f0) && g.size() == theta.size();
    for (Eigen::Index j = 0; ok && j < theta.size(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(theta[j]));
      Vector tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      const double num = (fn(tp, nullptr) - fn(tm, nullptr)) / (2 * h);
      const double scale = std::max({ std::abs(g[j]), std::abs(num), 1e-5 * (1 + std::abs(f0)) });
      const double err = std::abs(g[j] - num) / scale;
      out.worst = std::max(out.worst, err);
      ok = err <= rel;
    }
    ++out.draws;
    out.failures += ok ? 0 : 1;
  }
  return out;
}

}  // namespace scalelaw::testing
