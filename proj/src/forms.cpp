//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#include "scalelaw/forms.hpp"

#include <cmath>
#include <string>

#include "scalelaw/error.hpp"

namespace scalelaw {

namespace {
  void require_positive(double v, const char *what) {
    if (!(v > 0) || !std::isfinite(v))
      throw InvalidArgument(std::string(what) + " must be finite and > 0");
  }

  void require_finite(double v, const char *what) {
    if (!std::isfinite(v))
      throw InvalidArgument(std::string(what) + " must be finite");
  }
}  // namespace

double IrreducibleParams::q_max() const { return std::exp(-E); }

const char *to_string(LinkKind kind) {
  switch (kind) {
  case LinkKind::kLinear:
    return "linear";
  case LinkKind::kLogistic:
    return "logistic";
  case LinkKind::kProxyLogistic:
    return "proxy_logistic";
  }
  return "linear";
}

LinkKind parse_link_kind(const std::string &name) {
  if (name == "linear")
    return LinkKind::kLinear;
  if (name == "logistic")
    return LinkKind::kLogistic;
  if (name == "proxy_logistic")
    return LinkKind::kProxyLogistic;
  throw InvalidArgument("unknown link kind '" + name + "'");
}

void validate(const PowerLawLogAcc &p) {
  require_positive(p.A, "power law A");
  require_positive(p.alpha, "power law alpha");
  require_positive(p.c_ref, "c_ref");
}

void validate(const BNSLParams &p) {
  require_finite(p.a, "bnsl a");
  require_finite(p.b, "bnsl b");
  require_finite(p.c0, "bnsl c0");
  require_finite(p.c1, "bnsl c1");
  require_positive(p.d1, "bnsl d1");
  require_finite(p.f1, "bnsl f1");
  if (p.f1 == 0)
    throw InvalidArgument("bnsl f1 must be nonzero");
  require_positive(p.c_ref, "c_ref");
}

void validate(const NDLawParams &p) {
  require_positive(p.A, "nd law A");
  require_positive(p.alpha, "nd law alpha");
  require_positive(p.B, "nd law B");
  require_positive(p.beta, "nd law beta");
}

void validate(const IrreducibleParams &p) {
  require_positive(p.A, "irreducible A");
  require_positive(p.alpha, "irreducible alpha");
  require_finite(p.E, "irreducible E");
  if (p.E < 0)
    throw InvalidArgument("irreducible E must be >= 0");
  require_positive(p.c_ref, "c_ref");
}

void validate(const PassKLawParams &p) {
  require_finite(p.logA, "pass@k logA");
  require_finite(p.alpha, "pass@k alpha");
  require_finite(p.beta, "pass@k beta");
  require_finite(p.delta, "pass@k delta");
  require_positive(p.c_ref, "c_ref");
}

void validate(const LinkParams &p) {
  std::visit(
      [](const auto &link) {
        using T = std::decay_t<decltype(link)>;
        require_finite(link.a, "link a");
        require_finite(link.b, "link b");
        if constexpr (std::is_same_v<T, LogisticLink>) {
          require_finite(link.k, "link k");
          require_finite(link.l0, "link L0");
        }
      },
      p.value);
}

double sigmoid(double z) {
  if (z >= 0)
    return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double eval_power_law(const PowerLawLogAcc &p, double c) {
  if (!(c > 0))
    throw InvalidArgument("eval_power_law: compute must be > 0");
  return std::exp(-p.A * std::pow(c / p.c_ref, -p.alpha));
}

double eval_bnsl(const BNSLParams &p, double c) {
  if (!(c > 0))
    throw InvalidArgument("eval_bnsl: compute must be > 0");
  if (p.b == 0)
    return p.a;
  const double u = std::log(c / p.c_ref);
  const double z = (u - std::log(p.d1)) / p.f1;
  // (1 + e^z)^(-c1 f1) via softplus keeps extreme x / d1 ratios finite.
  const double log_term = -p.c0 * u - p.c1 * p.f1 * softplus(z);
  return p.a + p.b * std::exp(log_term);
}

double eval_nd_law(const NDLawParams &p, double n, double d) {
  if (!(n > 0) || !(d > 0))
    throw InvalidArgument("eval_nd_law: n and d must be > 0");
  return std::exp(-p.A * std::pow(n, -p.alpha) - p.B * std::pow(d, -p.beta));
}

double eval_irreducible(const IrreducibleParams &p, double c) {
  if (!(c > 0))
    throw InvalidArgument("eval_irreducible: compute must be > 0");
  return std::exp(-p.A * std::pow(c / p.c_ref, -p.alpha) - p.E);
}

double eval_passk_law(const PassKLawParams &p, double c, int k) {
  if (!(c > 0))
    throw InvalidArgument("eval_passk_law: compute must be > 0");
  if (k < 1)
    throw InvalidArgument("eval_passk_law: k must be >= 1");
  const double u = std::log(c / p.c_ref);
  const double lk = std::log(static_cast<double>(k));
  return std::exp(
      -std::exp(p.logA + p.alpha * u + p.beta * lk + p.delta * u * lk));
}

double eval_link(const LinkParams &p, double l) {
  struct Visitor {
    double l;
    double operator()(const LinearLink &v) const { return v.a + v.b * l; }
    double operator()(const LogisticLink &v) const {
      return v.a * sigmoid(v.k * (l - v.l0)) + v.b;
    }
    double operator()(const ProxyLogisticLink &v) const {
      return sigmoid(v.a * l - v.b);
    }
  };
  return std::visit(Visitor { l }, p.value);
}

double passk_exact(double q, int k) {
  if (!(q >= 0 && q <= 1))
    throw InvalidArgument("passk_exact: q must lie in [0, 1]");
  if (k < 1)
    throw InvalidArgument("passk_exact: k must be >= 1");
  if (q == 1)
    return 1;
  return -std::expm1(static_cast<double>(k) * std::log1p(-q));
}

PassKBounds passk_bounds(double q, int k) {
  if (!(q >= 0 && q <= 1))
    throw InvalidArgument("passk_bounds: q must lie in [0, 1]");
  if (k < 1)
    throw InvalidArgument("passk_bounds: k must be >= 1");
  const double kq = static_cast<double>(k) * q;
  return { kq * std::exp(-kq), -std::expm1(-kq), std::min(kq, 1.0) };
}

namespace fitspace {

  double power_law_loglog(const Vector &theta, double u, Vector *grad) {
    if (grad != nullptr) {
      grad->resize(2);
      (*grad) << 1.0, -u;
    }
    return theta[0] - theta[1] * u;
  }

  double passk_loglog(const Vector &theta, double u, double lk, Vector *grad) {
    if (grad != nullptr) {
      grad->resize(4);
      (*grad) << 1.0, u, lk, u * lk;
    }
    return theta[0] + theta[1] * u + theta[2] * lk + theta[3] * u * lk;
  }

  double nd_neglog(const Vector &theta, double u, double v, Vector *grad) {
    const double alpha = std::exp(theta[1]);
    const double beta = std::exp(theta[3]);
    const double tn = std::exp(theta[0] - alpha * u);
    const double td = std::exp(theta[2] - beta * v);
    if (grad != nullptr) {
      grad->resize(4);
      (*grad) << tn, -tn * u * alpha, td, -td * v * beta;
    }
    return tn + td;
  }

  double irreducible_neglog(const Vector &theta, double u, Vector *grad) {
    const double alpha = std::exp(theta[1]);
    const double t = std::exp(theta[0] - alpha * u);
    if (grad != nullptr) {
      grad->resize(3);
      (*grad) << t, -t * u * alpha, 1.0;
    }
    return t + theta[2];
  }

  double bnsl_acc(const Vector &theta, double u, Vector *grad) {
    const double a = theta[0], b = theta[1], c0 = theta[2], c1 = theta[3];
    const double ln_d1 = theta[4], f1 = theta[5];
    const double z = (u - ln_d1) / f1;
    const double s = softplus(z);
    const double e = std::exp(-c0 * u - c1 * f1 * s);
    if (grad != nullptr) {
      const double sig = sigmoid(z);
      grad->resize(6);
      (*grad) << 1.0, e, -b * e * u, -b * e * f1 * s, b * e * c1 * sig,
          -b * e * c1 * (s - sig * z);
    }
    return a + b * e;
  }

  double stage1_proxy(const Vector &theta, double u, Vector *grad) {
    const double alpha = std::exp(theta[2]);
    const double t = std::exp(theta[1] - alpha * u);
    if (grad != nullptr) {
      grad->resize(3);
      (*grad) << 1.0, t, -t * u * alpha;
    }
    return theta[0] + t;
  }

  double linear_link(const Vector &theta, double l, Vector *grad) {
    if (grad != nullptr) {
      grad->resize(2);
      (*grad) << 1.0, l;
    }
    return theta[0] + theta[1] * l;
  }

  double logistic_link(const Vector &theta, double l, Vector *grad) {
    const double a = theta[0], k = theta[2], l0 = theta[3];
    const double s = sigmoid(k * (l - l0));
    if (grad != nullptr) {
      const double ds = s * (1 - s);
      grad->resize(4);
      (*grad) << s, 1.0, a * ds * (l - l0), -a * ds * k;
    }
    return a * s + theta[1];
  }

  double proxy_link(const Vector &theta, double l, Vector *grad) {
    const double s = sigmoid(theta[0] * l - theta[1]);
    if (grad != nullptr) {
      const double ds = s * (1 - s);
      grad->resize(2);
      (*grad) << ds * l, -ds;
    }
    return s;
  }

}  // namespace fitspace

}  // namespace scalelaw
