//
// scalelaw - downstream scaling law fitting toolkit
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <string>
#include <variant>

#include <Eigen/Dense>

namespace scalelaw {

using Vector = Eigen::VectorXd;

inline constexpr double kDefaultCRef = 1e21;

/// -log Q' = A * (C / c_ref)^-alpha
struct PowerLawLogAcc {
  double A = 1;
  double alpha = 0.3;
  double c_ref = kDefaultCRef;
};

/// Q = a + b x^-c0 (1 + (x/d1)^(1/f1))^(-c1 f1), x = C / c_ref. With the
/// default c_ref of 1 the parameters are in raw-FLOPs units.
struct BNSLParams {
  double a = 0;
  double b = 0;
  double c0 = 0;
  double c1 = 0;
  double d1 = 1;
  double f1 = 1;
  double c_ref = 1;
};

/// -log Q' = A N^-alpha + B D^-beta, raw parameter and token counts.
struct NDLawParams {
  double A = 1;
  double alpha = 0.3;
  double B = 1;
  double beta = 0.3;
};

/// -log Q' = A (C / c_ref)^-alpha + E; the accuracy ceiling is exp(-E).
struct IrreducibleParams {
  double A = 1;
  double alpha = 0.3;
  double E = 0;
  double c_ref = kDefaultCRef;

  double q_max() const;
};

/// log(-log Q) = logA + alpha u + beta log k + delta u log k, u = log(C/c_ref).
struct PassKLawParams {
  double logA = 0;
  double alpha = 0;
  double beta = 0;
  double delta = 0;
  double c_ref = kDefaultCRef;
};

struct LinearLink {
  double a = 0;
  double b = 0;
};

struct LogisticLink {
  double a = 1;
  double b = 0;
  double k = 1;
  double l0 = 0;
};

struct ProxyLogisticLink {
  double a = 1;
  double b = 0;
};

enum class LinkKind { kLinear, kLogistic, kProxyLogistic };

struct LinkParams {
  std::variant<LinearLink, LogisticLink, ProxyLogisticLink> value;

  LinkKind kind() const { return static_cast<LinkKind>(value.index()); }
};

const char *to_string(LinkKind kind);
LinkKind parse_link_kind(const std::string &name);

void validate(const PowerLawLogAcc &p);
void validate(const BNSLParams &p);
void validate(const NDLawParams &p);
void validate(const IrreducibleParams &p);
void validate(const PassKLawParams &p);
void validate(const LinkParams &p);

double eval_power_law(const PowerLawLogAcc &p, double c);
double eval_bnsl(const BNSLParams &p, double c);
double eval_nd_law(const NDLawParams &p, double n, double d);
double eval_irreducible(const IrreducibleParams &p, double c);
double eval_passk_law(const PassKLawParams &p, double c, int k);
double eval_link(const LinkParams &p, double l);

double passk_exact(double q, int k);

struct PassKBounds {
  double loose_lower;
  double tight_lower;
  double upper;
};

PassKBounds passk_bounds(double q, int k);

double sigmoid(double z);
double softplus(double z);

/// Fit-space parameterizations. Every function returns the model value at a
/// single input for parameter vector `theta` and, when `grad` is non-null,
/// writes d value / d theta into it. Positive parameters enter as logs and
/// compute-like inputs as logs of reference-scaled quantities.
namespace fitspace {

  // theta = (ln A, alpha); value = ln(-ln Q') at u = ln(C / c_ref).
  double power_law_loglog(const Vector &theta, double u, Vector *grad);

  // theta = (logA, alpha, beta, delta); value = ln(-ln Q) at u, lk = ln k.
  double passk_loglog(const Vector &theta, double u, double lk, Vector *grad);

  // theta = (ln A', ln alpha, ln B', ln beta); value = -ln Q' at
  // u = ln(N / n_ref), v = ln(D / d_ref) with A' = A n_ref^-alpha.
  double nd_neglog(const Vector &theta, double u, double v, Vector *grad);

  // theta = (ln A, ln alpha, E); value = -ln Q' at u = ln(C / c_ref).
  double irreducible_neglog(const Vector &theta, double u, Vector *grad);

  // theta = (a, b, c0, c1, ln d1, f1) in c_ref units; value = Q at u.
  double bnsl_acc(const Vector &theta, double u, Vector *grad);

  // theta = (l0, ln a, ln alpha); value = proxy level at u.
  double stage1_proxy(const Vector &theta, double u, Vector *grad);

  // theta = (a, b); value = a + b l.
  double linear_link(const Vector &theta, double l, Vector *grad);

  // theta = (a, b, k, L0); value = a sigmoid(k (l - L0)) + b.
  double logistic_link(const Vector &theta, double l, Vector *grad);

  // theta = (a, b); value = sigmoid(a l - b).
  double proxy_link(const Vector &theta, double l, Vector *grad);

}  // namespace fitspace

}  // namespace scalelaw
