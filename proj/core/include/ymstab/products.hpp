#pragma once

// Test variations on S^{n_1} x ... x S^{n_q} with the product metric, built
// from the gradient conformal fields of one factor at a time.

#include "ymstab/variation.hpp"

namespace ymstab::products {

using forms::Connection;
using forms::Field;
using geometry::Matrix;
using geometry::Vec;
using quadrature::Estimate;
using quadrature::Rule;

struct ProductVariation {
  int factor = 0;   // 0-based
  Vec v;            // length n_k + 1
  Field B;          // i_{V^k} R
};

ProductVariation product_variation(const Connection& c, int k, const Vec& v);

/// delta i_{V^k} R + (delta R)(V^k) + sum_i R(D_{e_i} V^k, e_i); zero for every connection.
Field divergence_check(const Connection& c, int k, const Vec& v);

/// Worst |delta R| / max(1, |R|) over seeded points; throws PreconditionError
/// above tol.
void require_yang_mills(const Connection& c, double tol = 1e-4, int points = 8);

struct CouplingResult {
  double lhs = 0.0, rhs = 0.0;
  double sigma_lhs = 0.0, sigma_rhs = 0.0, sigma_diff = 0.0;
  double cross_term = 0.0, sigma_cross = 0.0;  // the f_v nabla R part of rhs
  bool agree(double rel = 1e-2) const;
};

/// lhs = int <delta d B + r(B), B> for B = i_{V^k} R; rhs = int of
///   sum_p sum_i (2 + 2 delta_pk - n_p) |R(V^k, e_i^p)|^2
///   + 2 f_{v^k} sum_p sum_j sum_{i in k} <nabla_{e_i^k} R(e_i^k, e_j^p), R(V^k, e_j^p)>.
CouplingResult block_coupling_check(const Connection& c, int k, const Vec& v, const Rule& rule);

/// Pointwise rhs integrand of the trace over every factor:
///   sum_{p,k} sum_{i in p} sum_{j in k} (2 + 2 delta_pk - n_p) |R(e_j^k, e_i^p)|^2.
double product_trace_integrand(const Connection& c, const Vec& x);

/// lhs = sum_k sum_l L(i_{V_l^k} R) over bases of each R^{n_k+1} (identity
/// unless given); rhs = int product_trace_integrand.
variation::TraceResult product_trace(const Connection& c, const Rule& rule,
                                    const std::vector<Matrix>& bases = {});

/// max |R(e_j^k, e_i^p)| over p != k at x.
double block_coupling(const Connection& c, const Vec& x);

struct ProductVerdict {
  bool no_weakly_stable = false;  // every n_i >= 5
  bool no_stable = false;         // every n_i >= 4
  std::string verdict;
};

ProductVerdict product_criterion_report(const std::vector<int>& dims);

}  // namespace ymstab::products
