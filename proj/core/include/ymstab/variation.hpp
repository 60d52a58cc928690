#pragma once

// Yang-Mills functional and its second variation over a conformal sphere
// (S^n, e^{2 phi} g). Every operator below is written in the round metric g
// of the connection's geometry with phi carried explicitly, so that
//   YM = 1/2 int e^{(n-4) phi} |R|^2,
//   S(B) = delta d B - (n-4) i_{grad phi} d B + r(B).
// With phi constant the same code runs on products and warped products.
//
// Laplacians: laplacian_scalar is div grad. The closed-form templates use the
// opposite sign, Lap = -div grad, and say so at each use.

#include "ymstab/catalog.hpp"
#include "ymstab/forms.hpp"
#include "ymstab/quadrature.hpp"

#include <array>
#include <string>
#include <vector>

namespace ymstab::variation {

using forms::Connection;
using forms::Field;
using forms::TensorValue;
using geometry::GeometrySpec;
using geometry::Matrix;
using geometry::ScalarField;
using geometry::Vec;
using quadrature::Estimate;
using quadrature::Rule;

struct VariationConfig {
  double lambda = 0.0;
  ScalarField phi = ScalarField::constant_value(0.0);
  double fd_step_t = 1e-3;
  quadrature::QuadratureConfig quad;
};

struct SecondVariationResult {
  double value_operator_form = 0.0;
  double value_direct_form = 0.0;
  double value_fd_form = 0.0;
  double mc_std_error = 0.0;    // largest standard error of the three paths
  double sigma_op_direct = 0.0; // standard error of (operator - direct)
  double sigma_fd_direct = 0.0; // standard error of (fd - direct)

  /// Paths agree within max(3 sigma, rel * |direct|).
  bool paths_agree(double rel = 1e-2) const;
};

/// The connection of an entry read on the round metric, plus the conformal
/// factor of the entry's geometry (zero unless it is a conformal sphere).
struct Background {
  Connection c;
  ScalarField phi;
};
Background round_background(const catalog::CatalogEntry& e, const geometry::FdConfig& fd = {});

/// e^{(n-4) phi}.
double weight(const GeometrySpec& spec, const ScalarField& phi, const Vec& x);

Estimate ym_functional(const Connection& c, const ScalarField& phi, const Rule& rule);

/// delta R - (n-4) i_{grad phi} R.
Field ym_residual(const Connection& c, const ScalarField& phi);

Field S_operator(const Connection& c, const ScalarField& phi, const Field& B);

/// All three second-variation paths on one rule. t is the step of the
/// t-difference oracle.
SecondVariationResult second_variation(const Connection& c, const ScalarField& phi, const Field& B, const Rule& rule,
                                       double t = 1e-3);

/// Weighted pairing int e^{(n-4) phi} <a, b>.
Estimate weighted_inner(const ScalarField& phi, const Field& a, const Field& b, const Rule& rule);

/// B_v = i_{V~} R with V~ = e^{lambda phi} V and V = grad f_v on the round sphere.
Field test_variation(const Connection& c, const ScalarField& phi, double lambda, const Vec& v);

/// Right-hand side of the S(B_v) formula for a Yang-Mills background,
/// evaluated term by term:
///   (4-n + l Lap phi - (l^2 + (n-4) l)|G|^2) R(V~,X) + (4-n+3l) e^{l phi} f_v R(G,X)
///   - l^2 X(phi) R(G,V~) - l nabla_G R(V~,X) - l nabla_V~ R(G,X)
///   + (n-4) R(D_V~ G, X) + l R(V~, D_X G)
/// with G = grad phi and Lap = -div grad.
Field radial_variation_rhs(const Connection& c, const ScalarField& phi, double lambda, const Vec& v);

/// S(B_v) - radial_variation_rhs. Only constant phi is admitted: no Yang-Mills
/// connection is available in closed form for a nonconstant phi.
Field radial_variation_residual(const Connection& c, const ScalarField& phi, double lambda, const Vec& v);

/// (4-n) i_G d(i_V~ R) minus its expansion
///   (4-n)(nabla_V~ R(G,e_j) - 2 e^{l phi} f_v R(G,e_j) + l |G|^2 R(V~,e_j) + l e_j(phi) R(G,V~)).
/// Holds for every connection.
Field leibniz_expansion_residual(const Connection& c, const ScalarField& phi, double lambda, const Vec& v);

struct TraceResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double sigma_lhs = 0.0;
  double sigma_rhs = 0.0;
  double sigma_diff = 0.0;     // standard error of lhs - rhs
  std::vector<double> terms;   // per-basis-vector operator-form values

  bool agree(double rel = 1e-2) const;
};

/// The closed-form trace integrand
///   e^{(n-4+2l) phi} [((4-n)/2 Lap phi + 2 (l + (n-4)/2)^2 |G|^2 + 8 - 2n)|R|^2
///                     + l (8 - 2n - l) |i_G R|^2],  Lap = -div grad.
double sphere_trace_integrand(const Connection& c, const ScalarField& phi, double lambda, const Vec& x);

/// lhs = sum_k int e^{(n-4) phi} <S(B_{v_k}), B_{v_k}> over the columns of
/// basis (identity by default); rhs = int sphere_trace_integrand. Constant phi only.
TraceResult sphere_trace(const Connection& c, const ScalarField& phi, double lambda, const Rule& rule,
                         const Matrix& basis = Matrix());

/// Abstract one-point data for the fiberwise trace algebra. The point is
/// x = e_{n+1} on S^n with tangent frame e_1..e_n and zero Christoffels.
struct SyntheticTensorPack {
  int n = 0;
  liealg::StructureGroup group;
  TensorValue R;        // rank 2, alternating
  TensorValue dR;       // rank 3, dR[k,i,j] = (nabla_k R)_ij, second Bianchi holds
  Vec grad_phi;         // G
  Matrix hess_phi;      // symmetric
  double phi = 0.0;

  /// Seeded random pack; dR is projected so the second Bianchi identity holds.
  static SyntheticTensorPack random(int n, liealg::StructureGroup group, std::uint64_t seed);
  void validate() const;
};

struct ShadowResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double cross_term = 0.0;       // sum_k <(4-n+3l) e^{l phi} f_k R(G,e_j), R(V~_k,e_j)>
  double grad_trace_lhs = 0.0;   // sum_kj <e_j(phi) R(G,V~_k), R(V~_k,e_j)>
  double grad_trace_rhs = 0.0;   // -e^{2 l phi} |i_G R|^2
  double nabla_trace_lhs = 0.0;  // sum_kj <nabla_V~k R(G,e_j), R(V~_k,e_j)>
  double nabla_trace_rhs = 0.0;  // 1/2 e^{2 l phi} G(|R|^2)
};

/// Sum over an orthonormal basis of R^{n+1} of q(v,v) = sum_j <RHS_v(e_j), R(V~,e_j)>
/// from the S(B_v) template, against the traced integrand before integration
/// by parts:
///   e^{2 l phi}[2(4-n+l Lap phi-(l^2+(n-4)l)|G|^2)|R|^2 + l^2 |i_G R|^2
///               - (3l/2) G(|R|^2) + (n-4+l) sum H_il <R_lj, R_ij>].
ShadowResult trace_algebra_shadow(const SyntheticTensorPack& pack, double lambda);

struct IbpResult {
  Estimate lhs1, rhs1, residual1;
  Estimate lhs2, rhs2, residual2;
};

/// With k = n-4+2l and Y(X) = sum_j <R(G,e_j), R(X,e_j)>:
///   (1) -int e^{k phi} div Y = k int e^{k phi} |i_G R|^2,
///   (2) 1/2 int e^{k phi} G(|R|^2) = 1/2 int e^{k phi} (Lap phi - k |G|^2) |R|^2,
/// Lap = -div grad. Both hold for every connection on a closed manifold.
IbpResult ibp_identities(const Connection& c, const ScalarField& phi, double lambda, const Rule& rule);

/// delta~(i_V~ R), with delta~ the codifferential of e^{2 phi} g.
Field conformal_divergence(const Connection& c, const ScalarField& phi, double lambda, const Vec& v);

/// delta~(i_V~ R) + delta~R(V~) + (l+2) R(V~, grad~ phi), grad~ phi = e^{-2 phi} grad phi.
/// Vanishes for every connection.
Field gauge_orthogonality(const Connection& c, const ScalarField& phi, double lambda, const Vec& v);

enum class LaplacianSign { DivGrad, NegDivGrad };
std::string laplacian_sign_name(LaplacianSign s);

struct ConventionVerdict {
  LaplacianSign sign;
  double weak_min = 0.0, weak_max = 0.0;     // 1/2 Lap - (n-4)/2 |G|^2 + 2
  double strong_min = 0.0, strong_max = 0.0; // (n-4)[1/2 Lap - (n+4)/2 |G|^2 + 2]
  double restated_max = 0.0;                 // (4-n)/2 Lap + (n^2-16)/2 |G|^2 + 8 - 2n
  bool weak_holds = false;                   // weak_min > 0 and n >= 5
  bool strong_holds = false;                 // strong_min >= 0
  std::string verdict;
};

struct CriterionReport {
  int n = 0;
  std::size_t points = 0;
  std::array<ConventionVerdict, 2> conventions;
  bool conventions_agree() const;
};

/// Evaluates both instability criteria at every node of the rule.
CriterionReport criterion_report(const ScalarField& phi, int n, const Rule& rule);

}  // namespace ymstab::variation
