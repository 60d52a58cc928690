#pragma once

// Exterior calculus for g-valued forms over a connection d + A.
//
// Covariant derivative in chart components:
//   (nabla_i T)_J = d_i T_J + [A_i, T_J] - sum_s Gamma^m_{i j_s} T_{J, j_s -> m}.
// Frame contractions use the orthonormal frame of the geometry unless a
// frame is passed explicitly.

#include "ymstab/quadrature.hpp"
#include "ymstab/tensor.hpp"

#include <optional>

namespace ymstab::forms {

/// A potential with its curvature. R is computed once per point and shared by
/// every operator built on the connection.
struct Connection {
  Field A;
  Field R;
  FdConfig fd;

  static Connection from_potential(const Field& A, const FdConfig& fd = {});
  const GeometrySpec& spec() const { return A.spec(); }
  const StructureGroup& group() const { return A.group(); }
  /// The same potential read on another geometry with the same chart.
  Connection rebind(SpecPtr spec) const;
};

/// R_ij = d_i A_j - d_j A_i + [A_i, A_j] (coordinate path, no Christoffels).
Field curvature(const Field& A, const FdConfig& fd = {});

/// nabla T as a tensor of rank+1; the derivative slot comes first.
Field nabla(const Connection& c, const Field& T);
TensorValue nabla_at(const Connection& c, const Field& T, const Vec& x);

Field d_nabla(const Connection& c, const Field& psi);
Field delta_nabla(const Connection& c, const Field& psi);
TensorValue delta_nabla_at(const Connection& c, const Field& psi, const Vec& x,
                           const std::optional<Matrix>& frame = std::nullopt);
/// e^{-2 phi} (delta psi + (2p - n) i_{grad phi} psi) with delta and grad taken
/// in the geometry of psi.
Field delta_nabla_conformal(const Connection& c, const Field& psi, const geometry::ScalarField& phi);

Field interior_product(const geometry::VectorField& X, const Field& psi);
TensorValue interior_product_value(const Vec& X, const TensorValue& psi);

/// [B ^ C](X, Y) = [B(X), C(Y)] - [B(Y), C(X)] for 1-forms.
Field wedge_bracket(const Field& B, const Field& C);

/// (1/p!) sum over frame indices of <psi, omega>.
double pointwise_inner_value(const GeometrySpec& spec, const StructureGroup& g, const Vec& x, const TensorValue& a,
                             const TensorValue& b, const std::optional<Matrix>& frame = std::nullopt);
double pointwise_inner(const Field& a, const Field& b, const Vec& x);
double pointwise_norm2(const Field& a, const Vec& x);
quadrature::Estimate global_inner(const Field& a, const Field& b, const quadrature::Rule& rule);

/// Curvature action: degree 1, r(phi)(X) = sum_i [R(e_i, X), phi(e_i)];
/// degree 2, r(psi)(X,Y) = sum_i [R(e_i,X), psi(e_i,Y)] - [R(e_i,Y), psi(e_i,X)].
Field curvature_action(const Connection& c, const Field& psi);
TensorValue curvature_action_value(const GeometrySpec& spec, const Vec& x, const TensorValue& R,
                                   const TensorValue& psi, const std::optional<Matrix>& frame = std::nullopt);

Field rough_laplacian(const Connection& c, const Field& psi);
Field hodge_laplacian(const Connection& c, const Field& psi);

/// Hodge Laplacian minus the Weitzenboeck right-hand side, degree 1 or 2.
Field bochner_residual(const Connection& c, const Field& psi);

/// Frame components (Z, W) = (e_a, e_b) of
///   (nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y]) psi - [R(X,Y), psi]
///     + psi(R_M(X,Y)., .) + psi(., R_M(X,Y).)
/// at x, for a 2-form psi.
TensorValue commutation_residual(const Connection& c, const Field& psi, const geometry::VectorField& X,
                                 const geometry::VectorField& Y, const Vec& x);

/// Residual norms: the frame norm of the difference and of the reference.
struct Residual {
  double abs = 0.0;
  double scale = 0.0;
  double rel() const { return scale > 0.0 ? abs / scale : abs; }
};

/// Norm of a tensor value in the orthonormal frame (sqrt of 1/p! contraction).
double frame_norm(const GeometrySpec& spec, const StructureGroup& g, const Vec& x, const TensorValue& t);

}  // namespace ymstab::forms
