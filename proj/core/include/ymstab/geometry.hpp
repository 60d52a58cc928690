#pragma once

// Base manifolds: round and conformal spheres, products of spheres and warped
// products I x S^{n-1}, each described in one chart.
//
// Sphere charts are stereographic projections from the north pole, so the
// chart origin is the south pole and the north pole is the single missing
// point. Warped products use (r, y) with y a stereographic chart of the fiber
// sphere. All metrics produced here are diagonal in their chart.

#include "ymstab/errors.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ymstab::geometry {

using Vec = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kDefaultChartBound = 4.0;

/// Central finite differences. order is 2 or 4.
struct FdConfig {
  int order = 4;
  double step = 1e-3;
};

template <class F>
auto fd_partial(F&& f, const Vec& x, int dir, const FdConfig& cfg) -> decltype(f(x)) {
  Vec p = x;
  const double h = cfg.step;
  if (cfg.order == 2) {
    p[dir] = x[dir] + h;
    auto up = f(p);
    p[dir] = x[dir] - h;
    auto dn = f(p);
    return (up - dn) * (1.0 / (2.0 * h));
  }
  if (cfg.order != 4) throw ParameterError("finite-difference order must be 2 or 4");
  p[dir] = x[dir] + h;
  auto p1 = f(p);
  p[dir] = x[dir] - h;
  auto m1 = f(p);
  p[dir] = x[dir] + 2.0 * h;
  auto p2 = f(p);
  p[dir] = x[dir] - 2.0 * h;
  auto m2 = f(p);
  return ((p1 - m1) * 8.0 - (p2 - m2)) * (1.0 / (12.0 * h));
}

// ---------------------------------------------------------------------------
// Fields

/// Smooth function on a chart. gradient/hessian are coordinate partials; when
/// absent, callers fall back to finite differences.
struct ScalarField {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Matrix(const Vec&)> hessian;
  bool constant = false;
  std::string label;

  double operator()(const Vec& x) const { return value(x); }

  static ScalarField constant_value(double c);
  ScalarField scaled(double s) const;
  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
};

/// Coordinate-basis components of a vector field.
struct VectorField {
  std::function<Vec(const Vec&)> components;
  Vec operator()(const Vec& x) const { return components(x); }
};

/// Warping profile f with analytic derivatives. height is the second
/// coordinate of the meridian curve used to embed I x S^{n-1} in R^{n+1};
/// it defaults to h(r) = r.
struct ProfileFunction {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
  std::function<double(double)> height;
  std::function<double(double)> dheight;

  static ProfileFunction sine();
  static ProfileFunction constant(double c);
  static ProfileFunction linear();
  static ProfileFunction exponential();
};

// ---------------------------------------------------------------------------
// Geometry description

struct RoundSphere {
  int n;
};
struct ConformalSphere {
  int n;
  ScalarField phi;
};
struct ProductSpheres {
  std::vector<int> dims;
};
struct WarpedProduct {
  double r_min;
  double r_max;  // may be +infinity
  int fiber_dim;
  ProfileFunction profile;
};

enum class GeometryKind { RoundSphere, ConformalSphere, ProductSpheres, WarpedProduct };

class GeometrySpec {
 public:
  using Variant = std::variant<RoundSphere, ConformalSphere, ProductSpheres, WarpedProduct>;

  static GeometrySpec round_sphere(int n);
  static GeometrySpec conformal_sphere(int n, ScalarField phi);
  static GeometrySpec product_spheres(std::vector<int> dims);
  static GeometrySpec warped_product(double r_min, double r_max, int fiber_dim, ProfileFunction profile);

  GeometryKind kind() const;
  int dim() const { return n_; }
  const Variant& variant() const { return v_; }
  bool is_sphere() const;
  std::string describe() const;

  /// Dimension of the ambient Euclidean space used by chart_embed.
  int ambient_dim() const;
  /// Offset of factor k in product chart coordinates.
  int factor_offset(int k) const;

  bool in_domain(const Vec& x) const;
  void require_domain(const Vec& x) const;

  double chart_bound = kDefaultChartBound;

 private:
  GeometrySpec(Variant v, int n) : v_(std::move(v)), n_(n) {}
  Variant v_;
  int n_;
};

enum class ChartId { Stereo, ProductStereo, Warped };

/// Chart point validated against the declared chart bound (|x| <= X_max for
/// sphere charts, r inside the interval for warped charts).
struct ChartPoint {
  ChartId chart;
  Vec coords;
  static ChartPoint make(const GeometrySpec& spec, Vec coords);
};

// ---------------------------------------------------------------------------
// Pointwise geometry

/// Gamma^k_ij stored as data[(k * n + i) * n + j].
struct Christoffel {
  int n = 0;
  std::vector<double> data;
  double operator()(int k, int i, int j) const { return data[(k * n + i) * n + j]; }
  double& operator()(int k, int i, int j) { return data[(k * n + i) * n + j]; }
};

/// R^l_kij, the l-component of R(d_i, d_j) d_k, stored as data[((l*n+k)*n+i)*n+j].
struct Riemann {
  int n = 0;
  std::vector<double> data;
  double operator()(int l, int k, int i, int j) const { return data[((l * n + k) * n + i) * n + j]; }
  /// R(X, Y) Z.
  Vec apply(const Vec& X, const Vec& Y, const Vec& Z) const;
};

/// Everything the form operators need at one point.
struct LocalGeometry {
  Matrix metric;
  Matrix inverse_metric;
  Christoffel gamma;
  Matrix frame;  // columns are a g-orthonormal frame
};

Vec chart_embed(const GeometrySpec& spec, const Vec& x);
/// d(chart_embed)/dx, ambient_dim x n.
Matrix embed_jacobian(const GeometrySpec& spec, const Vec& x);
/// Inverse of chart_embed for sphere charts (unit vector -> chart coords).
Vec sphere_chart_from_unit(const Vec& y);

Matrix metric_components(const GeometrySpec& spec, const Vec& x);
Christoffel christoffel(const GeometrySpec& spec, const Vec& x);
Riemann riemann(const GeometrySpec& spec, const Vec& x, const FdConfig& fd = {});
Vec ricci_transform(const GeometrySpec& spec, const Vec& x, const Vec& X, const FdConfig& fd = {});
/// Gram-Schmidt of the coordinate basis in index order.
Matrix orthonormal_frame(const GeometrySpec& spec, const Vec& x);
LocalGeometry local_geometry(const GeometrySpec& spec, const Vec& x);

/// Ric as a (1,1) tensor: column i is Ric(d_i).
Matrix ricci_matrix(const GeometrySpec& spec, const Vec& x, const FdConfig& fd = {});

/// Length scale of coordinate direction dir at x: max(1, |x_block|) on
/// stereographic blocks, distance to the interval ends for warped r. Finite
/// differences use cfg.step times this scale, which keeps nested stencils
/// well conditioned near the chart pole and near r_min.
double fd_scale(const GeometrySpec& spec, const Vec& x, int dir);

template <class F>
auto fd_partial_at(F&& f, const GeometrySpec& spec, const Vec& x, int dir, const FdConfig& cfg) -> decltype(f(x)) {
  return fd_partial(std::forward<F>(f), x, dir, FdConfig{cfg.order, cfg.step * fd_scale(spec, x, dir)});
}

Vec grad_scalar(const GeometrySpec& spec, const Vec& x, const ScalarField& u, const FdConfig& fd = {});
/// Laplace-Beltrami as div(grad u); on the unit sphere the linear functions
/// satisfy laplacian_scalar(f_v) = -n f_v.
double laplacian_scalar(const GeometrySpec& spec, const Vec& x, const ScalarField& u, const FdConfig& fd = {});
Vec scalar_partials(const ScalarField& u, const Vec& x, const FdConfig& fd = {});
Matrix scalar_hessian(const ScalarField& u, const Vec& x, const FdConfig& fd = {});

/// (DV)^k_i = d_i V^k + Gamma^k_ij V^j; D_X V = DV * X.
Matrix covariant_derivative(const GeometrySpec& spec, const Vec& x, const VectorField& V, const FdConfig& fd = {});
/// D*D V = -sum_i (D_ei D_ei V - D_{D_ei ei} V).
Vec rough_laplacian_vector(const GeometrySpec& spec, const Vec& x, const VectorField& V, const FdConfig& fd = {});

// ---------------------------------------------------------------------------
// Conformal vector fields

struct ConformalField {
  ScalarField f;   // f_v
  VectorField V;   // grad f_v in the round metric(s)
};

/// f_v = v . x restricted to the sphere, V = grad_g f_v for the round g.
ConformalField conformal_gradient_field(const GeometrySpec& spec, const Vec& v);
/// Same construction on factor k (0-based) of a product of spheres.
ConformalField product_conformal_field(const GeometrySpec& spec, int k, const Vec& v);
/// V = f(r) d/dr on a warped product.
VectorField radial_conformal_field(const GeometrySpec& spec);

/// Linear function w . chart_embed(x) on any geometry, with analytic
/// gradient and hessian.
ScalarField ambient_linear_function(const GeometrySpec& spec, const Vec& w);

/// Volume of the unit sphere S^n.
double sphere_volume(int n);

}  // namespace ymstab::geometry
