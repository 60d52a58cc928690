#include "ymstab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace ymstab::geometry {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Stereographic chart of the unit sphere S^d acting on a block of coordinates.
struct Stereo {
  static double sigma(const Vec& x, int off, int d) {
    return 2.0 / (1.0 + x.segment(off, d).squaredNorm());
  }
  static void embed(const Vec& x, int off, int d, Vec& out, int aoff) {
    const double s = x.segment(off, d).squaredNorm();
    const double sg = 2.0 / (1.0 + s);
    for (int a = 0; a < d; ++a) out[aoff + a] = sg * x[off + a];
    out[aoff + d] = (s - 1.0) / (1.0 + s);
  }
  static void jacobian(const Vec& x, int off, int d, Matrix& J, int aoff) {
    const double sg = sigma(x, off, d);
    const double s2 = sg * sg;
    for (int i = 0; i < d; ++i) {
      for (int a = 0; a < d; ++a)
        J(aoff + a, off + i) = (a == i ? sg : 0.0) - s2 * x[off + a] * x[off + i];
      J(aoff + d, off + i) = s2 * x[off + i];
    }
  }
  // Second derivatives of ambient component a (0..d) as a d x d block.
  static void hessian(const Vec& x, int off, int d, int a, Matrix& H, int hoff) {
    const double sg = sigma(x, off, d);
    const double s2 = sg * sg, s3 = s2 * sg;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double xi = x[off + i], xj = x[off + j];
        double v;
        if (a == d) {
          v = (i == j ? s2 : 0.0) - 2.0 * s3 * xi * xj;
        } else {
          const double xa = x[off + a];
          v = -s2 * ((a == i ? xj : 0.0) + (a == j ? xi : 0.0) + (i == j ? xa : 0.0)) +
              2.0 * s3 * xa * xi * xj;
        }
        H(hoff + i, hoff + j) = v;
      }
  }
  // Christoffel symbols of sigma^2 * delta on the block, added to G.
  static void christoffel(const Vec& x, int off, int d, Christoffel& G, double scale_dw = 1.0) {
    const double sg = sigma(x, off, d);
    for (int k = 0; k < d; ++k)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          const double wi = -sg * x[off + i] * scale_dw;
          const double wj = -sg * x[off + j] * scale_dw;
          const double wk = -sg * x[off + k] * scale_dw;
          double v = 0.0;
          if (k == i) v += wj;
          if (k == j) v += wi;
          if (i == j) v -= wk;
          G(off + k, off + i, off + j) += v;
        }
  }
};

Vec warped_fiber(const Vec& x) { return x.tail(x.size() - 1); }

}  // namespace

// ---------------------------------------------------------------------------
// ScalarField / ProfileFunction

ScalarField ScalarField::constant_value(double c) {
  ScalarField s;
  s.value = [c](const Vec&) { return c; };
  s.gradient = [](const Vec& x) { return Vec::Zero(x.size()).eval(); };
  s.hessian = [](const Vec& x) { return Matrix::Zero(x.size(), x.size()).eval(); };
  s.constant = true;
  std::ostringstream os;
  os << c;
  s.label = os.str();
  return s;
}

ScalarField ScalarField::scaled(double c) const {
  ScalarField s;
  auto base = *this;
  s.value = [base, c](const Vec& x) { return c * base.value(x); };
  if (gradient) s.gradient = [base, c](const Vec& x) { return (c * base.gradient(x)).eval(); };
  if (hessian) s.hessian = [base, c](const Vec& x) { return (c * base.hessian(x)).eval(); };
  s.constant = constant || c == 0.0;
  std::ostringstream os;
  os << c << "*" << label;
  s.label = os.str();
  return s;
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  ScalarField s;
  s.value = [a, b](const Vec& x) { return a.value(x) + b.value(x); };
  if (a.gradient && b.gradient)
    s.gradient = [a, b](const Vec& x) { return (a.gradient(x) + b.gradient(x)).eval(); };
  if (a.hessian && b.hessian)
    s.hessian = [a, b](const Vec& x) { return (a.hessian(x) + b.hessian(x)).eval(); };
  s.constant = a.constant && b.constant;
  s.label = a.label + "+" + b.label;
  return s;
}

ProfileFunction ProfileFunction::sine() {
  return {"sin",
          [](double r) { return std::sin(r); },
          [](double r) { return std::cos(r); },
          [](double r) { return -std::sin(r); },
          [](double r) { return -std::cos(r); },
          [](double r) { return std::sin(r); }};
}

ProfileFunction ProfileFunction::constant(double c) {
  std::ostringstream os;
  os << "const(" << c << ")";
  return {os.str(),
          [c](double) { return c; },
          [](double) { return 0.0; },
          [](double) { return 0.0; },
          [](double r) { return r; },
          [](double) { return 1.0; }};
}

ProfileFunction ProfileFunction::linear() {
  // Flat R^n in polar coordinates; the embedding drops the height coordinate.
  return {"linear",
          [](double r) { return r; },
          [](double) { return 1.0; },
          [](double) { return 0.0; },
          [](double) { return 0.0; },
          [](double) { return 0.0; }};
}

ProfileFunction ProfileFunction::exponential() {
  return {"exp",
          [](double r) { return std::exp(r); },
          [](double r) { return std::exp(r); },
          [](double r) { return std::exp(r); },
          [](double r) { return r; },
          [](double) { return 1.0; }};
}

// ---------------------------------------------------------------------------
// GeometrySpec

GeometrySpec GeometrySpec::round_sphere(int n) {
  if (n < 2) throw ParameterError("sphere dimension must be >= 2");
  return {RoundSphere{n}, n};
}

GeometrySpec GeometrySpec::conformal_sphere(int n, ScalarField phi) {
  if (n < 2) throw ParameterError("sphere dimension must be >= 2");
  if (!phi.value) throw ParameterError("conformal factor has no value callback");
  return {ConformalSphere{n, std::move(phi)}, n};
}

GeometrySpec GeometrySpec::product_spheres(std::vector<int> dims) {
  if (dims.empty()) throw ParameterError("product of spheres needs at least one factor");
  int n = 0;
  for (int d : dims) {
    if (d < 2) throw ParameterError("product factor dimension must be >= 2");
    n += d;
  }
  return {ProductSpheres{std::move(dims)}, n};
}

GeometrySpec GeometrySpec::warped_product(double r_min, double r_max, int fiber_dim, ProfileFunction profile) {
  if (!(r_min < r_max)) throw ParameterError("warped product needs r_min < r_max");
  if (fiber_dim < 2) throw ParameterError("warped fiber dimension must be >= 2");
  if (!profile.f || !profile.df || !profile.d2f) throw ParameterError("profile needs f, f', f''");
  if (!profile.height) {
    profile.height = [](double r) { return r; };
    profile.dheight = [](double) { return 1.0; };
  }
  return {WarpedProduct{r_min, r_max, fiber_dim, std::move(profile)}, fiber_dim + 1};
}

GeometryKind GeometrySpec::kind() const { return static_cast<GeometryKind>(v_.index()); }

bool GeometrySpec::is_sphere() const {
  return kind() == GeometryKind::RoundSphere || kind() == GeometryKind::ConformalSphere;
}

std::string GeometrySpec::describe() const {
  return std::visit(Overloaded{
                        [](const RoundSphere& s) { return "S^" + std::to_string(s.n); },
                        [](const ConformalSphere& s) { return "(S^" + std::to_string(s.n) + ", e^{2phi} g), phi=" + s.phi.label; },
                        [](const ProductSpheres& p) {
                          std::string out;
                          for (std::size_t i = 0; i < p.dims.size(); ++i)
                            out += (i ? "xS^" : "S^") + std::to_string(p.dims[i]);
                          return out;
                        },
                        [](const WarpedProduct& w) {
                          std::ostringstream os;
                          os << "(" << w.r_min << "," << w.r_max << ")xS^" << w.fiber_dim << " f=" << w.profile.name;
                          return os.str();
                        }},
                    v_);
}

int GeometrySpec::ambient_dim() const {
  return std::visit(Overloaded{
                        [](const RoundSphere& s) { return s.n + 1; },
                        [](const ConformalSphere& s) { return s.n + 1; },
                        [](const ProductSpheres& p) {
                          int m = 0;
                          for (int d : p.dims) m += d + 1;
                          return m;
                        },
                        [](const WarpedProduct& w) { return w.fiber_dim + 2; }},
                    v_);
}

int GeometrySpec::factor_offset(int k) const {
  const auto* p = std::get_if<ProductSpheres>(&v_);
  if (!p) throw UnsupportedGeometryError("factor_offset needs a product of spheres");
  if (k < 0 || k >= static_cast<int>(p->dims.size())) throw RangeError("factor index out of range");
  int off = 0;
  for (int i = 0; i < k; ++i) off += p->dims[i];
  return off;
}

bool GeometrySpec::in_domain(const Vec& x) const {
  if (x.size() != n_) return false;
  if (!x.allFinite()) return false;
  if (const auto* w = std::get_if<WarpedProduct>(&v_)) return x[0] > w->r_min && x[0] < w->r_max;
  return true;
}

void GeometrySpec::require_domain(const Vec& x) const {
  if (x.size() != n_)
    throw DimensionError("point has " + std::to_string(x.size()) + " coordinates, geometry has dimension " +
                         std::to_string(n_));
  if (!in_domain(x)) {
    std::ostringstream os;
    os << "point (" << x.transpose() << ") outside chart domain of " << describe();
    throw DomainError(os.str());
  }
}

ChartPoint ChartPoint::make(const GeometrySpec& spec, Vec coords) {
  spec.require_domain(coords);
  ChartId id = ChartId::Stereo;
  switch (spec.kind()) {
    case GeometryKind::RoundSphere:
    case GeometryKind::ConformalSphere:
      if (coords.norm() > spec.chart_bound) throw DomainError("chart point beyond chart bound");
      break;
    case GeometryKind::ProductSpheres: {
      id = ChartId::ProductStereo;
      const auto& p = std::get<ProductSpheres>(spec.variant());
      int off = 0;
      for (int d : p.dims) {
        if (coords.segment(off, d).norm() > spec.chart_bound) throw DomainError("chart point beyond chart bound");
        off += d;
      }
      break;
    }
    case GeometryKind::WarpedProduct:
      id = ChartId::Warped;
      if (warped_fiber(coords).norm() > spec.chart_bound) throw DomainError("fiber chart point beyond chart bound");
      break;
  }
  return {id, std::move(coords)};
}

// ---------------------------------------------------------------------------
// Embedding

Vec chart_embed(const GeometrySpec& spec, const Vec& x) {
  spec.require_domain(x);
  Vec out(spec.ambient_dim());
  std::visit(Overloaded{
                 [&](const RoundSphere& s) { Stereo::embed(x, 0, s.n, out, 0); },
                 [&](const ConformalSphere& s) { Stereo::embed(x, 0, s.n, out, 0); },
                 [&](const ProductSpheres& p) {
                   int off = 0, aoff = 0;
                   for (int d : p.dims) {
                     Stereo::embed(x, off, d, out, aoff);
                     off += d;
                     aoff += d + 1;
                   }
                 },
                 [&](const WarpedProduct& w) {
                   const int m = w.fiber_dim;
                   Vec z(m + 1);
                   Vec y = warped_fiber(x);
                   Stereo::embed(y, 0, m, z, 0);
                   const double f = w.profile.f(x[0]);
                   out.head(m + 1) = f * z;
                   out[m + 1] = w.profile.height(x[0]);
                 }},
             spec.variant());
  return out;
}

Matrix embed_jacobian(const GeometrySpec& spec, const Vec& x) {
  spec.require_domain(x);
  Matrix J = Matrix::Zero(spec.ambient_dim(), spec.dim());
  std::visit(Overloaded{
                 [&](const RoundSphere& s) { Stereo::jacobian(x, 0, s.n, J, 0); },
                 [&](const ConformalSphere& s) { Stereo::jacobian(x, 0, s.n, J, 0); },
                 [&](const ProductSpheres& p) {
                   int off = 0, aoff = 0;
                   for (int d : p.dims) {
                     Stereo::jacobian(x, off, d, J, aoff);
                     off += d;
                     aoff += d + 1;
                   }
                 },
                 [&](const WarpedProduct& w) {
                   const int m = w.fiber_dim;
                   Vec y = warped_fiber(x);
                   Vec z(m + 1);
                   Stereo::embed(y, 0, m, z, 0);
                   Matrix Jz = Matrix::Zero(m + 1, m);
                   Stereo::jacobian(y, 0, m, Jz, 0);
                   const double r = x[0];
                   J.block(0, 0, m + 1, 1) = w.profile.df(r) * z;
                   J.block(0, 1, m + 1, m) = w.profile.f(r) * Jz;
                   J(m + 1, 0) = w.profile.dheight(r);
                 }},
             spec.variant());
  return J;
}

namespace {

// Hessians of the ambient coordinates; element a is n x n.
std::vector<Matrix> embed_hessians(const GeometrySpec& spec, const Vec& x) {
  const int n = spec.dim();
  std::vector<Matrix> H(spec.ambient_dim(), Matrix::Zero(n, n));
  auto sphere_block = [&](int off, int d, int aoff) {
    for (int a = 0; a <= d; ++a) Stereo::hessian(x, off, d, a, H[aoff + a], off);
  };
  switch (spec.kind()) {
    case GeometryKind::RoundSphere:
    case GeometryKind::ConformalSphere:
      sphere_block(0, n, 0);
      break;
    case GeometryKind::ProductSpheres: {
      int off = 0, aoff = 0;
      for (int d : std::get<ProductSpheres>(spec.variant()).dims) {
        sphere_block(off, d, aoff);
        off += d;
        aoff += d + 1;
      }
      break;
    }
    case GeometryKind::WarpedProduct: {
      FdConfig fd{4, 1e-4};
      for (int j = 0; j < n; ++j) {
        Matrix dJ = fd_partial_at([&](const Vec& p) { return embed_jacobian(spec, p); }, spec, x, j, fd);
        for (int a = 0; a < spec.ambient_dim(); ++a) H[a].col(j) = dJ.row(a).transpose();
      }
      for (auto& h : H) h = (0.5 * (h + h.transpose())).eval();
      break;
    }
  }
  return H;
}

}  // namespace

Vec sphere_chart_from_unit(const Vec& y) {
  const int n = static_cast<int>(y.size()) - 1;
  const double denom = 1.0 - y[n];
  if (!(denom > 0.0)) throw DomainError("north pole is not covered by the stereographic chart");
  return y.head(n) / denom;
}

// ---------------------------------------------------------------------------
// Metric and connection

Matrix metric_components(const GeometrySpec& spec, const Vec& x) {
  spec.require_domain(x);
  const int n = spec.dim();
  Matrix g = Matrix::Zero(n, n);
  std::visit(Overloaded{
                 [&](const RoundSphere&) {
                   const double s = Stereo::sigma(x, 0, n);
                   g.diagonal().setConstant(s * s);
                 },
                 [&](const ConformalSphere& c) {
                   const double s = Stereo::sigma(x, 0, n);
                   g.diagonal().setConstant(std::exp(2.0 * c.phi(x)) * s * s);
                 },
                 [&](const ProductSpheres& p) {
                   int off = 0;
                   for (int d : p.dims) {
                     const double s = Stereo::sigma(x, off, d);
                     g.diagonal().segment(off, d).setConstant(s * s);
                     off += d;
                   }
                 },
                 [&](const WarpedProduct& w) {
                   const Vec y = warped_fiber(x);
                   const double s = Stereo::sigma(y, 0, w.fiber_dim);
                   const double f = w.profile.f(x[0]);
                   g(0, 0) = 1.0;
                   g.diagonal().tail(w.fiber_dim).setConstant(f * f * s * s);
                 }},
             spec.variant());
  return g;
}

Christoffel christoffel(const GeometrySpec& spec, const Vec& x) {
  spec.require_domain(x);
  const int n = spec.dim();
  Christoffel G{n, std::vector<double>(static_cast<std::size_t>(n) * n * n, 0.0)};
  std::visit(Overloaded{
                 [&](const RoundSphere&) { Stereo::christoffel(x, 0, n, G); },
                 [&](const ConformalSphere& c) {
                   Stereo::christoffel(x, 0, n, G);
                   // D~_X Y = D_X Y + X(phi) Y + Y(phi) X - g(X,Y) grad(phi), g round.
                   const Vec dphi = scalar_partials(c.phi, x);
                   const double s = Stereo::sigma(x, 0, n);
                   const double g_ii = s * s, ginv_ii = 1.0 / g_ii;
                   for (int k = 0; k < n; ++k)
                     for (int i = 0; i < n; ++i)
                       for (int j = 0; j < n; ++j) {
                         double v = 0.0;
                         if (k == i) v += dphi[j];
                         if (k == j) v += dphi[i];
                         if (i == j) v -= g_ii * ginv_ii * dphi[k];
                         G(k, i, j) += v;
                       }
                 },
                 [&](const ProductSpheres& p) {
                   int off = 0;
                   for (int d : p.dims) {
                     Stereo::christoffel(x, off, d, G);
                     off += d;
                   }
                 },
                 [&](const WarpedProduct& w) {
                   const int m = w.fiber_dim;
                   const Vec y = warped_fiber(x);
                   const double r = x[0];
                   const double f = w.profile.f(r), df = w.profile.df(r);
                   const double s = Stereo::sigma(y, 0, m);
                   Christoffel Gf{m, std::vector<double>(static_cast<std::size_t>(m) * m * m, 0.0)};
                   Stereo::christoffel(y, 0, m, Gf);
                   for (int a = 0; a < m; ++a) {
                     G(0, 1 + a, 1 + a) = -f * df * s * s;  // Gamma^r_ab = -f f' h_ab
                     G(1 + a, 0, 1 + a) = df / f;            // Gamma^a_rb = (f'/f) delta
                     G(1 + a, 1 + a, 0) = df / f;
                     for (int b = 0; b < m; ++b)
                       for (int c = 0; c < m; ++c) G(1 + a, 1 + b, 1 + c) += Gf(a, b, c);
                   }
                 }},
             spec.variant());
  return G;
}

Matrix orthonormal_frame(const GeometrySpec& spec, const Vec& x) {
  const Matrix g = metric_components(spec, x);
  const int n = spec.dim();
  Matrix E = Matrix::Identity(n, n);
  for (int a = 0; a < n; ++a) {
    Vec v = E.col(a);
    for (int b = 0; b < a; ++b) v -= (E.col(b).dot(g * v)) * E.col(b);
    const double nrm2 = v.dot(g * v);
    if (!(nrm2 > 0.0)) throw EvaluationError("degenerate metric in orthonormal_frame");
    E.col(a) = v / std::sqrt(nrm2);
  }
  return E;
}

LocalGeometry local_geometry(const GeometrySpec& spec, const Vec& x) {
  LocalGeometry lg;
  lg.metric = metric_components(spec, x);
  lg.inverse_metric = lg.metric.diagonal().cwiseInverse().asDiagonal();
  lg.gamma = christoffel(spec, x);
  const int n = spec.dim();
  // Metrics are diagonal in every supported chart, where Gram-Schmidt of the
  // coordinate basis reduces to normalisation.
  lg.frame = Matrix::Zero(n, n);
  for (int a = 0; a < n; ++a) lg.frame(a, a) = 1.0 / std::sqrt(lg.metric(a, a));
  return lg;
}

Riemann riemann(const GeometrySpec& spec, const Vec& x, const FdConfig& fd) {
  const int n = spec.dim();
  const Christoffel G = christoffel(spec, x);
  auto gamma_vec = [&](const Vec& p) {
    Christoffel c = christoffel(spec, p);
    return Vec(Eigen::Map<Vec>(c.data.data(), static_cast<Eigen::Index>(c.data.size())));
  };
  std::vector<Vec> dG(n);
  for (int i = 0; i < n; ++i) dG[i] = fd_partial_at(gamma_vec, spec, x, i, fd);
  auto dg = [&](int i, int l, int j, int k) { return dG[i][(l * n + j) * n + k]; };

  Riemann R{n, std::vector<double>(static_cast<std::size_t>(n) * n * n * n, 0.0)};
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = dg(i, l, j, k) - dg(j, l, i, k);
          for (int m = 0; m < n; ++m) v += G(l, i, m) * G(m, j, k) - G(l, j, m) * G(m, i, k);
          R.data[((l * n + k) * n + i) * n + j] = v;
        }
  return R;
}

Vec Riemann::apply(const Vec& X, const Vec& Y, const Vec& Z) const {
  Vec out = Vec::Zero(n);
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[l] += (*this)(l, k, i, j) * Z[k] * X[i] * Y[j];
  return out;
}

Matrix ricci_matrix(const GeometrySpec& spec, const Vec& x, const FdConfig& fd) {
  const Riemann R = riemann(spec, x, fd);
  const Matrix E = orthonormal_frame(spec, x);
  const int n = spec.dim();
  Matrix M = Matrix::Zero(n, n);
  for (int c = 0; c < n; ++c) {
    Vec X = Vec::Unit(n, c);
    for (int a = 0; a < n; ++a) M.col(c) += R.apply(X, E.col(a), E.col(a));
  }
  return M;
}

Vec ricci_transform(const GeometrySpec& spec, const Vec& x, const Vec& X, const FdConfig& fd) {
  return ricci_matrix(spec, x, fd) * X;
}

double fd_scale(const GeometrySpec& spec, const Vec& x, int dir) {
  switch (spec.kind()) {
    case GeometryKind::RoundSphere:
    case GeometryKind::ConformalSphere:
      return std::max(1.0, x.norm());
    case GeometryKind::ProductSpheres: {
      int off = 0;
      for (int d : std::get<ProductSpheres>(spec.variant()).dims) {
        if (dir < off + d) return std::max(1.0, x.segment(off, d).norm());
        off += d;
      }
      throw RangeError("direction index out of range");
    }
    case GeometryKind::WarpedProduct: {
      const auto& w = std::get<WarpedProduct>(spec.variant());
      if (dir == 0) return std::min(x[0] - w.r_min, w.r_max - x[0]);
      return std::max(1.0, x.tail(x.size() - 1).norm());
    }
  }
  return 1.0;
}

// ---------------------------------------------------------------------------
// Scalars

Vec scalar_partials(const ScalarField& u, const Vec& x, const FdConfig& fd) {
  if (u.gradient) return u.gradient(x);
  Vec d(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    d[i] = fd_partial([&](const Vec& p) { return u.value(p); }, x, static_cast<int>(i), fd);
  return d;
}

Matrix scalar_hessian(const ScalarField& u, const Vec& x, const FdConfig& fd) {
  if (u.hessian) return u.hessian(x);
  const auto n = x.size();
  Matrix H(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    H.col(j) = fd_partial([&](const Vec& p) { return scalar_partials(u, p, fd); }, x, static_cast<int>(j), fd);
  return 0.5 * (H + H.transpose());
}

Vec grad_scalar(const GeometrySpec& spec, const Vec& x, const ScalarField& u, const FdConfig& fd) {
  const Matrix g = metric_components(spec, x);
  return g.diagonal().cwiseInverse().cwiseProduct(scalar_partials(u, x, fd));
}

double laplacian_scalar(const GeometrySpec& spec, const Vec& x, const ScalarField& u, const FdConfig& fd) {
  const LocalGeometry lg = local_geometry(spec, x);
  const Vec du = scalar_partials(u, x, fd);
  const Matrix H = scalar_hessian(u, x, fd);
  const int n = spec.dim();
  double out = 0.0;
  for (int i = 0; i < n; ++i) {
    double hij = H(i, i);
    for (int k = 0; k < n; ++k) hij -= lg.gamma(k, i, i) * du[k];
    out += lg.inverse_metric(i, i) * hij;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vector fields

Matrix covariant_derivative(const GeometrySpec& spec, const Vec& x, const VectorField& V, const FdConfig& fd) {
  const int n = spec.dim();
  const Christoffel G = christoffel(spec, x);
  const Vec v = V(x);
  Matrix D(n, n);
  for (int i = 0; i < n; ++i) D.col(i) = fd_partial_at(V.components, spec, x, i, fd);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) D(k, i) += G(k, i, j) * v[j];
  return D;
}

Vec rough_laplacian_vector(const GeometrySpec& spec, const Vec& x, const VectorField& V, const FdConfig& fd) {
  const int n = spec.dim();
  const LocalGeometry lg = local_geometry(spec, x);
  const Matrix D = covariant_derivative(spec, x, V, fd);
  // nabla_i (DV)^k_j = d_i (DV)^k_j + Gamma^k_im (DV)^m_j - Gamma^m_ij (DV)^k_m
  Vec out = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    const Matrix dD = fd_partial_at([&](const Vec& p) { return covariant_derivative(spec, p, V, fd); }, spec, x, i, fd);
    Vec t = dD.col(i);
    for (int k = 0; k < n; ++k)
      for (int m = 0; m < n; ++m) t[k] += lg.gamma(k, i, m) * D(m, i) - lg.gamma(m, i, i) * D(k, m);
    out -= lg.inverse_metric(i, i) * t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conformal fields

ScalarField ambient_linear_function(const GeometrySpec& spec, const Vec& w) {
  if (w.size() != spec.ambient_dim())
    throw DimensionError("ambient vector has size " + std::to_string(w.size()) + ", expected " +
                         std::to_string(spec.ambient_dim()));
  ScalarField s;
  s.value = [spec, w](const Vec& x) { return w.dot(chart_embed(spec, x)); };
  s.gradient = [spec, w](const Vec& x) { return Vec(embed_jacobian(spec, x).transpose() * w); };
  s.hessian = [spec, w](const Vec& x) {
    const auto H = embed_hessians(spec, x);
    Matrix out = Matrix::Zero(spec.dim(), spec.dim());
    for (std::size_t a = 0; a < H.size(); ++a) out += w[static_cast<Eigen::Index>(a)] * H[a];
    return out;
  };
  s.label = "f_v";
  return s;
}

ConformalField conformal_gradient_field(const GeometrySpec& spec, const Vec& v) {
  if (!spec.is_sphere()) throw UnsupportedGeometryError("conformal_gradient_field needs a sphere");
  const int n = spec.dim();
  if (v.size() != n + 1) throw DimensionError("conformal vector must live in R^{n+1}");
  ConformalField cf;
  cf.f = ambient_linear_function(spec, v);
  const ScalarField f = cf.f;
  cf.V.components = [f, n](const Vec& x) {
    const double s = Stereo::sigma(x, 0, n);
    return Vec(f.gradient(x) / (s * s));
  };
  return cf;
}

ConformalField product_conformal_field(const GeometrySpec& spec, int k, const Vec& v) {
  const auto* p = std::get_if<ProductSpheres>(&spec.variant());
  if (!p) throw UnsupportedGeometryError("product_conformal_field needs a product of spheres");
  if (k < 0 || k >= static_cast<int>(p->dims.size())) throw RangeError("factor index out of range");
  const int d = p->dims[k];
  if (v.size() != d + 1) throw DimensionError("conformal vector has wrong size for factor");
  const int off = spec.factor_offset(k);
  int aoff = 0;
  for (int i = 0; i < k; ++i) aoff += p->dims[i] + 1;
  Vec w = Vec::Zero(spec.ambient_dim());
  w.segment(aoff, d + 1) = v;
  ConformalField cf;
  cf.f = ambient_linear_function(spec, w);
  const ScalarField f = cf.f;
  cf.V.components = [f, off, d](const Vec& x) {
    const double s = Stereo::sigma(x, off, d);
    Vec g = f.gradient(x) / (s * s);
    Vec out = Vec::Zero(x.size());
    out.segment(off, d) = g.segment(off, d);
    return out;
  };
  return cf;
}

VectorField radial_conformal_field(const GeometrySpec& spec) {
  const auto* w = std::get_if<WarpedProduct>(&spec.variant());
  if (!w) throw UnsupportedGeometryError("radial_conformal_field needs a warped product");
  auto f = w->profile.f;
  return {[f](const Vec& x) {
    Vec out = Vec::Zero(x.size());
    out[0] = f(x[0]);
    return out;
  }};
}

double sphere_volume(int n) {
  if (n < 0) throw ParameterError("sphere dimension must be >= 0");
  const double h = 0.5 * (n + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

}  // namespace ymstab::geometry
