#include "ymstab/forms.hpp"

#include <cmath>

namespace ymstab::forms {

using geometry::Christoffel;
using geometry::ScalarField;
using geometry::VectorField;

namespace {

// out += coef * (a b - b a) on m x m blocks.
inline void add_bracket(double* out, const double* a, const double* b, int m, double coef) {
  ConstMatMap A(a, m, m), B(b, m, m);
  MatMap O(out, m, m);
  O.noalias() += coef * (A * B);
  O.noalias() -= coef * (B * A);
}

inline void axpy(double* out, const double* in, std::size_t len, double coef) {
  for (std::size_t i = 0; i < len; ++i) out[i] += coef * in[i];
}

Matrix frame_or_default(const GeometrySpec& spec, const Vec& x, const std::optional<Matrix>& frame) {
  return frame ? *frame : geometry::orthonormal_frame(spec, x);
}

// Inverse metric h^{ik} = sum_a E_a^i E_a^k.
Matrix inverse_from_frame(const Matrix& E) { return E * E.transpose(); }

double factorial(int p) {
  double f = 1.0;
  for (int i = 2; i <= p; ++i) f *= i;
  return f;
}

void require_degree(const Field& f, int lo, int hi, const char* op) {
  if (f.rank() < lo || f.rank() > hi)
    throw DegreeError(std::string(op) + ": degree " + std::to_string(f.rank()) + " outside [" + std::to_string(lo) +
                      ", " + std::to_string(hi) + "]");
}

}  // namespace

// ---------------------------------------------------------------------------

Connection Connection::from_potential(const Field& A, const FdConfig& fd) {
  if (A.rank() != 1) throw DegreeError("a connection potential must be a 1-form");
  return Connection{A, curvature(A, fd).cached(), fd};
}

Connection Connection::rebind(SpecPtr spec) const {
  return Connection{A.rebind(spec), R.rebind(spec), fd};
}

Field curvature(const Field& A, const FdConfig& fd) {
  if (A.rank() != 1) throw DegreeError("curvature needs a 1-form potential");
  const int n = A.dim(), m = A.group().matrix_size();
  return Field(
      A.spec_ptr(), A.group(), 2,
      [A, fd, n, m](const Vec& x) {
        const TensorValue a = A(x);
        std::vector<TensorValue> da(n);
        for (int i = 0; i < n; ++i) da[i] = partial(A, x, i, fd);
        TensorValue R(2, n, m);
        const std::size_t B = R.block();
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            double* o = R.ptr(static_cast<std::size_t>(i) * n + j);
            axpy(o, da[i].ptr(j), B, 1.0);
            axpy(o, da[j].ptr(i), B, -1.0);
            add_bracket(o, a.ptr(i), a.ptr(j), m, 1.0);
          }
        return R;
      },
      "R(" + A.label() + ")");
}

TensorValue nabla_at(const Connection& c, const Field& T, const Vec& x) {
  const GeometrySpec& spec = T.spec();
  const int n = spec.dim(), m = T.group().matrix_size(), r = T.rank();
  const TensorValue t0 = T(x);
  const TensorValue a0 = c.A(x);
  const Christoffel G = geometry::christoffel(spec, x);
  TensorValue out(r + 1, n, m);
  const std::size_t cnt = t0.count(), B = t0.block();
  std::vector<int> J(r > 0 ? r : 1), K(r > 0 ? r : 1);
  for (int i = 0; i < n; ++i) {
    const TensorValue dt = partial(T, x, i, c.fd);
    for (std::size_t f = 0; f < cnt; ++f) {
      double* o = out.ptr(static_cast<std::size_t>(i) * cnt + f);
      axpy(o, dt.ptr(f), B, 1.0);
      add_bracket(o, a0.ptr(i), t0.ptr(f), m, 1.0);
      if (r == 0) continue;
      t0.unflatten(f, J.data());
      for (int s = 0; s < r; ++s) {
        K = J;
        for (int mm = 0; mm < n; ++mm) {
          const double g = G(mm, i, J[s]);
          if (g == 0.0) continue;
          K[s] = mm;
          axpy(o, t0.ptr(t0.index(K.data())), B, -g);
        }
      }
    }
  }
  return out;
}

Field nabla(const Connection& c, const Field& T) {
  if (T.rank() > 3) throw DegreeError("nabla: rank above 3");
  return Field(T.spec_ptr(), T.group(), T.rank() + 1, [c, T](const Vec& x) { return nabla_at(c, T, x); },
               "nabla(" + T.label() + ")");
}

Field d_nabla(const Connection& c, const Field& psi) {
  require_degree(psi, 0, 2, "d_nabla");
  const int p = psi.rank();
  return Field(
      psi.spec_ptr(), psi.group(), p + 1,
      [c, psi, p](const Vec& x) {
        const TensorValue D = nabla_at(c, psi, x);
        if (p == 0) return D;
        TensorValue out(p + 1, D.dim(), D.msize());
        std::vector<int> idx(p + 1), src(p + 1);
        const std::size_t B = D.block();
        for (std::size_t f = 0; f < out.count(); ++f) {
          out.unflatten(f, idx.data());
          double* o = out.ptr(f);
          for (int s = 0; s <= p; ++s) {
            src[0] = idx[s];
            for (int t = 0, u = 1; t <= p; ++t)
              if (t != s) src[u++] = idx[t];
            axpy(o, D.ptr(D.index(src.data())), B, (s % 2) ? -1.0 : 1.0);
          }
        }
        return out;
      },
      "d(" + psi.label() + ")");
}

TensorValue delta_nabla_at(const Connection& c, const Field& psi, const Vec& x, const std::optional<Matrix>& frame) {
  if (psi.rank() < 1) throw DegreeError("delta_nabla: degree 0 has no codifferential");
  const Matrix h = inverse_from_frame(frame_or_default(psi.spec(), x, frame));
  const TensorValue D = nabla_at(c, psi, x);
  const int p = psi.rank(), n = D.dim();
  TensorValue out(p - 1, n, D.msize());
  const std::size_t cnt = out.count(), B = D.block();
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double w = h(i, k);
      if (w == 0.0) continue;
      const std::size_t base = (static_cast<std::size_t>(i) * n + k) * cnt;
      for (std::size_t f = 0; f < cnt; ++f) axpy(out.ptr(f), D.ptr(base + f), B, -w);
    }
  return out;
}

Field delta_nabla(const Connection& c, const Field& psi) {
  require_degree(psi, 1, 3, "delta_nabla");
  return Field(psi.spec_ptr(), psi.group(), psi.rank() - 1,
               [c, psi](const Vec& x) { return delta_nabla_at(c, psi, x); }, "delta(" + psi.label() + ")");
}

Field delta_nabla_conformal(const Connection& c, const Field& psi, const ScalarField& phi) {
  require_degree(psi, 1, 3, "delta_nabla_conformal");
  if (!psi.spec().is_sphere()) throw UnsupportedGeometryError("conformal codifferential needs a sphere geometry");
  const int p = psi.rank(), n = psi.dim();
  return Field(
      psi.spec_ptr(), psi.group(), p - 1,
      [c, psi, phi, p, n](const Vec& x) {
        TensorValue d = delta_nabla_at(c, psi, x);
        const Vec g = geometry::grad_scalar(psi.spec(), x, phi, c.fd);
        d += interior_product_value(g, psi(x)) * static_cast<double>(2 * p - n);
        d *= std::exp(-2.0 * phi(x));
        return d;
      },
      "delta~(" + psi.label() + ")");
}

TensorValue interior_product_value(const Vec& X, const TensorValue& psi) {
  if (psi.rank() < 1) throw DegreeError("interior product of a degree-0 form");
  const int n = psi.dim();
  TensorValue out(psi.rank() - 1, n, psi.msize());
  const std::size_t cnt = out.count(), B = psi.block();
  for (int i = 0; i < n; ++i) {
    if (X[i] == 0.0) continue;
    for (std::size_t f = 0; f < cnt; ++f) axpy(out.ptr(f), psi.ptr(static_cast<std::size_t>(i) * cnt + f), B, X[i]);
  }
  return out;
}

Field interior_product(const VectorField& X, const Field& psi) {
  require_degree(psi, 1, 4, "interior_product");
  return Field(psi.spec_ptr(), psi.group(), psi.rank() - 1,
               [X, psi](const Vec& x) { return interior_product_value(X(x), psi(x)); }, "i(" + psi.label() + ")");
}

Field wedge_bracket(const Field& B, const Field& C) {
  if (B.rank() != 1 || C.rank() != 1) throw DegreeError("wedge_bracket needs two 1-forms");
  const int n = B.dim(), m = B.group().matrix_size();
  return Field(
      B.spec_ptr(), B.group(), 2,
      [B, C, n, m](const Vec& x) {
        const TensorValue b = B(x), c = C(x);
        TensorValue out(2, n, m);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            double* o = out.ptr(static_cast<std::size_t>(i) * n + j);
            add_bracket(o, b.ptr(i), c.ptr(j), m, 1.0);
            add_bracket(o, b.ptr(j), c.ptr(i), m, -1.0);
          }
        return out;
      },
      "[" + B.label() + "^" + C.label() + "]");
}

double pointwise_inner_value(const GeometrySpec& spec, const StructureGroup& g, const Vec& x, const TensorValue& a,
                             const TensorValue& b, const std::optional<Matrix>& frame) {
  if (a.rank() != b.rank() || a.dim() != b.dim() || a.msize() != b.msize())
    throw DimensionError("pointwise inner product of differently shaped forms");
  const int p = a.rank();
  double s = 0.0;
  if (!frame) {
    // Diagonal metrics: weight each component by the product of g^{ii}.
    const Vec ginv = geometry::metric_components(spec, x).diagonal().cwiseInverse();
    std::vector<int> idx(p > 0 ? p : 1);
    for (std::size_t f = 0; f < a.count(); ++f) {
      a.unflatten(f, idx.data());
      double w = 1.0;
      for (int t = 0; t < p; ++t) w *= ginv[idx[t]];
      s += w * liealg::inner_raw(g, a.ptr(f), b.ptr(f));
    }
  } else {
    const TensorValue fa = frame_components(a, *frame), fb = frame_components(b, *frame);
    for (std::size_t f = 0; f < fa.count(); ++f) s += liealg::inner_raw(g, fa.ptr(f), fb.ptr(f));
  }
  return s / factorial(p);
}

double pointwise_inner(const Field& a, const Field& b, const Vec& x) {
  return pointwise_inner_value(a.spec(), a.group(), x, a(x), b(x));
}

double pointwise_norm2(const Field& a, const Vec& x) {
  const TensorValue v = a(x);
  return pointwise_inner_value(a.spec(), a.group(), x, v, v);
}

double frame_norm(const GeometrySpec& spec, const StructureGroup& g, const Vec& x, const TensorValue& t) {
  return std::sqrt(std::max(0.0, pointwise_inner_value(spec, g, x, t, t)));
}

quadrature::Estimate global_inner(const Field& a, const Field& b, const quadrature::Rule& rule) {
  return quadrature::integrate(rule, [&](const Vec& x) { return pointwise_inner(a, b, x); });
}

TensorValue curvature_action_value(const GeometrySpec& spec, const Vec& x, const TensorValue& R,
                                   const TensorValue& psi, const std::optional<Matrix>& frame) {
  const int p = psi.rank(), n = psi.dim(), m = psi.msize();
  if (p != 1 && p != 2) throw DegreeError("curvature action is defined for degrees 1 and 2");
  Matrix h;
  if (frame) {
    h = inverse_from_frame(*frame);
  } else {
    h = geometry::metric_components(spec, x).diagonal().cwiseInverse().asDiagonal();
  }
  TensorValue out(p, n, m);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double w = h(i, k);
      if (w == 0.0) continue;
      if (p == 1) {
        for (int j = 0; j < n; ++j) add_bracket(out.ptr(j), R.ptr(R.index({i, j})), psi.ptr(k), m, w);
      } else {
        for (int j = 0; j < n; ++j)
          for (int l = 0; l < n; ++l) {
            double* o = out.ptr(out.index({j, l}));
            add_bracket(o, R.ptr(R.index({i, j})), psi.ptr(psi.index({k, l})), m, w);
            add_bracket(o, R.ptr(R.index({i, l})), psi.ptr(psi.index({k, j})), m, -w);
          }
      }
    }
  return out;
}

Field curvature_action(const Connection& c, const Field& psi) {
  require_degree(psi, 1, 2, "curvature_action");
  return Field(
      psi.spec_ptr(), psi.group(), psi.rank(),
      [c, psi](const Vec& x) { return curvature_action_value(psi.spec(), x, c.R(x), psi(x)); },
      "r(" + psi.label() + ")");
}

Field rough_laplacian(const Connection& c, const Field& psi) {
  require_degree(psi, 0, 2, "rough_laplacian");
  const Field D = nabla(c, psi);
  const int p = psi.rank();
  return Field(
      psi.spec_ptr(), psi.group(), p,
      [c, D, psi, p](const Vec& x) {
        const TensorValue DD = nabla_at(c, D, x);
        const int n = DD.dim();
        const Vec ginv = geometry::metric_components(psi.spec(), x).diagonal().cwiseInverse();
        TensorValue out(p, n, DD.msize());
        const std::size_t cnt = out.count(), B = DD.block();
        for (int i = 0; i < n; ++i) {
          const std::size_t base = (static_cast<std::size_t>(i) * n + i) * cnt;
          for (std::size_t f = 0; f < cnt; ++f) axpy(out.ptr(f), DD.ptr(base + f), B, -ginv[i]);
        }
        return out;
      },
      "nabla*nabla(" + psi.label() + ")");
}

Field hodge_laplacian(const Connection& c, const Field& psi) {
  require_degree(psi, 0, 2, "hodge_laplacian");
  const Field dd = delta_nabla(c, d_nabla(c, psi));
  if (psi.rank() == 0) return dd.relabel("Delta(" + psi.label() + ")");
  return (dd + d_nabla(c, delta_nabla(c, psi))).relabel("Delta(" + psi.label() + ")");
}

Field bochner_residual(const Connection& c, const Field& psi) {
  require_degree(psi, 1, 2, "bochner_residual");
  const Field lap = hodge_laplacian(c, psi);
  const Field rough = rough_laplacian(c, psi);
  const int p = psi.rank();
  return Field(
      psi.spec_ptr(), psi.group(), p,
      [c, psi, lap, rough, p](const Vec& x) {
        const GeometrySpec& spec = psi.spec();
        const int n = spec.dim(), m = psi.group().matrix_size();
        const TensorValue v = psi(x);
        TensorValue res = lap(x) - rough(x) - curvature_action_value(spec, x, c.R(x), v);
        const geometry::Riemann Rm = geometry::riemann(spec, x, c.fd);
        const Matrix E = geometry::orthonormal_frame(spec, x);
        const Matrix h = inverse_from_frame(E);
        // Ric(d_a) = sum_j R_M(d_a, e_j) e_j, so Ric^c_a = h^{kj} R^c_{k a j}.
        Matrix Ric = Matrix::Zero(n, n);
        for (int cc = 0; cc < n; ++cc)
          for (int a = 0; a < n; ++a)
            for (int k = 0; k < n; ++k)
              for (int j = 0; j < n; ++j) Ric(cc, a) += Rm(cc, k, a, j) * h(k, j);
        const std::size_t B = v.block();
        TensorValue corr(p, n, m);
        if (p == 1) {
          for (int a = 0; a < n; ++a)
            for (int cc = 0; cc < n; ++cc) axpy(corr.ptr(a), v.ptr(cc), B, Ric(cc, a));
        } else {
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
              double* o = corr.ptr(corr.index({a, b}));
              for (int cc = 0; cc < n; ++cc) {
                axpy(o, v.ptr(v.index({cc, b})), B, Ric(cc, a));
                axpy(o, v.ptr(v.index({a, cc})), B, Ric(cc, b));
              }
              // sum_j psi(e_j, R_M(d_a, d_b) e_j) = h^{jk} psi_{jl} R^l_{kab}
              for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                  if (h(j, k) == 0.0) continue;
                  for (int l = 0; l < n; ++l) {
                    const double w = h(j, k) * Rm(l, k, a, b);
                    if (w != 0.0) axpy(o, v.ptr(v.index({j, l})), B, w);
                  }
                }
            }
        }
        res -= corr;
        return res;
      },
      "bochner(" + psi.label() + ")");
}

TensorValue commutation_residual(const Connection& c, const Field& psi, const VectorField& X, const VectorField& Y,
                                 const Vec& x) {
  if (psi.rank() != 2) throw DegreeError("commutation_residual needs a 2-form");
  const GeometrySpec& spec = psi.spec();
  const int n = spec.dim(), m = psi.group().matrix_size();
  const Field D = nabla(c, psi);
  auto along = [&](const VectorField& Z) {
    return Field(psi.spec_ptr(), psi.group(), 2, [Z, D](const Vec& p) { return interior_product_value(Z(p), D(p)); });
  };
  const Vec Xv = X(x), Yv = Y(x);
  TensorValue res = interior_product_value(Xv, nabla_at(c, along(Y), x)) -
                    interior_product_value(Yv, nabla_at(c, along(X), x));
  Vec bracketXY = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    bracketXY += Xv[i] * geometry::fd_partial_at(Y.components, spec, x, i, c.fd);
    bracketXY -= Yv[i] * geometry::fd_partial_at(X.components, spec, x, i, c.fd);
  }
  res -= interior_product_value(bracketXY, D(x));

  const TensorValue R = c.R(x), v = psi(x);
  TensorValue RXY(0, n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) axpy(RXY.ptr(0), R.ptr(R.index({i, j})), RXY.block(), Xv[i] * Yv[j]);
  const geometry::Riemann Rm = geometry::riemann(spec, x, c.fd);
  Matrix RM = Matrix::Zero(n, n);  // RM(l, a) = (R_M(X,Y) d_a)^l
  for (int l = 0; l < n; ++l)
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) RM(l, a) += Rm(l, a, i, j) * Xv[i] * Yv[j];
  const std::size_t B = v.block();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double* o = res.ptr(res.index({a, b}));
      add_bracket(o, RXY.ptr(0), v.ptr(v.index({a, b})), m, -1.0);
      for (int l = 0; l < n; ++l) {
        axpy(o, v.ptr(v.index({l, b})), B, RM(l, a));
        axpy(o, v.ptr(v.index({a, l})), B, RM(l, b));
      }
    }
  return frame_components(res, geometry::orthonormal_frame(spec, x));
}

}  // namespace ymstab::forms
