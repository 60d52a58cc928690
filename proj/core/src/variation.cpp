#include "ymstab/variation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ymstab::variation {

using forms::frame_norm;
using forms::interior_product_value;
using forms::pointwise_inner_value;
using geometry::VectorField;

namespace {

double sq(double v) { return v * v; }

// sum_i Y^i T_{i...}
TensorValue contract(const Vec& Y, const TensorValue& T) { return interior_product_value(Y, T); }

// R(Y, Z) as a fiber element stored in a rank-0 tensor.
TensorValue pair_value(const TensorValue& R, const Vec& Y, const Vec& Z) {
  return contract(Z, contract(Y, R));
}

Vec gradient(const GeometrySpec& spec, const ScalarField& phi, const Vec& x, const geometry::FdConfig& fd) {
  if (phi.constant) return Vec::Zero(spec.dim());
  return geometry::grad_scalar(spec, x, phi, fd);
}

// -div grad phi.
double neg_laplacian(const GeometrySpec& spec, const ScalarField& phi, const Vec& x, const geometry::FdConfig& fd) {
  if (phi.constant) return 0.0;
  return -geometry::laplacian_scalar(spec, x, phi, fd);
}

double norm2_vec(const GeometrySpec& spec, const Vec& x, const Vec& Y) {
  const Matrix g = geometry::metric_components(spec, x);
  return Y.dot(g * Y);
}

// Coordinate components of D grad(phi): column i is D_{d_i} grad phi.
Matrix grad_derivative(const GeometrySpec& spec, const ScalarField& phi, const Vec& x, const geometry::FdConfig& fd) {
  const int n = spec.dim();
  if (phi.constant) return Matrix::Zero(n, n);
  VectorField G{[&spec, phi, fd](const Vec& y) { return geometry::grad_scalar(spec, y, phi, fd); }};
  return geometry::covariant_derivative(spec, x, G, fd);
}

void require_sphere(const GeometrySpec& spec, const char* op) {
  if (!spec.is_sphere()) throw UnsupportedGeometryError(std::string(op) + " needs a sphere geometry");
}

void require_constant(const ScalarField& phi, const char* op) {
  if (!phi.constant)
    throw PreconditionError(std::string(op) +
                            " admits constant phi only: the formula assumes a Yang-Mills background for the same phi, "
                            "and none is available in closed form for nonconstant phi");
}

// S(B)(x) given the cached d B.
TensorValue S_value(const Connection& c, const ScalarField& phi, const Field& B, const Field& dB, const Vec& x) {
  const GeometrySpec& spec = B.spec();
  const int n = spec.dim();
  TensorValue s = forms::delta_nabla_at(c, dB, x);
  if (n != 4 && !phi.constant) s -= contract(gradient(spec, phi, x, c.fd), dB(x)) * static_cast<double>(n - 4);
  s += forms::curvature_action_value(spec, x, c.R(x), B(x));
  return s;
}

}  // namespace

bool SecondVariationResult::paths_agree(double rel) const {
  const double scale = rel * std::abs(value_direct_form);
  const double tol_od = std::max({3.0 * mc_std_error, 3.0 * sigma_op_direct, scale});
  const double tol_fd = std::max({3.0 * mc_std_error, 3.0 * sigma_fd_direct, scale});
  return std::abs(value_operator_form - value_direct_form) <= tol_od &&
         std::abs(value_fd_form - value_direct_form) <= tol_fd;
}

Background round_background(const catalog::CatalogEntry& e, const geometry::FdConfig& fd) {
  const GeometrySpec& spec = e.spec();
  if (const auto* cs = std::get_if<geometry::ConformalSphere>(&spec.variant())) {
    auto round = std::make_shared<const GeometrySpec>(GeometrySpec::round_sphere(cs->n));
    return {e.connection(fd).rebind(round), cs->phi};
  }
  return {e.connection(fd), ScalarField::constant_value(0.0)};
}

double weight(const GeometrySpec& spec, const ScalarField& phi, const Vec& x) {
  const int n = spec.dim();
  if (n == 4) return 1.0;
  return std::exp((n - 4) * phi(x));
}

Estimate ym_functional(const Connection& c, const ScalarField& phi, const Rule& rule) {
  const GeometrySpec& spec = c.spec();
  return quadrature::integrate(rule, [&](const Vec& x) {
    const TensorValue R = c.R(x);
    return 0.5 * weight(spec, phi, x) * pointwise_inner_value(spec, c.group(), x, R, R);
  });
}

Field ym_residual(const Connection& c, const ScalarField& phi) {
  const int n = c.spec().dim();
  return Field(
      c.R.spec_ptr(), c.group(), 1,
      [c, phi, n](const Vec& x) {
        TensorValue r = forms::delta_nabla_at(c, c.R, x);
        if (n != 4 && !phi.constant)
          r -= contract(gradient(c.spec(), phi, x, c.fd), c.R(x)) * static_cast<double>(n - 4);
        return r;
      },
      "ym_residual");
}

Field S_operator(const Connection& c, const ScalarField& phi, const Field& B) {
  if (B.rank() != 1) throw DegreeError("S_operator acts on 1-forms");
  const Field dB = forms::d_nabla(c, B).cached();
  return Field(B.spec_ptr(), B.group(), 1, [c, phi, B, dB](const Vec& x) { return S_value(c, phi, B, dB, x); },
               "S(" + B.label() + ")");
}

SecondVariationResult second_variation(const Connection& c, const ScalarField& phi, const Field& B, const Rule& rule,
                                       double t) {
  if (B.rank() != 1) throw DegreeError("second_variation needs a 1-form direction");
  if (!(t > 0.0)) throw ParameterError("t-difference step must be positive");
  const GeometrySpec& spec = B.spec();
  const auto& grp = c.group();
  const Field dB = forms::d_nabla(c, B).cached();
  const Field BB = forms::wedge_bracket(B, B);

  // Outputs: operator, direct, fd, operator - direct, fd - direct.
  auto est = quadrature::integrate_many(rule, 5, [&](const Vec& x, double* out) {
    const Matrix E = geometry::orthonormal_frame(spec, x);
    const double w = weight(spec, phi, x);
    const TensorValue b = B(x), db = dB(x), R = c.R(x), bb = BB(x);
    const TensorValue s = S_value(c, phi, B, dB, x);
    auto ip = [&](const TensorValue& a, const TensorValue& z) { return pointwise_inner_value(spec, grp, x, a, z, E); };
    const double op = w * ip(s, b);
    const double direct = w * (ip(db, db) + ip(R, bb));
    auto ym = [&](double tt) {
      const TensorValue Rt = R + db * tt + bb * (0.5 * tt * tt);
      return 0.5 * w * ip(Rt, Rt);
    };
    const double y0 = ym(0.0);
    auto second = [&](double tt) { return (ym(tt) - 2.0 * y0 + ym(-tt)) / (tt * tt); };
    const double fd = (4.0 * second(0.5 * t) - second(t)) / 3.0;
    out[0] = op;
    out[1] = direct;
    out[2] = fd;
    out[3] = op - direct;
    out[4] = fd - direct;
  });
  SecondVariationResult r;
  r.value_operator_form = est[0].value;
  r.value_direct_form = est[1].value;
  r.value_fd_form = est[2].value;
  r.mc_std_error = std::max({est[0].std_error, est[1].std_error, est[2].std_error});
  r.sigma_op_direct = est[3].std_error;
  r.sigma_fd_direct = est[4].std_error;
  return r;
}

Estimate weighted_inner(const ScalarField& phi, const Field& a, const Field& b, const Rule& rule) {
  const GeometrySpec& spec = a.spec();
  return quadrature::integrate(rule, [&](const Vec& x) {
    return weight(spec, phi, x) * pointwise_inner_value(spec, a.group(), x, a(x), b(x));
  });
}

Field test_variation(const Connection& c, const ScalarField& phi, double lambda, const Vec& v) {
  require_sphere(c.spec(), "test_variation");
  const auto cf = geometry::conformal_gradient_field(c.spec(), v);
  const Field R = c.R;
  return Field(
      c.R.spec_ptr(), c.group(), 1,
      [R, cf, phi, lambda](const Vec& x) {
        Vec V = cf.V(x);
        if (lambda != 0.0) V *= std::exp(lambda * phi(x));
        return contract(V, R(x));
      },
      "B_v");
}

Field radial_variation_rhs(const Connection& c, const ScalarField& phi, double lambda, const Vec& v) {
  require_sphere(c.spec(), "radial_variation_rhs");
  const auto cf = geometry::conformal_gradient_field(c.spec(), v);
  const double l = lambda;
  return Field(
      c.R.spec_ptr(), c.group(), 1,
      [c, cf, phi, l](const Vec& x) {
        const GeometrySpec& spec = c.spec();
        const int n = spec.dim();
        const TensorValue R = c.R(x);
        const double e = std::exp(l * phi(x));
        const Vec Vt = cf.V(x) * e;
        const double fv = cf.f(x);
        const Vec G = gradient(spec, phi, x, c.fd);
        const Vec dphi = geometry::metric_components(spec, x) * G;
        const double G2 = G.dot(dphi);
        const double lap = neg_laplacian(spec, phi, x, c.fd);
        const Matrix DG = grad_derivative(spec, phi, x, c.fd);

        const double c1 = 4.0 - n + l * lap - (l * l + (n - 4) * l) * G2;
        TensorValue out = contract(Vt, R) * c1;
        if (G.squaredNorm() > 0.0) {
          out += contract(G, R) * ((4.0 - n + 3.0 * l) * e * fv);
          const TensorValue RGV = pair_value(R, G, Vt);
          for (int j = 0; j < n; ++j) out[j] -= (l * l * dphi[j]) * RGV[0];
          if (l != 0.0) {
            const TensorValue DR = forms::nabla_at(c, c.R, x);  // DR[k,i,j] = (nabla_k R)_ij
            out -= contract(Vt, contract(G, DR)) * l;
            out -= contract(G, contract(Vt, DR)) * l;
          }
          out += contract(DG * Vt, R) * static_cast<double>(n - 4);
          // l R(V~, D_{d_j} G)
          const TensorValue RV = contract(Vt, R);
          for (int j = 0; j < n; ++j)
            for (int q = 0; q < n; ++q) out[j] += (l * DG(q, j)) * RV[q];
        }
        return out;
      },
      "radial_variation_rhs");
}

Field radial_variation_residual(const Connection& c, const ScalarField& phi, double lambda, const Vec& v) {
  require_constant(phi, "radial_variation_residual");
  const Field B = test_variation(c, phi, lambda, v);
  return S_operator(c, phi, B) - radial_variation_rhs(c, phi, lambda, v);
}

Field leibniz_expansion_residual(const Connection& c, const ScalarField& phi, double lambda, const Vec& v) {
  require_sphere(c.spec(), "leibniz_expansion_residual");
  const auto cf = geometry::conformal_gradient_field(c.spec(), v);
  const Field B = test_variation(c, phi, lambda, v);
  const Field dB = forms::d_nabla(c, B);
  const double l = lambda;
  return Field(
      c.R.spec_ptr(), c.group(), 1,
      [c, cf, phi, l, dB](const Vec& x) {
        const GeometrySpec& spec = c.spec();
        const int n = spec.dim();
        const Vec G = gradient(spec, phi, x, c.fd);
        if (G.squaredNorm() == 0.0 || n == 4) return TensorValue(1, n, c.group().matrix_size());
        const TensorValue R = c.R(x);
        const double e = std::exp(l * phi(x));
        const Vec Vt = cf.V(x) * e;
        const Vec dphi = geometry::metric_components(spec, x) * G;
        const double G2 = G.dot(dphi);
        const TensorValue DR = forms::nabla_at(c, c.R, x);
        TensorValue lhs = contract(G, dB(x));
        TensorValue rhs = contract(G, contract(Vt, DR));
        rhs -= contract(G, R) * (2.0 * e * cf.f(x));
        rhs += contract(Vt, R) * (l * G2);
        const TensorValue RGV = pair_value(R, G, Vt);
        for (int j = 0; j < n; ++j) rhs[j] += (l * dphi[j]) * RGV[0];
        return (lhs - rhs) * (4.0 - n);
      },
      "leibniz_residual");
}

bool TraceResult::agree(double rel) const {
  const double tol = std::max({3.0 * sigma_diff, 3.0 * std::max(sigma_lhs, sigma_rhs), rel * std::abs(rhs)});
  return std::abs(lhs - rhs) <= tol;
}

double sphere_trace_integrand(const Connection& c, const ScalarField& phi, double lambda, const Vec& x) {
  const GeometrySpec& spec = c.spec();
  const int n = spec.dim();
  const double l = lambda;
  const TensorValue R = c.R(x);
  const Matrix E = geometry::orthonormal_frame(spec, x);
  const double R2 = pointwise_inner_value(spec, c.group(), x, R, R, E);
  const Vec G = gradient(spec, phi, x, c.fd);
  double G2 = 0.0, iG2 = 0.0, lap = 0.0;
  if (G.squaredNorm() > 0.0) {
    G2 = norm2_vec(spec, x, G);
    const TensorValue iG = contract(G, R);
    iG2 = pointwise_inner_value(spec, c.group(), x, iG, iG, E);
    lap = neg_laplacian(spec, phi, x, c.fd);
  }
  const double k = n - 4 + 2.0 * l;
  const double bracket = ((4.0 - n) / 2.0 * lap + 2.0 * sq(l + (n - 4) / 2.0) * G2 + 8.0 - 2.0 * n) * R2 +
                         l * (8.0 - 2.0 * n - l) * iG2;
  return std::exp(k * phi(x)) * bracket;
}

TraceResult sphere_trace(const Connection& c, const ScalarField& phi, double lambda, const Rule& rule,
                         const Matrix& basis) {
  require_constant(phi, "sphere_trace");
  require_sphere(c.spec(), "sphere_trace");
  const GeometrySpec& spec = c.spec();
  const int n = spec.dim();
  const Matrix P = basis.size() == 0 ? Matrix::Identity(n + 1, n + 1) : basis;
  if (P.rows() != n + 1 || P.cols() != n + 1) throw DimensionError("trace basis must be (n+1) x (n+1)");
  const int K = static_cast<int>(P.cols());
  std::vector<Field> Bs, dBs;
  for (int k = 0; k < K; ++k) {
    Bs.push_back(test_variation(c, phi, lambda, P.col(k)).cached());
    dBs.push_back(forms::d_nabla(c, Bs.back()).cached());
  }
  // Outputs: K terms, lhs, rhs, lhs - rhs.
  auto est = quadrature::integrate_many(rule, K + 3, [&](const Vec& x, double* out) {
    const Matrix E = geometry::orthonormal_frame(spec, x);
    const double w = weight(spec, phi, x);
    double lhs = 0.0;
    for (int k = 0; k < K; ++k) {
      const TensorValue s = S_value(c, phi, Bs[k], dBs[k], x);
      out[k] = w * pointwise_inner_value(spec, c.group(), x, s, Bs[k](x), E);
      lhs += out[k];
    }
    const double rhs = sphere_trace_integrand(c, phi, lambda, x);
    out[K] = lhs;
    out[K + 1] = rhs;
    out[K + 2] = lhs - rhs;
  });
  TraceResult r;
  for (int k = 0; k < K; ++k) r.terms.push_back(est[k].value);
  r.lhs = est[K].value;
  r.sigma_lhs = est[K].std_error;
  r.rhs = est[K + 1].value;
  r.sigma_rhs = est[K + 1].std_error;
  r.sigma_diff = est[K + 2].std_error;
  return r;
}

// ---------------------------------------------------------------------------
// Trace algebra at one abstract point

SyntheticTensorPack SyntheticTensorPack::random(int n, liealg::StructureGroup group, std::uint64_t seed) {
  if (n < 2) throw DimensionError("synthetic pack needs n >= 2");
  SyntheticTensorPack p;
  p.n = n;
  p.group = group;
  const int m = group.matrix_size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto element = [&] { return liealg::random_element(group, rng()).storage(); };
  p.R = TensorValue(2, n, m);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const liealg::Mat a = element();
      p.R[p.R.index({i, j})] = a;
      p.R[p.R.index({j, i})] = -a;
    }
  TensorValue raw(3, n, m);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const liealg::Mat a = element();
        raw[raw.index({k, i, j})] = a;
        raw[raw.index({k, j, i})] = -a;
      }
  // Remove a third of the cyclic sum so that the cyclic sum vanishes.
  p.dR = raw;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Eigen::MatrixXd cyc = raw[raw.index({k, i, j})] + raw[raw.index({i, j, k})] + raw[raw.index({j, k, i})];
        p.dR[p.dR.index({k, i, j})] -= cyc / 3.0;
      }
  p.grad_phi = Vec(n);
  for (int i = 0; i < n; ++i) p.grad_phi[i] = U(rng);
  Matrix H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H(i, j) = U(rng);
  p.hess_phi = 0.5 * (H + H.transpose());
  p.phi = 0.5 * U(rng);
  return p;
}

void SyntheticTensorPack::validate() const {
  const int m = group.matrix_size();
  auto shaped = [&](const TensorValue& t, int rank) { return t.rank() == rank && t.dim() == n && t.msize() == m; };
  if (n < 2 || !shaped(R, 2) || !shaped(dR, 3) || grad_phi.size() != n || hess_phi.rows() != n ||
      hess_phi.cols() != n)
    throw DimensionError("malformed synthetic tensor pack");
}

ShadowResult trace_algebra_shadow(const SyntheticTensorPack& pk, double lambda) {
  pk.validate();
  const int n = pk.n;
  const double l = lambda;
  const auto& grp = pk.group;
  const TensorValue& R = pk.R;
  const TensorValue& DR = pk.dR;
  const Vec& G = pk.grad_phi;
  const Matrix& H = pk.hess_phi;
  const double e = std::exp(l * pk.phi);
  const double G2 = G.squaredNorm();
  const double lap = -H.trace();
  auto in = [&](const double* a, const double* b) { return liealg::inner_raw(grp, a, b); };
  auto inT = [&](const TensorValue& a, const TensorValue& b) {
    double s = 0.0;
    for (std::size_t f = 0; f < a.count(); ++f) s += in(a.ptr(f), b.ptr(f));
    return s;
  };

  ShadowResult out;
  // Basis of R^{n+1} at x = e_{n+1}: v_k = e_k gives f = 0, V = e_k; v_{n+1} = x
  // gives f = 1, V = 0.
  double lhs = 0.0;
  for (int k = 0; k <= n; ++k) {
    Vec V = Vec::Zero(n);
    double f = 1.0;
    if (k < n) {
      V[k] = 1.0;
      f = 0.0;
    }
    const Vec Vt = e * V;
    const double c1 = 4.0 - n + l * lap - (l * l + (n - 4) * l) * G2;
    TensorValue rhs = contract(Vt, R) * c1;
    const TensorValue cross = contract(G, R) * ((4.0 - n + 3.0 * l) * e * f);
    rhs += cross;
    const TensorValue RGV = pair_value(R, G, Vt);
    TensorValue gradterm(1, n, R.msize());
    for (int j = 0; j < n; ++j) gradterm[j] = G[j] * RGV[0];
    rhs -= gradterm * (l * l);
    const TensorValue nablaG = contract(Vt, contract(G, DR));  // nabla_G R(V~, .)
    const TensorValue nablaV = contract(G, contract(Vt, DR));  // nabla_V~ R(G, .)
    rhs -= nablaG * l;
    rhs -= nablaV * l;
    rhs += contract(H * Vt, R) * static_cast<double>(n - 4);
    const TensorValue RV = contract(Vt, R);
    TensorValue hterm(1, n, R.msize());
    for (int j = 0; j < n; ++j)
      for (int q = 0; q < n; ++q) hterm[j] += H(q, j) * RV[q];
    rhs += hterm * l;

    lhs += inT(rhs, RV);
    out.cross_term += inT(cross, RV);
    out.grad_trace_lhs += inT(gradterm, RV);
    out.nabla_trace_lhs += inT(nablaV, RV);
  }
  out.lhs = lhs;

  const double R2 = 0.5 * inT(R, R);
  const TensorValue iG = contract(G, R);
  const double iG2 = inT(iG, iG);
  double GR2 = 0.0;  // G(|R|^2)
  for (int q = 0; q < n; ++q) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += in(DR.ptr(DR.index({q, i, j})), R.ptr(R.index({i, j})));
    GR2 += G[q] * s;  // |R|^2 = 1/2 sum_ij <R_ij, R_ij>
  }
  double Hterm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int q = 0; q < n; ++q) {
      if (H(i, q) == 0.0) continue;
      for (int j = 0; j < n; ++j) Hterm += H(i, q) * in(R.ptr(R.index({q, j})), R.ptr(R.index({i, j})));
    }
  const double e2 = e * e;
  out.rhs = e2 * (2.0 * (4.0 - n + l * lap - (l * l + (n - 4) * l) * G2) * R2 + l * l * iG2 - 1.5 * l * GR2 +
                  (n - 4 + l) * Hterm);
  out.grad_trace_rhs = -e2 * iG2;
  out.nabla_trace_rhs = 0.5 * e2 * GR2;
  return out;
}

// ---------------------------------------------------------------------------

IbpResult ibp_identities(const Connection& c, const ScalarField& phi, double lambda, const Rule& rule) {
  const GeometrySpec& spec = c.spec();
  const int n = spec.dim();
  const double k = n - 4 + 2.0 * lambda;
  const auto& grp = c.group();
  const geometry::FdConfig fd = c.fd;

  // Y^i = h^{ii} sum_j <R(G, e_j), R(d_i, e_j)>, diagonal metric.
  auto Yvec = [&](const Vec& x) {
    const Vec G = gradient(spec, phi, x, fd);
    const TensorValue R = c.R(x);
    const TensorValue iG = contract(G, R);
    const Vec ginv = geometry::metric_components(spec, x).diagonal().cwiseInverse();
    Vec Y = Vec::Zero(n);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += ginv[j] * liealg::inner_raw(grp, iG.ptr(j), R.ptr(R.index({i, j})));
      Y[i] = ginv[i] * s;
    }
    return Y;
  };
  auto R2 = [&](const Vec& x) {
    const TensorValue R = c.R(x);
    return pointwise_inner_value(spec, grp, x, R, R);
  };

  // Outputs: lhs1, rhs1, lhs1 - rhs1, lhs2, rhs2, lhs2 - rhs2.
  auto est = quadrature::integrate_many(rule, 6, [&](const Vec& x, double* out) {
    const double w = std::exp(k * phi(x));
    const Vec G = gradient(spec, phi, x, fd);
    if (G.squaredNorm() == 0.0) {
      std::fill(out, out + 6, 0.0);
      return;
    }
    const geometry::Christoffel Gam = geometry::christoffel(spec, x);
    const Vec Y = Yvec(x);
    double div = 0.0;
    for (int i = 0; i < n; ++i) {
      div += geometry::fd_partial_at([&](const Vec& y) { return Vec(Yvec(y)); }, spec, x, i, fd)[i];
      for (int q = 0; q < n; ++q) div += Gam(i, i, q) * Y[q];
    }
    const TensorValue R = c.R(x);
    const TensorValue iG = contract(G, R);
    const double iG2 = pointwise_inner_value(spec, grp, x, iG, iG);
    const double G2 = norm2_vec(spec, x, G);
    double GR2 = 0.0;
    for (int i = 0; i < n; ++i) {
      if (G[i] == 0.0) continue;
      GR2 += G[i] * geometry::fd_partial_at([&](const Vec& y) { return Eigen::Matrix<double, 1, 1>(R2(y)); }, spec,
                                            x, i, fd)[0];
    }
    const double lap = neg_laplacian(spec, phi, x, fd);
    out[0] = -w * div;
    out[1] = k * w * iG2;
    out[2] = out[0] - out[1];
    out[3] = 0.5 * w * GR2;
    out[4] = 0.5 * w * (lap - k * G2) * R2(x);
    out[5] = out[3] - out[4];
  });
  IbpResult r;
  r.lhs1 = est[0];
  r.rhs1 = est[1];
  r.residual1 = est[2];
  r.lhs2 = est[3];
  r.rhs2 = est[4];
  r.residual2 = est[5];
  return r;
}

namespace {

struct ConformalSetup {
  Connection ct;     // connection read on e^{2 phi} g
  forms::SpecPtr conf;
};

ConformalSetup conformal_setup(const Connection& c, const ScalarField& phi) {
  require_sphere(c.spec(), "conformal codifferential");
  auto conf = std::make_shared<const GeometrySpec>(GeometrySpec::conformal_sphere(c.spec().dim(), phi));
  return {c.rebind(conf), conf};
}

}  // namespace

Field conformal_divergence(const Connection& c, const ScalarField& phi, double lambda, const Vec& v) {
  auto [ct, conf] = conformal_setup(c, phi);
  const Field B = test_variation(c, phi, lambda, v).rebind(conf);
  return Field(
      c.R.spec_ptr(), c.group(), 0, [ct, B](const Vec& x) { return forms::delta_nabla_at(ct, B, x); },
      "delta~(B_v)");
}

Field gauge_orthogonality(const Connection& c, const ScalarField& phi, double lambda, const Vec& v) {
  auto [ct, conf] = conformal_setup(c, phi);
  const Field B = test_variation(c, phi, lambda, v).rebind(conf);
  const auto cf = geometry::conformal_gradient_field(c.spec(), v);
  const double l = lambda;
  return Field(
      c.R.spec_ptr(), c.group(), 0,
      [ct, B, cf, phi, l, c](const Vec& x) {
        const Vec Vt = cf.V(x) * std::exp(l * phi(x));
        TensorValue out = forms::delta_nabla_at(ct, B, x);
        out += contract(Vt, forms::delta_nabla_at(ct, ct.R, x));
        const Vec Gt = gradient(c.spec(), phi, x, c.fd) * std::exp(-2.0 * phi(x));
        out += pair_value(ct.R(x), Vt, Gt) * (l + 2.0);
        return out;
      },
      "gauge_orthogonality");
}

// ---------------------------------------------------------------------------

std::string laplacian_sign_name(LaplacianSign s) {
  return s == LaplacianSign::DivGrad ? "div-grad" : "minus-div-grad";
}

bool CriterionReport::conventions_agree() const {
  return conventions[0].weak_holds == conventions[1].weak_holds &&
         conventions[0].strong_holds == conventions[1].strong_holds;
}

CriterionReport criterion_report(const ScalarField& phi, int n, const Rule& rule) {
  if (n < 2) throw DimensionError("criterion_report needs n >= 2");
  const GeometrySpec spec = GeometrySpec::round_sphere(n);
  const geometry::FdConfig fd{};
  CriterionReport rep;
  rep.n = n;
  rep.points = rule.size();
  const double inf = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 2; ++s) {
    auto& cv = rep.conventions[s];
    cv.sign = s == 0 ? LaplacianSign::DivGrad : LaplacianSign::NegDivGrad;
    cv.weak_min = cv.strong_min = inf;
    cv.weak_max = cv.strong_max = cv.restated_max = -inf;
  }
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const Vec x = rule.point(i);
    double divgrad = 0.0, G2 = 0.0;
    if (!phi.constant) {
      divgrad = geometry::laplacian_scalar(spec, x, phi, fd);
      G2 = norm2_vec(spec, x, geometry::grad_scalar(spec, x, phi, fd));
    }
    for (auto& cv : rep.conventions) {
      const double lap = cv.sign == LaplacianSign::DivGrad ? divgrad : -divgrad;
      const double weak = 0.5 * lap - (n - 4) / 2.0 * G2 + 2.0;
      const double strong = (n - 4) * (0.5 * lap - (n + 4) / 2.0 * G2 + 2.0);
      const double restated = (4.0 - n) / 2.0 * lap + (n * n - 16.0) / 2.0 * G2 + 8.0 - 2.0 * n;
      cv.weak_min = std::min(cv.weak_min, weak);
      cv.weak_max = std::max(cv.weak_max, weak);
      cv.strong_min = std::min(cv.strong_min, strong);
      cv.strong_max = std::max(cv.strong_max, strong);
      cv.restated_max = std::max(cv.restated_max, restated);
    }
  }
  for (auto& cv : rep.conventions) {
    cv.weak_holds = n >= 5 && cv.weak_min > 0.0;
    cv.strong_holds = cv.strong_min >= 0.0;
    if (cv.weak_holds)
      cv.verdict = "no weakly stable Yang-Mills connections";
    else if (cv.strong_holds)
      cv.verdict = n == 4 ? "no nontrivial stable Yang-Mills connections on S^4" : "no stable Yang-Mills connections";
    else
      cv.verdict = "no conclusion";
  }
  return rep;
}

}  // namespace ymstab::variation
