#include "ymstab/catalog.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

namespace ymstab::catalog {

using forms::TensorValue;
using geometry::Matrix;
using geometry::Vec;

std::string tag_name(Tag t) {
  switch (t) {
    case Tag::Flat: return "flat";
    case Tag::YangMillsRound: return "yang_mills_round";
    case Tag::YangMillsDim4: return "yang_mills_dim4";
    case Tag::RandomTest: return "random_test";
  }
  return "?";
}

forms::Connection CatalogEntry::connection(const geometry::FdConfig& fd) const {
  return forms::Connection::from_potential(potential, fd);
}

bool CatalogEntry::verified() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

void verify_tags(CatalogEntry& e, std::uint64_t seed) {
  e.checks.clear();
  const auto conn = e.connection();
  const auto pts = quadrature::sample_points(e.spec(), 20, seed);
  for (Tag t : e.tags) {
    TagCheck c{t, true, 0.0};
    for (const Vec& x : pts) {
      const TensorValue R = conn.R(x);
      const double rn = forms::frame_norm(e.spec(), e.potential.group(), x, R);
      double res = 0.0;
      switch (t) {
        case Tag::Flat:
          res = rn;
          break;
        case Tag::YangMillsDim4:
          if (e.spec().dim() != 4) {
            res = 1.0;
            break;
          }
          [[fallthrough]];
        case Tag::YangMillsRound: {
          const TensorValue d = forms::delta_nabla_at(conn, conn.R, x);
          res = forms::frame_norm(e.spec(), e.potential.group(), x, d) / std::max(1.0, rn);
          break;
        }
        case Tag::RandomTest:
          res = 0.0;
          break;
      }
      c.residual = std::max(c.residual, res);
    }
    c.passed = c.residual < (t == Tag::Flat ? 1e-8 : 1e-5);
    e.checks.push_back(c);
  }
}

CatalogEntry flat_connection(SpecPtr spec, StructureGroup group) {
  CatalogEntry e{"flat", spec, forms::zero_field(spec, group, 1).relabel("A=0"), {Tag::Flat}, {}};
  verify_tags(e);
  return e;
}

namespace {

Field levi_civita_potential(const SpecPtr& spec) {
  const int n = spec->dim();
  return forms::make_field(
      spec, StructureGroup::so(n), 1,
      [spec, n](const Vec& x, TensorValue& A) {
        const Vec g = geometry::metric_components(*spec, x).diagonal();
        const auto G = geometry::christoffel(*spec, x);
        for (int i = 0; i < n; ++i) {
          auto Ai = A[i];
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              if (a != b) Ai(a, b) = std::sqrt(g[a] / g[b]) * G(a, i, b);
        }
      },
      "A_LC");
}

bool is_round_warped(const GeometrySpec& s) {
  const auto* w = std::get_if<geometry::WarpedProduct>(&s.variant());
  return w && w->profile.name == "sin";
}

}  // namespace

CatalogEntry tangent_levi_civita(SpecPtr spec) {
  if (spec->dim() < 2) throw ParameterError("tangent_levi_civita needs n >= 2");
  std::set<Tag> tags;
  if (spec->kind() == geometry::GeometryKind::RoundSphere || spec->kind() == geometry::GeometryKind::ProductSpheres ||
      is_round_warped(*spec))
    tags.insert(Tag::YangMillsRound);
  CatalogEntry e{"tangent-lc", spec, levi_civita_potential(spec), tags, {}};
  verify_tags(e);
  return e;
}

CatalogEntry product_tangent_levi_civita(SpecPtr spec) {
  const auto* p = std::get_if<geometry::ProductSpheres>(&spec->variant());
  if (!p) throw UnsupportedGeometryError("product_tangent_levi_civita needs a product of spheres");
  if (p->dims.size() < 2) throw ParameterError("product_tangent_levi_civita needs at least two factors");
  CatalogEntry e{"product-tangent-lc", spec, levi_civita_potential(spec), {Tag::YangMillsRound}, {}};
  verify_tags(e);
  return e;
}

CatalogEntry fiber_levi_civita(SpecPtr spec) {
  const auto* w = std::get_if<geometry::WarpedProduct>(&spec->variant());
  if (!w) throw UnsupportedGeometryError("fiber_levi_civita needs a warped product");
  const int m = w->fiber_dim;
  auto fiber = std::make_shared<const GeometrySpec>(GeometrySpec::round_sphere(m));
  Field A = forms::make_field(
      spec, StructureGroup::so(m), 1,
      [fiber, m](const Vec& x, TensorValue& A) {
        const Vec y = x.tail(m);
        const auto G = geometry::christoffel(*fiber, y);
        for (int j = 0; j < m; ++j) {
          auto Aj = A[1 + j];
          for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
              if (a != b) Aj(a, b) = G(a, j, b);
        }
      },
      "A_fiberLC");
  std::set<Tag> tags;
  if (w->profile.name.rfind("const", 0) == 0) tags.insert(Tag::YangMillsRound);
  CatalogEntry e{"fiber-lc", spec, A, tags, {}};
  verify_tags(e);
  return e;
}

namespace {

// Quaternion product (w, x, y, z).
using Quat = Eigen::Vector4d;
Quat qmul(const Quat& p, const Quat& q) {
  return {p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3], p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
          p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1], p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0]};
}

// Imaginary quaternion b i + c j + d k as -i(b s1 + c s2 + d s3) in su(2).
liealg::Mat su2_of_imaginary(double b, double c, double d) {
  using C = std::complex<double>;
  liealg::ComplexMat M(2, 2);
  const C I(0.0, 1.0);
  M << -I * d, -I * b - c, -I * b + c, I * d;
  return liealg::LieAlgebraElement::from_complex(StructureGroup::su(2), M).storage();
}

}  // namespace

CatalogEntry bpst_instanton() {
  auto spec = std::make_shared<const GeometrySpec>(GeometrySpec::round_sphere(4));
  Field A = forms::make_field(
      spec, StructureGroup::su(2), 1,
      [](const Vec& x, TensorValue& A) {
        const Quat q(x[0], x[1], x[2], x[3]);
        const double s = 1.0 + x.squaredNorm();
        for (int mu = 0; mu < 4; ++mu) {
          Quat ebar = Quat::Zero();
          ebar[mu] = mu == 0 ? 1.0 : -1.0;
          const Quat p = qmul(q, ebar);
          A[mu] = su2_of_imaginary(p[1] / s, p[2] / s, p[3] / s);
        }
      },
      "A_BPST");
  CatalogEntry e{"bpst", spec, A, {Tag::YangMillsRound, Tag::YangMillsDim4}, {}};
  verify_tags(e);
  return e;
}

namespace {

std::vector<std::vector<int>> monomials(int vars, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(vars, 0);
  // Enumerate exponent vectors with total degree <= degree in a fixed order.
  std::function<void(int, int)> rec = [&](int v, int left) {
    if (v == vars) {
      out.push_back(e);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      e[v] = k;
      rec(v + 1, left - k);
    }
    e[v] = 0;
  };
  rec(0, degree);
  return out;
}

CatalogEntry ambient_potential(SpecPtr spec, StructureGroup group, std::uint64_t seed, int degree, double power,
                               std::string name) {
  if (degree < 0 || degree > 4) throw DegreeError("polynomial degree must be in [0, 4]");
  const int N = spec->ambient_dim(), n = spec->dim();
  const auto mono = monomials(N, degree);
  const auto basis = liealg::orthonormal_basis(group);
  const int nb = static_cast<int>(basis.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  // coef[(alpha * nb + b) * M + k]
  auto coef = std::make_shared<std::vector<double>>(static_cast<std::size_t>(N) * nb * mono.size());
  for (double& c : *coef) c = U(rng);
  auto mono_p = std::make_shared<const std::vector<std::vector<int>>>(mono);
  auto basis_p = std::make_shared<const std::vector<liealg::Mat>>(basis);
  Field A = forms::make_field(
      spec, group, 1,
      [spec, N, n, nb, coef, mono_p, basis_p, power](const Vec& x, TensorValue& A) {
        const Vec y = geometry::chart_embed(*spec, x);
        const Matrix J = geometry::embed_jacobian(*spec, x);
        const std::size_t M = mono_p->size();
        std::vector<double> mv(M);
        for (std::size_t k = 0; k < M; ++k) {
          double v = 1.0;
          for (int a = 0; a < N; ++a)
            for (int e = 0; e < (*mono_p)[k][a]; ++e) v *= y[a];
          mv[k] = v;
        }
        const double env = power != 0.0 ? std::pow(1.0 + y.squaredNorm(), -power) : 1.0;
        const int m = static_cast<int>((*basis_p)[0].rows());
        for (int alpha = 0; alpha < N; ++alpha) {
          Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, m);
          for (int b = 0; b < nb; ++b) {
            const double* cf = coef->data() + (static_cast<std::size_t>(alpha) * nb + b) * M;
            double s = 0.0;
            for (std::size_t k = 0; k < M; ++k) s += cf[k] * mv[k];
            C += s * (*basis_p)[b];
          }
          C *= env;
          for (int i = 0; i < n; ++i)
            if (J(alpha, i) != 0.0) A[i] += J(alpha, i) * C;
        }
      },
      name);
  std::ostringstream os;
  os << name << "(seed=" << seed << ",deg=" << degree << ")";
  CatalogEntry e{os.str(), spec, A, {Tag::RandomTest}, {}};
  verify_tags(e);
  return e;
}

}  // namespace

CatalogEntry random_polynomial_potential(SpecPtr spec, StructureGroup group, std::uint64_t seed, int degree) {
  return ambient_potential(std::move(spec), group, seed, degree, 0.0, "random-poly");
}

CatalogEntry decaying_polynomial_potential(SpecPtr spec, StructureGroup group, std::uint64_t seed, int degree,
                                           double power) {
  if (!(power > 0.0)) throw ParameterError("decay power must be positive");
  return ambient_potential(std::move(spec), group, seed, degree, power, "decaying-poly");
}

// ---------------------------------------------------------------------------
// Ellipsoid of revolution

namespace {

struct Meridian {
  double a;
  std::vector<double> gn, gw;  // Gauss-Legendre on [0, 1]

  explicit Meridian(double a_) : a(a_) { quadrature::gauss_legendre(64, 0.0, 1.0, gn, gw); }

  double speed(double t) const {
    const double c = std::cos(t), s = std::sin(t);
    return std::sqrt(a * a * c * c + s * s);
  }
  // Arc length from the south pole, on two panels split at pi/2.
  double arc(double theta) const {
    auto panel = [&](double lo, double hi) {
      double s = 0.0;
      for (std::size_t i = 0; i < gn.size(); ++i) s += gw[i] * speed(lo + (hi - lo) * gn[i]);
      return s * (hi - lo);
    };
    const double h = 0.5 * std::numbers::pi;
    if (theta <= h) return panel(0.0, theta);
    return panel(0.0, h) + panel(h, theta);
  }
  double length() const { return arc(std::numbers::pi); }
  double theta_of(double r) const {
    const double L = length();
    double t = std::numbers::pi * std::clamp(r / L, 0.0, 1.0);
    for (int it = 0; it < 50; ++it) {
      const double dt = (arc(t) - r) / speed(t);
      t = std::clamp(t - dt, 0.0, std::numbers::pi);
      if (std::abs(dt) < 1e-15) break;
    }
    return t;
  }
};

}  // namespace

double ellipsoid_meridian_length(double a) {
  if (!(a > 0.0)) throw ParameterError("ellipsoid axis ratio must be positive");
  return Meridian(a).length();
}

ProfileFunction ellipsoid_profile(double a) {
  if (!(a > 0.0)) throw ParameterError("ellipsoid axis ratio must be positive");
  auto M = std::make_shared<const Meridian>(a);
  std::ostringstream os;
  os << "ellipsoid(" << a << ")";
  ProfileFunction p;
  p.name = os.str();
  p.f = [M](double r) { return M->a * std::sin(M->theta_of(r)); };
  p.df = [M](double r) {
    const double t = M->theta_of(r);
    return M->a * std::cos(t) / M->speed(t);
  };
  p.d2f = [M](double r) {
    const double t = M->theta_of(r);
    const double tp = 1.0 / M->speed(t);
    return -M->a * std::sin(t) * tp * tp * tp * tp;
  };
  p.height = [M](double r) { return -std::cos(M->theta_of(r)); };
  p.dheight = [M](double r) {
    const double t = M->theta_of(r);
    return std::sin(t) / M->speed(t);
  };
  return p;
}

}  // namespace ymstab::catalog
