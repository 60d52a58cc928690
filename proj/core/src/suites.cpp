#include "ymstab/suites.hpp"

#include "ymstab/products.hpp"
#include "ymstab/variation.hpp"
#include "ymstab/warped.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace ymstab::suites {

using forms::Connection;
using forms::Field;
using forms::TensorValue;
using geometry::FdConfig;
using geometry::Matrix;
using geometry::Vec;
using report::Reference;
using report::VerificationReport;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Records a failed check instead of aborting the suite. Configuration errors
// still propagate so the CLI can exit with status 2.
template <class F>
void guard(VerificationReport& rep, const std::string& id, const std::string& anchor, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    auto& c = rep.add(id, anchor, kInf, 0.0);
    c.inputs = std::string("error: ") + e.what();
  }
}

double sigma_tol(double sigma, double rel, double ref) { return std::max(3.0 * sigma, rel * std::abs(ref)); }

std::string trim(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  return s;
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("bad number in " + what + ": '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("bad number in " + what + ": '" + s + "'");
  return v;
}

int to_int(const std::string& s, const std::string& what) {
  const double v = to_double(s, what);
  if (v != std::floor(v) || v < 1 || v > 64) throw ConfigError("bad integer in " + what + ": '" + s + "'");
  return static_cast<int>(v);
}

bool round_sphere(const GeometrySpec& s) { return s.kind() == geometry::GeometryKind::RoundSphere; }
bool product(const GeometrySpec& s) { return s.kind() == geometry::GeometryKind::ProductSpheres; }
bool warped_geom(const GeometrySpec& s) { return s.kind() == geometry::GeometryKind::WarpedProduct; }

SpecPtr configured(const RunConfig& cfg) { return parse_geometry(cfg.geometry, cfg.profile); }

// The configured geometry when it satisfies pred, else the fallback.
template <class P>
SpecPtr pick(const RunConfig& cfg, P pred, const std::string& fallback) {
  const SpecPtr s = configured(cfg);
  return pred(*s) ? s : parse_geometry(fallback, cfg.profile);
}

catalog::CatalogEntry pick_entry(const RunConfig& cfg, const SpecPtr& spec, const std::string& fallback) {
  try {
    return make_entry(cfg.entry, spec, cfg.seed);
  } catch (const UnsupportedGeometryError&) {
  } catch (const ParameterError&) {
  }
  return make_entry(fallback, spec, cfg.seed);
}

FdConfig pointwise_fd(const RunConfig& cfg) { return {cfg.fd_order, cfg.fd_step}; }
// Integrals use the cheaper second-order stencil.
FdConfig integral_fd(const RunConfig& cfg) { return {2, cfg.fd_step}; }

quadrature::QuadratureConfig quad(const RunConfig& cfg, std::size_t nodes) {
  quadrature::QuadratureConfig q;
  q.mc_nodes = nodes;
  q.seed = cfg.seed;
  return q;
}

double metric_norm(const GeometrySpec& spec, const Vec& x, const Vec& V) {
  return std::sqrt(std::max(0.0, V.dot(geometry::metric_components(spec, x) * V)));
}

// max |a - b| / max(|a|, |b|) over points, frame norms.
double field_gap(const Field& a, const Field& b, const std::vector<Vec>& pts) {
  return warped::worst_relative(a, b, pts, 1e-300);
}

// max |res| / max |ref| over points.
double field_ratio(const Field& res, const Field& ref, const std::vector<Vec>& pts) {
  double d = 0.0, s = 0.0;
  for (const auto& x : pts) {
    d = std::max(d, forms::frame_norm(res.spec(), res.group(), x, res(x)));
    s = std::max(s, forms::frame_norm(ref.spec(), ref.group(), x, ref(x)));
  }
  if (d == 0.0) return 0.0;
  return s > 0.0 ? d / s : d;
}

double ym_ratio(const Connection& c, const std::vector<Vec>& pts) {
  const auto zero = ScalarField::constant_value(0.0);
  return field_ratio(variation::ym_residual(c, zero), c.R, pts);
}

// Globally smooth Lie-algebra-valued function: sum_a (w_a . y) T_a with y the
// ambient coordinates and T_a an orthonormal basis.
Field gauge_function(const SpecPtr& spec, const liealg::StructureGroup& g, std::uint64_t seed) {
  const auto basis = liealg::orthonormal_basis(g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  const int m = spec->ambient_dim();
  Matrix W(basis.size(), m);
  for (Eigen::Index i = 0; i < W.rows(); ++i)
    for (int j = 0; j < m; ++j) W(i, j) = N(rng);
  return forms::make_field(
      spec, g, 0,
      [spec, basis, W](const Vec& x, TensorValue& t) {
        const Vec c = W * geometry::chart_embed(*spec, x);
        auto M = t[0];
        M.setZero();
        for (std::size_t a = 0; a < basis.size(); ++a) M += c[static_cast<Eigen::Index>(a)] * basis[a];
      },
      "sigma");
}

std::string describe_entry(const catalog::CatalogEntry& e) {
  return e.name + " on " + e.spec().describe() + " (" + e.potential.group().name() + ")";
}

// ---------------------------------------------------------------------------

VerificationReport geometry_suite(const RunConfig& cfg) {
  VerificationReport rep;
  rep.suite = "geometry";
  rep.anchor = "conformal and radial vector fields";
  const FdConfig fd = pointwise_fd(cfg);
  const SpecPtr S = pick(cfg, round_sphere, "s5");
  const int n = S->dim();
  const auto pts = quadrature::sample_points(*S, cfg.points, cfg.seed);
  const Vec v = seeded_direction(n, cfg.seed);
  const auto cf = geometry::conformal_gradient_field(*S, v);
  const std::string in = S->describe() + ", v seeded";

  guard(rep, "conformal-field-derivative", "D_X V = -f_v X for V = grad f_v", [&] {
    double worst = 0.0;
    for (const auto& x : pts) {
      const Matrix D = geometry::covariant_derivative(*S, x, cf.V, fd) + cf.f(x) * Matrix::Identity(n, n);
      worst = std::max(worst, D.norm() / std::max(1.0, std::abs(cf.f(x))));
    }
    rep.add("conformal-field-derivative", "D_X V = -f_v X for V = grad f_v", worst, 1e-6, 0.0, Reference::ClosedForm)
        .inputs = in;
  });
  guard(rep, "conformal-field-rough-laplacian", "D*D V = V for V = grad f_v", [&] {
    double worst = 0.0;
    for (const auto& x : pts) {
      const Vec d = geometry::rough_laplacian_vector(*S, x, cf.V, fd) - cf.V(x);
      worst = std::max(worst, metric_norm(*S, x, d) / std::max(1.0, metric_norm(*S, x, cf.V(x))));
    }
    rep.add("conformal-field-rough-laplacian", "D*D V = V for V = grad f_v", worst, 1e-6, 0.0, Reference::ClosedForm)
        .inputs = in;
  });
  guard(rep, "laplacian-eigenfunction", "div grad f_v = -n f_v (Laplacian sign convention)", [&] {
    double worst = 0.0;
    for (const auto& x : pts)
      worst = std::max(worst, std::abs(geometry::laplacian_scalar(*S, x, cf.f, fd) + n * cf.f(x)) /
                                  std::max(1.0, std::abs(cf.f(x))));
    rep.add("laplacian-eigenfunction", "div grad f_v = -n f_v (Laplacian sign convention)", worst, 1e-6, 0.0,
            Reference::ClosedForm)
        .inputs = in;
  });

  const SpecPtr P = pick(cfg, product, "s2xs3");
  guard(rep, "product-field-derivative", "D_X V^k = -f_v X^k on factor k, 0 across factors", [&] {
    const auto& dims = std::get<geometry::ProductSpheres>(P->variant()).dims;
    const auto ppts = quadrature::sample_points(*P, cfg.points, cfg.seed);
    double worst = 0.0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      const auto pf =
          geometry::product_conformal_field(*P, static_cast<int>(k), seeded_direction(dims[k], cfg.seed + k));
      const int off = P->factor_offset(static_cast<int>(k));
      for (const auto& x : ppts) {
        Matrix D = geometry::covariant_derivative(*P, x, pf.V, fd);
        D.block(off, off, dims[k], dims[k]) += pf.f(x) * Matrix::Identity(dims[k], dims[k]);
        worst = std::max(worst, D.norm() / std::max(1.0, std::abs(pf.f(x))));
      }
    }
    rep.add("product-field-derivative", "D_X V^k = -f_v X^k on factor k, 0 across factors", worst, 1e-6, 0.0,
            Reference::ClosedForm)
        .inputs = P->describe();
  });

  guard(rep, "radial-field-derivative", "D_X V = f' X for V = f d/dr", [&] {
    const SpecPtr W = pick(cfg, warped_geom, "w5");
    const auto& w = warped::warped_of(*W);
    const auto V = geometry::radial_conformal_field(*W);
    const auto wpts = quadrature::sample_points(*W, cfg.points, cfg.seed);
    double worst = 0.0;
    for (const auto& x : wpts) {
      const double fp = w.profile.df(x[0]);
      const Matrix D = geometry::covariant_derivative(*W, x, V, fd) - fp * Matrix::Identity(W->dim(), W->dim());
      worst = std::max(worst, D.norm() / std::max(1.0, std::abs(fp)));
    }
    rep.add("radial-field-derivative", "D_X V = f' X for V = f d/dr", worst, 1e-6, 0.0, Reference::ClosedForm).inputs =
        W->describe();
  });
  return rep;
}

VerificationReport forms_suite(const RunConfig& cfg) {
  VerificationReport rep;
  rep.suite = "forms";
  rep.anchor = "Bochner-Weitzenboeck formula and conformal codifferential";
  const FdConfig fd = pointwise_fd(cfg);
  const SpecPtr S = pick(cfg, round_sphere, "s5");
  const int n = S->dim();
  const auto pts = quadrature::sample_points(*S, cfg.points, cfg.seed);
  const std::vector<catalog::CatalogEntry> entries{pick_entry(cfg, S, "tangent-lc"),
                                                   make_entry("random-poly", S, cfg.seed)};

  for (const auto& e : entries) {
    const Connection c = e.connection(fd);
    const Field B = catalog::random_polynomial_potential(S, c.group(), cfg.seed + 11, 2).potential;
    for (int deg : {1, 2}) {
      const std::string id = "bochner-degree" + std::to_string(deg) + "-" + e.name;
      const std::string anchor = "Bochner-Weitzenboeck formula, degree " + std::to_string(deg);
      guard(rep, id, anchor, [&] {
        const Field psi = deg == 1 ? B : forms::d_nabla(c, B);
        const double r = field_ratio(forms::bochner_residual(c, psi), forms::hodge_laplacian(c, psi), pts);
        rep.add(id, anchor, r, 1e-5, 0.0, Reference::Identity).inputs = describe_entry(e);
      });
    }
  }

  guard(rep, "bochner-stencil-order", "Bochner-Weitzenboeck residual decays at the stencil order", [&] {
    const auto& e = entries.back();
    const Field B = catalog::random_polynomial_potential(S, e.potential.group(), cfg.seed + 11, 2).potential;
    const std::vector<Vec> few(pts.begin(), pts.begin() + std::min<std::size_t>(pts.size(), 5));
    auto res = [&](double h) {
      const Connection c = e.connection({2, h});
      return field_ratio(forms::bochner_residual(c, B), forms::hodge_laplacian(c, B), few);
    };
    const double slope = std::log2(res(4e-3) / res(2e-3));
    auto& rec = rep.add("bochner-stencil-order", "Bochner-Weitzenboeck residual decays at the stencil order",
                        std::abs(slope - 2.0), 0.3, 0.0, Reference::Oracle);
    rec.value = slope;
    rec.inputs = "order 2, h = 4e-3 and 2e-3";
  });

  guard(rep, "bianchi", "second Bianchi identity d R = 0", [&] {
    const Connection c = entries.back().connection(fd);
    const double r = field_ratio(forms::d_nabla(c, c.R), c.R, pts);
    rep.add("bianchi", "second Bianchi identity d R = 0", r, 1e-6, 0.0, Reference::Identity).inputs =
        describe_entry(entries.back());
  });

  ScalarField phi = parse_phi(cfg.phi, *S, cfg.seed);
  if (phi.constant) phi = parse_phi("0.3*f_w", *S, cfg.seed);
  const SpecPtr C = std::make_shared<const GeometrySpec>(GeometrySpec::conformal_sphere(n, phi));
  for (const auto& e : entries) {
    const Connection c = e.connection(fd);
    const Connection cc = c.rebind(C);
    const Field B = catalog::random_polynomial_potential(S, c.group(), cfg.seed + 13, 2).potential;
    for (int deg : {1, 2}) {
      const std::string id = "conformal-codifferential-degree" + std::to_string(deg) + "-" + e.name;
      const std::string anchor = "conformal codifferential e^{-2phi}(delta + (2p-n) i_{grad phi})";
      guard(rep, id, anchor, [&] {
        const Field psi = deg == 1 ? B : c.R;
        const Field formula = forms::delta_nabla_conformal(c, psi, phi);
        const Field psic = psi.rebind(C);
        const Field direct(S, c.group(), deg - 1, [cc, psic](const Vec& x) { return forms::delta_nabla_at(cc, psic, x); });
        rep.add(id, anchor, field_gap(formula, direct, pts), 1e-5, 0.0, Reference::Oracle).inputs =
            describe_entry(e) + ", phi = " + phi.label;
      });
    }
  }
  return rep;
}

VerificationReport conformal_suite(const RunConfig& cfg) {
  VerificationReport rep;
  rep.suite = "conformal";
  rep.anchor = "second variation on conformal spheres";
  const SpecPtr S = pick(cfg, round_sphere, "s5");
  const int n = S->dim();
  const auto e = pick_entry(cfg, S, "tangent-lc");
  const bool ym = e.has(catalog::Tag::YangMillsRound) || e.has(catalog::Tag::YangMillsDim4);
  const Connection cp = e.connection(pointwise_fd(cfg));
  const Connection ci = e.connection(integral_fd(cfg));
  // Identities in phi are vacuous at constant phi, so those get 0.3 f_w instead.
  ScalarField phi = parse_phi(cfg.phi, *S, cfg.seed);
  if (phi.constant) phi = parse_phi("0.3*f_w", *S, cfg.seed);
  const auto zero = ScalarField::constant_value(0.0);
  const auto pts = quadrature::sample_points(*S, cfg.points, cfg.seed);
  const auto rule = quadrature::make_rule(*S, quad(cfg, cfg.nodes));
  const Vec v = seeded_direction(n, cfg.seed);
  const std::string in = describe_entry(e) + ", phi = " + phi.label;

  for (double lam : cfg.lambdas) {
    const std::string tag = "-lambda" + report::format_number(lam);
    guard(rep, "leibniz-expansion" + tag, "Leibniz expansion of (4-n) i_G d(i_V~ R)", [&] {
      const double r = field_ratio(variation::leibniz_expansion_residual(cp, phi, lam, v),
                                   variation::test_variation(cp, phi, lam, v), pts);
      rep.add("leibniz-expansion" + tag, "Leibniz expansion of (4-n) i_G d(i_V~ R)", r, 1e-5).inputs = in;
    });
    guard(rep, "gauge-orthogonality" + tag, "conformal divergence of i_V~ R", [&] {
      const double r = field_ratio(variation::gauge_orthogonality(cp, phi, lam, v),
                                   variation::test_variation(cp, phi, lam, v), pts);
      rep.add("gauge-orthogonality" + tag, "conformal divergence of i_V~ R", r, 1e-5).inputs = in;
    });
    guard(rep, "trace-algebra" + tag, "pointwise trace over an orthonormal basis of R^{n+1}", [&] {
      const auto pack = variation::SyntheticTensorPack::random(n, liealg::StructureGroup::su(2), cfg.seed);
      const auto s = variation::trace_algebra_shadow(pack, lam);
      auto& rec = rep.add("trace-algebra" + tag, "pointwise trace over an orthonormal basis of R^{n+1}",
                          std::abs(s.lhs - s.rhs) / std::max(1.0, std::abs(s.rhs)), 1e-9, 0.0, Reference::Oracle);
      rec.value = s.lhs;
      rec.inputs = "synthetic tensor pack, su(2)";
    });
    guard(rep, "integration-by-parts" + tag, "integration by parts identities for the trace", [&] {
      const auto r = variation::ibp_identities(ci, phi, lam, rule);
      rep.add("integration-by-parts-1" + tag, "integration by parts: divergence term", std::abs(r.residual1.value),
              std::max(1e-12, sigma_tol(r.residual1.std_error, 1e-3, r.lhs1.value)), r.residual1.std_error)
          .inputs = in;
      rep.add("integration-by-parts-2" + tag, "integration by parts: G(|R|^2) term", std::abs(r.residual2.value),
              std::max(1e-12, sigma_tol(r.residual2.std_error, 1e-3, r.lhs2.value)), r.residual2.std_error)
          .inputs = in;
    });
  }

  if (ym) {
    guard(rep, "s-operator-on-test-variation", "S(i_V R) = (4-n) i_V R at constant phi", [&] {
      const double r =
          field_ratio(variation::radial_variation_residual(cp, zero, 0.0, v), variation::test_variation(cp, zero, 0.0, v), pts);
      rep.add("s-operator-on-test-variation", "S(i_V R) = (4-n) i_V R at constant phi", r, 1e-4, 0.0,
              Reference::ClosedForm)
          .inputs = describe_entry(e);
    });
  }

  // Second variation: two test variations and one random direction.
  std::vector<std::pair<std::string, Field>> dirs;
  dirs.emplace_back("B_v", variation::test_variation(ci, phi, cfg.lambdas.front(), v));
  dirs.emplace_back("B_e1", variation::test_variation(ci, phi, cfg.lambdas.front(), Vec::Unit(n + 1, 0)));
  dirs.emplace_back("random", catalog::random_polynomial_potential(S, ci.group(), cfg.seed + 17, 2).potential);
  for (const auto& [name, B] : dirs) {
    const std::string id = "second-variation-" + name;
    guard(rep, id, "second variation: operator, direct and t-difference paths", [&] {
      const auto r = variation::second_variation(ci, phi, B, rule);
      auto& a = rep.add(id + "-operator", "second variation operator form int <S(B), B>",
                        std::abs(r.value_operator_form - r.value_direct_form),
                        sigma_tol(r.sigma_op_direct, 1e-2, r.value_direct_form), r.sigma_op_direct, Reference::Oracle);
      a.value = r.value_operator_form;
      a.inputs = in;
      auto& b = rep.add(id + "-t-difference", "second variation as d^2/dt^2 YM(A + tB)",
                        std::abs(r.value_fd_form - r.value_direct_form),
                        sigma_tol(r.sigma_fd_direct, 1e-2, r.value_direct_form), r.sigma_fd_direct, Reference::Oracle);
      b.value = r.value_fd_form;
      b.inputs = in;
    });
  }

  if (ym) {
    guard(rep, "trace", "trace of the second variation over the B_v family", [&] {
      const auto t = variation::sphere_trace(ci, zero, 0.0, rule);
      auto& rec = rep.add("trace", "trace of the second variation over the B_v family", std::abs(t.lhs - t.rhs),
                          sigma_tol(t.sigma_diff, 1e-2, t.rhs), t.sigma_diff, Reference::ClosedForm);
      rec.value = t.lhs;
      rec.inputs = describe_entry(e) + ", rhs " + report::format_number(t.rhs);
    });
  }

  guard(rep, "criterion-conventions", "instability criteria under both Laplacian signs", [&] {
    const auto cr = variation::criterion_report(phi, n, rule);
    auto& rec = rep.add("criterion-conventions", "instability criteria under both Laplacian signs",
                        cr.conventions_agree() ? 0.0 : 1.0, 0.5);
    rec.inputs = "phi = " + phi.label + ": " + laplacian_sign_name(cr.conventions[0].sign) + " -> " +
                 cr.conventions[0].verdict + "; " + laplacian_sign_name(cr.conventions[1].sign) + " -> " +
                 cr.conventions[1].verdict;
  });
  return rep;
}

VerificationReport instability_suite(const RunConfig& cfg) {
  VerificationReport rep;
  rep.suite = "instability";
  rep.anchor = "instability of Yang-Mills connections on S^n";
  const SpecPtr S = pick(cfg, round_sphere, "s5");
  const int n = S->dim();
  const auto e = pick_entry(cfg, S, "tangent-lc");
  const auto zero = ScalarField::constant_value(0.0);
  const auto rule = quadrature::make_rule(*S, quad(cfg, cfg.nodes));
  const auto pts = quadrature::sample_points(*S, cfg.points, cfg.seed);
  const Connection ci = e.connection(integral_fd(cfg));

  guard(rep, "ym-residual", "delta R = 0 for the background", [&] {
    rep.add("ym-residual", "delta R = 0 for the background", ym_ratio(e.connection(pointwise_fd(cfg)), pts), 1e-5)
        .inputs = describe_entry(e);
  });
  guard(rep, "trace-sign", "trace of the second variation is (8-2n) int |R|^2", [&] {
    const auto t = variation::sphere_trace(ci, zero, 0.0, rule);
    const double lo = *std::min_element(t.terms.begin(), t.terms.end());
    if (n == 4) {
      auto& rec = rep.add("trace-degenerate", "trace of the second variation vanishes for n = 4", std::abs(t.lhs),
                          3.0 * t.sigma_lhs, t.sigma_lhs, Reference::ClosedForm);
      rec.value = t.lhs;
      rec.inputs = describe_entry(e);
    } else {
      auto& rec = rep.add("trace-negative", "trace of the second variation is negative for n >= 5",
                          t.lhs + 5.0 * t.sigma_lhs, 0.0, t.sigma_lhs, Reference::ClosedForm);
      rec.value = t.lhs;
      rec.inputs = describe_entry(e);
      auto& one = rep.add("single-direction-negative", "some B_v has negative second variation", lo, 0.0,
                          t.sigma_lhs, Reference::ClosedForm);
      one.value = lo;
      one.inputs = describe_entry(e);
    }
  });
  guard(rep, "gauge-direction", "gauge directions d sigma have zero second variation", [&] {
    const Field sigma = gauge_function(S, ci.group(), cfg.seed + 19);
    const Connection cp = e.connection(pointwise_fd(cfg));
    const Field Bp = forms::d_nabla(cp, sigma.rebind(S));
    rep.add("gauge-direction-operator", "S(d sigma) = 0 pointwise at a Yang-Mills connection",
            field_ratio(variation::S_operator(cp, zero, Bp), Bp, pts), 1e-4, 0.0, Reference::ClosedForm)
        .inputs = describe_entry(e);
    const Field B = forms::d_nabla(ci, sigma);
    const auto r = variation::second_variation(ci, zero, B, rule);
    auto& rec = rep.add("gauge-direction", "gauge directions d sigma have zero second variation",
                        std::abs(r.value_direct_form), 3.0 * r.mc_std_error, r.mc_std_error, Reference::ClosedForm);
    rec.value = r.value_direct_form;
    rec.inputs = describe_entry(e);
  });

  // The n = 4 boundary case on the instanton.
  guard(rep, "instanton-trace", "trace of the second variation vanishes for n = 4", [&] {
    const auto b = catalog::bpst_instanton();
    const Connection cb = b.connection(integral_fd(cfg));
    const auto bpts = quadrature::sample_points(b.spec(), cfg.points, cfg.seed);
    rep.add("instanton-ym-residual", "delta R = 0 for the instanton", ym_ratio(b.connection(pointwise_fd(cfg)), bpts),
            1e-5)
        .inputs = describe_entry(b);
    const auto brule = quadrature::make_rule(b.spec(), quad(cfg, cfg.nodes));
    const auto t = variation::sphere_trace(cb, zero, 0.0, brule);
    auto& rhs = rep.add("instanton-trace-rhs", "(8-2n) int |R|^2 = 0 for n = 4", std::abs(t.rhs), 0.0, 0.0,
                        Reference::ClosedForm);
    rhs.inputs = describe_entry(b);
    auto& lhs = rep.add("instanton-trace", "trace of the second variation vanishes for n = 4", std::abs(t.lhs),
                        3.0 * t.sigma_lhs, t.sigma_lhs, Reference::ClosedForm);
    lhs.value = t.lhs;
    lhs.inputs = describe_entry(b);
  });
  return rep;
}

VerificationReport products_suite(const RunConfig& cfg) {
  VerificationReport rep;
  rep.suite = "products";
  rep.anchor = "instability on products of spheres";
  const SpecPtr P = pick(cfg, product, "s5xs5");
  const auto& dims = std::get<geometry::ProductSpheres>(P->variant()).dims;
  const auto e = pick_entry(cfg, P, "product-tangent-lc");
  const Connection cp = e.connection(pointwise_fd(cfg));
  const Connection ci = e.connection(integral_fd(cfg));
  const auto pts = quadrature::sample_points(*P, cfg.points, cfg.seed);
  const auto rule = quadrature::make_rule(*P, quad(cfg, cfg.product_nodes));
  const Vec v = seeded_direction(dims[0], cfg.seed);
  const std::string in = describe_entry(e);

  guard(rep, "factor-divergence", "delta i_V R + (delta R)(V) + sum R(D_e V, e) = 0", [&] {
    const double r = field_ratio(products::divergence_check(cp, 0, v), products::product_variation(cp, 0, v).B, pts);
    rep.add("factor-divergence", "delta i_V R + (delta R)(V) + sum R(D_e V, e) = 0", r, 1e-6).inputs = in;
  });
  guard(rep, "block-coupling", "product curvature has no mixed blocks", [&] {
    double worst = 0.0;
    for (const auto& x : pts) worst = std::max(worst, products::block_coupling(cp, x));
    rep.add("block-coupling", "product curvature has no mixed blocks", worst, 1e-10).inputs = in;
  });
  guard(rep, "factor-second-variation", "second variation of i_{V^k} R on a product", [&] {
    const auto l = products::block_coupling_check(ci, 0, v, rule);
    auto& rec = rep.add("factor-second-variation", "second variation of i_{V^k} R on a product", std::abs(l.lhs - l.rhs),
                        sigma_tol(l.sigma_diff, 1e-2, l.rhs), l.sigma_diff, Reference::ClosedForm);
    rec.value = l.lhs;
    rec.inputs = in;
  });
  guard(rep, "product-trace", "trace over all factors of the second variation", [&] {
    const auto t = products::product_trace(ci, rule);
    auto& rec = rep.add("product-trace", "trace over all factors of the second variation", std::abs(t.lhs - t.rhs),
                        sigma_tol(t.sigma_diff, 1e-2, t.rhs), t.sigma_diff, Reference::ClosedForm);
    rec.value = t.lhs;
    rec.inputs = in + ", rhs " + report::format_number(t.rhs);
    const auto verdict = products::product_criterion_report(dims);
    if (verdict.no_weakly_stable) {
      auto& s = rep.add("product-trace-negative", "product trace is negative when every n_i >= 5",
                        t.lhs + 5.0 * t.sigma_lhs, 0.0, t.sigma_lhs, Reference::ClosedForm);
      s.value = t.lhs;
      s.inputs = in + ", verdict " + verdict.verdict;
    } else {
      auto& s = rep.add("product-trace-boundary", "product trace is not negative at the dimension boundary",
                        std::max(0.0, -(t.lhs + 3.0 * t.sigma_lhs)), 0.0, t.sigma_lhs, Reference::ClosedForm);
      s.value = t.lhs;
      s.inputs = in + ", verdict " + verdict.verdict;
    }
  });
  return rep;
}

VerificationReport warped_suite(const RunConfig& cfg) {
  VerificationReport rep;
  rep.suite = "warped";
  rep.anchor = "warped products I x S^{n-1}";
  const FdConfig fd = pointwise_fd(cfg);
  const double pi = std::numbers::pi;
  const SpecPtr Wc = configured(cfg);
  const int n = warped_geom(*Wc) ? Wc->dim() : 5;
  auto q = quad(cfg, std::max<std::size_t>(8, cfg.nodes / 100));
  q.radial_panels = 4;
  q.radial_nodes = 16;

  const SpecPtr Wsin = std::make_shared<const GeometrySpec>(
      GeometrySpec::warped_product(0.0, pi, n - 1, geometry::ProfileFunction::sine()));
  const auto lc = catalog::tangent_levi_civita(Wsin);
  const auto sin_pts = quadrature::sample_points(*Wsin, cfg.points, cfg.seed);

  guard(rep, "radial-operator-sphere", "delta d i_V R + r(i_V R) = (n-4) f''/f i_V R, f = sin r", [&] {
    const auto [l, r] = warped::radial_operator_check(lc.connection(fd));
    rep.add("radial-operator-sphere", "delta d i_V R + r(i_V R) = (n-4) f''/f i_V R, f = sin r",
            warped::worst_relative(l, r, sin_pts), 1e-4, 0.0, Reference::ClosedForm)
        .inputs = describe_entry(lc);
  });
  guard(rep, "radial-operator-cylinder", "delta d i_V R + r(i_V R) = 0 on a cylinder", [&] {
    const SpecPtr cyl = parse_geometry("w" + std::to_string(n), "const");
    const auto fl = catalog::fiber_levi_civita(cyl);
    const auto [l, r] = warped::radial_operator_check(fl.connection(fd));
    const auto cpts = quadrature::sample_points(*cyl, cfg.points, cfg.seed);
    double worst = 0.0;
    for (const auto& x : cpts)
      worst = std::max({worst, forms::frame_norm(*cyl, l.group(), x, l(x)), forms::frame_norm(*cyl, r.group(), x, r(x))});
    rep.add("radial-operator-cylinder", "delta d i_V R + r(i_V R) = 0 on a cylinder", worst, 1e-4, 0.0,
            Reference::ClosedForm)
        .inputs = describe_entry(fl);
  });
  guard(rep, "sphere-as-warped", "round sphere read as (0, pi) x S^{n-1} with f = sin r", [&] {
    const auto s = warped::sphere_as_warped(n, 0.2, pi - 0.2, cfg.points, q, fd);
    rep.add("sphere-as-warped-curvature", "|R|^2 agrees between the round and warped charts", s.max_rel_R2, 1e-4, 0.0,
            Reference::Oracle)
        .inputs = "tangent-lc, n = " + std::to_string(n);
    rep.add("sphere-as-warped-ym", "delta R = 0 in both charts", std::max(s.max_ym_round, s.max_ym_warped), 1e-4, 0.0,
            Reference::Oracle)
        .inputs = "tangent-lc, n = " + std::to_string(n);
    rep.add("sphere-as-warped-pairing", "<S(B), B> agrees between the round and warped charts", s.max_rel_pairing,
            1e-4, 0.0, Reference::Oracle)
        .inputs = "tangent-lc, n = " + std::to_string(n);
    auto& L = rep.add("sphere-as-warped-integral", "int <S(B), B> over a band agrees between charts", s.rel_L, 1e-4,
                      0.0, Reference::Oracle);
    L.value = s.L_warped;
    L.inputs = "band (0.2, pi-0.2)";
  });
  guard(rep, "cutoff-expansion", "Leibniz expansion of delta d(eta i_V R)", [&] {
    const auto rnd = catalog::random_polynomial_potential(Wsin, liealg::StructureGroup::su(2), cfg.seed, 2);
    const auto eta = warped::cutoff(4.0);
    const auto ce = warped::cutoff_expansion_check(rnd.connection(fd), eta);
    const auto tp = warped::transition_points(*Wsin, eta, cfg.points, cfg.seed);
    rep.add("cutoff-expansion-display",
            "delta d(eta B) = eta delta d B - (eta'' + 2 eta' f'/f) B - 2 eta' nabla_T R(V, .) as printed",
            warped::worst_relative(ce.lhs, ce.rhs_display, tp), 1e-5, 0.0, Reference::Oracle)
        .inputs = describe_entry(rnd) + ", R = 4";
    rep.add("cutoff-expansion-derived",
            "delta d(eta B) = eta delta d B - (eta'' + (n+1) eta' f'/f) B - 2 eta' nabla_T R(V, .) - eta' (delta B) dr",
            warped::worst_relative(ce.lhs, ce.rhs_derived, tp), 1e-5, 0.0, Reference::Oracle)
        .inputs = describe_entry(rnd) + ", R = 4";
  });
  guard(rep, "cutoff-constants", "cutoff derivative bounds |d^k eta| <= C_k R^{-k} independent of R", [&] {
    std::array<double, 3> lo{kInf, kInf, kInf}, hi{0.0, 0.0, 0.0};
    for (double R : {4.0, 16.0, 64.0}) {
      const auto k = warped::cutoff(R).reconstructed_constants();
      for (int i = 0; i < 3; ++i) {
        lo[i] = std::min(lo[i], k[i]);
        hi[i] = std::max(hi[i], k[i]);
      }
    }
    double spread = 1.0;
    for (int i = 0; i < 3; ++i) spread = std::max(spread, hi[i] / lo[i]);
    rep.add("cutoff-constants", "cutoff derivative bounds |d^k eta| <= C_k R^{-k} independent of R", spread, 1.1, 0.0,
            Reference::ClosedForm)
        .inputs = "R in {4, 16, 64}";
  });
  guard(rep, "boundary-error-decay", "cutoff boundary error decays like R^{-(2s-n)}", [&] {
    const SpecPtr cone = std::make_shared<const GeometrySpec>(
        GeometrySpec::warped_product(0.0, kInf, 4, geometry::ProfileFunction::linear()));
    const auto dec = catalog::decaying_polynomial_potential(cone, liealg::StructureGroup::su(2), cfg.seed, 1, 2.5);
    const Connection c = dec.connection(integral_fd(cfg));
    std::vector<double> Rs{4.0, 16.0, 64.0, 256.0}, vals;
    bool bounded = true;
    for (double R : Rs) {
      const auto be = warped::boundary_error(c, R, q);
      vals.push_back(be.error.value);
      bounded = bounded && std::abs(be.error.value) <= 10.0 * be.band_energy.value;
    }
    const double slope = warped::loglog_slope(Rs, vals);
    const double s = 5.0;
    auto& rec = rep.add("boundary-error-decay", "cutoff boundary error decays like R^{-(2s-n)}", slope,
                        -(2.0 * s - 5.0) + 0.3, 0.0, Reference::ClosedForm);
    rec.value = slope;
    rec.inputs = describe_entry(dec) + ", s = 5";
    bool monotone = true;
    for (std::size_t i = 1; i < vals.size(); ++i) monotone = monotone && std::abs(vals[i]) < std::abs(vals[i - 1]);
    rep.add("boundary-error-bounded", "boundary error is monotone in R and bounded by C int_bands |R|^2",
            monotone && bounded ? 0.0 : 1.0, 0.5, 0.0, Reference::ClosedForm)
        .inputs = "C = 10";
  });
  guard(rep, "radial-witness", "int (n-4) f''/f |i_V R|^2 < 0 on the round sphere", [&] {
    const auto w = warped::radial_witness(lc.connection(integral_fd(cfg)), 0.3, pi - 0.3, q);
    auto& rec = rep.add("radial-witness", "int (n-4) f''/f |i_V R|^2 < 0 on the round sphere",
                        w.value.value + 5.0 * w.value.std_error, 0.0, w.value.std_error, Reference::ClosedForm);
    rec.value = w.value.value;
    rec.inputs = w.conclusion;
  });
  guard(rep, "profile-conditions", "profile conditions (a)-(d)", [&] {
    const auto prof = parse_profile(cfg.profile);
    const auto [a, b] = profile_interval(cfg.profile);
    const auto r = warped::profile_condition_check(prof, a, b);
    auto& rec = rep.add("profile-conditions", "profile conditions (a)-(d)", r.all() ? 0.0 : 1.0, 0.5, 0.0,
                        Reference::ClosedForm);
    std::ostringstream os;
    os << "f = " << cfg.profile << ": a=" << r.a << " b=" << r.b << " c=" << r.c << " d=" << r.d
       << " sup|ff''|=" << report::format_number(r.sup_ffpp) << " C_c=" << report::format_number(r.ratio_c)
       << " C_d=" << report::format_number(r.ratio_d);
    rec.inputs = os.str();
  });
  return rep;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << "suites=";
  for (std::size_t i = 0; i < suites.size(); ++i) os << (i ? "," : "") << suites[i];
  os << "\ngeometry=" << geometry << "\nentry=" << entry << "\nphi=" << phi << "\nlambda=";
  for (std::size_t i = 0; i < lambdas.size(); ++i) os << (i ? "," : "") << report::format_number(lambdas[i]);
  os << "\nprofile=" << profile << "\nfd_order=" << fd_order << "\nfd_step=" << report::format_number(fd_step)
     << "\nnodes=" << nodes << "\nproduct_nodes=" << product_nodes << "\nseed=" << seed << "\npoints=" << points
     << "\n";
  return os.str();
}

std::string RunConfig::digest() const { return report::digest(canonical()); }

void RunConfig::validate() const {
  for (const auto& s : suites)
    if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
      throw ConfigError("unknown suite '" + s + "'");
  if (std::find(entry_names().begin(), entry_names().end(), entry) == entry_names().end())
    throw ConfigError("unknown entry '" + entry + "'");
  if (fd_order != 2 && fd_order != 4) throw ConfigError("fd order must be 2 or 4");
  if (!(fd_step > 0.0 && fd_step < 0.1)) throw ConfigError("fd step must lie in (0, 0.1)");
  if (nodes < 8 || product_nodes < 8) throw ConfigError("node counts must be at least 8");
  if (points < 1 || points > 10000) throw ConfigError("points must lie in [1, 10000]");
  if (lambdas.empty()) throw ConfigError("at least one lambda is required");
  const SpecPtr s = parse_geometry(geometry, profile);
  parse_phi(phi, s->is_sphere() ? *s : GeometrySpec::round_sphere(5), seed);
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"geometry", "forms", "conformal", "products", "warped", "instability"};
  return names;
}

const std::vector<std::string>& entry_names() {
  static const std::vector<std::string> names{"tangent-lc", "product-tangent-lc", "fiber-lc", "bpst", "random-poly",
                                              "flat"};
  return names;
}

geometry::ProfileFunction parse_profile(const std::string& name) {
  if (name == "sin") return geometry::ProfileFunction::sine();
  if (name == "const") return geometry::ProfileFunction::constant(1.0);
  if (name == "linear") return geometry::ProfileFunction::linear();
  if (name == "exp") return geometry::ProfileFunction::exponential();
  if (name.rfind("ellipsoid:", 0) == 0) {
    const double a = to_double(name.substr(10), "profile");
    if (!(a > 0.0)) throw ConfigError("ellipsoid axis must be positive");
    return catalog::ellipsoid_profile(a);
  }
  throw ConfigError("unknown profile '" + name + "'");
}

std::pair<double, double> profile_interval(const std::string& name) {
  if (name == "sin") return {0.0, std::numbers::pi};
  if (name == "const") return {0.0, 4.0};
  if (name.rfind("ellipsoid:", 0) == 0)
    return {0.0, catalog::ellipsoid_meridian_length(to_double(name.substr(10), "profile"))};
  parse_profile(name);
  return {0.0, kInf};
}

SpecPtr parse_geometry(const std::string& raw, const std::string& profile) {
  const std::string name = trim(raw);
  if (name.size() >= 2 && name[0] == 'w') {
    const int n = to_int(name.substr(1), "geometry");
    if (n < 2) throw ConfigError("warped geometry needs n >= 2");
    const auto [a, b] = profile_interval(profile);
    return std::make_shared<const GeometrySpec>(GeometrySpec::warped_product(a, b, n - 1, parse_profile(profile)));
  }
  std::vector<int> dims;
  std::size_t pos = 0;
  while (pos < name.size()) {
    if (name[pos] != 's') throw ConfigError("unknown geometry '" + raw + "'");
    std::size_t end = name.find('x', pos);
    if (end == std::string::npos) end = name.size();
    dims.push_back(to_int(name.substr(pos + 1, end - pos - 1), "geometry"));
    pos = end == name.size() ? end : end + 1;
    if (end != name.size() && pos == name.size()) throw ConfigError("unknown geometry '" + raw + "'");
  }
  if (dims.empty()) throw ConfigError("empty geometry name");
  for (int d : dims)
    if (d < 2) throw ConfigError("sphere factors need dimension >= 2");
  if (dims.size() == 1) return std::make_shared<const GeometrySpec>(GeometrySpec::round_sphere(dims[0]));
  return std::make_shared<const GeometrySpec>(GeometrySpec::product_spheres(dims));
}

Vec seeded_direction(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  Vec w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = N(rng);
  return w / w.norm();
}

ScalarField parse_phi(const std::string& raw, const GeometrySpec& spec, std::uint64_t seed) {
  const std::string expr = trim(raw);
  if (expr.empty()) throw ConfigError("empty phi expression");
  // Split into signed terms; a sign directly after an exponent marker belongs to the number.
  std::vector<std::string> terms;
  std::string cur;
  for (std::size_t i = 0; i < expr.size(); ++i) {
    const char c = expr[i];
    const bool exponent = i >= 2 && (expr[i - 1] == 'e' || expr[i - 1] == 'E') &&
                          (std::isdigit(static_cast<unsigned char>(expr[i - 2])) || expr[i - 2] == '.');
    if ((c == '+' || c == '-') && !exponent && i > 0) {
      terms.push_back(cur);
      cur.clear();
    }
    cur += c;
  }
  terms.push_back(cur);

  ScalarField out = ScalarField::constant_value(0.0);
  std::string label;
  double constant = 0.0;
  bool has_field = false;
  for (std::string t : terms) {
    double sign = 1.0;
    if (!t.empty() && (t[0] == '+' || t[0] == '-')) {
      sign = t[0] == '-' ? -1.0 : 1.0;
      t = t.substr(1);
    }
    if (t.empty()) throw ConfigError("dangling sign in phi '" + raw + "'");
    double coef = 1.0;
    std::string atom = t;
    if (const auto star = t.find('*'); star != std::string::npos) {
      coef = to_double(t.substr(0, star), "phi");
      atom = t.substr(star + 1);
    } else if (t[0] != 'f') {
      constant += sign * to_double(t, "phi");
      continue;
    }
    if (!spec.is_sphere()) throw ConfigError("phi atoms need a sphere geometry");
    const int n = spec.dim();
    Vec w;
    if (atom == "f_w") {
      w = seeded_direction(n, seed);
    } else if (atom.rfind("f_e", 0) == 0) {
      const int k = to_int(atom.substr(3), "phi");
      if (k > n + 1) throw ConfigError("phi basis index out of range: " + atom);
      w = Vec::Unit(n + 1, k - 1);
    } else {
      throw ConfigError("unknown phi atom '" + atom + "'");
    }
    out = out + geometry::ambient_linear_function(GeometrySpec::round_sphere(n), w).scaled(sign * coef);
    label += (label.empty() ? "" : (sign * coef < 0 ? "" : "+")) + report::format_number(sign * coef) + "*" + atom;
    has_field = true;
  }
  if (!has_field) {
    ScalarField c = ScalarField::constant_value(constant);
    c.label = report::format_number(constant);
    return c;
  }
  if (constant != 0.0) {
    out = out + ScalarField::constant_value(constant);
    label += (constant < 0 ? "" : "+") + report::format_number(constant);
  }
  out.constant = false;
  out.label = label;
  return out;
}

catalog::CatalogEntry make_entry(const std::string& name, const SpecPtr& spec, std::uint64_t seed) {
  if (name == "tangent-lc") {
    if (product(*spec)) return catalog::product_tangent_levi_civita(spec);
    return catalog::tangent_levi_civita(spec);
  }
  if (name == "product-tangent-lc") return catalog::product_tangent_levi_civita(spec);
  if (name == "fiber-lc") return catalog::fiber_levi_civita(spec);
  if (name == "bpst") {
    if (!(round_sphere(*spec) && spec->dim() == 4)) throw UnsupportedGeometryError("bpst lives on S^4");
    return catalog::bpst_instanton();
  }
  if (name == "random-poly") return catalog::random_polynomial_potential(spec, liealg::StructureGroup::su(2), seed, 2);
  if (name == "flat") return catalog::flat_connection(spec, liealg::StructureGroup::su(2));
  throw ConfigError("unknown entry '" + name + "'");
}

std::vector<CatalogRow> catalog_table(std::uint64_t seed) {
  const std::vector<std::pair<std::string, std::string>> rows{
      {"tangent-lc", "s4"},   {"tangent-lc", "s5"},      {"tangent-lc", "s6"}, {"tangent-lc", "w5"},
      {"product-tangent-lc", "s4xs4"}, {"product-tangent-lc", "s5xs5"}, {"fiber-lc", "w5:const"},
      {"bpst", "s4"},         {"random-poly", "s5"},     {"flat", "s5"}};
  std::vector<CatalogRow> out;
  for (const auto& [entry, geom] : rows) {
    const auto colon = geom.find(':');
    const SpecPtr spec = colon == std::string::npos ? parse_geometry(geom)
                                                    : parse_geometry(geom.substr(0, colon), geom.substr(colon + 1));
    const auto e = make_entry(entry, spec, seed);
    CatalogRow r;
    r.name = e.name;
    r.geometry = e.spec().describe();
    r.group = e.potential.group().name();
    for (const auto& c : e.checks) {
      if (!r.tags.empty()) r.tags += " ";
      r.tags += catalog::tag_name(c.tag) + (c.passed ? "" : "(failed)");
    }
    if (r.tags.empty()) r.tags = "-";
    r.verified = e.verified();
    out.push_back(r);
  }
  return out;
}

report::VerificationReport run_suite(const std::string& suite, const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  VerificationReport rep;
  if (suite == "geometry")
    rep = geometry_suite(cfg);
  else if (suite == "forms")
    rep = forms_suite(cfg);
  else if (suite == "conformal")
    rep = conformal_suite(cfg);
  else if (suite == "products")
    rep = products_suite(cfg);
  else if (suite == "warped")
    rep = warped_suite(cfg);
  else if (suite == "instability")
    rep = instability_suite(cfg);
  else
    throw ConfigError("unknown suite '" + suite + "'");
  rep.config_digest = cfg.digest();
  rep.seed = cfg.seed;
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::vector<report::VerificationReport> run(const RunConfig& cfg) {
  cfg.validate();
  std::vector<std::string> selected;
  for (const auto& s : suite_names())
    if (cfg.suites.empty() || std::find(cfg.suites.begin(), cfg.suites.end(), s) != cfg.suites.end())
      selected.push_back(s);
  const std::size_t budget = static_cast<std::size_t>(std::max(1, quadrature::worker_count()));
  std::vector<report::VerificationReport> out(selected.size());
  for (std::size_t start = 0; start < selected.size(); start += budget) {
    std::vector<std::future<report::VerificationReport>> jobs;
    const std::size_t stop = std::min(selected.size(), start + budget);
    for (std::size_t i = start; i < stop; ++i)
      jobs.push_back(std::async(std::launch::async, [&cfg, name = selected[i]] { return run_suite(name, cfg); }));
    for (std::size_t i = start; i < stop; ++i) out[i] = jobs[i - start].get();
  }
  return out;
}

}  // namespace ymstab::suites
