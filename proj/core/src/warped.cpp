#include "ymstab/warped.hpp"

#include "ymstab/products.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace ymstab::warped {

using forms::TensorValue;
using geometry::GeometrySpec;
using geometry::Matrix;

namespace {

double psi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
double psi1(double t) { return t > 0.0 ? psi(t) / (t * t) : 0.0; }
double psi2(double t) {
  if (t <= 0.0) return 0.0;
  const double t2 = t * t;
  return psi(t) * (1.0 / (t2 * t2) - 2.0 / (t2 * t));
}

// max s' and max |s''| on [0, 1].
std::array<double, 3> smoothstep_constants() {
  static const std::array<double, 3> C = [] {
    std::array<double, 3> c{1.0, 0.0, 0.0};
    const int m = 20000;
    for (int i = 1; i < m; ++i) {
      const double t = static_cast<double>(i) / m;
      c[1] = std::max(c[1], std::abs(smoothstep(t, 1)));
      c[2] = std::max(c[2], std::abs(smoothstep(t, 2)));
    }
    return c;
  }();
  return C;
}

// Value and derivatives of t -> s(a t + b).
std::array<double, 3> ramp(double r, double a, double b) {
  const double t = a * r + b;
  return {smoothstep(t, 0), a * smoothstep(t, 1), a * a * smoothstep(t, 2)};
}

std::array<double, 3> cutoff_jet(const CutoffFamily& c, double r) {
  const double R = c.R;
  const auto p = ramp(r - c.r_min, R, -1.0);
  std::array<double, 3> q;
  if (c.finite()) {
    q = ramp(c.r_max - r, R, -1.0);
    q[1] = -q[1];
  } else {
    const auto o = ramp(r - c.r_min, 1.0 / R, -1.0);
    q = {1.0 - o[0], -o[1], -o[2]};
  }
  return {p[0] * q[0], p[1] * q[0] + p[0] * q[1], p[2] * q[0] + 2.0 * p[1] * q[1] + p[0] * q[2]};
}

void verify_cutoff(const CutoffFamily& c) {
  const auto bands = c.transition_bands();
  const double hi = c.finite() ? c.r_max : c.r_min + 3.0 * c.R;
  const int m = 4000;
  for (int i = 1; i < m; ++i) {
    const double r = c.r_min + (hi - c.r_min) * i / m;
    const double v = c.value(r);
    if (!(v >= 0.0 && v <= 1.0)) throw EvaluationError("cutoff leaves [0, 1]");
    bool in_band = false;
    bool below = r <= bands.front().first, above = r >= bands.back().second;
    for (const auto& [a, b] : bands) in_band = in_band || (r > a && r < b);
    if (!in_band && (below || above) && v != 0.0) throw EvaluationError("cutoff is nonzero outside its support");
    if (!in_band && !below && !above && v != 1.0) throw EvaluationError("cutoff is not 1 on its plateau");
  }
}

}  // namespace

double smoothstep(double t, int derivative) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return derivative == 0 ? 1.0 : 0.0;
  const double a = psi(t), b = psi(1.0 - t);
  const double D = a + b;
  if (derivative == 0) return a / D;
  const double a1 = psi1(t), b1 = -psi1(1.0 - t);
  const double N = a1 * b - a * b1;
  if (derivative == 1) return N / (D * D);
  if (derivative != 2) throw ParameterError("smoothstep derivative must be 0, 1 or 2");
  const double a2 = psi2(t), b2 = psi2(1.0 - t);
  const double N1 = a2 * b - a * b2;
  const double D1 = a1 + b1;
  return (N1 * D - 2.0 * N * D1) / (D * D * D);
}

double CutoffFamily::value(double r) const { return cutoff_jet(*this, r)[0]; }
double CutoffFamily::d1(double r) const { return cutoff_jet(*this, r)[1]; }
double CutoffFamily::d2(double r) const { return cutoff_jet(*this, r)[2]; }
bool CutoffFamily::finite() const { return std::isfinite(r_max); }

ScalarField CutoffFamily::eta() const {
  const CutoffFamily self = *this;
  ScalarField s;
  s.value = [self](const Vec& x) { return self.value(x[0]); };
  s.gradient = [self](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    g[0] = self.d1(x[0]);
    return g;
  };
  s.hessian = [self](const Vec& x) {
    Matrix h = Matrix::Zero(x.size(), x.size());
    h(0, 0) = self.d2(x[0]);
    return h;
  };
  s.label = "eta_" + std::to_string(R);
  return s;
}

std::vector<std::pair<double, double>> CutoffFamily::transition_bands() const {
  if (finite()) return {{r_min + 1.0 / R, r_min + 2.0 / R}, {r_max - 2.0 / R, r_max - 1.0 / R}};
  return {{r_min + 1.0 / R, r_min + 2.0 / R}, {r_min + R, r_min + 2.0 * R}};
}

std::array<double, 3> CutoffFamily::reconstructed_constants(int grid) const {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  const auto bands = transition_bands();
  for (std::size_t k = 0; k < bands.size(); ++k) {
    const bool outer = !finite() && k == 1;
    const double s = outer ? R : 1.0 / R;
    const auto [a, b] = bands[k];
    for (int i = 0; i <= grid; ++i) {
      const auto j = cutoff_jet(*this, a + (b - a) * i / grid);
      out[0] = std::max(out[0], std::abs(j[0]));
      out[1] = std::max(out[1], std::abs(j[1]) * s);
      out[2] = std::max(out[2], std::abs(j[2]) * s * s);
    }
  }
  return out;
}

CutoffFamily cutoff(double R) { return cutoff(R, 0.0, std::numeric_limits<double>::infinity()); }

CutoffFamily cutoff(double R, double r_min, double r_max) {
  if (!(R > 2.0)) throw ParameterError("cutoff needs R > 2");
  if (!std::isfinite(r_min)) throw ParameterError("cutoff needs a finite left end");
  if (std::isfinite(r_max) && !(4.0 / R < r_max - r_min)) throw ParameterError("cutoff bands overlap on this interval");
  CutoffFamily c;
  c.R = R;
  c.r_min = r_min;
  c.r_max = r_max;
  c.C = smoothstep_constants();
  verify_cutoff(c);
  return c;
}

const geometry::WarpedProduct& warped_of(const GeometrySpec& spec) {
  const auto* w = std::get_if<geometry::WarpedProduct>(&spec.variant());
  if (!w) throw UnsupportedGeometryError("warped suite needs a warped product");
  return *w;
}

Field radial_variation(const Connection& c) {
  const auto V = geometry::radial_conformal_field(c.spec());
  const Field R = c.R;
  return Field(
      R.spec_ptr(), c.group(), 1, [R, V](const Vec& x) { return forms::interior_product_value(V(x), R(x)); },
      "i_VR");
}

FieldPair radial_operator_check(const Connection& c) {
  const auto& w = warped_of(c.spec());
  products::require_yang_mills(c);
  const int n = c.spec().dim();
  const Field B = radial_variation(c).cached();
  const Field lhs = variation::S_operator(c, ScalarField::constant_value(0.0), B);
  const auto prof = w.profile;
  Field rhs(
      B.spec_ptr(), c.group(), 1,
      [B, prof, n](const Vec& x) { return B(x) * ((n - 4) * prof.d2f(x[0]) / prof.f(x[0])); },
      "(n-4)f''/f i_VR");
  return {lhs, rhs};
}

variation::SecondVariationResult second_variation_warped(const Connection& c, const Field& B, double a, double b,
                                                         const QuadratureConfig& cfg, double t) {
  const auto& w = warped_of(c.spec());
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) throw SupportError("support band must be bounded");
  if (a < w.r_min || b > w.r_max) throw SupportError("support band leaves the interval");
  // The direction must vanish on the band edges that lie inside the interval.
  const auto fiber = quadrature::sample_points(c.spec(), 6, 5);
  for (double edge : {a, b}) {
    if (edge <= w.r_min || edge >= w.r_max) continue;
    for (Vec x : fiber) {
      x[0] = edge;
      if (B(x).max_abs() > 1e-12) throw SupportError("direction does not vanish at the band edge");
    }
  }
  const auto rule = quadrature::make_band_rule(c.spec(), a, b, cfg);
  return variation::second_variation(c, ScalarField::constant_value(0.0), B, rule, t);
}

CutoffExpansion cutoff_expansion_check(const Connection& c, const CutoffFamily& eta) {
  const auto& w = warped_of(c.spec());
  const int n = c.spec().dim();
  const auto prof = w.profile;
  const Field B = radial_variation(c).cached();
  const Field dB = forms::d_nabla(c, B).cached();
  const Field etaB(
      B.spec_ptr(), c.group(), 1, [B, eta](const Vec& x) { return B(x) * eta.value(x[0]); }, "eta i_VR");
  const Field detaB = forms::d_nabla(c, etaB).cached();

  CutoffExpansion out{
      Field(B.spec_ptr(), c.group(), 1, [c, detaB](const Vec& x) { return forms::delta_nabla_at(c, detaB, x); },
            "delta d(eta i_VR)"),
      B, B};
  // Shared part: eta delta d B - eta'' B - 2 eta' nabla_T R(V, .), with k f'/f eta' B.
  auto expansion = [c, B, dB, eta, prof, n](bool derived) {
    return [=](const Vec& x) {
      const double r = x[0];
      const double e0 = eta.value(r), e1 = eta.d1(r), e2 = eta.d2(r);
      const double fp_f = prof.df(r) / prof.f(r);
      const double k = derived ? n + 1.0 : 2.0;
      TensorValue b = B(x);
      TensorValue out = b * (-(e2 + k * e1 * fp_f));
      if (e0 != 0.0) out += forms::delta_nabla_at(c, dB, x) * e0;
      if (e1 != 0.0) {
        const TensorValue DR = forms::nabla_at(c, c.R, x);
        const double f = prof.f(r);
        for (int j = 0; j < n; ++j) out[j] -= (2.0 * e1 * f) * DR[DR.index({0, 0, j})];
        if (derived) out[0] -= e1 * forms::delta_nabla_at(c, B, x)[0];
      }
      return out;
    };
  };
  out.rhs_display = Field(B.spec_ptr(), c.group(), 1, expansion(false), "cutoff expansion (display)");
  out.rhs_derived = Field(B.spec_ptr(), c.group(), 1, expansion(true), "cutoff expansion (derived)");
  return out;
}

std::vector<Vec> transition_points(const GeometrySpec& spec, const CutoffFamily& eta, int count, std::uint64_t seed) {
  const auto& w = warped_of(spec);
  auto pts = quadrature::sample_points(spec, count, seed);
  std::vector<std::pair<double, double>> bands;
  for (auto [a, b] : eta.transition_bands()) {
    a = std::max(a, w.r_min);
    b = std::min(b, w.r_max);
    if (a < b) bands.emplace_back(a, b);
  }
  if (bands.empty()) throw ParameterError("cutoff transition bands miss the interval");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto [a, b] = bands[i % bands.size()];
    pts[i][0] = a + (b - a) * u(rng);
  }
  return pts;
}

double worst_relative(const Field& lhs, const Field& rhs, const std::vector<Vec>& points, double floor) {
  double diff = 0.0, scale = floor;
  for (const auto& x : points) {
    const TensorValue l = lhs(x), r = rhs(x);
    diff = std::max(diff, forms::frame_norm(lhs.spec(), lhs.group(), x, l - r));
    scale = std::max({scale, forms::frame_norm(lhs.spec(), lhs.group(), x, l),
                      forms::frame_norm(lhs.spec(), lhs.group(), x, r)});
  }
  return diff / scale;
}

BoundaryError boundary_error(const Connection& c, double R, const QuadratureConfig& cfg) {
  const GeometrySpec& spec = c.spec();
  const auto& w = warped_of(spec);
  const int n = spec.dim();
  const CutoffFamily eta = cutoff(R, w.r_min, w.r_max);
  const Field B = radial_variation(c);
  const auto prof = w.profile;
  BoundaryError out;
  double var_e = 0.0, var_b = 0.0;
  for (const auto& [a, b] : eta.transition_bands()) {
    const auto rule = quadrature::make_band_rule(spec, a, b, cfg);
    auto est = quadrature::integrate_many(rule, 2, [&](const Vec& x, double* o) {
      const double r = x[0];
      const double e0 = eta.value(r), e1 = eta.d1(r);
      const double f = prof.f(r);
      const double coef = (n - 4) * e0 * e0 * prof.d2f(r) / f + e1 * e1 - 2.0 * e0 * e1 * prof.df(r) / f;
      const Matrix E = geometry::orthonormal_frame(spec, x);
      const TensorValue b = B(x), Rv = c.R(x);
      o[0] = coef * forms::pointwise_inner_value(spec, c.group(), x, b, b, E);
      o[1] = forms::pointwise_inner_value(spec, c.group(), x, Rv, Rv, E);
    });
    out.error.value += est[0].value;
    out.band_energy.value += est[1].value;
    var_e += est[0].std_error * est[0].std_error;
    var_b += est[1].std_error * est[1].std_error;
  }
  out.error.std_error = std::sqrt(var_e);
  out.band_energy.std_error = std::sqrt(var_b);
  if (!std::isfinite(out.error.value) || !std::isfinite(out.band_energy.value))
    throw EvaluationError("boundary integrand is not finite");
  return out;
}

double loglog_slope(const std::vector<double>& Rs, const std::vector<double>& values) {
  if (Rs.size() != values.size() || Rs.size() < 2) throw ParameterError("slope needs at least two matched samples");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double m = static_cast<double>(Rs.size());
  for (std::size_t i = 0; i < Rs.size(); ++i) {
    if (!(Rs[i] > 0.0) || !(std::abs(values[i]) > 0.0)) throw ParameterError("slope needs positive samples");
    const double x = std::log(Rs[i]), y = std::log(std::abs(values[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

bool profile_hypothesis(const ProfileFunction& f, int n, double r_min, double r_max, int grid) {
  const double hi = std::isfinite(r_max) ? r_max : r_min + 50.0;
  for (int i = 1; i < grid; ++i) {
    const double r = r_min + (hi - r_min) * i / grid;
    if (!((n - 4) * f.d2f(r) < 0.0)) return false;
  }
  return true;
}

WitnessReport radial_witness(const Connection& c, double a, double b, const QuadratureConfig& cfg) {
  const GeometrySpec& spec = c.spec();
  const auto& w = warped_of(spec);
  const int n = spec.dim();
  WitnessReport rep;
  rep.applicable = n != 4;
  if (!rep.applicable) {
    rep.conclusion = "no conclusion from this criterion";
    return rep;
  }
  rep.hypothesis_met = profile_hypothesis(w.profile, n, w.r_min, w.r_max);
  if (!rep.hypothesis_met) {
    rep.conclusion = "hypothesis not met";
    return rep;
  }
  if (!(a < b) || a < w.r_min || b > w.r_max) throw ParameterError("witness band must lie inside the interval");
  const Field B = radial_variation(c);
  const auto prof = w.profile;
  const auto rule = quadrature::make_band_rule(spec, a, b, cfg);
  rep.value = quadrature::integrate(rule, [&](const Vec& x) {
    const TensorValue v = B(x);
    return (n - 4) * prof.d2f(x[0]) / prof.f(x[0]) * forms::pointwise_inner_value(spec, c.group(), x, v, v);
  });
  if (rep.value.value < -5.0 * rep.value.std_error && rep.value.value < 0.0)
    rep.conclusion = "negative radial direction: unstable unless i_V R = 0";
  else
    rep.conclusion = "i_V R vanishes on the band";
  return rep;
}

ProfileReport profile_condition_check(const ProfileFunction& f, double r_min, double r_max) {
  ProfileReport rep;
  const bool fin_lo = std::isfinite(r_min), fin_hi = std::isfinite(r_max);
  if (!fin_lo) throw ParameterError("profile interval needs a finite left end");
  const double len = fin_hi ? r_max - r_min : 10.0;
  const double lo = r_min + 0.1 * len, hi = fin_hi ? r_max - 0.1 * len : r_min + 10.0;

  auto ffpp = [&](double r) { return std::abs(f.f(r) * f.d2f(r)); };
  auto lin = [&](double r) { return std::abs(f.f(r) * (f.df(r) + 1.0)); };
  auto qc = [&](double r) { return std::abs(r) > 1e-300 ? lin(r) / std::abs(r) : 0.0; };

  // Interior grid plus sequences running into each end.
  std::vector<double> interior;
  for (int i = 0; i <= 400; ++i) interior.push_back(lo + (hi - lo) * i / 400);
  std::vector<std::vector<double>> ends;
  {
    std::vector<double> e;
    for (int k = 1; k <= 8; ++k) e.push_back(r_min + len * std::pow(10.0, -k));
    ends.push_back(e);
  }
  {
    std::vector<double> e;
    if (fin_hi)
      for (int k = 1; k <= 8; ++k) e.push_back(r_max - len * std::pow(10.0, -k));
    else
      for (int k = 0; k <= 4; ++k) e.push_back(hi + 10.0 * std::pow(2.0, k));
    ends.push_back(e);
  }

  // Bounded when the last samples of every end sequence do not outgrow the
  // interior grid and the first half of that sequence.
  auto bounded = [&](const auto& q, double& sup) {
    double head = 0.0;
    for (double r : interior) head = std::max(head, q(r));
    sup = head;
    bool ok = std::isfinite(head);
    for (const auto& e : ends) {
      double h = head;
      for (std::size_t i = 0; i < e.size() / 2; ++i) h = std::max(h, q(e[i]));
      for (double r : e) {
        const double v = q(r);
        if (!std::isfinite(v)) ok = false;
        sup = std::max(sup, v);
      }
      if (q(e.back()) > 1.5 * h + 1e-12) ok = false;
    }
    return ok && std::isfinite(sup);
  };

  rep.min_f = std::numeric_limits<double>::infinity();
  for (double r : interior) rep.min_f = std::min(rep.min_f, f.f(r));
  for (const auto& e : ends)
    for (double r : e) rep.min_f = std::min(rep.min_f, f.f(r));
  rep.a = rep.min_f > 0.0;
  rep.b = bounded(ffpp, rep.sup_ffpp);
  rep.c = bounded(qc, rep.ratio_c);

  rep.d = true;
  std::vector<std::pair<double, const std::vector<double>*>> finite_ends{{r_min, &ends[0]}};
  if (fin_hi) finite_ends.emplace_back(r_max, &ends[1]);
  for (const auto& [a, seq] : finite_ends) {
    double head = 0.0;
    for (std::size_t i = 0; i < seq->size(); ++i) {
      const double r = (*seq)[i];
      const double v = lin(r) / std::abs(r - a);
      if (!std::isfinite(v)) rep.d = false;
      rep.ratio_d = std::max(rep.ratio_d, v);
      if (i < seq->size() / 2) head = std::max(head, v);
    }
    if (lin(seq->back()) / std::abs(seq->back() - a) > 1.5 * head + 1e-12) rep.d = false;
  }
  return rep;
}

Vec round_chart_point(int n, const Vec& warped_point) {
  static thread_local std::shared_ptr<const GeometrySpec> spec;
  if (!spec || spec->dim() != n)
    spec = std::make_shared<const GeometrySpec>(
        GeometrySpec::warped_product(0.0, std::numbers::pi, n - 1, ProfileFunction::sine()));
  return geometry::sphere_chart_from_unit(geometry::chart_embed(*spec, warped_point));
}

SphereComparison sphere_as_warped(int n, double a, double b, int points, const QuadratureConfig& cfg,
                                  const geometry::FdConfig& fd) {
  if (!(0.0 < a && a < b && b < std::numbers::pi)) throw ParameterError("band must lie inside (0, pi)");
  auto wspec = std::make_shared<const GeometrySpec>(
      GeometrySpec::warped_product(0.0, std::numbers::pi, n - 1, ProfileFunction::sine()));
  auto rspec = std::make_shared<const GeometrySpec>(GeometrySpec::round_sphere(n));
  const Connection cw = catalog::tangent_levi_civita(wspec).connection(fd);
  const Connection cr = catalog::tangent_levi_civita(rspec).connection(fd);
  const auto zero = ScalarField::constant_value(0.0);
  Vec v = Vec::Zero(n + 1);
  v[n] = 1.0;
  const Field Bw = radial_variation(cw).cached();
  const Field Br = variation::test_variation(cr, zero, 0.0, v).cached();
  const Field Sw = variation::S_operator(cw, zero, Bw);
  const Field Sr = variation::S_operator(cr, zero, Br);
  const Field Yw = variation::ym_residual(cw, zero);
  const Field Yr = variation::ym_residual(cr, zero);
  const auto& grp = cw.group();

  auto pairing_w = [&](const Vec& x) { return forms::pointwise_inner_value(*wspec, grp, x, Sw(x), Bw(x)); };
  auto pairing_r = [&](const Vec& y) { return forms::pointwise_inner_value(*rspec, grp, y, Sr(y), Br(y)); };

  SphereComparison out;
  auto pts = quadrature::sample_points(*wspec, points, 23);
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(a, b);
  double pair_scale = 0.0, pair_diff = 0.0;
  for (auto& x : pts) {
    x[0] = u(rng);
    const Vec y = round_chart_point(n, x);
    const TensorValue Rw = cw.R(x), Rr = cr.R(y);
    const double r2w = forms::pointwise_inner_value(*wspec, grp, x, Rw, Rw);
    const double r2r = forms::pointwise_inner_value(*rspec, grp, y, Rr, Rr);
    out.max_rel_R2 = std::max(out.max_rel_R2, std::abs(r2w - r2r) / std::max(r2r, 1e-300));
    out.max_ym_warped = std::max(out.max_ym_warped, forms::frame_norm(*wspec, grp, x, Yw(x)) / std::sqrt(r2w));
    out.max_ym_round = std::max(out.max_ym_round, forms::frame_norm(*rspec, grp, y, Yr(y)) / std::sqrt(r2r));
    const double pw = pairing_w(x), pr = pairing_r(y);
    pair_diff = std::max(pair_diff, std::abs(pw - pr));
    pair_scale = std::max({pair_scale, std::abs(pw), std::abs(pr)});
  }
  out.max_rel_pairing = pair_diff / std::max(pair_scale, 1e-300);

  const auto rule = quadrature::make_band_rule(*wspec, a, b, cfg);
  auto est = quadrature::integrate_many(rule, 2, [&](const Vec& x, double* o) {
    o[0] = pairing_w(x);
    o[1] = pairing_r(round_chart_point(n, x));
  });
  out.L_warped = est[0].value;
  out.L_round = est[1].value;
  out.rel_L = std::abs(out.L_warped - out.L_round) / std::max(std::abs(out.L_round), 1e-300);
  return out;
}

}  // namespace ymstab::warped
