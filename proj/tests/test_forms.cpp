#include "ymstab/catalog.hpp"
#include "ymstab/forms.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace ymstab;
using namespace ymstab::forms;
using geometry::ScalarField;

namespace {

SpecPtr sphere(int n) { return std::make_shared<const GeometrySpec>(GeometrySpec::round_sphere(n)); }

double worst_ratio(const Field& res, const Field& ref, const std::vector<Vec>& pts) {
  double d = 0.0, s = 0.0;
  for (const auto& x : pts) {
    d = std::max(d, frame_norm(res.spec(), res.group(), x, res(x)));
    s = std::max(s, frame_norm(ref.spec(), ref.group(), x, ref(x)));
  }
  return s > 0.0 ? d / s : d;
}

double worst_abs(const Field& f, const std::vector<Vec>& pts) {
  double d = 0.0;
  for (const auto& x : pts) d = std::max(d, frame_norm(f.spec(), f.group(), x, f(x)));
  return d;
}

}  // namespace

TEST_SUITE("forms") {
  TEST_CASE("tensor values: index round trip and antisymmetrization") {
    TensorValue t(3, 4, 2);
    int idx[3];
    for (std::size_t f = 0; f < t.count(); ++f) {
      t.unflatten(f, idx);
      CHECK(t.index(idx) == f);
      t[f].setConstant(static_cast<double>(f));
    }
    const TensorValue a = antisymmetrize(t);
    const TensorValue aa = antisymmetrize(a);
    CHECK((aa - a).max_abs() < 1e-14);
    // alternating: swapping two slots flips the sign
    const std::size_t f012 = a.index({0, 1, 2}), f102 = a.index({1, 0, 2});
    CHECK((a[f012] + a[f102]).norm() < 1e-14);
  }

  TEST_CASE("flat connection has zero curvature") {
    const auto e = catalog::flat_connection(sphere(4), StructureGroup::su(2));
    const auto c = e.connection();
    CHECK(worst_abs(c.R, quadrature::sample_points(e.spec(), 5, 1)) == 0.0);
  }

  TEST_CASE("curvature is alternating and satisfies the Bianchi identity") {
    const auto S = sphere(5);
    const auto e = catalog::random_polynomial_potential(S, StructureGroup::su(2), 21, 2);
    const auto c = e.connection();
    const auto pts = quadrature::sample_points(*S, 8, 2);
    for (const auto& x : pts) {
      const TensorValue R = c.R(x);
      CHECK((antisymmetrize(R) - R).max_abs() < 1e-12);
    }
    CHECK(worst_ratio(d_nabla(c, c.R), c.R, pts) < 1e-6);
  }

  TEST_CASE("d_nabla d_nabla = [R ^ .] on sections") {
    const auto S = sphere(4);
    const auto e = catalog::random_polynomial_potential(S, StructureGroup::so(3), 5, 2);
    const auto c = e.connection();
    const auto sigma = catalog::random_polynomial_potential(S, StructureGroup::so(3), 6, 1).potential;
    // Contract the 1-form sigma with a fixed covector to get a section.
    const Field s = make_field(S, c.group(), 0, [sigma](const Vec& x, TensorValue& t) {
      const TensorValue v = sigma(x);
      t[0] = v[0] + 0.5 * v[1];
    });
    const Field dd = d_nabla(c, d_nabla(c, s));
    const Field rs = make_field(S, c.group(), 2, [c, s](const Vec& x, TensorValue& t) {
      const TensorValue R = c.R(x), v = s(x);
      for (std::size_t f = 0; f < t.count(); ++f) {
        liealg::Mat out(t.msize(), t.msize());
        liealg::bracket_into(R[f], v[0], out);
        t[f] = out;
      }
    });
    CHECK(worst_ratio(dd - rs, rs, quadrature::sample_points(*S, 6, 3)) < 1e-5);
  }

  TEST_CASE("Bochner-Weitzenboeck residual, degrees 1 and 2") {
    const auto S = sphere(5);
    const auto pts = quadrature::sample_points(*S, 6, 4);
    for (const auto& e : {catalog::tangent_levi_civita(S), catalog::random_polynomial_potential(S, StructureGroup::su(2), 8, 2)}) {
      const auto c = e.connection();
      const Field B = catalog::random_polynomial_potential(S, c.group(), 9, 2).potential;
      CHECK(worst_ratio(bochner_residual(c, B), hodge_laplacian(c, B), pts) < 1e-5);
      const Field psi = d_nabla(c, B);
      CHECK(worst_ratio(bochner_residual(c, psi), hodge_laplacian(c, psi), pts) < 1e-5);
    }
  }

  TEST_CASE("Bochner residual is not trivially zero") {
    const auto S = sphere(4);
    const auto c = catalog::tangent_levi_civita(S).connection();
    const Field B = catalog::random_polynomial_potential(S, c.group(), 3, 2).potential;
    // Dropping the curvature action breaks the identity.
    const Field wrong = hodge_laplacian(c, B) - rough_laplacian(c, B);
    CHECK(worst_abs(wrong, quadrature::sample_points(*S, 4, 5)) > 1e-2);
  }

  TEST_CASE("conformal codifferential: formula vs conformal metric") {
    for (int n : {4, 5}) {
      const auto S = sphere(n);
      Vec w = Vec::Zero(n + 1);
      w[0] = 0.6;
      w[n] = 0.8;
      const ScalarField phi = geometry::ambient_linear_function(*S, w).scaled(0.3);
      const auto C = std::make_shared<const GeometrySpec>(GeometrySpec::conformal_sphere(n, phi));
      const auto e = catalog::random_polynomial_potential(S, StructureGroup::su(2), 12, 2);
      const auto c = e.connection();
      const auto cc = c.rebind(C);
      const auto pts = quadrature::sample_points(*S, 6, 6);
      for (const Field& psi : {e.potential, c.R}) {
        const Field formula = delta_nabla_conformal(c, psi, phi);
        const Field psic = psi.rebind(C);
        const Field direct(S, c.group(), psi.rank() - 1, [cc, psic](const Vec& x) { return delta_nabla_at(cc, psic, x); });
        CHECK(worst_ratio(formula - direct, direct, pts) < 1e-5);
      }
    }
  }

  TEST_CASE("interior product and frame norm") {
    const auto S = sphere(3);
    const auto c = catalog::tangent_levi_civita(S).connection();
    const Vec x = quadrature::sample_points(*S, 1, 8)[0];
    const TensorValue R = c.R(x);
    // |R|^2 of the tangent Levi-Civita connection on the unit S^n: n(n-1)/2 sectional planes, each of norm 1.
    CHECK(frame_norm(*S, c.group(), x, R) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-6));
    const Vec X = Vec::Unit(3, 0);
    const TensorValue iR = interior_product_value(X, R);
    CHECK(iR.rank() == 1);
    CHECK((interior_product_value(X, iR)).max_abs() < 1e-12);
  }

  TEST_CASE("degree errors") {
    const auto S = sphere(3);
    const auto c = catalog::tangent_levi_civita(S).connection();
    const Field s = zero_field(S, c.group(), 0);
    CHECK_THROWS_AS(interior_product(geometry::VectorField{[](const Vec& x) { return x; }}, s), DegreeError);
  }
}
