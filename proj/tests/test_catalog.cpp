#include "ymstab/catalog.hpp"
#include "ymstab/variation.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace ymstab;
using namespace ymstab::catalog;
using geometry::Vec;

namespace {

SpecPtr make(GeometrySpec g) { return std::make_shared<const GeometrySpec>(std::move(g)); }

}  // namespace

TEST_SUITE("catalog") {
  TEST_CASE("declared tags verify") {
    std::vector<CatalogEntry> entries{
        tangent_levi_civita(make(GeometrySpec::round_sphere(5))),
        tangent_levi_civita(make(GeometrySpec::round_sphere(6))),
        product_tangent_levi_civita(make(GeometrySpec::product_spheres({4, 4}))),
        fiber_levi_civita(make(GeometrySpec::warped_product(0.0, 4.0, 4, ProfileFunction::constant(1.0)))),
        bpst_instanton(),
        flat_connection(make(GeometrySpec::round_sphere(3)), StructureGroup::su(2)),
        random_polynomial_potential(make(GeometrySpec::round_sphere(5)), StructureGroup::su(2), 42, 2)};
    for (const auto& e : entries) {
      INFO(e.name);
      CHECK(e.verified());
      CHECK(e.checks.size() == e.tags.size());
    }
    CHECK(entries[4].has(Tag::YangMillsDim4));
    CHECK(entries[5].has(Tag::Flat));
  }

  TEST_CASE("a random connection is not Yang-Mills") {
    auto e = random_polynomial_potential(make(GeometrySpec::round_sphere(4)), StructureGroup::su(2), 3, 2);
    e.tags.insert(Tag::YangMillsRound);
    verify_tags(e);
    CHECK_FALSE(e.verified());
  }

  TEST_CASE("BPST energy matches its frozen value") {
    const auto b = bpst_instanton();
    quadrature::QuadratureConfig q;
    q.mc_nodes = 2000;
    const auto rule = quadrature::make_rule(b.spec(), q);
    const auto E = variation::ym_functional(b.connection(), geometry::ScalarField::constant_value(0.0), rule);
    CHECK(E.value == doctest::Approx(kBpstYangMillsEnergy).epsilon(1e-8));
    CHECK(kBpstYangMillsEnergy == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi).epsilon(1e-14));
  }

  TEST_CASE("random potentials are smooth through the chart pole") {
    const auto S = make(GeometrySpec::round_sphere(3));
    const auto e = random_polynomial_potential(S, StructureGroup::so(3), 4, 3);
    // Far out in the chart the coordinate components decay like |x|^-2 since
    // the ambient form is bounded.
    Vec far = Vec::Zero(3);
    far[0] = 3.9;
    Vec near = Vec::Zero(3);
    near[0] = 1.0;
    CHECK(e.potential(far).max_abs() < e.potential(near).max_abs() * 4.0);
  }

  TEST_CASE("ellipsoid profiles") {
    for (double a : {0.5, 2.0}) {
      const auto p = ellipsoid_profile(a);
      const double L = ellipsoid_meridian_length(a);
      CHECK(p.f(1e-6) == doctest::Approx(0.0).epsilon(1e-5));
      CHECK(p.f(L - 1e-6) == doctest::Approx(0.0).epsilon(1e-5));
      // unit-speed meridian: f'^2 + h'^2 = 1
      for (double r : {0.1 * L, 0.5 * L, 0.9 * L})
        CHECK(p.df(r) * p.df(r) + p.dheight(r) * p.dheight(r) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK_THROWS_AS(ellipsoid_profile(-1.0), ParameterError);
  }

  TEST_CASE("construction errors") {
    CHECK_THROWS_AS(product_tangent_levi_civita(make(GeometrySpec::round_sphere(4))), UnsupportedGeometryError);
    CHECK_THROWS_AS(fiber_levi_civita(make(GeometrySpec::round_sphere(4))), UnsupportedGeometryError);
    CHECK_THROWS_AS(random_polynomial_potential(make(GeometrySpec::round_sphere(4)), StructureGroup::su(2), 1, 7),
                    DegreeError);
    CHECK_THROWS_AS(decaying_polynomial_potential(make(GeometrySpec::round_sphere(4)), StructureGroup::su(2), 1, 1, 0.0),
                    ParameterError);
  }
}
