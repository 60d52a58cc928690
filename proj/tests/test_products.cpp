#include "ymstab/catalog.hpp"
#include "ymstab/products.hpp"

#include <doctest.h>

using namespace ymstab;
using namespace ymstab::products;
using forms::SpecPtr;
using geometry::GeometrySpec;

namespace {

SpecPtr product(std::vector<int> dims) {
  return std::make_shared<const GeometrySpec>(GeometrySpec::product_spheres(std::move(dims)));
}

Rule mc_rule(const GeometrySpec& S, std::size_t nodes) {
  quadrature::QuadratureConfig q;
  q.mc_nodes = nodes;
  return quadrature::make_rule(S, q);
}

}  // namespace

TEST_SUITE("products") {
  TEST_CASE("divergence identity holds for any connection") {
    const auto P = product({2, 3});
    const auto pts = quadrature::sample_points(*P, 5, 1);
    for (const auto& e : {catalog::product_tangent_levi_civita(P),
                          catalog::random_polynomial_potential(P, liealg::StructureGroup::su(2), 3, 2)}) {
      const auto c = e.connection();
      for (int k : {0, 1}) {
        Vec v = Vec::Zero(k == 0 ? 3 : 4);
        v[0] = 1.0;
        const Field r = divergence_check(c, k, v);
        const Field B = product_variation(c, k, v).B;
        double d = 0.0, s = 0.0;
        for (const auto& x : pts) {
          d = std::max(d, forms::frame_norm(*P, c.group(), x, r(x)));
          s = std::max(s, forms::frame_norm(*P, c.group(), x, B(x)));
        }
        CHECK(d <= 1e-6 * std::max(1.0, s));
      }
    }
  }

  TEST_CASE("product Levi-Civita curvature is block diagonal") {
    const auto P = product({3, 3});
    const auto c = catalog::product_tangent_levi_civita(P).connection();
    for (const auto& x : quadrature::sample_points(*P, 4, 2)) CHECK(block_coupling(c, x) < 1e-10);
    const auto rnd = catalog::random_polynomial_potential(P, liealg::StructureGroup::su(2), 1, 2).connection();
    CHECK(block_coupling(rnd, quadrature::sample_points(*P, 1, 2)[0]) > 1e-3);
  }

  TEST_CASE("factor second variation and product trace on S^3 x S^3") {
    const auto P = product({3, 3});
    const auto c = catalog::product_tangent_levi_civita(P).connection({2, 1e-3});
    const auto rule = mc_rule(*P, 40);
    Vec v = Vec::Zero(4);
    v[1] = 1.0;
    CHECK(block_coupling_check(c, 0, v, rule).agree());
    const auto t = product_trace(c, rule);
    CHECK(t.agree());
    CHECK(t.terms.size() == 8);
  }

  TEST_CASE("Yang-Mills precondition") {
    const auto P = product({2, 2});
    CHECK_NOTHROW(require_yang_mills(catalog::product_tangent_levi_civita(P).connection()));
    CHECK_THROWS_AS(
        require_yang_mills(catalog::random_polynomial_potential(P, liealg::StructureGroup::su(2), 5, 2).connection()),
        PreconditionError);
  }

  TEST_CASE("dimension verdicts") {
    CHECK(product_criterion_report({5, 5}).no_weakly_stable);
    CHECK(product_criterion_report({5, 7, 6}).no_weakly_stable);
    CHECK_FALSE(product_criterion_report({4, 4}).no_weakly_stable);
    CHECK(product_criterion_report({4, 4}).no_stable);
    CHECK_FALSE(product_criterion_report({3, 5}).no_stable);
    CHECK_THROWS_AS(product_criterion_report({}), ParameterError);
  }

  TEST_CASE("wrong geometry") {
    const auto S = std::make_shared<const GeometrySpec>(GeometrySpec::round_sphere(4));
    const auto c = catalog::tangent_levi_civita(S).connection();
    CHECK_THROWS_AS(product_variation(c, 0, Vec::Unit(5, 0)), UnsupportedGeometryError);
  }
}
