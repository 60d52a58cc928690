#include "ymstab/errors.hpp"
#include "ymstab/liealg.hpp"

#include <doctest.h>

using namespace ymstab::liealg;

namespace {

const StructureGroup kGroups[] = {StructureGroup::so(3), StructureGroup::so(5), StructureGroup::su(2),
                                  StructureGroup::su(3)};

double dist(const LieAlgebraElement& a, const LieAlgebraElement& b) { return (a - b).norm(); }

}  // namespace

TEST_SUITE("liealg") {
  TEST_CASE("algebra dimensions") {
    CHECK(StructureGroup::so(3).algebra_dim() == 3);
    CHECK(StructureGroup::so(10).algebra_dim() == 45);
    CHECK(StructureGroup::su(2).algebra_dim() == 3);
    CHECK(StructureGroup::su(3).algebra_dim() == 8);
    CHECK(StructureGroup::su(2).matrix_size() == 4);
  }

  TEST_CASE("orthonormal basis is orthonormal and spans") {
    for (const auto& g : kGroups) {
      const auto basis = orthonormal_basis(g);
      REQUIRE(static_cast<int>(basis.size()) == g.algebra_dim());
      for (std::size_t a = 0; a < basis.size(); ++a)
        for (std::size_t b = 0; b < basis.size(); ++b) {
          const double ip = inner(LieAlgebraElement::from_storage(g, basis[a]), LieAlgebraElement::from_storage(g, basis[b]));
          CHECK(ip == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12));
        }
    }
  }

  TEST_CASE("bracket: antisymmetry, Jacobi, ad-invariance over seeds") {
    for (const auto& g : kGroups)
      for (std::uint64_t s = 1; s <= 20; ++s) {
        const auto a = random_element(g, s), b = random_element(g, s + 100), c = random_element(g, s + 200);
        CHECK(dist(bracket(a, b), bracket(b, a) * -1.0) < 1e-12);
        const auto jac = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b));
        CHECK(jac.norm() < 1e-11);
        CHECK(inner(bracket(a, b), c) == doctest::Approx(-inner(b, bracket(a, c))).epsilon(1e-10));
      }
  }

  TEST_CASE("projections land in the algebra") {
    Eigen::MatrixXd m(3, 3);
    m << 1, 2, 3, 4, 5, 6, 7, 8, 10;
    const auto x = LieAlgebraElement::from_real(StructureGroup::so(3), m);
    CHECK((x.entries() + x.entries().adjoint()).norm() < 1e-14);

    ComplexMat z(2, 2);
    z << std::complex<double>(1, 2), std::complex<double>(3, -1), std::complex<double>(0, 4), std::complex<double>(2, 1);
    const auto y = LieAlgebraElement::from_complex(StructureGroup::su(2), z);
    CHECK((y.entries() + y.entries().adjoint()).norm() < 1e-14);
    CHECK(std::abs(y.entries().trace()) < 1e-14);
  }

  TEST_CASE("realification is a homomorphism") {
    const auto g = StructureGroup::su(3);
    const auto a = random_element(g, 3), b = random_element(g, 4);
    const ComplexMat ab = a.entries() * b.entries() - b.entries() * a.entries();
    CHECK((bracket(a, b).entries() - ab).norm() < 1e-12);
  }

  TEST_CASE("so_unit and inner product normalization") {
    const auto e01 = so_unit(4, 0, 1);
    CHECK(inner(e01, e01) == doctest::Approx(1.0));
    CHECK(inner(e01, so_unit(4, 1, 2)) == doctest::Approx(0.0));
    // [e_01, e_12] = e_02 in the E_ab - E_ba convention
    CHECK(dist(bracket(e01, so_unit(4, 1, 2)), so_unit(4, 0, 2)) < 1e-14);
  }

  TEST_CASE("group mismatch") {
    CHECK_THROWS_AS(bracket(random_element(StructureGroup::so(3), 1), random_element(StructureGroup::su(2), 1)),
                    ymstab::DimensionError);
  }

  TEST_CASE("random elements are deterministic") {
    CHECK(dist(random_element(StructureGroup::so(5), 9), random_element(StructureGroup::so(5), 9)) == 0.0);
    CHECK(dist(random_element(StructureGroup::so(5), 9), random_element(StructureGroup::so(5), 10)) > 0.0);
  }
}
