#include "ymstab/catalog.hpp"
#include "ymstab/warped.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace ymstab;
using namespace ymstab::warped;
using forms::SpecPtr;
using geometry::GeometrySpec;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

SpecPtr warped_spec(double a, double b, int fiber, ProfileFunction f) {
  return std::make_shared<const GeometrySpec>(GeometrySpec::warped_product(a, b, fiber, std::move(f)));
}

QuadratureConfig small_quad(std::size_t fiber_nodes) {
  QuadratureConfig q;
  q.mc_nodes = fiber_nodes;
  q.radial_panels = 4;
  q.radial_nodes = 16;
  return q;
}

}  // namespace

TEST_SUITE("warped") {
  TEST_CASE("smoothstep") {
    CHECK(smoothstep(-0.5) == 0.0);
    CHECK(smoothstep(1.5) == 1.0);
    CHECK(smoothstep(0.5) == doctest::Approx(0.5));
    for (double t : {0.1, 0.3, 0.7, 0.9}) {
      CHECK(smoothstep(t) + smoothstep(1.0 - t) == doctest::Approx(1.0).epsilon(1e-14));
      const double h = 1e-5;
      CHECK(smoothstep(t, 1) == doctest::Approx((smoothstep(t + h) - smoothstep(t - h)) / (2 * h)).epsilon(1e-6));
      CHECK(smoothstep(t, 2) ==
            doctest::Approx((smoothstep(t + h, 1) - smoothstep(t - h, 1)) / (2 * h)).epsilon(1e-5));
    }
    CHECK_THROWS_AS(smoothstep(0.5, 3), ParameterError);
  }

  TEST_CASE("cutoff family: plateau, support and R-independent constants") {
    for (double R : {3.0, 8.0, 50.0}) {
      const auto eta = cutoff(R);
      CHECK(eta.value(0.5 / R) == 0.0);
      CHECK(eta.value(3.0 / R) == 1.0);
      CHECK(eta.value(0.9 * R) == 1.0);
      CHECK(eta.value(2.5 * R) == 0.0);
      const auto k = eta.reconstructed_constants(500);
      for (int i = 0; i < 3; ++i) CHECK(k[i] <= eta.C[i] * (1.0 + 1e-9));
      CHECK(k[1] == doctest::Approx(cutoff(4.0).reconstructed_constants(500)[1]).epsilon(1e-9));
    }
    const auto fin = cutoff(10.0, 0.0, kPi);
    CHECK(fin.finite());
    CHECK(fin.value(kPi - 0.05) == 0.0);
    CHECK(fin.value(kPi / 2) == 1.0);
    CHECK_THROWS_AS(cutoff(2.0), ParameterError);
    CHECK_THROWS_AS(cutoff(3.0, 0.0, 1.0), ParameterError);
  }

  TEST_CASE("radial operator identity on the sphere and on cylinders") {
    const auto W = warped_spec(0.0, kPi, 4, ProfileFunction::sine());
    const auto c = catalog::tangent_levi_civita(W).connection();
    const auto [l, r] = radial_operator_check(c);
    CHECK(worst_relative(l, r, quadrature::sample_points(*W, 6, 1)) < 1e-4);

    const auto C = warped_spec(0.0, 4.0, 4, ProfileFunction::constant(1.0));
    const auto cc = catalog::fiber_levi_civita(C).connection();
    const auto [lc, rc] = radial_operator_check(cc);
    for (const auto& x : quadrature::sample_points(*C, 4, 2)) {
      CHECK(forms::frame_norm(*C, cc.group(), x, lc(x)) < 1e-6);
      CHECK(forms::frame_norm(*C, cc.group(), x, rc(x)) < 1e-12);
    }
  }

  TEST_CASE("radial identity needs a Yang-Mills background") {
    const auto W = warped_spec(0.0, kPi, 4, ProfileFunction::sine());
    const auto rnd = catalog::random_polynomial_potential(W, liealg::StructureGroup::su(2), 1, 2).connection();
    CHECK_THROWS_AS(radial_operator_check(rnd), PreconditionError);
  }

  TEST_CASE("cutoff expansion: derived form holds") {
    const auto W = warped_spec(0.0, kPi, 4, ProfileFunction::sine());
    const auto c = catalog::random_polynomial_potential(W, liealg::StructureGroup::su(2), 3, 2).connection();
    const auto eta = cutoff(4.0);
    const auto ce = cutoff_expansion_check(c, eta);
    const auto pts = transition_points(*W, eta, 6, 4);
    for (const auto& x : pts) {
      bool in_band = false;
      for (const auto& [a, b] : eta.transition_bands()) in_band = in_band || (x[0] > a && x[0] < b);
      CHECK(in_band);
    }
    CHECK(worst_relative(ce.lhs, ce.rhs_derived, pts) < 1e-5);
  }

  TEST_CASE("second variation on a band") {
    const auto W = warped_spec(0.0, kPi, 4, ProfileFunction::sine());
    const auto c = catalog::tangent_levi_civita(W).connection({2, 1e-3});
    const auto eta = cutoff(10.0, 0.5, kPi - 0.5);
    const Field B = forms::scale(eta.eta(), radial_variation(c));
    // The transition bands are 1/R wide, so the radial rule must resolve them.
    auto q = small_quad(8);
    q.radial_panels = 32;
    const auto r = second_variation_warped(c, B, 0.5, kPi - 0.5, q);
    INFO(r.value_operator_form, " ", r.value_direct_form, " ", r.value_fd_form, " ", r.sigma_op_direct, " ", r.sigma_fd_direct);
    CHECK(r.paths_agree());
    CHECK_THROWS_AS(second_variation_warped(c, B, 0.5, kInf, small_quad(8)), SupportError);
    CHECK_THROWS_AS(second_variation_warped(c, radial_variation(c), 0.5, 2.0, small_quad(8)), SupportError);
  }

  TEST_CASE("witness and hypothesis") {
    const auto W = warped_spec(0.0, kPi, 4, ProfileFunction::sine());
    const auto w = radial_witness(catalog::tangent_levi_civita(W).connection({2, 1e-3}), 0.3, kPi - 0.3, small_quad(8));
    CHECK(w.hypothesis_met);
    CHECK(w.applicable);
    CHECK(w.value.value < 0.0);

    const auto W4 = warped_spec(0.0, kPi, 3, ProfileFunction::sine());
    const auto w4 = radial_witness(catalog::tangent_levi_civita(W4).connection({2, 1e-3}), 0.3, kPi - 0.3, small_quad(8));
    CHECK_FALSE(w4.applicable);
    CHECK(w4.conclusion == "no conclusion from this criterion");

    CHECK(profile_hypothesis(ProfileFunction::sine(), 5, 0.0, kPi));
    CHECK_FALSE(profile_hypothesis(ProfileFunction::exponential(), 5, 0.0, 5.0));
  }

  TEST_CASE("profile conditions") {
    CHECK(profile_condition_check(ProfileFunction::sine(), 0.0, kPi).all());
    for (double a : {0.5, 2.0})
      CHECK(profile_condition_check(catalog::ellipsoid_profile(a), 0.0, catalog::ellipsoid_meridian_length(a)).all());
    const auto e = profile_condition_check(ProfileFunction::exponential(), 0.0, kInf);
    CHECK(e.a);
    CHECK_FALSE(e.c);
    CHECK_FALSE(e.all());
  }

  TEST_CASE("boundary error decays on the cone") {
    const auto cone = warped_spec(0.0, kInf, 4, ProfileFunction::linear());
    const auto c = catalog::decaying_polynomial_potential(cone, liealg::StructureGroup::su(2), 42, 1, 2.5)
                       .connection({2, 1e-3});
    std::vector<double> Rs{4.0, 16.0, 64.0}, v;
    for (double R : Rs) v.push_back(boundary_error(c, R, small_quad(8)).error.value);
    CHECK(loglog_slope(Rs, v) <= -4.7);
    CHECK(loglog_slope({1.0, 10.0}, {1.0, 0.01}) == doctest::Approx(-2.0));
    CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), ParameterError);
  }

  TEST_CASE("round chart of the sine warped product") {
    const Vec x = quadrature::sample_points(*warped_spec(0.0, kPi, 4, ProfileFunction::sine()), 1, 9)[0];
    const Vec y = round_chart_point(5, x);
    CHECK(y.size() == 5);
    const auto S = GeometrySpec::round_sphere(5);
    const auto W = GeometrySpec::warped_product(0.0, kPi, 4, ProfileFunction::sine());
    CHECK((geometry::chart_embed(S, y) - geometry::chart_embed(W, x)).norm() < 1e-12);
  }
}
