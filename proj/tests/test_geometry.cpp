#include "ymstab/catalog.hpp"
#include "ymstab/geometry.hpp"
#include "ymstab/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace ymstab;
using namespace ymstab::geometry;

namespace {

Vec unit_vector(int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  Vec v(m);
  for (int i = 0; i < m; ++i) v[i] = N(rng);
  return v / v.norm();
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("chart embedding lands on the unit sphere and inverts") {
    for (int n : {2, 4, 5}) {
      const auto S = GeometrySpec::round_sphere(n);
      for (const auto& x : quadrature::sample_points(S, 20, 3)) {
        const Vec y = chart_embed(S, x);
        CHECK(y.norm() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK((sphere_chart_from_unit(y) - x).norm() < 1e-12);
      }
    }
  }

  TEST_CASE("metric is the pullback of the Euclidean metric") {
    const auto S = GeometrySpec::round_sphere(4);
    for (const auto& x : quadrature::sample_points(S, 10, 5)) {
      const Matrix J = embed_jacobian(S, x);
      CHECK((J.transpose() * J - metric_components(S, x)).norm() < 1e-12);
    }
    const auto W = GeometrySpec::warped_product(0.0, std::numbers::pi, 3, ProfileFunction::sine());
    for (const auto& x : quadrature::sample_points(W, 10, 5)) {
      const Matrix J = embed_jacobian(W, x);
      CHECK((J.transpose() * J - metric_components(W, x)).norm() < 1e-10);
    }
  }

  TEST_CASE("unit sphere curvature: R(X,Y)Z = g(Y,Z)X - g(X,Z)Y, Ric = (n-1) g") {
    const int n = 5;
    const auto S = GeometrySpec::round_sphere(n);
    for (const auto& x : quadrature::sample_points(S, 6, 11)) {
      const Matrix g = metric_components(S, x);
      const Riemann R = riemann(S, x);
      const Vec X = unit_vector(n, 1), Y = unit_vector(n, 2), Z = unit_vector(n, 3);
      const Vec expect = Y.dot(g * Z) * X - X.dot(g * Z) * Y;
      CHECK((R.apply(X, Y, Z) - expect).norm() < 1e-6 * (1.0 + expect.norm()));
      CHECK((ricci_matrix(S, x) - (n - 1) * Matrix::Identity(n, n)).norm() < 1e-6);
    }
  }

  TEST_CASE("product and warped curvature") {
    const auto P = GeometrySpec::product_spheres({2, 3});
    const Vec x = quadrature::sample_points(P, 1, 2)[0];
    const Matrix ric = ricci_matrix(P, x);
    Matrix expect = Matrix::Zero(5, 5);
    expect.block(0, 0, 2, 2) = Matrix::Identity(2, 2);
    expect.block(2, 2, 3, 3) = 2.0 * Matrix::Identity(3, 3);
    CHECK((ric - expect).norm() < 1e-6);

    // f = sin r is the round sphere again.
    const auto W = GeometrySpec::warped_product(0.0, std::numbers::pi, 3, ProfileFunction::sine());
    const Vec w = quadrature::sample_points(W, 1, 2)[0];
    CHECK((ricci_matrix(W, w) - 3.0 * Matrix::Identity(4, 4)).norm() < 1e-6);
  }

  TEST_CASE("conformal gradient field identities") {
    for (int n : {3, 5, 6}) {
      const auto S = GeometrySpec::round_sphere(n);
      const auto cf = conformal_gradient_field(S, unit_vector(n + 1, 7));
      for (const auto& x : quadrature::sample_points(S, 8, 13)) {
        const Matrix D = covariant_derivative(S, x, cf.V) + cf.f(x) * Matrix::Identity(n, n);
        CHECK(D.norm() < 1e-8);
        CHECK((rough_laplacian_vector(S, x, cf.V) - cf.V(x)).norm() < 1e-6 * (1.0 + cf.V(x).norm()));
        CHECK(laplacian_scalar(S, x, cf.f) == doctest::Approx(-n * cf.f(x)).epsilon(1e-7));
      }
    }
  }

  TEST_CASE("radial field on warped products") {
    for (const auto& prof : {ProfileFunction::sine(), ProfileFunction::linear(), ProfileFunction::exponential(),
                             catalog::ellipsoid_profile(2.0)}) {
      const double b = prof.name.rfind("sin", 0) == 0 ? std::numbers::pi : 5.0;
      const auto W = GeometrySpec::warped_product(0.0, b, 4, prof);
      const auto V = radial_conformal_field(W);
      for (const auto& x : quadrature::sample_points(W, 6, 17)) {
        const Matrix D = covariant_derivative(W, x, V) - prof.df(x[0]) * Matrix::Identity(5, 5);
        CHECK(D.norm() < 1e-7);
      }
    }
  }

  TEST_CASE("stencil orders converge at their rate") {
    const auto S = GeometrySpec::round_sphere(4);
    const auto f = ambient_linear_function(S, unit_vector(5, 1));
    ScalarField g{f.value, nullptr, nullptr, false, "no analytic derivatives"};
    const Vec x = quadrature::sample_points(S, 1, 3)[0];
    const Vec exact = grad_scalar(S, x, f);
    auto err = [&](int order, double h) { return (grad_scalar(S, x, g, {order, h}) - exact).norm(); };
    CHECK(std::log2(err(2, 2e-2) / err(2, 1e-2)) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::log2(err(4, 4e-2) / err(4, 2e-2)) == doctest::Approx(4.0).epsilon(0.1));
  }

  TEST_CASE("chart bounds and domains") {
    const auto S = GeometrySpec::round_sphere(3);
    Vec far = Vec::Constant(3, 10.0);
    CHECK_THROWS_AS(ChartPoint::make(S, far), DomainError);
    CHECK_NOTHROW(ChartPoint::make(S, Vec::Zero(3)));
    const auto W = GeometrySpec::warped_product(0.0, 1.0, 2, ProfileFunction::linear());
    Vec out(3);
    out << 2.0, 0.0, 0.0;
    CHECK_FALSE(W.in_domain(out));
  }

  TEST_CASE("sphere volumes") {
    CHECK(sphere_volume(1) == doctest::Approx(2 * std::numbers::pi));
    CHECK(sphere_volume(2) == doctest::Approx(4 * std::numbers::pi));
    CHECK(sphere_volume(4) == doctest::Approx(8 * std::numbers::pi * std::numbers::pi / 3));
  }

  TEST_CASE("ellipsoid profile with a = 1 is the sine profile") {
    const auto e = catalog::ellipsoid_profile(1.0);
    CHECK(catalog::ellipsoid_meridian_length(1.0) == doctest::Approx(std::numbers::pi));
    for (double r : {0.3, 1.0, 2.0, 2.9}) {
      CHECK(e.f(r) == doctest::Approx(std::sin(r)).epsilon(1e-9));
      CHECK(e.df(r) == doctest::Approx(std::cos(r)).epsilon(1e-8));
      CHECK(e.d2f(r) == doctest::Approx(-std::sin(r)).epsilon(1e-7));
    }
  }
}
