#include "ymstab/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

using namespace ymstab;
using namespace ymstab::quadrature;
using geometry::GeometrySpec;

namespace {

struct ThreadsGuard {
  explicit ThreadsGuard(const char* v) { setenv("YMSTAB_THREADS", v, 1); }
  ~ThreadsGuard() { unsetenv("YMSTAB_THREADS"); }
};

}  // namespace

TEST_SUITE("quadrature") {
  TEST_CASE("Gauss-Legendre is exact to degree 2k-1") {
    std::vector<double> x, w;
    gauss_legendre(6, -1.0, 2.0, x, w);
    for (int p = 0; p <= 11; ++p) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], p);
      const double exact = (std::pow(2.0, p + 1) - std::pow(-1.0, p + 1)) / (p + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-12));
    }
  }

  TEST_CASE("tensor rule integrates exactly on low-dimensional spheres") {
    for (int n : {2, 3}) {
      const auto S = GeometrySpec::round_sphere(n);
      const auto vol = integrate(S, [](const geometry::Vec&) { return 1.0; });
      CHECK(vol.std_error == 0.0);
      CHECK(vol.value == doctest::Approx(geometry::sphere_volume(n)).epsilon(1e-10));
      // int y_1^2 = vol / (n + 1)
      const auto m2 = integrate(S, [&](const geometry::Vec& x) { return std::pow(geometry::chart_embed(S, x)[0], 2); });
      CHECK(m2.value == doctest::Approx(geometry::sphere_volume(n) / (n + 1)).epsilon(1e-8));
    }
  }

  TEST_CASE("Monte Carlo estimates lie within a few standard errors") {
    QuadratureConfig cfg;
    cfg.mc_nodes = 20000;
    for (int n : {4, 5, 7}) {
      const auto S = GeometrySpec::round_sphere(n);
      const auto rule = make_rule(S, cfg);
      CHECK(rule.monte_carlo());
      const auto m2 = integrate(rule, [&](const geometry::Vec& x) { return std::pow(geometry::chart_embed(S, x)[n], 2); });
      const double exact = geometry::sphere_volume(n) / (n + 1);
      CHECK(m2.std_error > 0.0);
      CHECK(std::abs(m2.value - exact) < 5.0 * m2.std_error);
      CHECK(integrate(rule, [](const geometry::Vec&) { return 1.0; }).value ==
            doctest::Approx(geometry::sphere_volume(n)).epsilon(1e-12));
    }
  }

  TEST_CASE("product and warped volumes") {
    QuadratureConfig cfg;
    cfg.mc_nodes = 4000;
    const auto P = GeometrySpec::product_spheres({2, 3});
    CHECK(integrate(P, [](const geometry::Vec&) { return 1.0; }, cfg).value ==
          doctest::Approx(geometry::sphere_volume(2) * geometry::sphere_volume(3)).epsilon(1e-10));
    // (0, pi) x S^3 with f = sin r is S^4.
    const auto W = GeometrySpec::warped_product(0.0, std::numbers::pi, 3, geometry::ProfileFunction::sine());
    CHECK(integrate(W, [](const geometry::Vec&) { return 1.0; }, cfg).value ==
          doctest::Approx(geometry::sphere_volume(4)).epsilon(1e-8));
  }

  TEST_CASE("integrate_many does not depend on the worker count") {
    QuadratureConfig cfg;
    cfg.mc_nodes = 5000;
    const auto S = GeometrySpec::round_sphere(5);
    const auto rule = make_rule(S, cfg);
    auto f = [&](const geometry::Vec& x, double* out) {
      const auto y = geometry::chart_embed(S, x);
      out[0] = std::exp(y[0]) * y[1];
      out[1] = 1.0 / (2.0 + y[2]);
    };
    std::vector<Estimate> one, four;
    {
      ThreadsGuard g("1");
      one = integrate_many(rule, 2, f);
    }
    {
      ThreadsGuard g("4");
      four = integrate_many(rule, 2, f);
    }
    for (int k = 0; k < 2; ++k) {
      CHECK(one[k].value == four[k].value);
      CHECK(one[k].std_error == four[k].std_error);
    }
  }

  TEST_CASE("seeded rules and points are reproducible") {
    QuadratureConfig cfg;
    cfg.mc_nodes = 100;
    const auto S = GeometrySpec::round_sphere(6);
    CHECK(make_rule(S, cfg).coords == make_rule(S, cfg).coords);
    cfg.seed = 43;
    CHECK(make_rule(S, cfg).coords != make_rule(S, QuadratureConfig{.mc_nodes = 100}).coords);
    const auto a = sample_points(S, 10, 1), b = sample_points(S, 10, 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i] == b[i]);
      CHECK(a[i].norm() <= 2.0);
    }
  }

  TEST_CASE("pairwise summation") {
    std::vector<double> v(1000003, 0.1);
    CHECK(pairwise_sum(v.data(), v.size()) == doctest::Approx(100000.3).epsilon(1e-14));
    CHECK(pairwise_sum(v.data(), 0) == 0.0);
  }

  TEST_CASE("worker count honours YMSTAB_THREADS") {
    ThreadsGuard g("3");
    CHECK(worker_count() == 3);
  }
}
