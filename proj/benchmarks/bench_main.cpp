#include "ymstab/catalog.hpp"
#include "ymstab/forms.hpp"
#include "ymstab/liealg.hpp"
#include "ymstab/variation.hpp"

#include <benchmark/benchmark.h>

using namespace ymstab;

namespace {

forms::SpecPtr sphere(int n) { return std::make_shared<const geometry::GeometrySpec>(geometry::GeometrySpec::round_sphere(n)); }

void BM_Bracket(benchmark::State& st) {
  const auto g = liealg::StructureGroup::so(static_cast<int>(st.range(0)));
  const auto a = liealg::random_element(g, 1), b = liealg::random_element(g, 2);
  for (auto _ : st) benchmark::DoNotOptimize(liealg::bracket(a, b));
}
BENCHMARK(BM_Bracket)->Arg(4)->Arg(6)->Arg(10);

void BM_CurvaturePoint(benchmark::State& st) {
  const auto S = sphere(static_cast<int>(st.range(0)));
  const auto c = catalog::tangent_levi_civita(S).connection();
  const auto x = quadrature::sample_points(*S, 1, 7)[0];
  for (auto _ : st) benchmark::DoNotOptimize(c.R(x));
}
BENCHMARK(BM_CurvaturePoint)->Arg(4)->Arg(5)->Arg(6);

// One Bochner residual evaluation at a point; dominated by nested stencils.
void BM_BochnerPoint(benchmark::State& st) {
  const auto S = sphere(5);
  const auto c = catalog::tangent_levi_civita(S).connection();
  const auto res = forms::bochner_residual(c, c.R);
  const auto x = quadrature::sample_points(*S, 1, 3)[0];
  for (auto _ : st) benchmark::DoNotOptimize(res(x));
}
BENCHMARK(BM_BochnerPoint)->Unit(benchmark::kMillisecond);

void BM_SecondVariation(benchmark::State& st) {
  const auto S = sphere(5);
  const auto c = catalog::tangent_levi_civita(S).connection({2, 1e-3});
  const auto B = catalog::random_polynomial_potential(S, c.group(), 1, 2).potential;
  quadrature::QuadratureConfig q;
  q.mc_nodes = static_cast<std::size_t>(st.range(0));
  const auto rule = quadrature::make_rule(*S, q);
  for (auto _ : st)
    benchmark::DoNotOptimize(variation::second_variation(c, geometry::ScalarField::constant_value(0.0), B, rule));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_SecondVariation)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
