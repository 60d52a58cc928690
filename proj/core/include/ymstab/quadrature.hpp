#pragma once

// Integration over the base manifolds. A Rule is a flat list of chart nodes
// and weights; Monte Carlo rules additionally group nodes into independent
// samples so a standard error can be reported.

#include "ymstab/geometry.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace ymstab::quadrature {

using geometry::GeometrySpec;
using geometry::Vec;

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct QuadratureConfig {
  int gl_nodes = 48;                    // per angle for the tensor rule
  std::size_t mc_nodes = 1'000'000;     // samples for Monte Carlo rules
  std::uint64_t seed = 42;
  int tensor_max_dim = 3;               // tensor rule used for S^n with n <= this
  int radial_panels = 4;                // composite Gauss-Legendre panels in r
  int radial_nodes = 16;                // nodes per radial panel
};

struct Rule {
  int dim = 0;
  std::vector<double> coords;           // node-major, dim entries per node
  std::vector<double> weights;
  std::vector<std::uint32_t> sample;    // sample id of each node (MC only)
  std::size_t samples = 0;              // 0 for deterministic rules
  bool monte_carlo() const { return samples > 0; }
  std::size_t size() const { return weights.size(); }
  Vec point(std::size_t i) const;
};

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int count, double a, double b, std::vector<double>& nodes, std::vector<double>& weights);

/// Rule for the whole manifold. Warped products need a finite interval.
Rule make_rule(const GeometrySpec& spec, const QuadratureConfig& cfg = {});
/// Warped rule restricted to r in (a, b).
Rule make_band_rule(const GeometrySpec& spec, double a, double b, const QuadratureConfig& cfg = {});

/// Worker count from YMSTAB_THREADS (default: hardware concurrency, at least 1).
int worker_count();

/// k integrands evaluated together at every node; f writes k values to out.
using MultiIntegrand = std::function<void(const Vec& x, double* out)>;

/// Results do not depend on the worker count: node values are stored and
/// reduced in a fixed pairwise order.
std::vector<Estimate> integrate_many(const Rule& rule, int k, const MultiIntegrand& f);
Estimate integrate(const Rule& rule, const std::function<double(const Vec&)>& f);
Estimate integrate(const GeometrySpec& spec, const std::function<double(const Vec&)>& f,
                   const QuadratureConfig& cfg = {});

/// Seeded chart points for pointwise checks: sphere blocks are uniform on the
/// sphere restricted to |x| <= bound, warped r is uniform on the interval
/// shrunk by margin on each side (or on (r_min + margin, r_min + 3) if the
/// interval is unbounded).
std::vector<Vec> sample_points(const GeometrySpec& spec, int count, std::uint64_t seed, double bound = 2.0,
                               double margin = 0.1);

/// Pairwise summation of a contiguous range.
double pairwise_sum(const double* v, std::size_t count, std::size_t stride = 1);

}  // namespace ymstab::quadrature
