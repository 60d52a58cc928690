#include "ymstab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace ymstab::quadrature {

using geometry::GeometryKind;
using geometry::Matrix;

Vec Rule::point(std::size_t i) const {
  return Eigen::Map<const Vec>(coords.data() + i * static_cast<std::size_t>(dim), dim);
}

void gauss_legendre(int count, double a, double b, std::vector<double>& nodes, std::vector<double>& weights) {
  if (count < 1) throw ParameterError("Gauss-Legendre needs at least one node");
  nodes.assign(count, 0.0);
  weights.assign(count, 0.0);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < (count + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= count; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = count * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes[i] = mid - half * z;
    nodes[count - 1 - i] = mid + half * z;
    weights[i] = weights[count - 1 - i] = half * w;
  }
}

namespace {

// Tensor rule on S^d (d = 2, 3) in hyperspherical angles, as unit vectors.
void sphere_tensor_rule(int d, int m, std::vector<Vec>& pts, std::vector<double>& w) {
  std::vector<double> tn, tw, pn, pw;
  gauss_legendre(m, 0.0, std::numbers::pi, tn, tw);
  gauss_legendre(2 * m, 0.0, 2.0 * std::numbers::pi, pn, pw);
  if (d == 2) {
    for (int a = 0; a < m; ++a)
      for (int c = 0; c < 2 * m; ++c) {
        Vec y(3);
        const double st = std::sin(tn[a]);
        y << st * std::cos(pn[c]), st * std::sin(pn[c]), -std::cos(tn[a]);
        pts.push_back(y);
        w.push_back(tw[a] * pw[c] * st);
      }
    return;
  }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < 2 * m; ++c) {
        Vec y(4);
        const double s1 = std::sin(tn[a]), s2 = std::sin(tn[b]);
        y << s1 * s2 * std::cos(pn[c]), s1 * s2 * std::sin(pn[c]), s1 * std::cos(tn[b]), -std::cos(tn[a]);
        pts.push_back(y);
        w.push_back(tw[a] * tw[b] * pw[c] * s1 * s1 * s2);
      }
}

Vec gaussian_unit(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  for (;;) {
    Vec y(d + 1);
    for (int i = 0; i <= d; ++i) y[i] = nd(rng);
    const double r = y.norm();
    if (r < 1e-300) continue;
    y /= r;
    if (y[d] < 1.0 - 1e-14) return y;  // never the chart pole
  }
}

// Nodes of a rule on the unit sphere S^d (unit vectors), deterministic or MC.
struct SphereNodes {
  std::vector<Vec> pts;
  std::vector<double> w;
  bool mc = false;
};

SphereNodes sphere_nodes(int d, const QuadratureConfig& cfg, std::mt19937_64& rng) {
  SphereNodes s;
  if (d <= cfg.tensor_max_dim && (d == 2 || d == 3)) {
    sphere_tensor_rule(d, cfg.gl_nodes, s.pts, s.w);
    return s;
  }
  if (cfg.mc_nodes == 0) throw ParameterError("Monte Carlo rule needs at least one node");
  s.mc = true;
  const double vol = geometry::sphere_volume(d);
  s.pts.reserve(cfg.mc_nodes);
  for (std::size_t i = 0; i < cfg.mc_nodes; ++i) s.pts.push_back(gaussian_unit(d, rng));
  s.w.assign(cfg.mc_nodes, vol / static_cast<double>(cfg.mc_nodes));
  return s;
}

void push_node(Rule& r, const Vec& x, double w, std::uint32_t sample) {
  r.coords.insert(r.coords.end(), x.data(), x.data() + x.size());
  r.weights.push_back(w);
  if (r.samples) r.sample.push_back(sample);
}

Rule warped_rule(const GeometrySpec& spec, double a, double b, const QuadratureConfig& cfg) {
  const auto& wp = std::get<geometry::WarpedProduct>(spec.variant());
  if (!std::isfinite(a) || !std::isfinite(b))
    throw SupportError("warped quadrature needs a bounded r-interval");
  if (!(a >= wp.r_min && b <= wp.r_max && a < b)) throw RangeError("radial band outside the warped interval");
  const int m = wp.fiber_dim;
  std::mt19937_64 rng(cfg.seed);
  SphereNodes fiber = sphere_nodes(m, cfg, rng);
  std::vector<double> rn, rw;
  const int panels = std::max(1, cfg.radial_panels);
  for (int p = 0; p < panels; ++p) {
    std::vector<double> n1, w1;
    gauss_legendre(cfg.radial_nodes, a + (b - a) * p / panels, a + (b - a) * (p + 1) / panels, n1, w1);
    rn.insert(rn.end(), n1.begin(), n1.end());
    rw.insert(rw.end(), w1.begin(), w1.end());
  }
  Rule r;
  r.dim = m + 1;
  r.samples = fiber.mc ? fiber.pts.size() : 0;
  Vec x(m + 1);
  for (std::size_t j = 0; j < fiber.pts.size(); ++j) {
    x.tail(m) = geometry::sphere_chart_from_unit(fiber.pts[j]);
    for (std::size_t i = 0; i < rn.size(); ++i) {
      x[0] = rn[i];
      const double f = wp.profile.f(rn[i]);
      push_node(r, x, rw[i] * std::pow(f, m) * fiber.w[j], static_cast<std::uint32_t>(j));
    }
  }
  return r;
}

}  // namespace

Rule make_rule(const GeometrySpec& spec, const QuadratureConfig& cfg) {
  Rule r;
  r.dim = spec.dim();
  switch (spec.kind()) {
    case GeometryKind::RoundSphere:
    case GeometryKind::ConformalSphere: {
      std::mt19937_64 rng(cfg.seed);
      SphereNodes s = sphere_nodes(spec.dim(), cfg, rng);
      r.samples = s.mc ? s.pts.size() : 0;
      for (std::size_t i = 0; i < s.pts.size(); ++i)
        push_node(r, geometry::sphere_chart_from_unit(s.pts[i]), s.w[i], static_cast<std::uint32_t>(i));
      return r;
    }
    case GeometryKind::ProductSpheres: {
      // Independent uniform samples per factor from one master stream.
      const auto& dims = std::get<geometry::ProductSpheres>(spec.variant()).dims;
      if (cfg.mc_nodes == 0) throw ParameterError("Monte Carlo rule needs at least one node");
      std::mt19937_64 rng(cfg.seed);
      double vol = 1.0;
      for (int d : dims) vol *= geometry::sphere_volume(d);
      r.samples = cfg.mc_nodes;
      Vec x(spec.dim());
      for (std::size_t i = 0; i < cfg.mc_nodes; ++i) {
        int off = 0;
        for (int d : dims) {
          x.segment(off, d) = geometry::sphere_chart_from_unit(gaussian_unit(d, rng));
          off += d;
        }
        push_node(r, x, vol / static_cast<double>(cfg.mc_nodes), static_cast<std::uint32_t>(i));
      }
      return r;
    }
    case GeometryKind::WarpedProduct: {
      const auto& wp = std::get<geometry::WarpedProduct>(spec.variant());
      return warped_rule(spec, wp.r_min, wp.r_max, cfg);
    }
  }
  return r;
}

Rule make_band_rule(const GeometrySpec& spec, double a, double b, const QuadratureConfig& cfg) {
  if (spec.kind() != GeometryKind::WarpedProduct) throw UnsupportedGeometryError("band rules need a warped product");
  return warped_rule(spec, a, b, cfg);
}

int worker_count() {
  if (const char* env = std::getenv("YMSTAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<int>(std::min<long>(v, 256));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<Vec> sample_points(const GeometrySpec& spec, int count, std::uint64_t seed, double bound, double margin) {
  std::mt19937_64 rng(seed);
  std::vector<Vec> out;
  auto sphere_block = [&](int d) {
    for (;;) {
      Vec x = geometry::sphere_chart_from_unit(gaussian_unit(d, rng));
      if (x.norm() <= bound) return x;
    }
  };
  for (int c = 0; c < count; ++c) {
    Vec x(spec.dim());
    switch (spec.kind()) {
      case GeometryKind::RoundSphere:
      case GeometryKind::ConformalSphere:
        x = sphere_block(spec.dim());
        break;
      case GeometryKind::ProductSpheres: {
        int off = 0;
        for (int d : std::get<geometry::ProductSpheres>(spec.variant()).dims) {
          x.segment(off, d) = sphere_block(d);
          off += d;
        }
        break;
      }
      case GeometryKind::WarpedProduct: {
        const auto& w = std::get<geometry::WarpedProduct>(spec.variant());
        double lo = w.r_min + margin, hi = w.r_min + 3.0;
        if (std::isfinite(w.r_max)) {
          const double len = w.r_max - w.r_min;
          lo = w.r_min + margin * len;
          hi = w.r_max - margin * len;
        }
        x[0] = std::uniform_real_distribution<double>(lo, hi)(rng);
        x.tail(w.fiber_dim) = sphere_block(w.fiber_dim);
        break;
      }
    }
    out.push_back(x);
  }
  return out;
}

double pairwise_sum(const double* v, std::size_t count, std::size_t stride) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += v[i * stride];
    return s;
  }
  const std::size_t h = count / 2;
  return pairwise_sum(v, h, stride) + pairwise_sum(v + h * stride, count - h, stride);
}

std::vector<Estimate> integrate_many(const Rule& rule, int k, const MultiIntegrand& f) {
  const std::size_t N = rule.size();
  std::vector<double> vals(N * static_cast<std::size_t>(k), 0.0);
  const int workers = static_cast<int>(std::min<std::size_t>(worker_count(), std::max<std::size_t>(N, 1)));
  std::exception_ptr err;
  std::mutex err_mu;
  auto work = [&](std::size_t lo, std::size_t hi) {
    try {
      for (std::size_t i = lo; i < hi; ++i) {
        const Vec x = rule.point(i);
        double* out = vals.data() + i * k;
        f(x, out);
        for (int j = 0; j < k; ++j)
          if (!std::isfinite(out[j])) {
            std::ostringstream os;
            os << "non-finite integrand value at chart point (" << x.transpose() << ")";
            throw EvaluationError(os.str());
          }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mu);
      if (!err) err = std::current_exception();
    }
  };
  if (workers <= 1) {
    work(0, N);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (N + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
      const std::size_t lo = t * chunk, hi = std::min(N, lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);

  std::vector<Estimate> out(k);
  std::vector<double> wv(N);
  for (int j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < N; ++i) wv[i] = rule.weights[i] * vals[i * k + j];
    out[j].value = pairwise_sum(wv.data(), N);
    if (rule.monte_carlo()) {
      // Per-sample totals Z_s (scaled so that mean Z_s is the estimate).
      const std::size_t S = rule.samples;
      std::vector<double> z(S, 0.0);
      for (std::size_t i = 0; i < N; ++i) z[rule.sample[i]] += wv[i];
      for (double& zi : z) zi *= static_cast<double>(S);
      const double mean = pairwise_sum(z.data(), S) / static_cast<double>(S);
      for (double& zi : z) zi = (zi - mean) * (zi - mean);
      const double var = S > 1 ? pairwise_sum(z.data(), S) / static_cast<double>(S - 1) : 0.0;
      out[j].std_error = std::sqrt(var / static_cast<double>(S));
    }
  }
  return out;
}

Estimate integrate(const Rule& rule, const std::function<double(const Vec&)>& f) {
  return integrate_many(rule, 1, [&](const Vec& x, double* out) { out[0] = f(x); })[0];
}

Estimate integrate(const GeometrySpec& spec, const std::function<double(const Vec&)>& f, const QuadratureConfig& cfg) {
  return integrate(make_rule(spec, cfg), f);
}

}  // namespace ymstab::quadrature
