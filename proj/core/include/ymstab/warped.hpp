#pragma once

// Warped products I x S^{n-1} with g = dr^2 + f(r)^2 g_N: the radial test
// variation i_V R for V = f d/dr, cutoffs in r, and the profile conditions
//   (a) f > 0, (b) f f'' bounded, (c) f (f' + 1) = O(r), (d) f (f' + 1) = O(|r - a|) at ends.

#include "ymstab/variation.hpp"

#include <array>
#include <utility>

namespace ymstab::warped {

using forms::Connection;
using forms::Field;
using geometry::ProfileFunction;
using geometry::ScalarField;
using geometry::Vec;
using quadrature::Estimate;
using quadrature::QuadratureConfig;

/// Smooth cutoff in r. On I = (r_min, inf):
///   eta = s((r - r_min) R - 1) (1 - s((r - r_min)/R - 1)),
/// equal to 1 on (2/R, R) and 0 outside (1/R, 2R) (offsets from r_min). On a
/// finite interval both ends get the inner profile. s is the exp(-1/t)
/// smoothstep.
struct CutoffFamily {
  double R = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  std::array<double, 3> C{};  // C_0, C_1, C_2 of the smoothstep

  double value(double r) const;
  double d1(double r) const;
  double d2(double r) const;
  bool finite() const;
  /// eta as a function on the warped chart (reads x[0] = r).
  ScalarField eta() const;
  /// Intervals on which eta is not locally constant.
  std::vector<std::pair<double, double>> transition_bands() const;
  /// max |d^k eta| R^{-k} on inner bands and max |d^k eta| R^{k} on outer bands,
  /// k = 0, 1, 2, over a grid of the given size per band.
  std::array<double, 3> reconstructed_constants(int grid = 2000) const;
};

/// Smoothstep s on [0, 1] and its first two derivatives.
double smoothstep(double t, int derivative = 0);

/// Cutoff for I = (0, inf). R <= 2 is rejected.
CutoffFamily cutoff(double R);
/// Cutoff adapted to an interval; an infinite r_max gives the one-sided family.
CutoffFamily cutoff(double R, double r_min, double r_max);

const geometry::WarpedProduct& warped_of(const geometry::GeometrySpec& spec);

/// i_V R with V = f d/dr.
Field radial_variation(const Connection& c);

struct FieldPair {
  Field lhs;
  Field rhs;
};

/// lhs = delta d i_V R + r(i_V R), rhs = (n-4) f''/f i_V R. Needs delta R = 0.
FieldPair radial_operator_check(const Connection& c);

/// Second variation of a 1-form supported in the r-band (a, b). The band must
/// be bounded and inside the interval, and B must vanish at its edges.
variation::SecondVariationResult second_variation_warped(const Connection& c, const Field& B, double a, double b,
                                                         const QuadratureConfig& cfg = {}, double t = 1e-3);

struct CutoffExpansion {
  Field lhs;            // delta d (eta i_V R)
  Field rhs_display;    // eta delta d i_V R - (eta'' + 2 eta' f'/f) i_V R - 2 eta' nabla_T R(V, .)
  Field rhs_derived;    // eta delta d i_V R - (eta'' + (n+1) eta' f'/f) i_V R - 2 eta' nabla_T R(V, .)
                        //   - eta' (delta i_V R) dr
};

CutoffExpansion cutoff_expansion_check(const Connection& c, const CutoffFamily& eta);

/// Seeded points with r inside the transition bands of eta.
std::vector<Vec> transition_points(const geometry::GeometrySpec& spec, const CutoffFamily& eta, int count,
                                   std::uint64_t seed);

/// max |lhs - rhs| over the points divided by max(|lhs|, |rhs|, floor) over the same points.
double worst_relative(const Field& lhs, const Field& rhs, const std::vector<Vec>& points, double floor = 1e-12);

struct BoundaryError {
  Estimate error;        // int over the bands of ((n-4) eta^2 f''/f + eta'^2 - 2 eta eta' f'/f) |i_V R|^2
  Estimate band_energy;  // int over the same bands of |R|^2
};

BoundaryError boundary_error(const Connection& c, double R, const QuadratureConfig& cfg = {});

/// Least-squares slope of log(value) against log(R).
double loglog_slope(const std::vector<double>& Rs, const std::vector<double>& values);

struct WitnessReport {
  bool hypothesis_met = false;  // (n-4) f'' < 0 on the grid
  bool applicable = true;       // false when n = 4
  Estimate value;               // int (n-4) f''/f |i_V R|^2 over the band
  std::string conclusion;
};

WitnessReport radial_witness(const Connection& c, double a, double b, const QuadratureConfig& cfg = {});

/// (n-4) f'' < 0 at every point of a uniform grid on the open interval.
bool profile_hypothesis(const ProfileFunction& f, int n, double r_min, double r_max, int grid = 400);

struct ProfileReport {
  bool a = false, b = false, c = false, d = false;
  double min_f = 0.0;
  double sup_ffpp = 0.0;  // sup |f f''|
  double ratio_c = 0.0;   // sup |f (f'+1)| / |r|
  double ratio_d = 0.0;   // sup |f (f'+1)| / |r - a| near finite ends
  bool all() const { return a && b && c && d; }
};

ProfileReport profile_condition_check(const ProfileFunction& f, double r_min, double r_max);

struct SphereComparison {
  double max_rel_R2 = 0.0;         // |R|^2 warped vs round, pointwise
  double max_ym_round = 0.0;       // |delta R| / |R| on the round chart
  double max_ym_warped = 0.0;      // same on the warped chart
  double max_rel_pairing = 0.0;    // <S(B), B> pointwise, B = i_V R vs B_v with v = e_{n+1}
  double L_round = 0.0, L_warped = 0.0;  // the pairing integrated with the warped rule
  double rel_L = 0.0;
};

/// The round tangent Levi-Civita connection read on (0, pi) x S^{n-1} with
/// f = sin r, against the stereographic pipeline at the same physical points
/// of the band (a, b).
SphereComparison sphere_as_warped(int n, double a, double b, int points, const QuadratureConfig& cfg,
                                  const geometry::FdConfig& fd);

/// Round chart coordinates of the warped point (r, y) when f = sin r.
Vec round_chart_point(int n, const Vec& warped_point);

}  // namespace ymstab::warped
