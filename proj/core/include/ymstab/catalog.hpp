#pragma once

// Reference geometries and connections with known properties. Declared tags
// are re-checked numerically when an entry is built.

#include "ymstab/forms.hpp"

#include <cstdint>
#include <set>
#include <string>

namespace ymstab::catalog {

using forms::Field;
using forms::SpecPtr;
using geometry::GeometrySpec;
using geometry::ProfileFunction;
using liealg::StructureGroup;

enum class Tag { Flat, YangMillsRound, YangMillsDim4, RandomTest };

std::string tag_name(Tag t);

struct TagCheck {
  Tag tag;
  bool passed = false;
  double residual = 0.0;  // worst relative residual over the sample points
};

struct CatalogEntry {
  std::string name;
  SpecPtr geometry;
  Field potential;
  std::set<Tag> tags;
  std::vector<TagCheck> checks;

  const GeometrySpec& spec() const { return *geometry; }
  forms::Connection connection(const geometry::FdConfig& fd = {}) const;
  bool verified() const;
  bool has(Tag t) const { return tags.count(t) > 0; }
};

/// Re-runs the numerical check behind every declared tag (20 seeded points).
void verify_tags(CatalogEntry& e, std::uint64_t seed = 7);

CatalogEntry flat_connection(SpecPtr spec, StructureGroup group);

/// Levi-Civita connection of the tangent bundle in the coordinate-aligned
/// orthonormal frame E_a = d_a / |d_a|: A_ab(d_i) = g(D_i E_b, E_a). Works for
/// every geometry here since all metrics are diagonal; group so(n).
CatalogEntry tangent_levi_civita(SpecPtr spec);
/// Same construction on a product of at least two spheres.
CatalogEntry product_tangent_levi_civita(SpecPtr spec);
/// Levi-Civita connection of the fiber sphere, pulled back along the
/// projection of a warped product; group so(n-1).
CatalogEntry fiber_levi_civita(SpecPtr spec);

/// One-instanton potential on the stereographic chart of S^4, group su(2).
CatalogEntry bpst_instanton();

/// A = sum_alpha c_alpha(y) dy_alpha for the ambient coordinates y of the
/// geometry, each c_alpha a seeded polynomial of the given degree with
/// coefficients in [-1, 1] times a basis element. Smooth on the whole
/// manifold, including the chart pole.
CatalogEntry random_polynomial_potential(SpecPtr spec, StructureGroup group, std::uint64_t seed, int degree = 2);

/// random_polynomial_potential multiplied by (1 + |y|^2)^{-power}.
CatalogEntry decaying_polynomial_potential(SpecPtr spec, StructureGroup group, std::uint64_t seed, int degree,
                                           double power);

/// Arc-length profile of the ellipsoid of revolution with meridian
/// (a sin t, -cos t); defined on (0, L) with L the meridian length.
ProfileFunction ellipsoid_profile(double a);
double ellipsoid_meridian_length(double a);

/// Frozen Yang-Mills energy of the BPST entry, (1/2) int |R|^2 over round S^4
/// with the pointwise norm of the forms module. |R|^2 is constant on S^4, so
/// the Monte Carlo estimate is exact up to stencil error; it matches 2 pi^2.
inline constexpr double kBpstYangMillsEnergy = 19.739208802178716;

}  // namespace ymstab::catalog
