#pragma once

// Batch suites behind `ymstab run`: each suite turns a RunConfig into one
// VerificationReport. Suites fall back to their own geometry and entry when
// the configured ones do not fit (the products suite on a single sphere, say)
// and record what they actually used in each check's inputs.

#include "ymstab/catalog.hpp"
#include "ymstab/report.hpp"

#include <memory>
#include <string>
#include <vector>

namespace ymstab::suites {

using geometry::GeometrySpec;
using geometry::ScalarField;
using SpecPtr = std::shared_ptr<const GeometrySpec>;

struct RunConfig {
  std::vector<std::string> suites;  // empty: every suite
  std::string geometry = "s5";      // sN, sAxsB[xsC..], wN (warped, profile below)
  std::string entry = "tangent-lc";
  std::string phi = "0";            // see parse_phi
  std::vector<double> lambdas{0.0};
  std::string profile = "sin";      // sin, const, linear, exp, ellipsoid:<a>
  int fd_order = 4;
  double fd_step = 1e-3;
  std::size_t nodes = 2000;         // sphere quadrature samples
  std::size_t product_nodes = 100;  // product quadrature samples
  std::uint64_t seed = 42;
  int points = 30;                  // seeded points for pointwise checks

  /// key=value lines in a fixed order; the digest is taken over this text.
  std::string canonical() const;
  std::string digest() const;
  /// Throws ConfigError on out-of-range values or unknown names.
  void validate() const;
};

const std::vector<std::string>& suite_names();
const std::vector<std::string>& entry_names();

SpecPtr parse_geometry(const std::string& name, const std::string& profile = "sin");
geometry::ProfileFunction parse_profile(const std::string& name);
/// Interval of a named profile: (0, pi) for sin, (0, L) for ellipsoids,
/// (0, 4) for const, (0, inf) otherwise.
std::pair<double, double> profile_interval(const std::string& name);

/// Seeded unit vector of R^{n+1} used for f_w.
geometry::Vec seeded_direction(int n, std::uint64_t seed);

/// phi grammar: a sum of terms separated by + or -, each term a number, an
/// atom, or number*atom; atoms are f_w (seeded direction) and f_e<k>
/// (k-th ambient basis vector, 1-based). Only sphere geometries accept atoms.
ScalarField parse_phi(const std::string& expr, const GeometrySpec& spec, std::uint64_t seed);

catalog::CatalogEntry make_entry(const std::string& name, const SpecPtr& spec, std::uint64_t seed);

struct CatalogRow {
  std::string name;
  std::string geometry;
  std::string group;
  std::string tags;
  bool verified = false;
};

std::vector<CatalogRow> catalog_table(std::uint64_t seed = 42);

report::VerificationReport run_suite(const std::string& suite, const RunConfig& cfg);
/// Selected suites, up to worker_count() at a time; reports come back in
/// suite_names() order.
std::vector<report::VerificationReport> run(const RunConfig& cfg);

}  // namespace ymstab::suites
