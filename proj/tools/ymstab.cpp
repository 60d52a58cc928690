// ymstab: batch front end for the verification suites.
//
//   ymstab run [--suite S]... [--geometry G] [--entry E] [--phi P] [--lambda L]...
//              [--nodes N] [--seed K] [--fd-order 2|4] [--out DIR] [--config FILE]
//   ymstab catalog list
//   ymstab report FILE.csv
//
// The config file holds a [run] section keyed by long option names, e.g. geometry = "s6".
//
// Exit status: 0 all checks pass, 1 some check failed, 2 configuration or I/O error.

#include "ymstab/errors.hpp"
#include "ymstab/report.hpp"
#include "ymstab/suites.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

namespace fs = std::filesystem;
using ymstab::report::VerificationReport;

void print_reports(const std::vector<VerificationReport>& reports) {
  for (const auto& r : reports) {
    std::printf("[%s] %s\n", r.suite.c_str(), r.anchor.c_str());
    for (const auto& c : r.checks) {
      // Full precision goes to the CSV and JSON; the console gets 4 digits.
      std::printf("  %-4s %-46s residual %-11.4g tol %-11.4g", c.pass ? "ok" : "FAIL", c.check_id.c_str(), c.residual,
                  c.tolerance);
      if (c.value != 0.0) std::printf(" value %.6g", c.value);
      std::printf("\n");
    }
    std::printf("  %zu checks, %zu failed, %.1f s\n", r.checks.size(), r.failures(), r.wall_time_s);
  }
}

int do_run(const ymstab::suites::RunConfig& cfg, const fs::path& out, bool quiet) {
  const auto reports = ymstab::suites::run(cfg);
  for (const auto& r : reports) ymstab::report::emit_json(ymstab::report::to_json(r), out / (r.suite + ".json"));
  auto summary = ymstab::report::summary_json(reports);
  summary["seed"] = cfg.seed;
  ymstab::report::emit_json(summary, out / "summary.json");
  ymstab::report::emit_csv(reports, out / "report.csv");
  if (!quiet) print_reports(reports);
  std::size_t failed = 0, total = 0;
  for (const auto& r : reports) {
    failed += r.failures();
    total += r.checks.size();
  }
  std::printf("%zu/%zu checks passed; reports in %s\n", total - failed, total, out.string().c_str());
  return failed == 0 ? kExitPass : kExitFail;
}

int do_catalog() {
  std::printf("%-28s %-34s %-8s %-9s %s\n", "entry", "geometry", "group", "verified", "tags");
  for (const auto& row : ymstab::suites::catalog_table())
    std::printf("%-28s %-34s %-8s %-9s %s\n", row.name.c_str(), row.geometry.c_str(), row.group.c_str(),
                row.verified ? "yes" : "no", row.tags.c_str());
  return kExitPass;
}

int do_report(const fs::path& csv) {
  const auto rows = ymstab::report::read_csv(csv);
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_suite;  // checks, failures
  std::vector<std::string> order;
  std::size_t failed = 0;
  for (const auto& [suite, c] : rows) {
    if (!per_suite.count(suite)) order.push_back(suite);
    auto& [n, f] = per_suite[suite];
    ++n;
    if (!c.pass) {
      ++f;
      ++failed;
    }
  }
  for (const auto& s : order) std::printf("%-12s %zu checks, %zu failed\n", s.c_str(), per_suite[s].first, per_suite[s].second);
  for (const auto& [suite, c] : rows)
    if (!c.pass)
      std::printf("FAIL %s/%s residual %s tol %s (%s)\n", suite.c_str(), c.check_id.c_str(),
                  ymstab::report::format_number(c.residual).c_str(), ymstab::report::format_number(c.tolerance).c_str(),
                  c.anchor.c_str());
  return failed == 0 ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of Yang-Mills stability identities"};
  app.set_version_flag("--version", std::string(ymstab::report::kToolVersion));
  app.require_subcommand(1);

  ymstab::suites::RunConfig cfg;
  std::string out = "ymstab-report";
  bool quiet = false;
  // Config keys live in a [run] section and use the long option names;
  // unknown keys are a config error. Command-line flags win over the file.
  app.set_config("--config", "", "Config file with a [run] section")->check(CLI::ExistingFile);
  app.allow_config_extras(false);
  auto* run = app.add_subcommand("run", "Run verification suites and write JSON and CSV reports");
  run->fallthrough();
  run->add_option("--suite", cfg.suites, "Suites to run (default: all)")
      ->delimiter(',')
      ->check(CLI::IsMember(ymstab::suites::suite_names()));
  run->add_option("--geometry", cfg.geometry, "sN, sAxsB[xsC..] or wN")->capture_default_str();
  run->add_option("--entry", cfg.entry, "Catalog entry")
      ->check(CLI::IsMember(ymstab::suites::entry_names()))
      ->capture_default_str();
  run->add_option("--phi", cfg.phi, "Conformal factor, e.g. 0.3*f_w or 0.1*f_e1-0.2")->capture_default_str();
  run->add_option("--lambda", cfg.lambdas, "Lambda values for the test variations")->delimiter(',');
  run->add_option("--profile", cfg.profile, "Warped profile: sin, const, linear, exp, ellipsoid:<a>")
      ->capture_default_str();
  run->add_option("--nodes", cfg.nodes, "Monte Carlo nodes on spheres")->capture_default_str();
  run->add_option("--product-nodes", cfg.product_nodes, "Monte Carlo nodes on products")->capture_default_str();
  run->add_option("--seed", cfg.seed, "Seed for points, directions and quadrature")->capture_default_str();
  run->add_option("--fd-order", cfg.fd_order, "Finite-difference stencil order")
      ->check(CLI::IsMember({2, 4}))
      ->capture_default_str();
  run->add_option("--fd-step", cfg.fd_step, "Finite-difference step")->capture_default_str();
  run->add_option("--points", cfg.points, "Seeded points for pointwise checks")->capture_default_str();
  run->add_option("--out", out, "Output directory")->capture_default_str();
  run->add_flag("--quiet", quiet, "Only print the final tally");

  auto* catalog = app.add_subcommand("catalog", "Catalog of connections");
  catalog->require_subcommand(1);
  catalog->add_subcommand("list", "List entries with tags and verification status");

  std::string csv;
  auto* rep = app.add_subcommand("report", "Summarize a report CSV");
  rep->add_option("csv", csv, "report.csv from a previous run")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (run->parsed()) return do_run(cfg, out, quiet);
    if (catalog->parsed()) return do_catalog();
    return do_report(csv);
  } catch (const ymstab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitConfig;
  } catch (const ymstab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}
