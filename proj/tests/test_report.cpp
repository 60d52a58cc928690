#include "ymstab/errors.hpp"
#include "ymstab/report.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

using namespace ymstab;
using namespace ymstab::report;

namespace {

VerificationReport sample() {
  VerificationReport r;
  r.suite = "demo";
  r.anchor = "demo identities";
  r.add("plain", "a = b", 1e-9, 1e-6);
  r.add("comma", "D_X V = -f X, on factor k", 2e-3, 1e-3, 4e-4, Reference::ClosedForm);
  r.add("quote", "the \"display\" form", std::numeric_limits<double>::infinity(), 1.0);
  r.add("nan", "not a number", std::nan(""), 1.0);
  return r;
}

std::filesystem::path tmp(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ymstab_test_" + name);
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("pass flags follow residual <= tolerance") {
    const auto r = sample();
    CHECK(r.checks[0].pass);
    CHECK_FALSE(r.checks[1].pass);
    CHECK_FALSE(r.checks[2].pass);
    CHECK_FALSE(r.checks[3].pass);
    CHECK(r.failures() == 3);
    CHECK_FALSE(r.passed());
  }

  TEST_CASE("every check needs an anchor") {
    VerificationReport r;
    CHECK_THROWS_AS(r.add("x", "", 0.0, 1.0), ParameterError);
  }

  TEST_CASE("CSV header, row count and quoting") {
    std::ostringstream os;
    write_csv({sample()}, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "suite,check_id,paper_anchor,residual,tolerance,sigma,pass");
    CHECK(line == kCsvHeader);
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 4);
    CHECK(os.str().find("\"D_X V = -f X, on factor k\"") != std::string::npos);
    CHECK(os.str().find("\"the \"\"display\"\" form\"") != std::string::npos);
  }

  TEST_CASE("CSV round trip") {
    const auto path = tmp("roundtrip.csv");
    emit_csv(sample(), path);
    const auto rows = read_csv(path);
    const auto src = sample();
    REQUIRE(rows.size() == src.checks.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].first == "demo");
      CHECK(rows[i].second.check_id == src.checks[i].check_id);
      CHECK(rows[i].second.anchor == src.checks[i].anchor);
      CHECK(rows[i].second.pass == src.checks[i].pass);
      if (std::isfinite(src.checks[i].residual)) CHECK(rows[i].second.residual == src.checks[i].residual);
    }
    CHECK(std::isinf(rows[2].second.residual));
    CHECK(std::isnan(rows[3].second.residual));
    std::filesystem::remove(path);
  }

  TEST_CASE("numbers round-trip exactly and ignore the locale") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-30.0, 30.0);
    for (int i = 0; i < 1000; ++i) {
      const double v = std::pow(10.0, U(rng)) * (i % 2 ? -1.0 : 1.0);
      const std::string s = format_number(v);
      CHECK(std::stod(s) == v);
      CHECK(s.find(',') == std::string::npos);
    }
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1e-6) == "1e-06");
  }

  TEST_CASE("JSON schema") {
    auto r = sample();
    r.config_digest = digest("x");
    r.seed = 42;
    const auto j = to_json(r);
    CHECK(j["schema_version"] == kSchemaVersion);
    CHECK(j["tool_version"] == kToolVersion);
    CHECK(j["checks"].size() == 4);
    for (const auto& c : j["checks"]) {
      CHECK_FALSE(c["paper_anchor"].get<std::string>().empty());
      CHECK(c.contains("inputs_digest"));
      CHECK(c.contains("reference"));
    }
    CHECK(j["checks"][2]["residual"] == "inf");
    const auto s = summary_json({r});
    CHECK(s["failures"] == 3);
    CHECK(s["passed"] == false);
  }

  TEST_CASE("digests") {
    CHECK(digest("") == "cbf29ce484222325");
    CHECK(digest("a") != digest("b"));
    CHECK(digest("abc").size() == 16);
  }

  TEST_CASE("bad CSV input") {
    const auto path = tmp("bad.csv");
    std::ofstream(path) << "a,b,c\n";
    CHECK_THROWS_AS(read_csv(path), ConfigError);
    std::ofstream(path) << kCsvHeader << "\nx,y\n";
    CHECK_THROWS_AS(read_csv(path), ConfigError);
    std::filesystem::remove(path);
    CHECK_THROWS(read_csv(tmp("missing.csv")));
  }
}
