#pragma once

// Check records and their two serialisations: a JSON document (with wall
// time and digests) and a CSV table that is byte-stable across runs.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ymstab::report {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kCsvHeader = "suite,check_id,paper_anchor,residual,tolerance,sigma,pass";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Where the reference side of a check comes from.
enum class Reference { ClosedForm, Oracle, Identity, Regression };
std::string reference_name(Reference r);

struct CheckRecord {
  std::string check_id;
  std::string anchor;       // the identity or statement being checked
  Reference reference = Reference::Identity;
  std::string inputs;       // short human-readable description of the inputs
  double residual = 0.0;
  double tolerance = 0.0;
  double sigma = 0.0;       // 0 when the check is deterministic
  double value = 0.0;       // optional headline value (e.g. a trace), JSON only
  bool pass = false;
};

struct VerificationReport {
  std::string suite;
  std::string anchor;
  std::vector<CheckRecord> checks;
  double wall_time_s = 0.0;
  std::string config_digest;
  std::uint64_t seed = 0;

  /// Appends a record; pass is residual <= tolerance unless overridden.
  CheckRecord& add(std::string id, std::string anchor, double residual, double tolerance, double sigma = 0.0,
                   Reference ref = Reference::Identity);
  bool passed() const;
  std::size_t failures() const;
};

/// Locale-independent shortest round-trip formatting.
std::string format_number(double v);

/// FNV-1a, 16 hex digits.
std::string digest(std::string_view text);

nlohmann::json to_json(const VerificationReport& r);
nlohmann::json summary_json(const std::vector<VerificationReport>& reports);

void write_csv(const std::vector<VerificationReport>& reports, std::ostream& os);
void emit_csv(const VerificationReport& r, const std::filesystem::path& path);
void emit_csv(const std::vector<VerificationReport>& reports, const std::filesystem::path& path);
void emit_json(const nlohmann::json& doc, const std::filesystem::path& path);

/// Reads a CSV written by emit_csv back into (suite, record) pairs.
std::vector<std::pair<std::string, CheckRecord>> read_csv(const std::filesystem::path& path);

}  // namespace ymstab::report
