#include "ymstab/report.hpp"

#include "ymstab/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ymstab::report {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s) {
  double v = 0.0;
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("bad number in CSV: " + s);
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::ios_base::failure("cannot open " + path.string());
  return os;
}

nlohmann::json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

}  // namespace

std::string reference_name(Reference r) {
  switch (r) {
    case Reference::ClosedForm: return "closed-form";
    case Reference::Oracle: return "oracle";
    case Reference::Identity: return "identity";
    case Reference::Regression: return "regression";
  }
  return "identity";
}

CheckRecord& VerificationReport::add(std::string id, std::string anchor_text, double residual, double tolerance,
                                     double sigma, Reference ref) {
  if (anchor_text.empty()) throw ParameterError("check " + id + " needs an anchor");
  CheckRecord c;
  c.check_id = std::move(id);
  c.anchor = std::move(anchor_text);
  c.reference = ref;
  c.residual = residual;
  c.tolerance = tolerance;
  c.sigma = sigma;
  c.pass = std::isfinite(residual) && residual <= tolerance;
  checks.push_back(std::move(c));
  return checks.back();
}

bool VerificationReport::passed() const { return failures() == 0; }

std::size_t VerificationReport::failures() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.pass ? 0 : 1;
  return n;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string digest(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = hex[h & 0xf];
  return out;
}

nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"check_id", c.check_id},
                      {"paper_anchor", c.anchor},
                      {"reference", reference_name(c.reference)},
                      {"inputs", c.inputs},
                      {"inputs_digest", digest(c.inputs)},
                      {"residual", number_json(c.residual)},
                      {"tolerance", number_json(c.tolerance)},
                      {"sigma", number_json(c.sigma)},
                      {"value", number_json(c.value)},
                      {"pass", c.pass}});
  return {{"schema_version", kSchemaVersion},
          {"tool_version", kToolVersion},
          {"suite", r.suite},
          {"paper_anchor", r.anchor},
          {"config_digest", r.config_digest},
          {"seed", r.seed},
          {"wall_time_s", r.wall_time_s},
          {"passed", r.passed()},
          {"checks", checks}};
}

nlohmann::json summary_json(const std::vector<VerificationReport>& reports) {
  nlohmann::json suites = nlohmann::json::array();
  std::size_t total = 0, failed = 0;
  double wall = 0.0;
  for (const auto& r : reports) {
    total += r.checks.size();
    failed += r.failures();
    wall += r.wall_time_s;
    // Headline values (traces, slopes, witnesses) keyed by check id.
    nlohmann::json values = nlohmann::json::object();
    for (const auto& c : r.checks)
      if (c.value != 0.0) values[c.check_id] = number_json(c.value);
    suites.push_back({{"suite", r.suite},
                      {"checks", r.checks.size()},
                      {"failures", r.failures()},
                      {"wall_time_s", r.wall_time_s},
                      {"values", values}});
  }
  return {{"schema_version", kSchemaVersion},
          {"tool_version", kToolVersion},
          {"config_digest", reports.empty() ? std::string() : reports.front().config_digest},
          {"checks", total},
          {"failures", failed},
          {"passed", failed == 0},
          {"wall_time_s", wall},
          {"suites", suites}};
}

void write_csv(const std::vector<VerificationReport>& reports, std::ostream& os) {
  os << kCsvHeader << '\n';
  for (const auto& r : reports)
    for (const auto& c : r.checks)
      os << csv_field(r.suite) << ',' << csv_field(c.check_id) << ',' << csv_field(c.anchor) << ','
         << format_number(c.residual) << ',' << format_number(c.tolerance) << ',' << format_number(c.sigma) << ','
         << (c.pass ? "true" : "false") << '\n';
}

void emit_csv(const VerificationReport& r, const std::filesystem::path& path) { emit_csv(std::vector{r}, path); }

void emit_csv(const std::vector<VerificationReport>& reports, const std::filesystem::path& path) {
  auto os = open_out(path);
  write_csv(reports, os);
  if (!os) throw std::ios_base::failure("write failed: " + path.string());
}

void emit_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << doc.dump(2) << '\n';
  if (!os) throw std::ios_base::failure("write failed: " + path.string());
}

std::vector<std::pair<std::string, CheckRecord>> read_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::ios_base::failure("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw ConfigError("unexpected CSV header in " + path.string());
  std::vector<std::pair<std::string, CheckRecord>> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw ConfigError("CSV row with " + std::to_string(f.size()) + " fields");
    CheckRecord c;
    c.check_id = f[1];
    c.anchor = f[2];
    c.residual = parse_number(f[3]);
    c.tolerance = parse_number(f[4]);
    c.sigma = parse_number(f[5]);
    c.pass = f[6] == "true";
    out.emplace_back(f[0], std::move(c));
  }
  return out;
}

}  // namespace ymstab::report
