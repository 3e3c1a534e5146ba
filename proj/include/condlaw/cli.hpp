#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace condlaw::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Every problem found while reading a configuration, one per entry.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Flat key/value configuration. Values keep their text so that a report
/// can echo them exactly.
struct Config {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
};

/// `key = value` lines; `#` and `;` start comments, `[section]` lines are
/// ignored.
Config parse_ini(std::string_view text);

/// A flat JSON object, or a report whose "config" member is one. Numbers and
/// booleans keep their JSON spelling, arrays become comma-separated lists.
Config parse_json(std::string_view text);

/// JSON when the first non-blank character is '{', INI otherwise.
Config parse_config(std::string_view text);

Config load_config(const std::string& path);

/// Sorted single-line JSON object of the config.
std::string canonical_json(const Config& config);

/// FNV-1a 64 of canonical_json, as 16 hex digits.
std::string config_hash(const Config& config);

const std::vector<std::string>& experiments();

using Cell = std::variant<std::int64_t, double, std::string>;

struct RunReport {
  std::string experiment;
  Config config;  ///< effective values, defaults included
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  /// Per-row fields that only appear in JSON; empty or parallel to rows.
  std::vector<nlohmann::json> row_details;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::pair<std::string, bool>> verdicts;
  double wall_seconds = 0.0;

  bool passed() const;
};

/// Runs one experiment. Unknown or malformed keys raise ConfigError; domain
/// and resource failures propagate from the library.
RunReport run(const std::string& experiment, const Config& config, int workers = 1);

/// 17 significant digits.
std::string format_number(double value);

void write_csv(const RunReport& report, std::ostream& out);
void write_json(const RunReport& report, std::ostream& out);

/// Command-line entry point; returns the process exit status.
int main(int argc, char** argv);

}  // namespace condlaw::cli
