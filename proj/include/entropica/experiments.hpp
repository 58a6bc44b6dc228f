#pragma once

#include "entropica/measure.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace entropica {

struct ConfigKey {
  std::string name;
  std::string default_value;  // empty: required
  std::string doc;
};

// Flat "key = value" text; '#' starts a comment. Keys are validated against
// the experiment's documented list when the experiment runs.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Header row then data rows, RFC 4180 quoting, "\n" line ends.
  std::string to_csv() const;
};

std::string csv_field(const std::string& value);
// Shortest round-trip text for doubles; "inf", "-inf" and "nan" otherwise.
std::string format_double(double v);

struct ExperimentResult {
  std::string experiment;
  std::map<std::string, std::string> resolved;  // every key with its effective value
  CsvTable table;
  std::vector<std::pair<std::string, CsvTable>> extra;  // written as <stem>.<name>.csv
  std::vector<std::pair<std::string, std::string>> summary;

  const std::string& summary_value(const std::string& key) const;
};

std::vector<std::string> experiment_names();
const std::vector<ConfigKey>& experiment_keys(const std::string& experiment);

// Throws Config for unknown experiments, unknown keys, missing seed, or
// invalid values. Rows do not depend on `threads`.
ExperimentResult run_experiment(const std::string& experiment, const Config& config, unsigned threads = 1);

// Writes the CSV, the extra tables and the "<out>.meta" JSON run record.
void write_result(const ExperimentResult& result, const std::string& out_path, double wall_seconds);

std::string version_string();

// Smallest e on the 2^-precision grid with mu(A) <= nu(A^e) + e for every
// subset A of the support of mu; a brute-force reference for prokhorov.
Rational prokhorov_scan(const FiniteRationalMeasure& mu, const FiniteRationalMeasure& nu, const Space& space,
                        int precision);

}  // namespace entropica
