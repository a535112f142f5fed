#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "mixedmop/brownian.hpp"
#include "mixedmop/kernel.hpp"
#include "mixedmop/mop.hpp"
#include "mixedmop/rh.hpp"
#include "mixedmop/weights.hpp"

namespace mixedmop {

using json = nlohmann::ordered_json;

const char* version();

/// Weight families plus an optional pair and normalisation:
/// {"w1": [{"kind": "gaussian", "center": c, "variance": v, "amplitude": a}, ...],
///  "w2": [...], "n": [...], "m": [...], "normalization": {"type": "II", "index": 1}}.
/// Indices in the file are 1-based.
struct MopConfig {
  WeightFamily w1;
  WeightFamily w2;
  std::optional<MultiIndex> n;
  std::optional<MultiIndex> m;
  std::optional<Normalization> normalization;
};

/// Both parsers throw ValidationError on malformed documents.
json parse_json_text(const std::string& text);
json read_json_file(const std::string& path);

MopConfig mop_config_from_json(const json& doc);
json to_json(const MopConfig& config);

/// {"starts": [[a, mult], ...], "ends": [[b, mult], ...], "t": 0.5, "n_scaling": true}
BrownianConfig brownian_config_from_json(const json& doc);
json to_json(const BrownianConfig& config);

json to_json(const Weight& w);
json to_json(const MultiIndex& n);
json to_json(const NormalityReport& report);
json to_json(const MixedMopSolution& solution);
json to_json(const RhVerifyReport& report);

/// Shortest text of a double that reads back to the same value, capped at 17 significant digits.
std::string format_double(double v);

/// Rows of numbers joined by commas under a header line.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(const std::vector<double>& row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

/// Moment table as CSV with columns j,l,k,value,error_bound (1-based j and l).
CsvTable moment_table_csv(const ProductMomentTable& table);

/// Evenly spaced points min..max inclusive; count in [2, 2000].
struct GridSpec {
  double min = -1.0;
  double max = 1.0;
  int count = 2;

  std::vector<double> points() const;
  /// Parses "min:max:count".
  static GridSpec parse(const std::string& text);
};

}  // namespace mixedmop
