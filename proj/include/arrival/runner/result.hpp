#pragma once
// Result records and their on-disk form: result.json for scalars and the
// config echo, one CSV per table. Reals are written with 17 significant
// digits so a read-back is exact.

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "arrival/runner/config.hpp"

namespace arrival::runner {

inline constexpr const char* kArtifactVersion = "0.1.0";

using Scalar = std::variant<double, std::int64_t, bool, std::string, std::complex<double>>;

// One column of a table: numbers or labels. NaN in a numeric column marks a
// not-applicable entry and is written as an empty cell.
struct Column {
  std::string name;
  std::vector<double> numbers;
  std::vector<std::string> labels;
  bool is_label = false;
  bool allow_missing = false;

  std::size_t size() const { return is_label ? labels.size() : numbers.size(); }
};

struct Table {
  std::string name;
  std::vector<Column> columns;

  Table& add(std::string col, std::vector<double> values, bool allow_missing = false);
  Table& add_labels(std::string col, std::vector<std::string> values);
  std::size_t rows() const;
};

struct ResultRecord {
  std::string kind;
  json config;
  std::vector<std::pair<std::string, Scalar>> scalars;
  std::vector<Table> tables;

  void set(std::string name, Scalar value) { scalars.emplace_back(std::move(name), std::move(value)); }
  const Scalar* find(const std::string& name) const;
  const Table* table(const std::string& name) const;
};

// %.17g, with non-finite values mapped to "" (CSV) or null (JSON) by callers.
std::string format_real(double v);

std::string to_json_text(const json& value, int indent = 0);
std::string result_json(const ResultRecord& record);
std::string table_csv(const Table& table);

// Writes result.json and <table>.csv into dir (created if needed).
void write_record(const ResultRecord& record, const std::string& dir);

// Throws NumericalError if a scalar or a strict table cell is not finite.
void check_finite(const ResultRecord& record);

// Parses a CSV written by table_csv back into numeric columns (labels kept
// as strings). Used for round-trip checks.
Table read_csv(const std::string& name, const std::string& text);

}  // namespace arrival::runner
