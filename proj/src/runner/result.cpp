#include "arrival/runner/result.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "arrival/error.hpp"

namespace arrival::runner {
namespace {

void write_value(std::string& out, const json& v, int indent, int depth) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (const auto& [key, val] : v.items()) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad;
        out += json(key).dump();
        out += sep;
        write_value(out, val, indent, depth + 1);
      }
      out += nl;
      out += close_pad;
      out += "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Flat numeric lists stay on one line.
      bool flat = true;
      for (const auto& e : v) flat = flat && !e.is_structured();
      out += "[";
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += flat ? ", " : ",";
        if (!flat) {
          out += nl;
          out += pad;
        }
        first = false;
        write_value(out, e, indent, depth + 1);
      }
      if (!flat) {
        out += nl;
        out += close_pad;
      }
      out += "]";
      return;
    }
    case json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_real(d) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

json scalar_json(const Scalar& s) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::complex<double>>) {
          return json{{"re", x.real()}, {"im", x.imag()}};
        } else {
          return json(x);
        }
      },
      s);
}

// RFC 4180 quoting for cells holding a comma or a quote.
std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
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
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

Table& Table::add(std::string col, std::vector<double> values, bool allow_missing) {
  Column c;
  c.name = std::move(col);
  c.numbers = std::move(values);
  c.allow_missing = allow_missing;
  columns.push_back(std::move(c));
  return *this;
}

Table& Table::add_labels(std::string col, std::vector<std::string> values) {
  Column c;
  c.name = std::move(col);
  c.labels = std::move(values);
  c.is_label = true;
  columns.push_back(std::move(c));
  return *this;
}

std::size_t Table::rows() const { return columns.empty() ? 0 : columns.front().size(); }

const Scalar* ResultRecord::find(const std::string& name) const {
  for (const auto& [k, v] : scalars)
    if (k == name) return &v;
  return nullptr;
}

const Table* ResultRecord::table(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name == name) return &t;
  return nullptr;
}

std::string format_real(double v) {
  if (!std::isfinite(v)) return "";
  return fmt::format("{:.17g}", v);
}

std::string to_json_text(const json& value, int indent) {
  std::string out;
  write_value(out, value, indent, 0);
  return out;
}

std::string result_json(const ResultRecord& record) {
  json doc;
  doc["kind"] = record.kind;
  doc["provenance"] = {{"artifact", "arrival"}, {"version", kArtifactVersion}};
  doc["config"] = record.config;
  json scalars = json::object();
  for (const auto& [k, v] : record.scalars) scalars[k] = scalar_json(v);
  doc["scalars"] = scalars;
  json tables = json::object();
  for (const auto& t : record.tables) {
    json cols = json::array();
    for (const auto& c : t.columns) cols.push_back(c.name);
    tables[t.name] = {{"file", t.name + ".csv"}, {"columns", cols}, {"rows", t.rows()}};
  }
  doc["tables"] = tables;
  return to_json_text(doc, 2) + "\n";
}

std::string table_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += csv_cell(table.columns[c].name);
  }
  out += '\n';
  const std::size_t n = table.rows();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out += ',';
      const auto& col = table.columns[c];
      out += col.is_label ? csv_cell(col.labels[r]) : format_real(col.numbers[r]);
    }
    out += '\n';
  }
  return out;
}

void write_record(const ResultRecord& record, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto dump = [&](const std::string& name, const std::string& text) {
    std::ofstream f(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    f << text;
  };
  dump(record.kind == "scan" ? "scan.json" : "result.json", result_json(record));
  for (const auto& t : record.tables) dump(t.name + ".csv", table_csv(t));
}

void check_finite(const ResultRecord& record) {
  for (const auto& [k, v] : record.scalars) {
    bool ok = true;
    if (const auto* d = std::get_if<double>(&v)) ok = std::isfinite(*d);
    if (const auto* z = std::get_if<std::complex<double>>(&v))
      ok = std::isfinite(z->real()) && std::isfinite(z->imag());
    if (!ok) throw NumericalError("non-finite result in scalar '" + k + "'");
  }
  for (const auto& t : record.tables)
    for (const auto& c : t.columns) {
      if (c.is_label) continue;
      for (double x : c.numbers) {
        if (std::isinf(x) || (std::isnan(x) && !c.allow_missing))
          throw NumericalError("non-finite result in table '" + t.name + "', column '" + c.name + "'");
      }
    }
}

Table read_csv(const std::string& name, const std::string& text) {
  Table t;
  t.name = name;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) return t;
  const auto header = split_line(line);
  std::vector<std::vector<std::string>> cells(header.size());
  while (std::getline(in, line)) {
    const auto row = split_line(line);
    for (std::size_t c = 0; c < header.size(); ++c) cells[c].push_back(c < row.size() ? row[c] : "");
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::vector<double> nums;
    bool numeric = true;
    for (const auto& s : cells[c]) {
      if (s.empty()) {
        nums.push_back(std::nan(""));
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size()) {
        numeric = false;
        break;
      }
      nums.push_back(v);
    }
    if (numeric) {
      t.add(header[c], std::move(nums), true);
    } else {
      t.add_labels(header[c], cells[c]);
    }
  }
  return t;
}

}  // namespace arrival::runner
