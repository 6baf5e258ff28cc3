#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace optomech::runner {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

using Cell = std::variant<double, std::int64_t, std::string>;

/// A named result table; written as <name>.csv and/or <name>.json.
struct Table {
  std::string name;
  std::vector<std::string> header;  ///< unit-annotated column names
  std::vector<std::vector<Cell>> rows;
};

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return csv_field(std::get<std::string>(c));
}

}  // namespace detail

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (i) out += ',';
    out += detail::csv_field(t.header[i]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += detail::cell_text(row[i]);
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (std::isfinite(*d)) return *d;
    return format_double(*d);  // JSON has no inf/nan
  }
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  return std::get<std::string>(c);
}

/// Array of row objects keyed by the column names, in column order.
inline std::string to_json(const Table& t) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size() && i < t.header.size(); ++i) o[t.header[i]] = cell_json(row[i]);
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

}  // namespace optomech::runner
