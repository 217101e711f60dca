#pragma once

// RFC 4180 CSV: comma separated, CRLF-free "\n" records, fields quoted only
// when they contain a comma, quote, CR or LF. Reals print with 12 significant digits.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lcuav/core.hpp"

namespace lcuav::cli {

inline constexpr int kSignificantDigits = 12;

/// Shortest fixed form of x at 12 significant digits; -0 prints as 0.
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", kSignificantDigits, x);
  return buf;
}

/// One CSV cell: text, real, integer, flag or empty.
using Cell = std::variant<std::monostate, std::string, double, long long, bool>;

inline std::string render(const Cell& c) {
  struct {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double x) const { return format_real(x); }
    std::string operator()(long long n) const { return std::to_string(n); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  } visit;
  return std::visit(visit, c);
}

inline std::string quote_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline void write_record(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) os << ',';
    os << quote_field(fields[k]);
  }
  os << '\n';
}

/// Header plus rows of cells; every row must match the header width.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void write_csv(std::ostream& os) const {
    write_record(os, header);
    for (const auto& row : rows) {
      if (row.size() != header.size()) throw InvalidArgument("csv: row width does not match header");
      std::vector<std::string> text;
      text.reserve(row.size());
      for (const auto& c : row) text.push_back(render(c));
      write_record(os, text);
    }
  }
};

/// Parses RFC 4180 text into records. Accepts "\n" or "\r\n" line ends.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && k + 1 < text.size() && text[k + 1] == '\n') ++k;
      record.push_back(std::move(field));
      field.clear();
      out.push_back(std::move(record));
      record.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw InvalidArgument("csv: unterminated quoted field");
  if (field_started || !field.empty()) {
    record.push_back(std::move(field));
    out.push_back(std::move(record));
  }
  return out;
}

}  // namespace lcuav::cli
