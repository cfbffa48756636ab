#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace torsionlab::cli {

using Json = nlohmann::ordered_json;

/// 17 significant digits: round-trips every double and never depends on locale.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void write_string(std::ostream& os, const std::string& s) {
  os << '"';
  for (const char c : s) {
    switch (c) {
      case '"': os << "\\\""; break;
      case '\\': os << "\\\\"; break;
      case '\n': os << "\\n"; break;
      case '\t': os << "\\t"; break;
      case '\r': os << "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          os << buf;
        } else {
          os << c;
        }
    }
  }
  os << '"';
}

inline void write_value(std::ostream& os, const Json& j, int indent) {
  const std::string pad(indent + 2, ' '), close(indent, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << pad;
        write_string(os, key);
        os << ": ";
        write_value(os, value, indent + 2);
      }
      os << '\n' << close << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Short arrays of scalars stay on one line.
      bool flat = j.size() <= 4;
      for (const auto& e : j) flat = flat && !e.is_structured();
      if (flat) {
        os << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          write_value(os, j[i], indent + 2);
        }
        os << ']';
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        write_value(os, j[i], indent + 2);
      }
      os << '\n' << close << ']';
      return;
    }
    case Json::value_t::string:
      write_string(os, j.get<std::string>());
      return;
    case Json::value_t::boolean:
      os << (j.get<bool>() ? "true" : "false");
      return;
    case Json::value_t::number_integer:
      os << j.get<long long>();
      return;
    case Json::value_t::number_unsigned:
      os << j.get<unsigned long long>();
      return;
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      os << (std::isfinite(v) ? format_real(v) : "null");
      return;
    }
    default:
      os << "null";
  }
}

}  // namespace detail

/// Pretty JSON with insertion-ordered keys and %.17g reals.
inline void write_json(std::ostream& os, const Json& j) {
  detail::write_value(os, j, 0);
  os << '\n';
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

inline void write_csv(std::ostream& os, const CsvTable& t) {
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

}  // namespace torsionlab::cli
