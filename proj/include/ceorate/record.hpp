#pragma once

#include <cmath>
#include <cstdio>

#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ceorate {

/// One output cell of a result record: a number, an integer, a boolean, a
/// piece of text, or a numeric/integer array.  Arrays flatten to key_1..key_n
/// columns in CSV and render as JSON arrays.
struct Value {
  enum class Kind { kNumber, kInteger, kBoolean, kText, kNumberArray, kIntegerArray };

  Kind kind = Kind::kNumber;
  double num = 0.0;
  long long integer = 0;
  bool flag = false;
  std::string text;
  std::vector<double> num_array;
  std::vector<long long> int_array;
};

namespace detail {

/// Numbers carry 15 significant digits, enough to reconstruct the double to
/// within a few ulps; non-finite values spell themselves out so they survive
/// both CSV and JSON (which has no literal for them).
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string json_escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

/// Scalar JSON rendering; non-finite numbers become strings.
inline std::string json_number(double v) {
  if (std::isnan(v) || std::isinf(v)) return json_escape(format_number(v));
  return format_number(v);
}

}  // namespace detail

/// Ordered flat record: keys render in insertion order in every format, so
/// output bytes depend only on the values.
class Record {
 public:
  Record& add(const std::string& key, double v) {
    Value val;
    val.kind = Value::Kind::kNumber;
    val.num = v;
    return push(key, std::move(val));
  }
  Record& add_int(const std::string& key, long long v) {
    Value val;
    val.kind = Value::Kind::kInteger;
    val.integer = v;
    return push(key, std::move(val));
  }
  Record& add_bool(const std::string& key, bool v) {
    Value val;
    val.kind = Value::Kind::kBoolean;
    val.flag = v;
    return push(key, std::move(val));
  }
  Record& add_text(const std::string& key, std::string v) {
    Value val;
    val.kind = Value::Kind::kText;
    val.text = std::move(v);
    return push(key, std::move(val));
  }
  Record& add_array(const std::string& key, std::vector<double> v) {
    Value val;
    val.kind = Value::Kind::kNumberArray;
    val.num_array = std::move(v);
    return push(key, std::move(val));
  }
  Record& add_int_array(const std::string& key, std::vector<long long> v) {
    Value val;
    val.kind = Value::Kind::kIntegerArray;
    val.int_array = std::move(v);
    return push(key, std::move(val));
  }

  [[nodiscard]] const std::vector<std::pair<std::string, Value>>& items() const {
    return items_;
  }

 private:
  Record& push(const std::string& key, Value val) {
    items_.emplace_back(key, std::move(val));
    return *this;
  }

  std::vector<std::pair<std::string, Value>> items_;
};

namespace detail {

inline std::size_t array_size(const Value& v) {
  return v.kind == Value::Kind::kNumberArray ? v.num_array.size() : v.int_array.size();
}

inline std::string csv_cell(const Value& v, std::size_t idx) {
  switch (v.kind) {
    case Value::Kind::kNumber: return format_number(v.num);
    case Value::Kind::kInteger: return std::to_string(v.integer);
    case Value::Kind::kBoolean: return v.flag ? "true" : "false";
    case Value::Kind::kText: return csv_escape(v.text);
    case Value::Kind::kNumberArray: return format_number(v.num_array[idx]);
    case Value::Kind::kIntegerArray: return std::to_string(v.int_array[idx]);
  }
  return {};
}

}  // namespace detail

/// Writes records as CSV with a mandatory header row.  Array values expand
/// to key_1..key_n columns; every row must repeat the shape of the first.
inline void write_csv(std::ostream& os, const std::vector<Record>& rows) {
  if (rows.empty()) throw std::invalid_argument("write_csv: no rows");
  const Record& head = rows.front();
  std::string header;
  for (const auto& [key, val] : head.items()) {
    const bool is_array = val.kind == Value::Kind::kNumberArray ||
                          val.kind == Value::Kind::kIntegerArray;
    if (is_array) {
      for (std::size_t i = 0; i < detail::array_size(val); ++i) {
        if (!header.empty()) header += ',';
        header += detail::csv_escape(key + "_" + std::to_string(i + 1));
      }
    } else {
      if (!header.empty()) header += ',';
      header += detail::csv_escape(key);
    }
  }
  os << header << '\n';
  for (const Record& row : rows) {
    if (row.items().size() != head.items().size()) {
      throw std::invalid_argument("write_csv: ragged rows");
    }
    std::string line;
    for (std::size_t c = 0; c < row.items().size(); ++c) {
      const auto& [key, val] = row.items()[c];
      if (key != head.items()[c].first) {
        throw std::invalid_argument("write_csv: rows disagree on column names");
      }
      const bool is_array = val.kind == Value::Kind::kNumberArray ||
                            val.kind == Value::Kind::kIntegerArray;
      if (is_array) {
        if (detail::array_size(val) != detail::array_size(head.items()[c].second)) {
          throw std::invalid_argument("write_csv: rows disagree on array sizes");
        }
        for (std::size_t i = 0; i < detail::array_size(val); ++i) {
          if (!line.empty()) line += ',';
          line += detail::csv_cell(val, i);
        }
      } else {
        if (!line.empty()) line += ',';
        line += detail::csv_cell(val, 0);
      }
    }
    os << line << '\n';
  }
}

namespace detail {

inline void write_json_value(std::ostream& os, const Value& v) {
  switch (v.kind) {
    case Value::Kind::kNumber: os << json_number(v.num); return;
    case Value::Kind::kInteger: os << v.integer; return;
    case Value::Kind::kBoolean: os << (v.flag ? "true" : "false"); return;
    case Value::Kind::kText: os << json_escape(v.text); return;
    case Value::Kind::kNumberArray: {
      os << '[';
      for (std::size_t i = 0; i < v.num_array.size(); ++i) {
        os << (i ? ", " : "") << json_number(v.num_array[i]);
      }
      os << ']';
      return;
    }
    case Value::Kind::kIntegerArray: {
      os << '[';
      for (std::size_t i = 0; i < v.int_array.size(); ++i) {
        os << (i ? ", " : "") << v.int_array[i];
      }
      os << ']';
      return;
    }
  }
}

inline void write_json_object(std::ostream& os, const Record& rec,
                              const std::string& indent) {
  os << "{\n";
  for (std::size_t i = 0; i < rec.items().size(); ++i) {
    const auto& [key, val] = rec.items()[i];
    os << indent << "  " << json_escape(key) << ": ";
    write_json_value(os, val);
    os << (i + 1 < rec.items().size() ? ",\n" : "\n");
  }
  os << indent << "}";
}

}  // namespace detail

/// Writes one record as a flat JSON object.
inline void write_json(std::ostream& os, const Record& rec) {
  detail::write_json_object(os, rec, "");
  os << '\n';
}

/// Writes records as a JSON array of flat objects.
inline void write_json(std::ostream& os, const std::vector<Record>& rows) {
  os << "[\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << "  ";
    detail::write_json_object(os, rows[i], "  ");
    os << (i + 1 < rows.size() ? ",\n" : "\n");
  }
  os << "]\n";
}

}  // namespace ceorate
