#include "qcsa/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qcsa/error.hpp"

namespace qcsa {
namespace {

// Splits one record starting at `pos`; advances past its line break.
std::vector<std::string> parse_record(const std::string& text, std::size_t& pos, const std::string& path, int line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  while (pos < text.size()) {
    const char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          cur.push_back('"');
          pos += 2;
          continue;
        }
        quoted = false;
      } else {
        cur.push_back(c);
      }
      ++pos;
      continue;
    }
    if (c == '"' && cur.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
      ++pos;
      fields.push_back(std::move(cur));
      return fields;
    } else {
      cur.push_back(c);
    }
    ++pos;
  }
  if (quoted) throw DataError(path + ":" + std::to_string(line) + ": unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  CsvTable table;
  std::size_t pos = 0;
  int line = 1;
  bool have_header = false;
  while (pos < text.size()) {
    std::vector<std::string> rec = parse_record(text, pos, path, line);
    if (rec.size() == 1 && rec[0].empty()) {
      ++line;
      continue;
    }
    if (!have_header) {
      table.header = std::move(rec);
      have_header = true;
    } else {
      if (rec.size() != table.header.size()) {
        throw DataError(path + ":" + std::to_string(line) + ": expected " + std::to_string(table.header.size()) +
                        " fields, found " + std::to_string(rec.size()));
      }
      table.rows.push_back(std::move(rec));
    }
    ++line;
  }
  if (!have_header) throw EmptyData("'" + path + "' is empty");
  return table;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_field(fields[i]);
  }
  out += "\r\n";
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace qcsa
