#pragma once

#include <string>
#include <vector>

namespace qcsa {

/// Header plus string cells of an RFC-4180 file.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Throws DataError on an unreadable or empty file or on ragged rows.
CsvTable read_csv(const std::string& path);

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_field(const std::string& text);
std::string csv_line(const std::vector<std::string>& fields);

/// Shortest text that reads back to the same double; empty for NaN.
std::string format_number(double v);

}  // namespace qcsa
