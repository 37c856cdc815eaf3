#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gapprobe {

using CsvRow = std::vector<std::string>;

/// RFC 4180 style reader: comma separated, double-quoted fields may contain
/// commas, quotes ("") and line breaks. LF and CRLF line endings accepted.
/// Blank lines are skipped.
std::vector<CsvRow> parse_csv(std::string_view text);

std::string csv_escape(std::string_view field);
std::string csv_line(const CsvRow& row);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace gapprobe
