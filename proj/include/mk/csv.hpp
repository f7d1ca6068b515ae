#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mk {

// Minimal CSV layer for the pipeline's tabular artifacts.
//
// Format: comma delimiter, `.` decimal point, mandatory header row, UTF-8,
// LF or CRLF line endings. Fields are plain tokens — no quoting; identifiers
// containing commas, quotes, or newlines are rejected at write time.
// Doubles are rendered with std::to_chars (shortest representation that
// round-trips to the identical bit pattern), which makes write -> load -> write
// byte-stable.

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // same arity as header
};

// Throws ErrorKind::io if unreadable, ErrorKind::data for a row whose field
// count differs from the header (message names the 1-based line number).
CsvTable read_csv(const std::string& path);

void write_text_file(const std::string& path, std::string_view content);
std::string read_text_file(const std::string& path);

std::string format_double(double value);
std::string format_int(std::int64_t value);

// Strict scalar parsers; `context` (e.g. "line 17, column x") prefixes the
// error message. parse_finite_double additionally rejects NaN and infinities.
double parse_double(std::string_view field, const std::string& context);
double parse_finite_double(std::string_view field, const std::string& context);
std::int64_t parse_int(std::string_view field, const std::string& context);

// Validates that an identifier is safe to embed in a CSV field.
void check_csv_safe(std::string_view id);

}  // namespace mk
