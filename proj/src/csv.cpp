#include "mk/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mk/errors.hpp"

namespace mk {

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot open '" + path + "' for reading");

    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.empty()) {
            throw_data(path + ": empty header row");
        }
        if (line.empty()) continue;  // tolerate trailing blank lines

        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t pos = line.find(',', start);
            if (pos == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }

        if (line_no == 1) {
            table.header = std::move(fields);
        } else {
            if (fields.size() != table.header.size()) {
                throw_data(path + ": line " + std::to_string(line_no) + " has " +
                           std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(table.header.size()));
            }
            table.rows.push_back(std::move(fields));
        }
    }
    if (line_no == 0) throw_data(path + ": empty file (missing header row)");
    return table;
}

void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw_io("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string format_int(std::int64_t value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, const std::string& context) {
    double value = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw_data(context + ": '" + std::string(field) + "' is not a number");
    }
    return value;
}

double parse_finite_double(std::string_view field, const std::string& context) {
    double value = parse_double(field, context);
    if (!std::isfinite(value)) {
        throw_data(context + ": non-finite value '" + std::string(field) + "'");
    }
    return value;
}

std::int64_t parse_int(std::string_view field, const std::string& context) {
    std::int64_t value = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw_data(context + ": '" + std::string(field) + "' is not an integer");
    }
    return value;
}

void check_csv_safe(std::string_view id) {
    if (id.empty()) throw_data("empty identifier");
    if (id.find_first_of(",\"\r\n") != std::string_view::npos) {
        throw_data("identifier '" + std::string(id) +
                   "' contains characters not representable in CSV fields");
    }
}

}  // namespace mk
