#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hjbsync::csv {

// %.17g: round-trip exact for doubles.
std::string format_double(double v);

// RFC 4180 quoting when the field contains a comma, quote or line break.
std::string quote(std::string_view field);

std::string join_row(const std::vector<std::string>& fields);

// Splits one RFC 4180 record (no embedded line breaks).
std::vector<std::string> split_row(std::string_view line);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table read_file(const std::filesystem::path& path);

// Writes atomically enough for our purposes: whole file via one stream; throws IoError.
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace hjbsync::csv
