#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cdlrec {

// Shortest decimal that parses back to the identical double.
std::string format_double(double v);

// Strict parse of a full token; throws DataError on anything else.
double parse_double(std::string_view text);
std::uint64_t parse_u64(std::string_view text);
std::size_t parse_size(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::string join(std::span<const std::string> parts, char sep);
std::string join_doubles(std::span<const double> values, char sep);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
bool file_exists(const std::string& path);

std::uint64_t checksum_bytes(std::string_view bytes);
std::uint64_t checksum_file(const std::string& path);
std::string to_hex(std::uint64_t v);
std::uint64_t from_hex(std::string_view text);

void log_warn(const std::string& message);

}  // namespace cdlrec
