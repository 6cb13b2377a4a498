#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hsn {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Comma separated, header row, LF line endings.
void write_csv(const std::filesystem::path &path, std::span<const std::string> header,
               const std::vector<std::vector<double>> &rows);
CsvTable read_csv(const std::filesystem::path &path);

// One sample per line taken from the last field; a non-numeric first line is
// treated as a header.
std::vector<double> read_signal_csv(const std::filesystem::path &path);

enum class LengthPolicy { Reject, Pad, Truncate };

const char *to_string(LengthPolicy policy);
LengthPolicy parse_length_policy(std::string_view name);

// Zero-pads to the next power of two or truncates to the previous one.
std::vector<double> apply_length_policy(std::vector<double> samples, LengthPolicy policy);

void write_text(const std::filesystem::path &path, std::string_view text);
std::string read_text(const std::filesystem::path &path);

} // namespace hsn
