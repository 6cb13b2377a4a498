#include "hsn/io.hpp"

#include "hsn/error.hpp"
#include "hsn/haar.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <sstream>

namespace hsn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view text, double &value) {
  if (!text.empty() && text.front() == '+')
    text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

} // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc())
    throw Error(ErrorKind::Io, "could not format number");
  return std::string(buf.data(), ptr);
}

void write_text(const std::filesystem::path &path, std::string_view text) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out)
    throw Error(ErrorKind::Io, "failed writing " + path.string());
}

std::string read_text(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_csv(const std::filesystem::path &path, std::span<const std::string> header,
               const std::vector<std::vector<double>> &rows) {
  std::string text;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0)
      text += ',';
    text += header[i];
  }
  text += '\n';
  for (const auto &row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0)
        text += ',';
      text += format_double(row[i]);
    }
    text += '\n';
  }
  write_text(path, text);
}

CsvTable read_csv(const std::filesystem::path &path) {
  std::istringstream in(read_text(path));
  CsvTable table;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty())
      continue;
    const auto fields = split(line);
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (auto f : fields) {
      double v = 0.0;
      if (!parse_number(f, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (!first)
        throw Error(ErrorKind::Io, path.string() + ":" + std::to_string(line_no) +
                                       ": non-numeric field");
      for (auto f : fields)
        table.header.emplace_back(f);
    } else {
      table.rows.push_back(std::move(row));
    }
    first = false;
  }
  return table;
}

std::vector<double> read_signal_csv(const std::filesystem::path &path) {
  const CsvTable table = read_csv(path);
  std::vector<double> samples;
  samples.reserve(table.rows.size());
  for (const auto &row : table.rows)
    samples.push_back(row.back());
  if (samples.empty())
    throw Error(ErrorKind::Io, path.string() + " contains no samples");
  return samples;
}

const char *to_string(LengthPolicy policy) {
  switch (policy) {
  case LengthPolicy::Reject: return "reject";
  case LengthPolicy::Pad: return "pad";
  case LengthPolicy::Truncate: return "truncate";
  }
  return "unknown";
}

LengthPolicy parse_length_policy(std::string_view name) {
  if (name == "reject") return LengthPolicy::Reject;
  if (name == "pad") return LengthPolicy::Pad;
  if (name == "truncate") return LengthPolicy::Truncate;
  throw Error(ErrorKind::Usage, "unknown length policy '" + std::string(name) + "'");
}

std::vector<double> apply_length_policy(std::vector<double> samples, LengthPolicy policy) {
  const std::size_t n = samples.size();
  if (is_dyadic(n))
    return samples;
  switch (policy) {
  case LengthPolicy::Reject:
    throw Error(ErrorKind::DyadicLength,
                "input has " + std::to_string(n) +
                    " samples, not a power of two (use --pad or --truncate)");
  case LengthPolicy::Pad:
    samples.resize(std::max<std::size_t>(2, std::bit_ceil(n)), 0.0);
    return samples;
  case LengthPolicy::Truncate:
    if (n < 2)
      throw Error(ErrorKind::DyadicLength, "input is too short to truncate to a dyadic length");
    samples.resize(std::bit_floor(n));
    return samples;
  }
  return samples;
}

} // namespace hsn
