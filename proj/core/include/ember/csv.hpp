#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ember::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF.
/// Blank lines are skipped.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::optional<Row> next();

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::vector<Row> read_all(std::istream& in);
/// Throws Error(io) when the file cannot be opened.
std::vector<Row> read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

/// Shortest decimal that round-trips to the same double.
std::string format_number(double v);

/// Strict finite-double parse of the whole field (surrounding blanks allowed).
std::optional<double> parse_number(std::string_view text);

/// Writes via a sibling temp file and rename. Throws Error(io).
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace ember::csv
